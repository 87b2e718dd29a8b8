#pragma once

#include "fairway/core/dataset.hpp"
#include "fairway/eval/metrics.hpp"

namespace fairway {

/// Robustness transform: deterministic frame drops (every den-th frame
/// for rate 1/den) and/or reversed playback. Drops keep the original
/// timestamps (so frame intervals widen across the gaps); backward
/// reassigns timestamps 0..n-1. Composition order: drop, then reverse.
struct RobustnessCondition {
    bool backward = false;
    DropRate drop;              // num in {0, 1}
    bool random_drop = false;   // Bernoulli(num/den) drops instead of periodic
    std::uint64_t drop_seed = 0;
};

FrameSequence apply_condition(const FrameSequence& seq, const RobustnessCondition& cond);

} // namespace fairway
