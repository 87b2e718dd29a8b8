#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairway/core/config.hpp"
#include "fairway/core/rng.hpp"

namespace fairway {

/// Previous-frame positions chosen for fusion, most recent first.
struct FramePick {
    std::vector<int> indices;
    PickMode mode = PickMode::random_k_of_m;
};

/// Draws k distinct previous positions from {current-1, ..., current-pool}.
/// random_k_of_m samples uniformly over the k-subsets; fixed_last_k takes
/// the most recent k. Throws when the frame has fewer than `pool`
/// predecessors (such frames are context only).
FramePick pick_frames(int current_index, int pool, int k, PickMode mode, Rng& rng);

/// Evaluation-time picker: the RNG is re-seeded from
/// (global_seed, sequence_id, current_index) so repeated runs agree.
FramePick pick_frames_eval(int current_index, int pool, int k, PickMode mode,
                           std::uint64_t global_seed, const std::string& sequence_id);

} // namespace fairway
