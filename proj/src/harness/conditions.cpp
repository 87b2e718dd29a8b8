#include "fairway/harness/conditions.hpp"

#include <algorithm>

#include "fairway/core/error.hpp"
#include "fairway/core/rng.hpp"

namespace fairway {

FrameSequence apply_condition(const FrameSequence& seq, const RobustnessCondition& cond) {
    if (cond.drop.num < 0 || cond.drop.num > 1 || cond.drop.den < 1)
        throw ValidationError("apply_condition: drop rate must be 0 or 1/den");
    FrameSequence out;
    out.id = seq.id;
    out.split = seq.split;
    out.fps = seq.fps;

    if (cond.drop.num == 0) {
        out.frames = seq.frames;
    } else if (cond.random_drop) {
        Rng rng(Rng::mix(cond.drop_seed, Rng::hash_string(seq.id)));
        for (const auto& f : seq.frames) {
            if (rng.next_double() * cond.drop.den < cond.drop.num) continue;
            out.frames.push_back(f);
        }
    } else {
        // 1-based positions divisible by den are removed.
        for (std::size_t i = 0; i < seq.frames.size(); ++i) {
            if ((i + 1) % static_cast<std::size_t>(cond.drop.den) == 0) continue;
            out.frames.push_back(seq.frames[i]);
        }
    }

    if (cond.backward) {
        std::reverse(out.frames.begin(), out.frames.end());
        for (std::size_t i = 0; i < out.frames.size(); ++i)
            out.frames[i].timestamp = static_cast<int>(i);
    }
    out.validate();
    return out;
}

} // namespace fairway
