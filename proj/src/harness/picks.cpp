#include "fairway/harness/picks.hpp"

#include <algorithm>

#include "fairway/core/error.hpp"

namespace fairway {

FramePick pick_frames(int current_index, int pool, int k, PickMode mode, Rng& rng) {
    if (k <= 0 || pool <= 0) throw ValidationError("pick_frames: pool and k must be positive");
    if (k > pool) throw ValidationError("pick_frames: k must not exceed pool");
    if (current_index < pool)
        throw ValidationError("pick_frames: frame " + std::to_string(current_index) +
                              " has fewer than " + std::to_string(pool) +
                              " predecessors (context only)");
    FramePick pick;
    pick.mode = mode;
    if (mode == PickMode::fixed_last_k || k == pool) {
        for (int i = 1; i <= k; ++i) pick.indices.push_back(current_index - i);
        if (k == pool && mode == PickMode::random_k_of_m) {
            // Pool exhausted: the draw is the whole window either way.
            std::sort(pick.indices.rbegin(), pick.indices.rend());
        }
        return pick;
    }
    // Partial Fisher-Yates over the pool window.
    std::vector<int> window(static_cast<std::size_t>(pool));
    for (int i = 0; i < pool; ++i) window[static_cast<std::size_t>(i)] = current_index - 1 - i;
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(pool - i)));
        std::swap(window[static_cast<std::size_t>(i)], window[static_cast<std::size_t>(j)]);
    }
    pick.indices.assign(window.begin(), window.begin() + k);
    std::sort(pick.indices.rbegin(), pick.indices.rend()); // most recent first
    return pick;
}

FramePick pick_frames_eval(int current_index, int pool, int k, PickMode mode,
                           std::uint64_t global_seed, const std::string& sequence_id) {
    Rng rng(Rng::mix(Rng::mix(global_seed, Rng::hash_string(sequence_id)),
                     static_cast<std::uint64_t>(current_index)));
    return pick_frames(current_index, pool, k, mode, rng);
}

} // namespace fairway
