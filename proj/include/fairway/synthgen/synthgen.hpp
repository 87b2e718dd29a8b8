#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fairway/core/dataset.hpp"

namespace fairway {

/// One sinusoidal component of the shoreline curve. The row offset at
/// column x and frame t is amp_px * sin(2*pi*cycles*x/W + phase + drift*t);
/// cycles == 0 gives a column-independent slow vertical drift.
struct ShorelineHarmonic {
    double amp_px = 0.0;
    double cycles = 0.0;
    double phase = 0.0;
    double drift = 0.0; // radians per frame
};

struct JitterSpec {
    double max_shift_px = 6.0;
    double max_rot_deg = 1.5;
    double temporal_correlation = 0.8; // rho of the AR(1) state
};

/// Procedural waterway scene. Every field is a deterministic function of
/// the spec; two generations from the same spec are byte-identical.
struct SceneSpec {
    std::uint64_t seed = 0;
    int n_frames = 60;
    int height = 224;
    int width = 224;
    double base_row = 112.0; // mean shoreline row
    std::vector<ShorelineHarmonic> harmonics;
    double reflection_strength = 0.8; // [0,1]: mirrored shore copy in the water
    double texture_amplitude = 0.3;   // [0,1]: animated wave noise
    double flicker_amplitude = 0.0;   // [0,1]: per-frame water brightness swing
    double shore_brightness = 0.55;   // lighting level of the shore band
    double water_brightness = 0.4;
    JitterSpec jitter;
    double fps = 10.0;

    void validate() const;
    double shoreline_row(double x, int t) const;
};

/// Rigid per-frame camera pose used by the jitter model; logged so the
/// AR(1) recurrence is reconstructable.
struct JitterSample {
    double dy = 0.0;
    double dx = 0.0;
    double rot_deg = 0.0;
};

struct JitterTrace {
    double rho = 0.0;
    double max_shift_px = 0.0;
    double max_rot_deg = 0.0;
    std::vector<JitterSample> frames;
};

struct GeneratedSequence {
    FrameSequence sequence;
    JitterTrace trace;
};

/// Renders the scene: textured shore band above the shoreline; water
/// below containing the attenuated mirror of the shore, animated wave
/// noise, and a water-wide brightness flicker; finally a temporally
/// correlated rigid jitter applied to image and mask jointly (bilinear
/// warp for the image, analytic shoreline for the mask).
GeneratedSequence generate_sequence(const SceneSpec& spec, const std::string& id, Split split);

void write_jitter_trace(const std::filesystem::path& path, const JitterTrace& trace);
JitterTrace read_jitter_trace(const std::filesystem::path& path);

/// Emits the 10-sequence benchmark over a lighting x jitter x shoreline
/// condition grid, splits 6:2:2, and writes dataset.json plus one
/// jitter_trace.json per sequence. Returns the dataset.json path.
std::filesystem::path generate_benchmark(std::uint64_t seed, const std::filesystem::path& out_dir,
                                         int frames_per_sequence = 60);

/// The benchmark's scene list (exposed for tests).
std::vector<std::pair<std::string, SceneSpec>> benchmark_scenes(std::uint64_t seed,
                                                                int frames_per_sequence);

} // namespace fairway
