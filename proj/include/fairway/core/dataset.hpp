#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairway/core/image.hpp"

namespace fairway {

enum class Split { train, val, test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

/// One annotated video frame. The mask is absent for unlabeled inference
/// input. Image and mask always share the same resolution.
struct Frame {
    ImageU8 image;                // 8-bit RGB, values scale to [0,1]
    int timestamp = 0;            // frame index, strictly increasing within a sequence
    std::optional<MaskU8> mask;   // 1 = water / free space

    void validate(const std::string& context) const;
};

/// Ordered annotated frames; the unit of training and evaluation.
struct FrameSequence {
    std::string id;
    Split split = Split::train;
    double fps = 10.0;
    std::vector<Frame> frames;

    int height() const { return frames.empty() ? 0 : frames.front().image.height; }
    int width() const { return frames.empty() ? 0 : frames.front().image.width; }
    void validate() const;
};

/// Reads `manifest.json` + `frames/%06d.png` (+ optional `masks/%06d.png`).
/// Frames come back sorted by timestamp. Throws FormatError when the
/// manifest is missing or malformed, ValidationError when a frame breaks
/// an invariant (the message names the frame).
FrameSequence load_sequence(const std::filesystem::path& dir);

/// Inverse of load_sequence; writing then reading reproduces pixel data
/// bit-exactly.
void save_sequence(const FrameSequence& seq, const std::filesystem::path& dir);

struct SplitRatios {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;
};

/// Assigns each sequence to exactly one split, deterministically in the
/// seed, with proportions matching the ratios to within one sequence.
void split_dataset(std::vector<FrameSequence>& sequences, const SplitRatios& ratios,
                   std::uint64_t seed);

/// dataset.json lists sequence directories relative to its own location.
void write_dataset_index(const std::filesystem::path& dataset_json,
                         const std::vector<std::string>& sequence_dirs);
std::vector<std::string> read_dataset_index(const std::filesystem::path& dataset_json);

/// Loads every sequence listed by a dataset.json.
std::vector<FrameSequence> load_dataset(const std::filesystem::path& dataset_json);

} // namespace fairway
