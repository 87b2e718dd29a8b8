#include "fairway/core/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "fairway/core/error.hpp"
#include "fairway/core/png_io.hpp"
#include "fairway/core/rng.hpp"

namespace fairway {

using nlohmann::json;

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "train";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw FormatError("unknown split: " + s);
}

void Frame::validate(const std::string& context) const {
    if (timestamp < 0) throw ValidationError(context + ": timestamp must be >= 0");
    if (image.channels != 3) throw ValidationError(context + ": image must have 3 channels");
    if (mask) {
        if (mask->height != image.height || mask->width != image.width) {
            std::ostringstream os;
            os << context << ": mask resolution " << mask->height << "x" << mask->width
               << " does not match image " << image.height << "x" << image.width;
            throw ValidationError(os.str());
        }
        validate_mask_binary(*mask, context.c_str());
    }
}

void FrameSequence::validate() const {
    for (std::size_t i = 0; i < frames.size(); ++i) {
        std::ostringstream ctx;
        ctx << "sequence '" << id << "' frame " << i;
        frames[i].validate(ctx.str());
        if (i > 0) {
            if (frames[i].timestamp <= frames[i - 1].timestamp)
                throw ValidationError(ctx.str() + ": timestamps must be strictly increasing");
            if (frames[i].image.height != frames[0].image.height ||
                frames[i].image.width != frames[0].image.width)
                throw ValidationError(ctx.str() + ": all frames must share one resolution");
        }
    }
}

namespace {

std::string frame_file_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06d.png", index);
    return buf;
}

json read_json_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw FormatError(std::string("missing ") + what + ": " + path.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::parse_error& e) {
        throw FormatError(std::string(what) + " is not valid JSON: " + e.what());
    }
}

} // namespace

FrameSequence load_sequence(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    const json manifest = read_json_file(manifest_path, "manifest");

    FrameSequence seq;
    try {
        seq.id = manifest.at("id").get<std::string>();
        seq.split = split_from_string(manifest.at("split").get<std::string>());
        seq.fps = manifest.value("fps", 10.0);
        const int frame_count = manifest.at("frame_count").get<int>();
        const int res_h = manifest.at("resolution").at(0).get<int>();
        const int res_w = manifest.at("resolution").at(1).get<int>();

        std::vector<int> timestamps;
        if (manifest.contains("timestamps")) {
            timestamps = manifest.at("timestamps").get<std::vector<int>>();
            if (static_cast<int>(timestamps.size()) != frame_count)
                throw FormatError("manifest timestamps length does not match frame_count");
        } else {
            timestamps.resize(static_cast<std::size_t>(frame_count));
            std::iota(timestamps.begin(), timestamps.end(), 0);
        }

        const bool has_masks = std::filesystem::exists(dir / "masks");
        seq.frames.reserve(static_cast<std::size_t>(frame_count));
        for (int i = 0; i < frame_count; ++i) {
            Frame frame;
            frame.timestamp = timestamps[static_cast<std::size_t>(i)];
            frame.image = read_png(dir / "frames" / frame_file_name(i));
            if (frame.image.channels != 3)
                throw ValidationError("frame " + std::to_string(i) + " is not RGB");
            if (frame.image.height != res_h || frame.image.width != res_w) {
                std::ostringstream os;
                os << "frame " << i << " resolution " << frame.image.height << "x"
                   << frame.image.width << " does not match manifest " << res_h << "x" << res_w;
                throw ValidationError(os.str());
            }
            if (has_masks) {
                const auto mask_path = dir / "masks" / frame_file_name(i);
                if (std::filesystem::exists(mask_path)) frame.mask = read_mask_png(mask_path);
            }
            seq.frames.push_back(std::move(frame));
        }
    } catch (const json::exception& e) {
        throw FormatError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }

    std::stable_sort(seq.frames.begin(), seq.frames.end(),
                     [](const Frame& a, const Frame& b) { return a.timestamp < b.timestamp; });
    seq.validate();
    return seq;
}

void save_sequence(const FrameSequence& seq, const std::filesystem::path& dir) {
    seq.validate();
    std::filesystem::create_directories(dir / "frames");
    const bool any_mask =
        std::any_of(seq.frames.begin(), seq.frames.end(), [](const Frame& f) { return f.mask.has_value(); });
    if (any_mask) std::filesystem::create_directories(dir / "masks");

    json manifest;
    manifest["id"] = seq.id;
    manifest["split"] = to_string(seq.split);
    manifest["fps"] = seq.fps;
    manifest["frame_count"] = static_cast<int>(seq.frames.size());
    manifest["resolution"] = {seq.height(), seq.width()};
    {
        std::vector<int> ts;
        ts.reserve(seq.frames.size());
        for (const auto& f : seq.frames) ts.push_back(f.timestamp);
        manifest["timestamps"] = ts;
    }
    std::ofstream out(dir / "manifest.json");
    if (!out) throw IoError("cannot write manifest in " + dir.string());
    out << manifest.dump(2) << "\n";

    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        const auto name = frame_file_name(static_cast<int>(i));
        write_png_rgb8(dir / "frames" / name, seq.frames[i].image);
        if (seq.frames[i].mask) write_mask_png(dir / "masks" / name, *seq.frames[i].mask);
    }
}

void split_dataset(std::vector<FrameSequence>& sequences, const SplitRatios& ratios,
                   std::uint64_t seed) {
    const double r[3] = {ratios.train, ratios.val, ratios.test};
    double total = 0.0;
    int nonzero = 0;
    for (double v : r) {
        if (v < 0.0) throw ConfigError("split ratios must be non-negative");
        total += v;
        if (v > 0.0) ++nonzero;
    }
    if (total <= 0.0) throw ConfigError("split ratios must sum to a positive value");
    const int n = static_cast<int>(sequences.size());
    if (n < nonzero)
        throw ConfigError("fewer sequences than nonzero splits");

    // Largest-remainder quotas, then at least one per nonzero split.
    int counts[3];
    double rem[3];
    int assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double q = n * r[i] / total;
        counts[i] = static_cast<int>(q);
        rem[i] = q - counts[i];
        assigned += counts[i];
    }
    while (assigned < n) {
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (rem[i] > rem[best]) best = i;
        ++counts[best];
        rem[best] = -1.0;
        ++assigned;
    }
    for (int i = 0; i < 3; ++i) {
        if (r[i] > 0.0 && counts[i] == 0) {
            int donor = 0;
            for (int j = 1; j < 3; ++j)
                if (counts[j] > counts[donor]) donor = j;
            --counts[donor];
            ++counts[i];
        }
    }

    // Deterministic Fisher-Yates shuffle of the assignment order.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(Rng::mix(seed, 0x517cc1b727220a95ull));
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    int cursor = 0;
    const Split split_of[3] = {Split::train, Split::val, Split::test};
    for (int s = 0; s < 3; ++s) {
        for (int k = 0; k < counts[s]; ++k) {
            sequences[static_cast<std::size_t>(order[static_cast<std::size_t>(cursor++)])].split =
                split_of[s];
        }
    }
}

void write_dataset_index(const std::filesystem::path& dataset_json,
                         const std::vector<std::string>& sequence_dirs) {
    json j;
    j["sequences"] = sequence_dirs;
    std::ofstream out(dataset_json);
    if (!out) throw IoError("cannot write dataset index: " + dataset_json.string());
    out << j.dump(2) << "\n";
}

std::vector<std::string> read_dataset_index(const std::filesystem::path& dataset_json) {
    const json j = read_json_file(dataset_json, "dataset index");
    try {
        return j.at("sequences").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw FormatError("malformed dataset index: " + std::string(e.what()));
    }
}

std::vector<FrameSequence> load_dataset(const std::filesystem::path& dataset_json) {
    const auto base = dataset_json.parent_path();
    std::vector<FrameSequence> out;
    for (const auto& rel : read_dataset_index(dataset_json))
        out.push_back(load_sequence(base / rel));
    return out;
}

} // namespace fairway
