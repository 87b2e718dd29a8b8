#include "fairway/synthgen/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "fairway/core/error.hpp"
#include "fairway/core/rng.hpp"

namespace fairway {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Lattice value noise: smooth, unbounded-domain, pure function of the
// coordinates and seed.
double lattice_hash(std::uint64_t seed, std::int64_t ix, std::int64_t iy) {
    std::uint64_t h = Rng::mix(seed, static_cast<std::uint64_t>(ix) * 0x9e3779b97f4a7c15ull ^
                                         static_cast<std::uint64_t>(iy));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise2(std::uint64_t seed, double x, double y) {
    const double fx = std::floor(x), fy = std::floor(y);
    const std::int64_t ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy);
    const double tx = smoothstep(x - fx), ty = smoothstep(y - fy);
    const double v00 = lattice_hash(seed, ix, iy);
    const double v10 = lattice_hash(seed, ix + 1, iy);
    const double v01 = lattice_hash(seed, ix, iy + 1);
    const double v11 = lattice_hash(seed, ix + 1, iy + 1);
    const double a = v00 + (v10 - v00) * tx;
    const double b = v01 + (v11 - v01) * tx;
    return a + (b - a) * ty;
}

double value_noise3(std::uint64_t seed, double x, double y, double t) {
    const double ft = std::floor(t);
    const std::int64_t it = static_cast<std::int64_t>(ft);
    const double tt = smoothstep(t - ft);
    const double a = value_noise2(Rng::mix(seed, static_cast<std::uint64_t>(it)), x, y);
    const double b = value_noise2(Rng::mix(seed, static_cast<std::uint64_t>(it + 1)), x, y);
    return a + (b - a) * tt;
}

struct Rgb {
    double r, g, b;
};

// Shore band: two octaves of value noise with an earthy tint and a mild
// vertical gradient. Defined for any real coordinate so jitter warping
// never runs out of content.
Rgb shore_color(const SceneSpec& spec, double y, double x) {
    const std::uint64_t s = Rng::mix(spec.seed, 0x5702eull);
    const double n1 = value_noise2(s, x * 0.045, y * 0.045);
    const double n2 = value_noise2(Rng::mix(s, 1), x * 0.16, y * 0.16);
    const double hue = value_noise2(Rng::mix(s, 2), x * 0.02, y * 0.02);
    const double grad = 0.02 * (1.0 - std::clamp(y / spec.height, 0.0, 1.0));
    const double b = spec.shore_brightness + grad + 0.30 * (n1 - 0.5) + 0.12 * (n2 - 0.5);
    return {b * (0.95 + 0.12 * hue), b * (0.92 + 0.08 * hue), b * (0.85 + 0.05 * (1.0 - hue))};
}

double water_flicker(const SceneSpec& spec, int t) {
    if (spec.flicker_amplitude <= 0.0) return 1.0;
    const double n = value_noise2(Rng::mix(spec.seed, 0xf11cull), t * 0.61, 0.5);
    return 1.0 + spec.flicker_amplitude * (2.0 * n - 1.0);
}

// Pre-jitter scene color at real coordinates.
Rgb scene_color(const SceneSpec& spec, double y, double x, int t) {
    const double row = spec.shoreline_row(x, t);
    if (y < row) return shore_color(spec, y, x);

    // Waves are rendered as reflection shimmer: the mirrored shore content
    // is sampled through a smooth displacement field that wobbles frame to
    // frame. A single frame therefore shows shore-like statistics below
    // the line; only the temporal behaviour separates water from shore.
    double ry = 0.0, rx = 0.0;
    if (spec.texture_amplitude > 0.0) {
        // Tapered to zero at the waterline: the reflection stays glued to
        // the shore there, like the real thing, so the line itself carries
        // no per-frame discontinuity.
        const double amp_px =
            spec.texture_amplitude * 10.0 * std::clamp((y - row) / 4.0, 0.0, 1.0);
        const std::uint64_t ws = Rng::mix(spec.seed, 0x3a7e5ull);
        ry = amp_px * 2.0 * (value_noise3(ws, x * 0.035, y * 0.035, t * 0.65) - 0.5);
        rx = amp_px * 2.0 * (value_noise3(Rng::mix(ws, 1), x * 0.035, y * 0.035, t * 0.65) - 0.5);
    }
    const Rgb mirror = shore_color(spec, 2.0 * row - y + ry, x + rx);
    const Rgb base{spec.water_brightness * 0.97, spec.water_brightness * 1.0,
                   spec.water_brightness * 1.03};
    const double rs = spec.reflection_strength;
    Rgb c{rs * mirror.r + (1.0 - rs) * base.r, rs * mirror.g + (1.0 - rs) * base.g,
          rs * mirror.b + (1.0 - rs) * base.b};
    if (spec.texture_amplitude > 0.0) {
        // Frame-decorrelated surface noise: per frame it swamps the faint
        // water tint, so only temporal pooling recovers the cue.
        const double sp = value_noise3(Rng::mix(spec.seed, 0x3a7e6ull), x * 0.045, y * 0.055,
                                       t * 0.9);
        const double sp2 = value_noise3(Rng::mix(spec.seed, 0x3a7e8ull), x * 0.11, y * 0.13,
                                        t * 1.1);
        const double glint = spec.texture_amplitude * (0.18 * (sp - 0.5) + 0.1 * (sp2 - 0.5)) *
                             std::clamp((y - row) / 4.0, 0.0, 1.0);
        c.r += glint;
        c.g += glint;
        c.b += glint * 0.95;
    }
    const double flick = water_flicker(spec, t);
    return {c.r * flick, c.g * flick, c.b * flick};
}

struct Pose {
    double dy, dx, rot_rad;
};

// Inverse rigid transform about the image center.
void inverse_pose(const Pose& p, double h, double w, double y, double x, double& sy, double& sx) {
    const double cy = 0.5 * (h - 1.0), cx = 0.5 * (w - 1.0);
    const double ty = y - cy - p.dy;
    const double tx = x - cx - p.dx;
    const double c = std::cos(p.rot_rad), s = std::sin(p.rot_rad);
    sy = c * ty + s * tx + cy;  // R^T for R = [[c,-s],[s,c]]
    sx = -s * ty + c * tx + cx;
}

} // namespace

void SceneSpec::validate() const {
    if (n_frames < 1) throw ValidationError("scene: n_frames must be >= 1");
    if (height < 16 || width < 16) throw ValidationError("scene: resolution too small");
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(reflection_strength) || !in01(texture_amplitude) || !in01(flicker_amplitude))
        throw ValidationError("scene: amplitudes must lie in [0,1]");
    if (jitter.temporal_correlation < 0.0 || jitter.temporal_correlation >= 1.0)
        throw ValidationError("scene: temporal_correlation must lie in [0,1)");
    if (jitter.max_shift_px < 0.0 || jitter.max_rot_deg < 0.0)
        throw ValidationError("scene: jitter amplitudes must be non-negative");
}

double SceneSpec::shoreline_row(double x, int t) const {
    double row = base_row;
    for (const auto& hmc : harmonics)
        row += hmc.amp_px * std::sin(2.0 * kPi * hmc.cycles * x / width + hmc.phase + hmc.drift * t);
    return row;
}

GeneratedSequence generate_sequence(const SceneSpec& spec, const std::string& id, Split split) {
    spec.validate();
    const int h = spec.height, w = spec.width;

    // Jitter margin: rigid motion must keep the shoreline inside the frame.
    const double rot_max = spec.jitter.max_rot_deg * kPi / 180.0;
    const double margin =
        spec.jitter.max_shift_px + 0.5 * std::hypot(h, w) * std::sin(rot_max) + 1.0;

    GeneratedSequence out;
    out.sequence.id = id;
    out.sequence.split = split;
    out.sequence.fps = spec.fps;
    out.trace.rho = spec.jitter.temporal_correlation;
    out.trace.max_shift_px = spec.jitter.max_shift_px;
    out.trace.max_rot_deg = spec.jitter.max_rot_deg;

    Rng jitter_rng(Rng::mix(spec.seed, 0x1177e6ull));
    const double rho = spec.jitter.temporal_correlation;
    Pose state{0.0, 0.0, 0.0};
    double rot_deg_state = 0.0; // AR(1) state kept in degrees, as logged

    const int pad = static_cast<int>(std::ceil(margin)) + 1;
    Tensor canvas({h + 2 * pad, w + 2 * pad, 3});

    for (int t = 0; t < spec.n_frames; ++t) {
        // Bounded AR(1): innovations are uniform in +-(1-rho)*amp, so the
        // state never leaves +-amp.
        auto step = [&](double prev, double amp) {
            const double eps = jitter_rng.uniform(-(1.0 - rho) * amp, (1.0 - rho) * amp);
            return rho * prev + eps;
        };
        state.dy = step(state.dy, spec.jitter.max_shift_px);
        state.dx = step(state.dx, spec.jitter.max_shift_px);
        rot_deg_state = step(rot_deg_state, spec.jitter.max_rot_deg);
        state.rot_rad = rot_deg_state * kPi / 180.0;
        out.trace.frames.push_back({state.dy, state.dx, rot_deg_state});

        for (int x = -pad; x < w + pad; x += std::max(1, w / 8)) {
            const double row = spec.shoreline_row(x, t);
            if (row < margin || row > h - 1 - margin)
                throw ValidationError("scene '" + id + "': shoreline leaves jitter margin at frame " +
                                      std::to_string(t));
        }

        // Render the un-jittered scene on a padded canvas, then warp.
        for (int y = 0; y < h + 2 * pad; ++y)
            for (int x = 0; x < w + 2 * pad; ++x) {
                const Rgb c = scene_color(spec, y - pad, x - pad, t);
                canvas.at3(y, x, 0) = c.r;
                canvas.at3(y, x, 1) = c.g;
                canvas.at3(y, x, 2) = c.b;
            }

        Frame frame;
        frame.timestamp = t;
        frame.image = ImageU8(h, w, 3);
        frame.mask = MaskU8(h, w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double sy, sx;
                inverse_pose(state, h, w, y, x, sy, sx);
                // Bilinear image warp on the padded canvas.
                const double py = sy + pad, px = sx + pad;
                const int y0 = std::clamp(static_cast<int>(std::floor(py)), 0, h + 2 * pad - 2);
                const int x0 = std::clamp(static_cast<int>(std::floor(px)), 0, w + 2 * pad - 2);
                const double wy = std::clamp(py - y0, 0.0, 1.0);
                const double wx = std::clamp(px - x0, 0.0, 1.0);
                for (int ch = 0; ch < 3; ++ch) {
                    const double top = canvas.at3(y0, x0, ch) * (1 - wx) +
                                       canvas.at3(y0, x0 + 1, ch) * wx;
                    const double bot = canvas.at3(y0 + 1, x0, ch) * (1 - wx) +
                                       canvas.at3(y0 + 1, x0 + 1, ch) * wx;
                    const double v = std::clamp(top * (1 - wy) + bot * wy, 0.0, 1.0);
                    frame.image.at(y, x, ch) = static_cast<std::uint8_t>(std::lround(v * 255.0));
                }
                // Analytic mask: water wherever the source point lies at or
                // below the shoreline curve.
                frame.mask->at(y, x) = (sy >= spec.shoreline_row(sx, t)) ? 1 : 0;
            }
        out.sequence.frames.push_back(std::move(frame));
    }
    out.sequence.validate();
    return out;
}

void write_jitter_trace(const std::filesystem::path& path, const JitterTrace& trace) {
    json j;
    j["rho"] = trace.rho;
    j["max_shift_px"] = trace.max_shift_px;
    j["max_rot_deg"] = trace.max_rot_deg;
    json frames = json::array();
    for (const auto& f : trace.frames)
        frames.push_back({{"dy", f.dy}, {"dx", f.dx}, {"rot_deg", f.rot_deg}});
    j["frames"] = frames;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write jitter trace: " + path.string());
    out << j.dump(2) << "\n";
}

JitterTrace read_jitter_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open jitter trace: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw FormatError("jitter trace is not valid JSON: " + std::string(e.what()));
    }
    JitterTrace trace;
    trace.rho = j.at("rho").get<double>();
    trace.max_shift_px = j.at("max_shift_px").get<double>();
    trace.max_rot_deg = j.at("max_rot_deg").get<double>();
    for (const auto& f : j.at("frames"))
        trace.frames.push_back(
            {f.at("dy").get<double>(), f.at("dx").get<double>(), f.at("rot_deg").get<double>()});
    return trace;
}

std::vector<std::pair<std::string, SceneSpec>> benchmark_scenes(std::uint64_t seed,
                                                                int frames_per_sequence) {
    struct Lighting {
        const char* tag;
        double shore_b, water_b, reflection, flicker;
    };
    const Lighting day{"day", 0.55, 0.44, 0.88, 0.10};
    const Lighting dim{"dim", 0.34, 0.25, 0.86, 0.12};
    const Lighting flk{"flicker", 0.52, 0.41, 0.88, 0.18};

    struct JitterLevel {
        const char* tag;
        double shift, rot;
    };
    const JitterLevel jlo{"jlo", 1.5, 0.4};
    const JitterLevel jhi{"jhi", 8.0, 2.2};

    // 10 of the 12 lighting x jitter x shoreline combinations, ordered so
    // every lighting condition is represented in the training split of the
    // default benchmark.
    struct Combo {
        Lighting light;
        JitterLevel jit;
        bool curved;
    };
    const std::vector<Combo> combos = {
        {day, jhi, false}, {dim, jhi, true},  {flk, jlo, false}, {day, jlo, true},
        {day, jlo, false}, {flk, jhi, false}, {dim, jlo, false}, {flk, jlo, true},
        {day, jhi, true},  {flk, jhi, true},
    };

    std::vector<std::pair<std::string, SceneSpec>> scenes;
    for (std::size_t i = 0; i < combos.size(); ++i) {
        const auto& cb = combos[i];
        SceneSpec spec;
        spec.seed = Rng::mix(seed, static_cast<std::uint64_t>(i));
        spec.n_frames = frames_per_sequence;
        spec.height = 224;
        spec.width = 224;
        spec.shore_brightness = cb.light.shore_b;
        spec.water_brightness = cb.light.water_b;
        spec.reflection_strength = cb.light.reflection;
        spec.flicker_amplitude = cb.light.flicker;
        spec.texture_amplitude = 0.8;
        spec.jitter.max_shift_px = cb.jit.shift;
        spec.jitter.max_rot_deg = cb.jit.rot;
        spec.jitter.temporal_correlation = 0.8;

        Rng scene_rng(Rng::mix(spec.seed, 0x5ce9eull));
        // The shoreline position carries little prior: it varies across
        // sequences and drifts within them, so the line has to be found
        // from evidence, not memorized.
        spec.base_row = spec.height * scene_rng.uniform(0.40, 0.56);
        spec.harmonics.push_back(
            {scene_rng.uniform(7.0, 10.0), 0.0, scene_rng.uniform(0.0, 2.0 * kPi),
             scene_rng.uniform(0.04, 0.07)});
        if (cb.curved) {
            spec.harmonics.push_back(
                {scene_rng.uniform(8.0, 13.0), 1.0, scene_rng.uniform(0.0, 2.0 * kPi), 0.015});
            spec.harmonics.push_back(
                {scene_rng.uniform(4.0, 7.0), 2.0, scene_rng.uniform(0.0, 2.0 * kPi), -0.02});
        }

        char buf[96];
        std::snprintf(buf, sizeof(buf), "seq%02zu_%s_%s_%s", i, cb.light.tag, cb.jit.tag,
                      cb.curved ? "curved" : "straight");
        scenes.emplace_back(buf, spec);
    }
    return scenes;
}

std::filesystem::path generate_benchmark(std::uint64_t seed, const std::filesystem::path& out_dir,
                                         int frames_per_sequence) {
    auto scenes = benchmark_scenes(seed, frames_per_sequence);
    std::vector<FrameSequence> sequences;
    std::vector<JitterTrace> traces;
    for (const auto& [id, spec] : scenes) {
        GeneratedSequence g = generate_sequence(spec, id, Split::train);
        sequences.push_back(std::move(g.sequence));
        traces.push_back(std::move(g.trace));
    }
    split_dataset(sequences, SplitRatios{0.6, 0.2, 0.2}, seed);

    std::filesystem::create_directories(out_dir);
    std::vector<std::string> dirs;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        const auto dir = out_dir / sequences[i].id;
        save_sequence(sequences[i], dir);
        write_jitter_trace(dir / "jitter_trace.json", traces[i]);
        dirs.push_back(sequences[i].id);
    }
    const auto index_path = out_dir / "dataset.json";
    write_dataset_index(index_path, dirs);
    return index_path;
}

} // namespace fairway
