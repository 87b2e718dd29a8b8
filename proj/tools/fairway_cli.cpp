// fairway: temporal-fusion water segmentation toolkit.
//
// Subcommands: generate, train, eval, robustness, ablate, report.
// Exit codes: 0 success, 2 validation/format/config error, 3 numeric
// failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairway/core/error.hpp"
#include "fairway/core/png_io.hpp"
#include "fairway/eval/metrics.hpp"
#include "fairway/harness/plot.hpp"
#include "fairway/harness/train.hpp"
#include "fairway/model/fusion.hpp"
#include "fairway/synthgen/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonModelFlags {
    std::optional<std::string> config_path;
    bool tiny = false;
    bool image_only = false;
    bool no_tpe = false, no_man = false, no_dcn = false, no_contour_loss = false;
    std::optional<int> iterations;
    std::optional<double> learning_rate;
    std::optional<int> batch_size;
    std::optional<double> momentum;
    std::optional<double> weight_decay;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> pick_mode;
    std::optional<std::string> lr_schedule;
};

void add_model_flags(CLI::App* cmd, CommonModelFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file (model + train sections)");
    cmd->add_flag("--tiny", f.tiny, "Use the desk-scale tiny model preset");
    cmd->add_flag("--image-only", f.image_only, "Image-only mode: no previous frames fused");
    cmd->add_flag("--no-tpe", f.no_tpe, "Disable the temporal position encoder");
    cmd->add_flag("--no-man", f.no_man, "Disable multi-head cross attention");
    cmd->add_flag("--no-dcn", f.no_dcn, "Disable deformable convolution");
    cmd->add_flag("--no-contour-loss", f.no_contour_loss, "Disable the contour loss term");
    cmd->add_option("--iterations", f.iterations, "Training iterations");
    cmd->add_option("--lr", f.learning_rate, "Learning rate");
    cmd->add_option("--batch-size", f.batch_size, "Batch size");
    cmd->add_option("--momentum", f.momentum, "SGD momentum");
    cmd->add_option("--weight-decay", f.weight_decay, "L2 weight decay");
    cmd->add_option("--seed", f.seed, "Master seed (init, data order, picks)");
    cmd->add_option("--pick-mode", f.pick_mode, "random_k_of_m | fixed_last_k");
    cmd->add_option("--lr-schedule", f.lr_schedule, "constant | linear_decay");
}

fairway::RunConfig resolve_config(const CommonModelFlags& f) {
    fairway::RunConfig cfg;
    if (f.config_path) cfg = fairway::load_run_config(*f.config_path);
    if (f.tiny) {
        fairway::ModelConfig tiny = fairway::ModelConfig::tiny_preset();
        if (f.config_path) {
            // CLI preset only swaps the architecture block, keeping any
            // explicit ablation switches from the file.
            tiny.use_tpe = cfg.model.use_tpe;
            tiny.use_man = cfg.model.use_man;
            tiny.use_dcn = cfg.model.use_dcn;
            tiny.use_contour_loss = cfg.model.use_contour_loss;
            tiny.image_only = cfg.model.image_only;
        }
        cfg.model = tiny;
    }
    if (f.image_only) cfg.model.image_only = true;
    if (f.no_tpe) cfg.model.use_tpe = false;
    if (f.no_man) cfg.model.use_man = false;
    if (f.no_dcn) cfg.model.use_dcn = false;
    if (f.no_contour_loss) cfg.model.use_contour_loss = false;
    if (f.iterations) cfg.train.iterations = *f.iterations;
    if (f.learning_rate) cfg.train.learning_rate = *f.learning_rate;
    if (f.batch_size) cfg.train.batch_size = *f.batch_size;
    if (f.momentum) cfg.train.momentum = *f.momentum;
    if (f.weight_decay) cfg.train.weight_decay = *f.weight_decay;
    if (f.seed) cfg.train.seed = *f.seed;
    if (f.pick_mode) cfg.train.pick_mode = fairway::pick_mode_from_string(*f.pick_mode);
    if (f.lr_schedule) cfg.train.lr_schedule = fairway::lr_schedule_from_string(*f.lr_schedule);
    cfg.model.validate();
    cfg.train.validate();
    return cfg;
}

int run_generate(std::uint64_t seed, const std::string& out, int frames) {
    const auto index = fairway::generate_benchmark(seed, out, frames);
    std::cout << "wrote " << index.string() << "\n";
    return 0;
}

int run_train(const CommonModelFlags& flags, const std::string& data, const std::string& out,
              const std::optional<std::string>& log_path) {
    const fairway::RunConfig cfg = resolve_config(flags);
    const auto dataset = fairway::load_dataset(data);
    std::ofstream log_file;
    std::ostream* log_stream = nullptr;
    if (log_path) {
        log_file.open(*log_path);
        if (!log_file) throw fairway::IoError("cannot open log file: " + *log_path);
        log_stream = &log_file;
    }
    fairway::TrainResult result = fairway::train(cfg.model, cfg.train, dataset, log_stream);
    fairway::save_checkpoint(out, cfg.model, result.params);
    std::cout << "checkpoint written to " << out << " (" << result.params.scalar_count()
              << " parameters)\n";
    if (!result.log.empty()) {
        const auto& last = result.log.back();
        std::cout << "final loss total=" << last.total << " ce=" << last.l_ce
                  << " dice=" << last.l_dice << " con=" << last.l_con << "\n";
    }
    return 0;
}

fairway::EvalOptions make_eval_options(const std::optional<int>& band_px, std::uint64_t eval_seed,
                                        bool zone_below_only = false) {
    fairway::EvalOptions opts;
    opts.band_px = band_px;
    opts.eval_seed = eval_seed;
    opts.zone_below_only = zone_below_only;
    return opts;
}

int run_eval(const std::string& ckpt_path, const std::string& data,
             const std::optional<int>& band_px, const std::optional<std::string>& out,
             const std::optional<std::string>& csv, const std::string& split_name,
             std::uint64_t eval_seed, bool zone_below_only) {
    fairway::Checkpoint ckpt = fairway::load_checkpoint(ckpt_path);
    const auto dataset = fairway::load_dataset(data);
    const fairway::Split split = fairway::split_from_string(split_name);
    fairway::EvalOptions opts = make_eval_options(band_px, eval_seed, zone_below_only);

    std::ofstream csv_file;
    if (csv) {
        csv_file.open(*csv);
        if (!csv_file) throw fairway::IoError("cannot open csv file: " + *csv);
        csv_file << "sequence_id,frame_index,miou_full,miou_selected,contour_dist_px\n";
    }

    fairway::EvalReport report;
    report.attention_orientation = fairway::to_string(ckpt.config.attention_orientation);
    report.eval_seed = eval_seed;
    double f = 0.0, s = 0.0, d = 0.0;
    int n = 0;
    for (const auto& seq : dataset) {
        if (seq.split != split) continue;
        std::vector<fairway::FrameMetrics> frames;
        fairway::SequenceMetrics m =
            fairway::evaluate_sequence(ckpt.config, ckpt.params, seq, opts, &frames);
        if (csv_file.is_open())
            for (const auto& fm : frames)
                csv_file << seq.id << "," << fm.frame_index << "," << fm.miou_full << ","
                         << fm.miou_selected << "," << (fm.contour_defined ? fm.contour_dist_px : -1.0)
                         << "\n";
        report.per_sequence[seq.id] = m;
        f += m.miou_full;
        s += m.miou_selected;
        d += m.mean_contour_distance_px;
        report.aggregate.frames_evaluated += m.frames_evaluated;
        report.aggregate.frames_skipped_unlabeled += m.frames_skipped_unlabeled;
        report.aggregate.frames_without_contour += m.frames_without_contour;
        report.band_width_px = opts.band_px ? *opts.band_px
                                            : fairway::scaled_band_px(opts.band_at_480, seq.height());
        ++n;
    }
    if (n == 0) throw fairway::ValidationError("eval: no sequences in split " + split_name);
    report.aggregate.miou_full = f / n;
    report.aggregate.miou_selected = s / n;
    report.aggregate.mean_contour_distance_px = d / n;

    const std::string text = fairway::eval_report_to_json(report);
    if (out) {
        std::ofstream of(*out);
        if (!of) throw fairway::IoError("cannot write report: " + *out);
        of << text;
        std::cout << "report written to " << *out << "\n";
    }
    std::cout << "miou_selected=" << report.aggregate.miou_selected
              << " miou_full=" << report.aggregate.miou_full
              << " mean_contour_distance_px=" << report.aggregate.mean_contour_distance_px << "\n";
    return 0;
}

int run_robustness_cmd(const std::string& ckpt_path, const std::string& data,
                       const std::optional<std::string>& out, std::uint64_t eval_seed) {
    fairway::Checkpoint ckpt = fairway::load_checkpoint(ckpt_path);
    const auto dataset = fairway::load_dataset(data);
    fairway::EvalOptions opts = make_eval_options(std::nullopt, eval_seed);
    fairway::RobustnessReport report =
        fairway::run_robustness(ckpt.config, ckpt.params, dataset, opts);
    const std::string text = fairway::robustness_report_to_json(report);
    if (out) {
        std::ofstream of(*out);
        if (!of) throw fairway::IoError("cannot write report: " + *out);
        of << text;
    }
    std::printf("%-28s %-9s %-6s %-14s %-10s\n", "sequence", "direction", "drops", "miou_selected",
                "miou_full");
    for (const auto& r : report.rows)
        std::printf("%-28s %-9s %d/%-4d %-14.4f %-10.4f\n", r.sequence_id.c_str(),
                    r.backward ? "backward" : "forward", r.drop.num, r.drop.den,
                    r.metrics.miou_selected, r.metrics.miou_full);
    return 0;
}

int run_ablate(const CommonModelFlags& flags, const std::string& data,
               const std::optional<std::string>& out, std::uint64_t eval_seed) {
    const fairway::RunConfig cfg = resolve_config(flags);
    const auto dataset = fairway::load_dataset(data);
    fairway::EvalOptions opts = make_eval_options(std::nullopt, eval_seed);
    fairway::AblationReport report =
        fairway::run_ablation(cfg.model, cfg.train, dataset, opts, &std::cout);
    const std::string text = fairway::ablation_report_to_json(report);
    if (out) {
        std::ofstream of(*out);
        if (!of) throw fairway::IoError("cannot write report: " + *out);
        of << text;
    }
    std::printf("%-24s %-14s %-10s %-12s\n", "variant", "miou_selected", "miou_full", "parameters");
    for (const auto& r : report.rows)
        std::printf("%-24s %-14.4f %-10.4f %-12zu\n", r.name.c_str(),
                    r.test_metrics.miou_selected, r.test_metrics.miou_full, r.parameter_count);
    return 0;
}

int run_report(const std::string& in_path, const std::string& plots_dir) {
    fs::create_directories(plots_dir);
    std::ifstream in(in_path);
    if (!in) throw fairway::IoError("cannot open input: " + in_path);

    std::string first_line;
    std::getline(in, first_line);
    in.clear();
    in.seekg(0);

    json probe;
    try {
        probe = json::parse(first_line);
    } catch (const json::parse_error&) {
        // Maybe a multi-line pretty-printed report.
        try {
            in >> probe;
        } catch (const json::parse_error& e) {
            throw fairway::FormatError("input is neither a train log nor a report: " +
                                       std::string(e.what()));
        }
        in.clear();
        in.seekg(0);
    }

    if (probe.contains("iteration")) {
        // Train log: one JSON object per line.
        fairway::PlotSeries total{"TOTAL", 20, 20, 150, {}, {}};
        fairway::PlotSeries ce{"CE", 200, 60, 60, {}, {}};
        fairway::PlotSeries dice{"DICE", 40, 150, 60, {}, {}};
        fairway::PlotSeries con{"CON", 220, 140, 30, {}, {}};
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            const double it = j.at("iteration").get<double>();
            total.x.push_back(it);
            total.y.push_back(j.at("total").get<double>());
            ce.x.push_back(it);
            ce.y.push_back(j.at("l_ce").get<double>());
            dice.x.push_back(it);
            dice.y.push_back(j.at("l_dice").get<double>());
            con.x.push_back(it);
            con.y.push_back(j.at("l_con").get<double>());
        }
        const auto img = fairway::render_line_chart("TRAINING LOSS", "ITERATION", "LOSS",
                                                    {total, ce, dice, con});
        fairway::write_png_rgb8(fs::path(plots_dir) / "loss_curves.png", img);
        std::cout << "wrote " << (fs::path(plots_dir) / "loss_curves.png").string() << "\n";
        return 0;
    }

    json full;
    in >> full;
    std::vector<std::string> lines;
    char buf[160];
    if (full.contains("aggregate")) {
        std::snprintf(buf, sizeof(buf), "%-28s %-10s %-10s %-10s", "SEQUENCE", "SEL", "FULL",
                      "DIST PX");
        lines.push_back(buf);
        for (const auto& [id, m] : full.at("per_sequence").items()) {
            std::snprintf(buf, sizeof(buf), "%-28s %-10.4f %-10.4f %-10.3f", id.c_str(),
                          m.at("miou_selected").get<double>(), m.at("miou_full").get<double>(),
                          m.at("mean_contour_distance_px").get<double>());
            lines.push_back(buf);
        }
        const auto& ag = full.at("aggregate");
        std::snprintf(buf, sizeof(buf), "%-28s %-10.4f %-10.4f %-10.3f", "AGGREGATE",
                      ag.at("miou_selected").get<double>(), ag.at("miou_full").get<double>(),
                      ag.at("mean_contour_distance_px").get<double>());
        lines.push_back(buf);
        const auto img = fairway::render_text_table("EVALUATION REPORT", lines);
        fairway::write_png_rgb8(fs::path(plots_dir) / "eval_table.png", img);
        std::cout << "wrote " << (fs::path(plots_dir) / "eval_table.png").string() << "\n";
        return 0;
    }
    if (full.contains("rows")) {
        const auto& rows = full.at("rows");
        const bool ablation = !rows.empty() && rows.front().contains("name");
        if (ablation) {
            std::snprintf(buf, sizeof(buf), "%-24s %-10s %-10s %-12s", "VARIANT", "SEL", "FULL",
                          "PARAMS");
            lines.push_back(buf);
            for (const auto& r : rows) {
                std::snprintf(buf, sizeof(buf), "%-24s %-10.4f %-10.4f %-12zu",
                              r.at("name").get<std::string>().c_str(),
                              r.at("miou_selected").get<double>(),
                              r.at("miou_full").get<double>(),
                              r.at("parameter_count").get<std::size_t>());
                lines.push_back(buf);
            }
        } else {
            std::snprintf(buf, sizeof(buf), "%-28s %-9s %-6s %-10s %-10s", "SEQUENCE", "DIR",
                          "DROPS", "SEL", "FULL");
            lines.push_back(buf);
            for (const auto& r : rows) {
                std::snprintf(buf, sizeof(buf), "%-28s %-9s %d/%-4d %-10.4f %-10.4f",
                              r.at("sequence_id").get<std::string>().c_str(),
                              r.at("direction").get<std::string>().c_str(),
                              r.at("drop_rate").at("num").get<int>(),
                              r.at("drop_rate").at("den").get<int>(),
                              r.at("metrics").at("miou_selected").get<double>(),
                              r.at("metrics").at("miou_full").get<double>());
                lines.push_back(buf);
            }
        }
        const auto img =
            fairway::render_text_table(ablation ? "ABLATION RESULTS" : "ROBUSTNESS RESULTS", lines);
        const auto out = fs::path(plots_dir) / (ablation ? "ablation_table.png" : "robustness_table.png");
        fairway::write_png_rgb8(out, img);
        std::cout << "wrote " << out.string() << "\n";
        return 0;
    }
    throw fairway::FormatError("unrecognized report schema in " + in_path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairway: temporal-fusion free-space segmentation for waterways"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate the synthetic waterway benchmark");
    std::uint64_t gen_seed = 0;
    std::string gen_out = "benchmark";
    int gen_frames = 60;
    gen->add_option("--seed", gen_seed, "Benchmark seed")->required();
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--frames", gen_frames, "Frames per sequence");

    // train
    auto* tr = app.add_subcommand("train", "Train a model on a dataset");
    CommonModelFlags train_flags;
    std::string train_data, train_out = "model.fwck";
    std::optional<std::string> train_log;
    tr->add_option("--data", train_data, "dataset.json path")->required();
    tr->add_option("--out", train_out, "Checkpoint output path")->required();
    tr->add_option("--log", train_log, "Write per-iteration JSONL loss log");
    add_model_flags(tr, train_flags);

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
    std::string eval_ckpt, eval_data, eval_split = "test";
    std::optional<int> eval_band;
    std::optional<std::string> eval_out, eval_csv;
    std::uint64_t eval_seed = 0;
    ev->add_option("--ckpt", eval_ckpt, "Checkpoint path")->required();
    ev->add_option("--data", eval_data, "dataset.json path")->required();
    ev->add_option("--band-px", eval_band, "Selected-zone band width override (pixels)");
    ev->add_option("--out", eval_out, "Write report.json");
    ev->add_option("--csv", eval_csv, "Write per-frame CSV");
    ev->add_option("--split", eval_split, "Split to evaluate (train|val|test)");
    ev->add_option("--eval-seed", eval_seed, "Seed for deterministic eval-time picking");
    bool eval_below_only = false;
    ev->add_flag("--zone-below-only", eval_below_only,
                 "Selected zone = water region only (no nearshore band)");

    // robustness
    auto* rb = app.add_subcommand("robustness", "Run the drops/backward condition grid");
    std::string rb_ckpt, rb_data;
    std::optional<std::string> rb_out;
    std::uint64_t rb_seed = 0;
    rb->add_option("--ckpt", rb_ckpt, "Checkpoint path")->required();
    rb->add_option("--data", rb_data, "dataset.json path")->required();
    rb->add_option("--out", rb_out, "Write robustness report JSON");
    rb->add_option("--eval-seed", rb_seed, "Seed for deterministic eval-time picking");

    // ablate
    auto* ab = app.add_subcommand("ablate", "Train and evaluate the five-config ablation");
    CommonModelFlags ablate_flags;
    std::string ab_data;
    std::optional<std::string> ab_out;
    std::uint64_t ab_seed = 0;
    ab->add_option("--data", ab_data, "dataset.json path")->required();
    ab->add_option("--out", ab_out, "Write ablation report JSON");
    ab->add_option("--eval-seed", ab_seed, "Seed for deterministic eval-time picking");
    add_model_flags(ab, ablate_flags);

    // report
    auto* rp = app.add_subcommand("report", "Render PNG curves/tables from a report or log");
    std::string rp_in, rp_plots;
    rp->add_option("--in", rp_in, "report.json / robustness.json / train log.jsonl")->required();
    rp->add_option("--plots", rp_plots, "Output directory for PNGs")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_generate(gen_seed, gen_out, gen_frames);
        if (tr->parsed()) return run_train(train_flags, train_data, train_out, train_log);
        if (ev->parsed())
            return run_eval(eval_ckpt, eval_data, eval_band, eval_out, eval_csv, eval_split,
                            eval_seed, eval_below_only);
        if (rb->parsed()) return run_robustness_cmd(rb_ckpt, rb_data, rb_out, rb_seed);
        if (ab->parsed()) return run_ablate(ablate_flags, ab_data, ab_out, ab_seed);
        if (rp->parsed()) return run_report(rp_in, rp_plots);
    } catch (const fairway::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const fairway::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const fairway::FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return 2;
    } catch (const fairway::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fairway::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
