#pragma once

#include <iosfwd>
#include <vector>

#include "fairway/core/config.hpp"
#include "fairway/core/dataset.hpp"
#include "fairway/harness/conditions.hpp"
#include "fairway/model/fusion.hpp"

namespace fairway {

struct TrainLogEntry {
    int iteration = 0;
    double l_ce = 0.0;
    double l_dice = 0.0;
    double l_con = 0.0;
    double total = 0.0;
    int empty_contour_events = 0; // batch items whose gt had no contour
};

struct TrainResult {
    ParamStore params;
    std::vector<TrainLogEntry> log;
};

/// Mini-batch SGD with momentum and L2 weight decay on the composite
/// loss. Fully deterministic in the seed: initialization, batch order,
/// and frame picks. Aborts with NumericError on a non-finite loss,
/// naming the iteration and offending frame. When `log_stream` is given,
/// one JSON line per iteration is written to it.
TrainResult train(const ModelConfig& cfg, const TrainConfig& tcfg,
                  const std::vector<FrameSequence>& dataset, std::ostream* log_stream = nullptr);

struct AblationRow {
    std::string name;
    ModelConfig config;
    std::size_t parameter_count = 0;
    SequenceMetrics test_metrics; // aggregate over the test split
};

struct AblationReport {
    std::vector<AblationRow> rows;
};

/// Trains and evaluates five configurations (all switches on, then each
/// of TPE / MAN / DCN / contour loss off) under identical seeds.
AblationReport run_ablation(const ModelConfig& base_cfg, const TrainConfig& tcfg,
                            const std::vector<FrameSequence>& dataset, const EvalOptions& opts,
                            std::ostream* progress = nullptr);

std::string ablation_report_to_json(const AblationReport& report);

struct RobustnessRow {
    std::string sequence_id;
    bool backward = false;
    DropRate drop;
    SequenceMetrics metrics;
};

struct RobustnessReport {
    std::vector<RobustnessRow> rows;
};

/// Evaluates the {forward, backward} x {none, 1/7} grid on every test
/// sequence.
RobustnessReport run_robustness(const ModelConfig& cfg, const ParamStore& params,
                                const std::vector<FrameSequence>& dataset,
                                const EvalOptions& opts);

std::string robustness_report_to_json(const RobustnessReport& report);

} // namespace fairway
