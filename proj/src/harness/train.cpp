#include "fairway/harness/train.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "fairway/core/error.hpp"
#include "fairway/core/frame_input.hpp"
#include "fairway/harness/picks.hpp"
#include "fairway/losses/losses.hpp"

namespace fairway {

using nlohmann::json;

namespace {

struct TrainingItem {
    std::size_t seq = 0;
    int frame = 0;
};

/// Per-frame tensors resized to the model input, computed once.
class SampleCache {
public:
    SampleCache(const ModelConfig& cfg, const std::vector<const FrameSequence*>& seqs)
        : cfg_(cfg), seqs_(seqs) {}

    const Tensor& input(std::size_t s, int f) {
        const Key key{s, f};
        auto it = inputs_.find(key);
        if (it == inputs_.end())
            it = inputs_.emplace(key, frame_to_input(cfg_, frame(s, f))).first;
        return it->second;
    }

    const MaskU8& mask(std::size_t s, int f) {
        const Key key{s, f};
        auto it = masks_.find(key);
        if (it == masks_.end())
            it = masks_.emplace(key, frame_mask_at_input(cfg_, frame(s, f))).first;
        return it->second;
    }

    const ContourDistanceFields& fields(std::size_t s, int f) {
        const Key key{s, f};
        auto it = fields_.find(key);
        if (it == fields_.end())
            it = fields_.emplace(key, contour_distance_fields(mask(s, f))).first;
        return it->second;
    }

    const Frame& frame(std::size_t s, int f) const {
        return seqs_[s]->frames[static_cast<std::size_t>(f)];
    }

private:
    using Key = std::pair<std::size_t, int>;
    const ModelConfig& cfg_;
    std::vector<const FrameSequence*> seqs_;
    std::map<Key, Tensor> inputs_;
    std::map<Key, MaskU8> masks_;
    std::map<Key, ContourDistanceFields> fields_;
};

} // namespace

TrainResult train(const ModelConfig& cfg, const TrainConfig& tcfg,
                  const std::vector<FrameSequence>& dataset, std::ostream* log_stream) {
    cfg.validate();
    tcfg.validate();

    std::vector<const FrameSequence*> train_seqs;
    for (const auto& seq : dataset)
        if (seq.split == Split::train) train_seqs.push_back(&seq);
    if (train_seqs.empty()) throw ValidationError("train: dataset has no train split");

    std::vector<TrainingItem> items;
    for (std::size_t s = 0; s < train_seqs.size(); ++s) {
        const auto& seq = *train_seqs[s];
        for (int f = cfg.n_prev_pool; f < static_cast<int>(seq.frames.size()); ++f)
            if (seq.frames[static_cast<std::size_t>(f)].mask) items.push_back({s, f});
    }
    if (items.empty()) throw ValidationError("train: no labeled frames past the context prefix");

    TrainResult result;
    result.params = build_model(cfg, tcfg.seed);
    SampleCache cache(cfg, train_seqs);

    Rng data_rng(Rng::mix(tcfg.seed, 0xda7aull));
    Rng pick_rng(Rng::mix(tcfg.seed, 0x91c5ull));

    // Momentum buffers in parameter order.
    std::vector<Tensor> velocity;
    velocity.reserve(result.params.size());
    for (const auto& e : result.params.entries())
        velocity.push_back(Tensor::zeros(e.var.value().shape()));

    for (int iter = 1; iter <= tcfg.iterations; ++iter) {
        result.params.zero_grads();
        TrainLogEntry entry;
        entry.iteration = iter;

        ad::Var batch_loss;
        for (int b = 0; b < tcfg.batch_size; ++b) {
            const TrainingItem item =
                items[static_cast<std::size_t>(data_rng.next_below(items.size()))];
            const FrameSequence& seq = *train_seqs[item.seq];
            const Frame& current = cache.frame(item.seq, item.frame);

            std::vector<std::pair<Tensor, int>> previous;
            if (!cfg.image_only) {
                const FramePick pick = pick_frames(item.frame, cfg.n_prev_pool, cfg.n_prev_pick,
                                                   tcfg.pick_mode, pick_rng);
                for (int idx : pick.indices)
                    previous.emplace_back(cache.input(item.seq, idx),
                                          seq.frames[static_cast<std::size_t>(idx)].timestamp);
            }

            LossBreakdown lb;
            try {
                ad::Var logits = model_forward(cfg, result.params,
                                               cache.input(item.seq, item.frame), previous,
                                               current.timestamp);
                const ContourDistanceFields* fields =
                    cfg.use_contour_loss ? &cache.fields(item.seq, item.frame) : nullptr;
                lb = total_loss(cfg, logits, cache.mask(item.seq, item.frame), fields);
            } catch (const ValidationError& e) {
                // Diverged parameters surface as non-finite features inside
                // the forward pass; report them as the numeric abort.
                if (std::string(e.what()).find("non-finite") == std::string::npos) throw;
                std::ostringstream os;
                os << "train: numeric blow-up at iteration " << iter << " on sequence '" << seq.id
                   << "' frame " << item.frame << " (" << e.what() << ")";
                throw NumericError(os.str());
            }
            if (!std::isfinite(lb.total)) {
                std::ostringstream os;
                os << "train: non-finite loss at iteration " << iter << " on sequence '"
                   << seq.id << "' frame " << item.frame;
                throw NumericError(os.str());
            }
            entry.l_ce += lb.l_ce;
            entry.l_dice += lb.l_dice;
            entry.l_con += lb.l_con;
            entry.total += lb.total;
            if (lb.contour_skipped) ++entry.empty_contour_events;
            batch_loss = batch_loss.defined() ? ad::add(batch_loss, lb.total_var) : lb.total_var;
        }
        const double inv_b = 1.0 / tcfg.batch_size;
        entry.l_ce *= inv_b;
        entry.l_dice *= inv_b;
        entry.l_con *= inv_b;
        entry.total *= inv_b;
        ad::backward(ad::scale(batch_loss, inv_b));

        // SGD with momentum; weight decay enters the gradient as L2.
        double lr = tcfg.learning_rate;
        if (tcfg.lr_schedule == LrSchedule::linear_decay && tcfg.iterations > 1) {
            const double frac = static_cast<double>(iter - 1) / (tcfg.iterations - 1);
            lr *= 1.0 - 0.9 * frac; // down to 10% of the initial rate
        }
        auto& entries = result.params.entries();
        for (std::size_t p = 0; p < entries.size(); ++p) {
            Tensor& w = entries[p].var.mutable_value();
            Tensor& g = entries[p].var.grad();
            Tensor& v = velocity[p];
            for (std::size_t i = 0; i < w.numel(); ++i) {
                const double grad = g[i] + tcfg.weight_decay * w[i];
                v[i] = tcfg.momentum * v[i] + grad;
                w[i] -= lr * v[i];
            }
        }

        if (log_stream) {
            json line{{"iteration", entry.iteration}, {"l_ce", entry.l_ce},
                      {"l_dice", entry.l_dice},      {"l_con", entry.l_con},
                      {"total", entry.total},        {"empty_contour_events", entry.empty_contour_events}};
            (*log_stream) << line.dump() << "\n";
        }
        result.log.push_back(entry);
    }
    return result;
}

namespace {

json metrics_json(const SequenceMetrics& m) {
    return json{{"miou_full", m.miou_full},
                {"miou_selected", m.miou_selected},
                {"mean_contour_distance_px", m.mean_contour_distance_px}};
}

} // namespace

AblationReport run_ablation(const ModelConfig& base_cfg, const TrainConfig& tcfg,
                            const std::vector<FrameSequence>& dataset, const EvalOptions& opts,
                            std::ostream* progress) {
    struct Variant {
        const char* name;
        void (*tweak)(ModelConfig&);
    };
    const Variant variants[] = {
        {"all", [](ModelConfig&) {}},
        {"without_tpe", [](ModelConfig& c) { c.use_tpe = false; }},
        {"without_man", [](ModelConfig& c) { c.use_man = false; }},
        {"without_dcn", [](ModelConfig& c) { c.use_dcn = false; }},
        {"without_contour_loss", [](ModelConfig& c) { c.use_contour_loss = false; }},
    };

    AblationReport report;
    for (const auto& v : variants) {
        ModelConfig cfg = base_cfg;
        v.tweak(cfg);
        if (progress) (*progress) << "[ablate] training variant '" << v.name << "'\n";
        TrainResult tr = train(cfg, tcfg, dataset, nullptr);
        EvalReport er = evaluate_dataset(cfg, tr.params, dataset, Split::test, opts);
        AblationRow row;
        row.name = v.name;
        row.config = cfg;
        row.parameter_count = tr.params.scalar_count();
        row.test_metrics = er.aggregate;
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string ablation_report_to_json(const AblationReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        json row;
        row["name"] = r.name;
        row["parameter_count"] = r.parameter_count;
        row["miou_selected"] = r.test_metrics.miou_selected;
        row["miou_full"] = r.test_metrics.miou_full;
        row["mean_contour_distance_px"] = r.test_metrics.mean_contour_distance_px;
        rows.push_back(row);
    }
    return json{{"rows", rows}}.dump(2) + "\n";
}

RobustnessReport run_robustness(const ModelConfig& cfg, const ParamStore& params,
                                const std::vector<FrameSequence>& dataset,
                                const EvalOptions& opts) {
    RobustnessReport report;
    const RobustnessCondition grid[] = {
        {false, {0, 1}, false, 0},
        {true, {0, 1}, false, 0},
        {false, {1, 7}, false, 0},
        {true, {1, 7}, false, 0},
    };
    for (const auto& seq : dataset) {
        if (seq.split != Split::test) continue;
        for (const auto& cond : grid) {
            const FrameSequence transformed = apply_condition(seq, cond);
            RobustnessRow row;
            row.sequence_id = seq.id;
            row.backward = cond.backward;
            row.drop = cond.drop;
            row.metrics = evaluate_sequence(cfg, params, transformed, opts);
            report.rows.push_back(std::move(row));
        }
    }
    if (report.rows.empty()) throw ValidationError("run_robustness: no test sequences");
    return report;
}

std::string robustness_report_to_json(const RobustnessReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        json row;
        row["sequence_id"] = r.sequence_id;
        row["direction"] = r.backward ? "backward" : "forward";
        row["drop_rate"] = {{"num", r.drop.num}, {"den", r.drop.den}};
        row["metrics"] = metrics_json(r.metrics);
        rows.push_back(row);
    }
    return json{{"rows", rows}}.dump(2) + "\n";
}

} // namespace fairway
