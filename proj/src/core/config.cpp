#include "fairway/core/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fairway/core/error.hpp"

namespace fairway {

using nlohmann::json;

std::string to_string(EncoderKind k) {
    return k == EncoderKind::paper_backbone ? "paper_backbone" : "tiny";
}
std::string to_string(AttentionOrientation o) {
    return o == AttentionOrientation::current_queries_previous ? "current_queries_previous"
                                                               : "previous_queries_current";
}
std::string to_string(PickMode m) {
    return m == PickMode::random_k_of_m ? "random_k_of_m" : "fixed_last_k";
}
std::string to_string(LrSchedule s) {
    return s == LrSchedule::constant ? "constant" : "linear_decay";
}

EncoderKind encoder_kind_from_string(const std::string& s) {
    if (s == "paper_backbone") return EncoderKind::paper_backbone;
    if (s == "tiny") return EncoderKind::tiny;
    throw ConfigError("unknown encoder kind: " + s);
}
AttentionOrientation attention_orientation_from_string(const std::string& s) {
    if (s == "current_queries_previous") return AttentionOrientation::current_queries_previous;
    if (s == "previous_queries_current") return AttentionOrientation::previous_queries_current;
    throw ConfigError("unknown attention orientation: " + s);
}
PickMode pick_mode_from_string(const std::string& s) {
    if (s == "random_k_of_m") return PickMode::random_k_of_m;
    if (s == "fixed_last_k") return PickMode::fixed_last_k;
    throw ConfigError("unknown pick mode: " + s);
}
LrSchedule lr_schedule_from_string(const std::string& s) {
    if (s == "constant") return LrSchedule::constant;
    if (s == "linear_decay") return LrSchedule::linear_decay;
    throw ConfigError("unknown lr schedule: " + s);
}

ModelConfig ModelConfig::tiny_preset() {
    ModelConfig cfg;
    cfg.input_h = 64;
    cfg.input_w = 64;
    cfg.feature_channels = 32;
    cfg.grid_h = 8;
    cfg.grid_w = 8;
    cfg.attention_heads = 4;
    cfg.decoder_channels = 16;
    cfg.encoder = EncoderKind::tiny;
    return cfg;
}

int ModelConfig::decoder_channels_effective() const {
    return decoder_channels > 0 ? decoder_channels : std::max(8, feature_channels / 8);
}

namespace {
bool is_pow2_multiple(int big, int small) {
    if (small <= 0 || big % small != 0) return false;
    int r = big / small;
    return (r & (r - 1)) == 0;
}
} // namespace

void ModelConfig::validate() const {
    if (input_h <= 0 || input_w <= 0 || feature_channels <= 0 || grid_h <= 0 || grid_w <= 0)
        throw ConfigError("model dimensions must be positive");
    if (n_prev_pool <= 0 || n_prev_pick <= 0)
        throw ConfigError("frame pool and pick counts must be positive");
    if (n_prev_pick > n_prev_pool)
        throw ConfigError("n_prev_pick must not exceed n_prev_pool");
    if (attention_heads <= 0 || feature_channels % attention_heads != 0)
        throw ConfigError("feature_channels must be divisible by attention_heads");
    if (attention_depth <= 0) throw ConfigError("attention_depth must be positive");
    if (beta <= 0.0) throw ConfigError("beta must be positive");
    if (n_c <= 0) throw ConfigError("n_c must be positive");
    if (!is_pow2_multiple(input_h, grid_h) || !is_pow2_multiple(input_w, grid_w))
        throw ConfigError("input size must be a power-of-two multiple of the feature grid");
    if (input_h / grid_h != input_w / grid_w)
        throw ConfigError("encoder stride must match on both axes");
    if (dcn_kernel % 2 != 1 || dcn_kernel < 1)
        throw ConfigError("dcn_kernel must be odd and positive");
    if (spatial_attention_kernel % 2 != 1 || spatial_attention_kernel < 1)
        throw ConfigError("spatial_attention_kernel must be odd and positive");
}

void TrainConfig::validate() const {
    if (iterations <= 0) throw ConfigError("iterations must be positive");
    if (learning_rate < 0.0) throw ConfigError("learning_rate must be non-negative");
    if (batch_size <= 0) throw ConfigError("batch_size must be positive");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0,1)");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
}

namespace {

json model_to_json(const ModelConfig& m) {
    return json{{"input_size", {m.input_h, m.input_w}},
                {"feature_channels", m.feature_channels},
                {"feature_grid", {m.grid_h, m.grid_w}},
                {"n_prev_pool", m.n_prev_pool},
                {"n_prev_pick", m.n_prev_pick},
                {"attention_heads", m.attention_heads},
                {"attention_depth", m.attention_depth},
                {"use_tpe", m.use_tpe},
                {"use_man", m.use_man},
                {"use_dcn", m.use_dcn},
                {"use_contour_loss", m.use_contour_loss},
                {"image_only", m.image_only},
                {"beta", m.beta},
                {"n_c", m.n_c},
                {"encoder", to_string(m.encoder)},
                {"attention_orientation", to_string(m.attention_orientation)},
                {"dcn_kernel", m.dcn_kernel},
                {"spatial_attention_kernel", m.spatial_attention_kernel},
                {"decoder_channels", m.decoder_channels},
                {"symmetric_contour_distance", m.symmetric_contour_distance}};
}

ModelConfig model_from_json(const json& j) {
    ModelConfig m;
    if (j.contains("encoder")) m.encoder = encoder_kind_from_string(j.at("encoder").get<std::string>());
    if (m.encoder == EncoderKind::tiny) m = ModelConfig::tiny_preset();
    if (j.contains("input_size")) {
        m.input_h = j.at("input_size").at(0).get<int>();
        m.input_w = j.at("input_size").at(1).get<int>();
    }
    if (j.contains("feature_channels")) m.feature_channels = j.at("feature_channels").get<int>();
    if (j.contains("feature_grid")) {
        m.grid_h = j.at("feature_grid").at(0).get<int>();
        m.grid_w = j.at("feature_grid").at(1).get<int>();
    }
    if (j.contains("n_prev_pool")) m.n_prev_pool = j.at("n_prev_pool").get<int>();
    if (j.contains("n_prev_pick")) m.n_prev_pick = j.at("n_prev_pick").get<int>();
    if (j.contains("attention_heads")) m.attention_heads = j.at("attention_heads").get<int>();
    if (j.contains("attention_depth")) m.attention_depth = j.at("attention_depth").get<int>();
    if (j.contains("use_tpe")) m.use_tpe = j.at("use_tpe").get<bool>();
    if (j.contains("use_man")) m.use_man = j.at("use_man").get<bool>();
    if (j.contains("use_dcn")) m.use_dcn = j.at("use_dcn").get<bool>();
    if (j.contains("use_contour_loss")) m.use_contour_loss = j.at("use_contour_loss").get<bool>();
    if (j.contains("image_only")) m.image_only = j.at("image_only").get<bool>();
    if (j.contains("beta")) m.beta = j.at("beta").get<double>();
    if (j.contains("n_c")) m.n_c = j.at("n_c").get<int>();
    if (j.contains("attention_orientation"))
        m.attention_orientation =
            attention_orientation_from_string(j.at("attention_orientation").get<std::string>());
    if (j.contains("dcn_kernel")) m.dcn_kernel = j.at("dcn_kernel").get<int>();
    if (j.contains("spatial_attention_kernel"))
        m.spatial_attention_kernel = j.at("spatial_attention_kernel").get<int>();
    if (j.contains("decoder_channels")) m.decoder_channels = j.at("decoder_channels").get<int>();
    if (j.contains("symmetric_contour_distance"))
        m.symmetric_contour_distance = j.at("symmetric_contour_distance").get<bool>();
    m.validate();
    return m;
}

json train_to_json(const TrainConfig& t) {
    return json{{"iterations", t.iterations},
                {"learning_rate", t.learning_rate},
                {"batch_size", t.batch_size},
                {"momentum", t.momentum},
                {"weight_decay", t.weight_decay},
                {"seed", t.seed},
                {"pick_mode", to_string(t.pick_mode)},
                {"lr_schedule", to_string(t.lr_schedule)}};
}

TrainConfig train_from_json(const json& j) {
    TrainConfig t;
    if (j.contains("iterations")) t.iterations = j.at("iterations").get<int>();
    if (j.contains("learning_rate")) t.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("batch_size")) t.batch_size = j.at("batch_size").get<int>();
    if (j.contains("momentum")) t.momentum = j.at("momentum").get<double>();
    if (j.contains("weight_decay")) t.weight_decay = j.at("weight_decay").get<double>();
    if (j.contains("seed")) t.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("pick_mode")) t.pick_mode = pick_mode_from_string(j.at("pick_mode").get<std::string>());
    if (j.contains("lr_schedule"))
        t.lr_schedule = lr_schedule_from_string(j.at("lr_schedule").get<std::string>());
    t.validate();
    return t;
}

} // namespace

std::string run_config_to_json(const RunConfig& cfg) {
    json j{{"model", model_to_json(cfg.model)}, {"train", train_to_json(cfg.train)}};
    return j.dump(2) + "\n";
}

RunConfig run_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    if (j.contains("model")) cfg.model = model_from_json(j.at("model"));
    if (j.contains("train")) cfg.train = train_from_json(j.at("train"));
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return run_config_from_json(ss.str());
}

} // namespace fairway
