#include "fairway/model/fusion.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "fairway/core/error.hpp"

namespace fairway {

using nlohmann::json;

namespace {

Tensor glorot_init(int rows, int cols, Rng& rng) {
    const double stdev = std::sqrt(2.0 / (rows + cols));
    return Tensor::randn({rows, cols}, rng, stdev);
}

std::pair<int, int> decoder_factors(const ModelConfig& cfg) {
    const int total = cfg.input_h / cfg.grid_h;
    const int f1 = std::min(total, 4);
    return {f1, total / f1};
}

} // namespace

void init_fusion_params(const ModelConfig& cfg, ParamStore& store, Rng& rng) {
    const int c = cfg.feature_channels;
    if (cfg.use_man) {
        for (int d = 0; d < cfg.attention_depth; ++d) {
            const std::string base = "fusion.attn" + std::to_string(d);
            store.create(base + ".wq", glorot_init(c, c, rng));
            store.create(base + ".bq", Tensor::zeros({c}));
            store.create(base + ".wk", glorot_init(c, c, rng));
            store.create(base + ".bk", Tensor::zeros({c}));
            store.create(base + ".wv", glorot_init(c, c, rng));
            store.create(base + ".bv", Tensor::zeros({c}));
            // Zero output projection: the attention branch starts as a
            // no-op behind the residual and is learned in.
            store.create(base + ".wo", Tensor::zeros({c, c}));
            store.create(base + ".bo", Tensor::zeros({c}));
        }
    }
    const int sk = cfg.spatial_attention_kernel;
    {
        const double stdev = std::sqrt(2.0 / (sk * sk * 2));
        store.create("fusion.spatial.weight", Tensor::randn({sk, sk, 2, 1}, rng, stdev));
        store.create("fusion.spatial.bias", Tensor::zeros({1}));
    }
    const int cd = cfg.decoder_channels_effective();
    {
        const double s1 = std::sqrt(2.0 / (9.0 * c));
        store.create("fusion.decoder.conv1.weight", Tensor::randn({3, 3, c, cd}, rng, s1));
        store.create("fusion.decoder.conv1.bias", Tensor::zeros({cd}));
        store.create("fusion.decoder.conv2.weight", Tensor::randn({3, 3, cd, 2}, rng, 0.01));
        store.create("fusion.decoder.conv2.bias", Tensor::zeros({2}));
    }
}

ParamStore build_model(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    ParamStore store;
    Rng rng(Rng::mix(seed, 0xfa1c0de5ull));
    init_alignment_params(cfg, store, rng);
    init_fusion_params(cfg, store, rng);
    return store;
}

namespace {

ad::Var attention_block(const ModelConfig& cfg, const ParamStore& store, int depth,
                        const ad::Var& x_tokens, const ad::Var& p_tokens) {
    const int c = cfg.feature_channels;
    const int heads = cfg.attention_heads;
    const int dh = c / heads;
    const std::string base = "fusion.attn" + std::to_string(depth);

    const bool cur_queries = cfg.attention_orientation == AttentionOrientation::current_queries_previous;
    const ad::Var& q_src = cur_queries ? x_tokens : p_tokens;
    const ad::Var& kv_src = cur_queries ? p_tokens : x_tokens;

    ad::Var q = ad::add_rowvec(ad::matmul(q_src, store.get(base + ".wq")), store.get(base + ".bq"));
    ad::Var k = ad::add_rowvec(ad::matmul(kv_src, store.get(base + ".wk")), store.get(base + ".bk"));
    ad::Var v = ad::add_rowvec(ad::matmul(kv_src, store.get(base + ".wv")), store.get(base + ".bv"));

    std::vector<ad::Var> head_outputs;
    head_outputs.reserve(static_cast<std::size_t>(heads));
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
    for (int hI = 0; hI < heads; ++hI) {
        ad::Var qh = ad::slice_cols(q, hI * dh, (hI + 1) * dh);
        ad::Var kh = ad::slice_cols(k, hI * dh, (hI + 1) * dh);
        ad::Var vh = ad::slice_cols(v, hI * dh, (hI + 1) * dh);
        ad::Var scores = ad::scale(ad::matmul(qh, kh, /*transpose_b=*/true), inv_sqrt_dh);
        ad::Var attn = ad::softmax_rows(scores);
        head_outputs.push_back(ad::matmul(attn, vh));
    }
    ad::Var merged = heads == 1 ? head_outputs[0] : ad::concat_cols(head_outputs);
    ad::Var projected =
        ad::add_rowvec(ad::matmul(merged, store.get(base + ".wo")), store.get(base + ".bo"));
    // Residual onto the current-frame tokens keeps the image-only path
    // well-posed when F_pre is the zero map.
    return ad::add(x_tokens, projected);
}

} // namespace

ad::Var cross_attend(const ModelConfig& cfg, const ParamStore& store, const ad::Var& f_x,
                     const ad::Var& f_pre) {
    if (!f_x.value().same_shape(f_pre.value()))
        throw ValidationError("cross_attend: feature shapes differ: " + f_x.value().shape_str() +
                              " vs " + f_pre.value().shape_str());
    const int gh = f_x.value().dim(0), gw = f_x.value().dim(1), c = f_x.value().dim(2);
    const int tokens = gh * gw;
    ad::Var x_tok = ad::reshape(f_x, {tokens, c});
    ad::Var p_tok = ad::reshape(f_pre, {tokens, c});
    ad::Var out = x_tok;
    for (int d = 0; d < cfg.attention_depth; ++d) out = attention_block(cfg, store, d, out, p_tok);
    return ad::reshape(out, {gh, gw, c});
}

ad::Var spatial_attend(const ModelConfig& cfg, const ParamStore& store, const ad::Var& fused) {
    if (!fused.value().all_finite())
        throw ValidationError("spatial_attend: non-finite input");
    ad::Var pooled = ad::concat_channels(ad::channel_mean(fused), ad::channel_max(fused));
    ad::Var gate_logit = ad::conv2d(pooled, store.get("fusion.spatial.weight"),
                                    store.get("fusion.spatial.bias"), 1,
                                    cfg.spatial_attention_kernel / 2);
    return ad::mul_spatial_gate(fused, ad::sigmoid(gate_logit));
}

ad::Var decode(const ModelConfig& cfg, const ParamStore& store, const ad::Var& fused) {
    const auto [f1, f2] = decoder_factors(cfg);
    ad::Var h = ad::upsample_bilinear(fused, f1);
    h = ad::relu(ad::conv2d(h, store.get("fusion.decoder.conv1.weight"),
                            store.get("fusion.decoder.conv1.bias"), 1, 1));
    h = ad::upsample_bilinear(h, f2);
    return ad::conv2d(h, store.get("fusion.decoder.conv2.weight"),
                      store.get("fusion.decoder.conv2.bias"), 1, 1);
}

ad::Var model_forward(const ModelConfig& cfg, const ParamStore& store, const Tensor& current,
                      const std::vector<std::pair<Tensor, int>>& previous, int current_timestamp) {
    if (!previous.empty() && static_cast<int>(previous.size()) != cfg.n_prev_pick)
        throw ValidationError("model_forward: expected " + std::to_string(cfg.n_prev_pick) +
                              " previous frames, got " + std::to_string(previous.size()));
    ad::Var f_x = encode_frame(cfg, store, ad::Var::constant(current));
    ad::Var f_pre;
    if (previous.empty()) {
        f_pre = ad::Var::constant(Tensor::zeros({cfg.grid_h, cfg.grid_w, cfg.feature_channels}));
    } else {
        std::vector<TimedFeature> feats;
        feats.reserve(previous.size());
        for (const auto& [img, ts] : previous)
            feats.push_back({encode_frame(cfg, store, ad::Var::constant(img)), ts});
        f_pre = prefuse(cfg, store, feats, current_timestamp);
    }
    ad::Var fused = cfg.use_man ? cross_attend(cfg, store, f_x, f_pre) : ad::add(f_x, f_pre);
    return decode(cfg, store, spatial_attend(cfg, store, fused));
}

namespace {
constexpr char kCheckpointMagic[] = "FAIRWAY_CKPT_V1\n";

json model_config_to_checkpoint_json(const ModelConfig& m) {
    json j = json::parse(run_config_to_json({m, TrainConfig{}}));
    return j.at("model");
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg,
                     const ParamStore& store) {
    json header;
    header["format"] = "fairway_checkpoint";
    header["version"] = 1;
    header["model_config"] = model_config_to_checkpoint_json(cfg);
    json params = json::array();
    for (const auto& e : store.entries()) {
        json p;
        p["name"] = e.name;
        p["shape"] = e.var.value().shape();
        params.push_back(p);
    }
    header["params"] = params;
    const std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path.string());
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
    const std::uint64_t hlen = header_text.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const auto& e : store.entries()) {
        const auto& t = e.var.value();
        out.write(reinterpret_cast<const char*>(t.data()),
                  static_cast<std::streamsize>(t.numel() * sizeof(double)));
    }
    if (!out) throw IoError("short write on checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path.string());
    char magic[sizeof(kCheckpointMagic) - 1];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw FormatError("not a fairway checkpoint: " + path.string());
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string header_text(hlen, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw FormatError("truncated checkpoint header: " + path.string());

    json header;
    try {
        header = json::parse(header_text);
    } catch (const json::parse_error& e) {
        throw FormatError("bad checkpoint header: " + std::string(e.what()));
    }
    if (header.value("format", "") != "fairway_checkpoint" || header.value("version", 0) != 1)
        throw FormatError("unsupported checkpoint format in " + path.string());

    Checkpoint ckpt;
    {
        json wrapper;
        wrapper["model"] = header.at("model_config");
        ckpt.config = run_config_from_json(wrapper.dump()).model;
    }
    ckpt.params = build_model(ckpt.config, 0);

    const auto& listed = header.at("params");
    if (listed.size() != ckpt.params.size())
        throw FormatError("checkpoint parameter list does not match model structure");
    for (std::size_t i = 0; i < ckpt.params.entries().size(); ++i) {
        auto& entry = ckpt.params.entries()[i];
        const auto& meta = listed.at(i);
        if (meta.at("name").get<std::string>() != entry.name)
            throw FormatError("checkpoint parameter order mismatch at " + entry.name);
        const auto shape = meta.at("shape").get<std::vector<int>>();
        if (shape != entry.var.value().shape())
            throw FormatError("checkpoint shape mismatch at " + entry.name);
        auto& t = entry.var.mutable_value();
        in.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(t.numel() * sizeof(double)));
    }
    if (!in) throw FormatError("truncated checkpoint payload: " + path.string());
    return ckpt;
}

} // namespace fairway
