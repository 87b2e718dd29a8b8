#include "fairway/model/alignment.hpp"

#include <cmath>
#include <string>

#include "fairway/core/error.hpp"

namespace fairway {

namespace {

int encoder_levels(const ModelConfig& cfg) {
    int r = cfg.input_h / cfg.grid_h;
    int n = 0;
    while (r > 1) {
        r >>= 1;
        ++n;
    }
    return n;
}

std::vector<int> encoder_channels(const ModelConfig& cfg) {
    const int levels = encoder_levels(cfg);
    std::vector<int> ch(static_cast<std::size_t>(levels));
    for (int i = 0; i < levels; ++i)
        ch[static_cast<std::size_t>(i)] = std::max(4, cfg.feature_channels >> (levels - 1 - i));
    if (levels > 0) ch.back() = cfg.feature_channels;
    return ch;
}

Tensor he_conv_init(int k, int cin, int cout, Rng& rng) {
    const double stdev = std::sqrt(2.0 / (k * k * cin));
    return Tensor::randn({k, k, cin, cout}, rng, stdev);
}

} // namespace

void init_alignment_params(const ModelConfig& cfg, ParamStore& store, Rng& rng) {
    const int c = cfg.feature_channels;
    const auto channels = encoder_channels(cfg);
    int cin = 3;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const int cout = channels[i];
        const std::string base = "alignment.encoder.conv" + std::to_string(i);
        store.create(base + ".weight", he_conv_init(3, cin, cout, rng));
        store.create(base + ".bias", Tensor::zeros({cout}));
        cin = cout;
    }
    store.create("alignment.encoder.refine.weight", he_conv_init(3, c, c, rng));
    store.create("alignment.encoder.refine.bias", Tensor::zeros({c}));

    if (cfg.use_tpe) {
        const double stdev = 1.0 / std::sqrt(static_cast<double>(c));
        store.create("alignment.gate.weight", Tensor::randn({c, c}, rng, stdev));
        store.create("alignment.gate.bias", Tensor::zeros({c}));
    }

    const int k = cfg.dcn_kernel;
    {
        // Near-identity start: the aligned previous features initially pass
        // through unchanged, so the pre-fusion sum begins as a temporal
        // average instead of a random projection.
        Tensor w = Tensor::randn({k, k, c, c}, rng, 0.05 * std::sqrt(2.0 / (k * k * c)));
        for (int ch = 0; ch < c; ++ch) w[(((static_cast<std::size_t>(k / 2) * k) + k / 2) * c + ch) * c + ch] += 1.0;
        store.create("alignment.dcn.main.weight", std::move(w));
        store.create("alignment.dcn.main.bias", Tensor::zeros({c}));
    }
    if (cfg.use_dcn) {
        // Zero-initialized offset branch: training starts at the standard
        // convolution operating point.
        store.create("alignment.dcn.offset.weight", Tensor::zeros({k, k, c, 2 * k * k}));
        store.create("alignment.dcn.offset.bias", Tensor::zeros({2 * k * k}));
    }
}

ad::Var encode_frame(const ModelConfig& cfg, const ParamStore& store, const ad::Var& input) {
    const auto& shape = input.value().shape();
    if (input.value().rank() != 3 || shape[0] != cfg.input_h || shape[1] != cfg.input_w ||
        shape[2] != 3)
        throw ValidationError("encode_frame: input must be (" + std::to_string(cfg.input_h) +
                              "," + std::to_string(cfg.input_w) + ",3), got " +
                              input.value().shape_str());
    ad::Var h = input;
    const auto channels = encoder_channels(cfg);
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const std::string base = "alignment.encoder.conv" + std::to_string(i);
        h = ad::relu(ad::conv2d(h, store.get(base + ".weight"), store.get(base + ".bias"),
                                /*stride=*/2, /*pad=*/1));
    }
    h = ad::relu(ad::conv2d(h, store.get("alignment.encoder.refine.weight"),
                            store.get("alignment.encoder.refine.bias"), 1, 1));
    return h;
}

Tensor interval_embedding(int delta_t, int dim) {
    Tensor emb({1, dim});
    for (int i = 0; i < dim / 2; ++i) {
        const double wavelength = std::pow(10000.0, 2.0 * i / dim);
        emb.at2(0, 2 * i) = std::sin(delta_t / wavelength);
        emb.at2(0, 2 * i + 1) = std::cos(delta_t / wavelength);
    }
    if (dim % 2 == 1) emb.at2(0, dim - 1) = std::sin(delta_t / 10000.0);
    return emb;
}

ad::Var temporal_gate(const ModelConfig& cfg, const ParamStore& store, int delta_t) {
    const int c = cfg.feature_channels;
    if (!cfg.use_tpe) return ad::Var::constant(Tensor::full({c}, 1.0));
    if (delta_t < 1) throw ValidationError("temporal_gate: delta_t must be >= 1");
    ad::Var emb = ad::Var::constant(interval_embedding(delta_t, c));
    ad::Var pre = ad::add_rowvec(ad::matmul(emb, store.get("alignment.gate.weight")),
                                 store.get("alignment.gate.bias"));
    return ad::reshape(ad::sigmoid(pre), {c});
}

ad::Var deformable_conv(const ModelConfig& cfg, const ParamStore& store, const ad::Var& features) {
    const auto& shape = features.value().shape();
    if (features.value().rank() != 3 || shape[0] != cfg.grid_h || shape[1] != cfg.grid_w ||
        shape[2] != cfg.feature_channels)
        throw ValidationError("deformable_conv: feature shape " + features.value().shape_str() +
                              " does not match config");
    if (!features.value().all_finite())
        throw ValidationError("deformable_conv: non-finite features");
    const int pad = cfg.dcn_kernel / 2;
    ad::Var w = store.get("alignment.dcn.main.weight");
    ad::Var b = store.get("alignment.dcn.main.bias");
    if (!cfg.use_dcn) return ad::conv2d(features, w, b, 1, pad);
    ad::Var offsets = ad::conv2d(features, store.get("alignment.dcn.offset.weight"),
                                 store.get("alignment.dcn.offset.bias"), 1, pad);
    return ad::deform_conv2d(features, w, b, offsets, pad);
}

ad::Var prefuse(const ModelConfig& cfg, const ParamStore& store,
                const std::vector<TimedFeature>& previous, int current_timestamp) {
    if (previous.empty()) throw ValidationError("prefuse: previous frame list is empty");
    ad::Var acc;
    for (const auto& tf : previous) {
        if (tf.timestamp >= current_timestamp)
            throw ValidationError("prefuse: previous timestamp " + std::to_string(tf.timestamp) +
                                  " is not before current " + std::to_string(current_timestamp));
        ad::Var aligned = deformable_conv(cfg, store, tf.features);
        ad::Var gate = temporal_gate(cfg, store, current_timestamp - tf.timestamp);
        ad::Var term = ad::mul_channel_gate(aligned, gate);
        acc = acc.defined() ? ad::add(acc, term) : term;
    }
    return acc;
}

} // namespace fairway
