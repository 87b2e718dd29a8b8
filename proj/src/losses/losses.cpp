#include "fairway/losses/losses.hpp"

#include <cmath>

#include "fairway/core/error.hpp"
#include "fairway/core/rng.hpp"

namespace fairway {

ContourDistanceFields contour_distance_fields(const MaskU8& gt_mask) {
    validate_mask_binary(gt_mask, "contour_distance_fields");
    const int h = gt_mask.height, w = gt_mask.width;
    ContourDistanceFields out;
    const ContourPolyline contour = mask_to_contour(gt_mask);
    if (contour.empty()) return out;
    const ContourIndex index(contour);
    out.has_contour = true;
    out.d_cell = Tensor({h - 1, w - 1});
    for (int y = 0; y + 1 < h; ++y)
        for (int x = 0; x + 1 < w; ++x) out.d_cell.at2(y, x) = index.distance(y + 0.5, x + 0.5);
    return out;
}

ad::Var water_probability(const ad::Var& logits) {
    const auto& v = logits.value();
    if (v.rank() != 3 || v.dim(2) != 2)
        throw ValidationError("water_probability: logits must be (h,w,2)");
    const int h = v.dim(0), w = v.dim(1);
    ad::Var flat = ad::reshape(logits, {h * w, 2});
    ad::Var diff = ad::sub(ad::slice_cols(flat, 1, 2), ad::slice_cols(flat, 0, 1));
    return ad::sigmoid(ad::reshape(diff, {h, w}));
}

namespace {

void check_logits_vs_mask(const ad::Var& logits, const MaskU8& mask, const char* where) {
    const auto& v = logits.value();
    if (v.rank() != 3 || v.dim(2) != 2)
        throw ValidationError(std::string(where) + ": logits must be (h,w,2)");
    if (v.dim(0) != mask.height || v.dim(1) != mask.width)
        throw ValidationError(std::string(where) + ": logits and mask resolutions differ");
    validate_mask_binary(mask, where);
}

} // namespace

ad::Var cross_entropy(const ad::Var& logits, const MaskU8& mask) {
    check_logits_vs_mask(logits, mask, "cross_entropy");
    const int h = mask.height, w = mask.width;
    ad::Var flat = ad::reshape(logits, {h * w, 2});
    ad::Var diff = ad::reshape(ad::sub(ad::slice_cols(flat, 1, 2), ad::slice_cols(flat, 0, 1)),
                               {h, w});
    // CE per pixel = softplus(-sign * (z1 - z0)), sign = +1 for water.
    Tensor neg_sign({h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) neg_sign.at2(y, x) = mask.at(y, x) ? -1.0 : 1.0;
    return ad::mean_all(ad::softplus(ad::mul_const(diff, neg_sign)));
}

ad::Var dice_loss(const ad::Var& water_prob, const MaskU8& mask) {
    const auto& p = water_prob.value();
    if (p.rank() != 2 || p.dim(0) != mask.height || p.dim(1) != mask.width)
        throw ValidationError("dice_loss: probability grid and mask resolutions differ");
    validate_mask_binary(mask, "dice_loss");
    for (std::size_t i = 0; i < p.numel(); ++i)
        if (p[i] < 0.0 || p[i] > 1.0)
            throw ValidationError("dice_loss: probabilities must lie in [0,1]");

    Tensor m({mask.height, mask.width});
    double msum = 0.0;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            m.at2(y, x) = mask.at(y, x);
            msum += mask.at(y, x);
        }
    const double eps = 1.0; // smoothing, pixel-count units
    ad::Var intersection = ad::sum_all(ad::mul_const(water_prob, m));
    ad::Var numer = ad::add_const(ad::scale(intersection, 2.0), eps);
    ad::Var denom = ad::add_const(ad::sum_all(water_prob), msum + eps);
    return ad::add_const(ad::scale(ad::divide(numer, denom), -1.0), 1.0);
}

namespace {

struct ArcTable {
    std::vector<double> cumulative; // per segment end
    std::vector<ContourIndex::Segment> segments;
    double total = 0.0;
};

ArcTable build_arc_table(const ContourPolyline& contour) {
    ArcTable t;
    for (const auto& chain : contour.chains) {
        for (std::size_t i = 1; i < chain.size(); ++i) {
            const double dy = chain[i].y - chain[i - 1].y;
            const double dx = chain[i].x - chain[i - 1].x;
            const double len = std::sqrt(dy * dy + dx * dx);
            if (len <= 0.0) continue;
            t.total += len;
            t.segments.push_back({chain[i - 1], chain[i]});
            t.cumulative.push_back(t.total);
        }
    }
    return t;
}

Point2d point_at_arc(const ArcTable& t, double s) {
    const auto it = std::lower_bound(t.cumulative.begin(), t.cumulative.end(), s);
    const std::size_t idx = std::min(static_cast<std::size_t>(it - t.cumulative.begin()),
                                     t.segments.size() - 1);
    const auto& seg = t.segments[idx];
    const double seg_end = t.cumulative[idx];
    const double dy = seg.b.y - seg.a.y, dx = seg.b.x - seg.a.x;
    const double len = std::sqrt(dy * dy + dx * dx);
    const double back = seg_end - s; // distance from sample to segment end
    const double frac = len > 0.0 ? 1.0 - back / len : 0.0;
    return {seg.a.y + frac * dy, seg.a.x + frac * dx};
}

double directed_sampled_distance(const ContourPolyline& from, const ContourPolyline& to, int n_c,
                                 Rng& rng) {
    const ArcTable arcs = build_arc_table(from);
    if (arcs.segments.empty()) throw ValidationError("contour_distance_sampled: empty contour");
    const ContourIndex target(to);
    double sum = 0.0;
    for (int i = 0; i < n_c; ++i) {
        const Point2d p = point_at_arc(arcs, rng.next_double() * arcs.total);
        sum += target.distance(p.y, p.x);
    }
    return sum / n_c;
}

} // namespace

double contour_distance_sampled(const ContourPolyline& pred, const ContourPolyline& gt, int n_c,
                                std::uint64_t rng_seed, bool symmetric) {
    if (n_c < 1) throw ValidationError("contour_distance_sampled: n_c must be >= 1");
    if (pred.empty() || gt.empty())
        throw ValidationError("contour_distance_sampled: empty contour");
    Rng rng(Rng::mix(rng_seed, 0xc0470u));
    const double forward = directed_sampled_distance(pred, gt, n_c, rng);
    if (!symmetric) return forward;
    const double backward = directed_sampled_distance(gt, pred, n_c, rng);
    return 0.5 * (forward + backward);
}

ad::Var contour_loss(const ad::Var& water_prob, const ContourDistanceFields& fields, double beta) {
    const auto& p = water_prob.value();
    if (p.rank() != 2) throw ValidationError("contour_loss: probability grid must be (h,w)");
    if (beta <= 0.0) throw ValidationError("contour_loss: beta must be positive");
    if (!fields.has_contour) return ad::Var::constant(Tensor::scalar(0.0));
    const int h = p.dim(0), w = p.dim(1);
    const double diag = std::sqrt(static_cast<double>(h) * h + static_cast<double>(w) * w);
    return ad::contour_surrogate(water_prob, fields.d_cell, beta, diag, 1e-6);
}

LossBreakdown total_loss(const ModelConfig& cfg, const ad::Var& logits, const MaskU8& gt_mask,
                         const ContourDistanceFields* fields) {
    check_logits_vs_mask(logits, gt_mask, "total_loss");
    LossBreakdown out;
    ad::Var ce = cross_entropy(logits, gt_mask);
    ad::Var prob = water_probability(logits);
    ad::Var dice = dice_loss(prob, gt_mask);
    ad::Var total = ad::add(ce, dice);
    out.l_ce = ce.value().item();
    out.l_dice = dice.value().item();
    if (cfg.use_contour_loss) {
        if (fields == nullptr)
            throw ValidationError("total_loss: contour loss enabled but no distance fields given");
        if (fields->has_contour) {
            ad::Var con = contour_loss(prob, *fields, cfg.beta);
            out.l_con = con.value().item();
            total = ad::add(total, con);
        } else {
            out.contour_skipped = true;
        }
    }
    out.total = total.value().item();
    out.total_var = total;
    return out;
}

} // namespace fairway
