#pragma once

#include <cstdint>

#include "fairway/ad/ops.hpp"
#include "fairway/core/config.hpp"
#include "fairway/core/contour.hpp"

namespace fairway {

/// Exact Euclidean distances from pixel-cell centers (the (h-1) x (w-1)
/// half-offset grid) to the ground-truth shoreline contour. Constant
/// w.r.t. parameters; cache per frame. has_contour is false for
/// all-water / all-background masks, in which case the contour loss
/// contributes zero.
struct ContourDistanceFields {
    bool has_contour = false;
    Tensor d_cell;
};

ContourDistanceFields contour_distance_fields(const MaskU8& gt_mask);

/// Water probability from (h, w, 2) logits: sigmoid of the class-score
/// difference, identical to the 2-class softmax.
ad::Var water_probability(const ad::Var& logits);

/// Mean per-pixel 2-class cross-entropy with stable log-softmax.
ad::Var cross_entropy(const ad::Var& logits, const MaskU8& mask);

/// 1 - (2*sum(p*m) + 1) / (sum p + sum m + 1); probabilities must be in [0,1].
ad::Var dice_loss(const ad::Var& water_prob, const MaskU8& mask);

/// Eq.-style sampled estimator: n_c points drawn uniformly by arc length
/// along the predicted contour; returns the mean Euclidean distance to
/// the ground-truth polyline (pixels). With `symmetric`, averages the
/// prediction->gt and gt->prediction directions.
double contour_distance_sampled(const ContourPolyline& pred, const ContourPolyline& gt, int n_c,
                                std::uint64_t rng_seed, bool symmetric = false);

/// Differentiable surrogate: isotropic boundary-softness weights against
/// the precomputed cell-center distance field, normalized by the image
/// diagonal. For hard masks this is the arc-length-weighted mean contour
/// distance that the sampled estimator approximates.
ad::Var contour_loss(const ad::Var& water_prob, const ContourDistanceFields& fields, double beta);

struct LossBreakdown {
    double l_ce = 0.0;
    double l_dice = 0.0;
    double l_con = 0.0;
    double total = 0.0;
    bool contour_skipped = false; // empty contour on either side
    ad::Var total_var;
};

/// Composite objective: CE + Dice + Contour. With use_contour_loss off,
/// l_con is exactly zero. `fields` may be null when the contour term is
/// disabled.
LossBreakdown total_loss(const ModelConfig& cfg, const ad::Var& logits, const MaskU8& gt_mask,
                         const ContourDistanceFields* fields);

} // namespace fairway
