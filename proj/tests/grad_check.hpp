#pragma once

// Shared finite-difference gradient checker for the test suites. Central
// differences in double precision; failures report the worst element.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fairway/ad/graph.hpp"

namespace fairway::testutil {

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t worst_index = 0;
    std::string worst_param;
    bool ok(double tol) const { return max_rel_err < tol; }
};

/// Checks d(f)/d(leaf) for every probed leaf. `f` must rebuild the graph
/// from the leaves' current values and return the scalar root.
inline GradCheckResult check_gradients(std::vector<std::pair<std::string, ad::Var>> leaves,
                                       const std::function<ad::Var()>& f, double step = 1e-6,
                                       double tol_abs = 1e-8) {
    ad::Var root = f();
    for (auto& [name, leaf] : leaves) leaf.clear_grad();
    ad::backward(root);

    GradCheckResult result;
    for (auto& [name, leaf] : leaves) {
        Tensor analytic = leaf.grad();
        Tensor& value = leaf.mutable_value();
        for (std::size_t i = 0; i < value.numel(); ++i) {
            const double saved = value[i];
            const double h = step * std::max(1.0, std::fabs(saved));
            value[i] = saved + h;
            const double up = f().value().item();
            value[i] = saved - h;
            const double down = f().value().item();
            value[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double denom = std::max({std::fabs(numeric), std::fabs(analytic[i]), tol_abs});
            const double rel = std::fabs(numeric - analytic[i]) / denom;
            if (std::fabs(numeric - analytic[i]) < tol_abs) continue;
            if (rel > result.max_rel_err) {
                result.max_rel_err = rel;
                result.worst_index = i;
                result.worst_param = name;
            }
        }
    }
    return result;
}

inline Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

} // namespace fairway::testutil
