#include "fairway/core/tensor.hpp"

#include <sstream>

#include "fairway/core/error.hpp"

namespace fairway {

namespace {
std::size_t checked_numel(const std::vector<int>& shape) {
    if (shape.empty()) throw ValidationError("tensor shape must be non-empty");
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ValidationError("tensor dimensions must be positive");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}
} // namespace

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(checked_numel(shape_), 0.0) {}

Tensor::Tensor(std::vector<int> shape, double fill)
    : shape_(std::move(shape)), data_(checked_numel(shape_), fill) {}

Tensor Tensor::randn(std::vector<int> shape, Rng& rng, double stdev) {
    Tensor t(std::move(shape));
    for (auto& v : t.data_) v = rng.normal() * stdev;
    return t;
}

void Tensor::fill(double v) {
    for (auto& x : data_) x = v;
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double Tensor::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << ",";
        os << shape_[i];
    }
    os << ")";
    return os.str();
}

} // namespace fairway
