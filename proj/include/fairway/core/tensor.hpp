#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "fairway/core/rng.hpp"

namespace fairway {

/// Dense row-major double tensor. Spatial maps use (h, w, c) order, token
/// matrices (n, m), scalars shape {1}. Double precision throughout so the
/// finite-difference gradient suite and checkpoint bytes are exact.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, double fill);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, double v) { return Tensor(std::move(shape), v); }
    static Tensor scalar(double v) { return Tensor({1}, v); }
    static Tensor randn(std::vector<int> shape, Rng& rng, double stdev);

    const std::vector<int>& shape() const { return shape_; }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    int rank() const { return static_cast<int>(shape_.size()); }
    std::size_t numel() const { return data_.size(); }
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // (h, w, c) accessors
    double& at3(int y, int x, int c) {
        return data_[(static_cast<std::size_t>(y) * shape_[1] + x) * shape_[2] + c];
    }
    double at3(int y, int x, int c) const {
        return data_[(static_cast<std::size_t>(y) * shape_[1] + x) * shape_[2] + c];
    }
    // (n, m) accessors
    double& at2(int r, int c) { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }
    double at2(int r, int c) const { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }

    void fill(double v);
    bool all_finite() const;
    double max_abs() const;
    double item() const { return data_.at(0); }

    std::string shape_str() const;

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

inline bool shapes_equal(const std::vector<int>& a, const std::vector<int>& b) { return a == b; }

} // namespace fairway
