#include "dibmap/tensor.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "dibmap/errors.hpp"

namespace dibmap {
namespace {

std::size_t extent(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

}  // namespace

Tensor::Tensor() : Tensor({0}, {}) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : impl_(std::make_shared<Impl>()) {
    if (extent(shape) != values.size())
        throw DimensionError("tensor: shape extent " + std::to_string(extent(shape)) +
                             " != value count " + std::to_string(values.size()));
    impl_->shape = std::move(shape);
    impl_->values = std::move(values);
    impl_->grad.assign(impl_->values.size(), 0.0);
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    std::size_t n = extent(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
    std::size_t n = extent(shape);
    return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) {
    return Tensor({1}, {value});
}

Tensor Tensor::from_vector(std::vector<double> values) {
    std::size_t n = values.size();
    return Tensor({n}, std::move(values));
}

Tensor Tensor::uniform(std::vector<std::size_t> shape, double lo, double hi, RngStream& rng) {
    Tensor t = zeros(std::move(shape));
    rng.fill_uniform(t.data(), lo, hi);
    return t;
}

Tensor Tensor::gaussian(std::vector<std::size_t> shape, RngStream& rng) {
    Tensor t = zeros(std::move(shape));
    rng.fill_normal(t.data());
    return t;
}

const std::vector<std::size_t>& Tensor::shape() const { return impl_->shape; }

std::size_t Tensor::size() const { return impl_->values.size(); }

std::size_t Tensor::rank() const { return impl_->shape.size(); }

std::size_t Tensor::rows() const { return rank() >= 2 ? impl_->shape[0] : 1; }

std::size_t Tensor::cols() const {
    return rank() >= 2 ? impl_->shape[1] : (rank() == 1 ? impl_->shape[0] : 0);
}

std::span<double> Tensor::data() const { return impl_->values; }
std::span<double> Tensor::grad() const { return impl_->grad; }

double& Tensor::at(std::size_t i) const { return impl_->values[i]; }

double Tensor::value() const {
    if (size() != 1) throw DimensionError("tensor: value() on non-scalar of size " + std::to_string(size()));
    return impl_->values[0];
}

void Tensor::zero_grad() const {
    std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

void Tensor::ensure_finite(const char* what) const {
    for (std::size_t i = 0; i < impl_->values.size(); ++i) {
        if (!std::isfinite(impl_->values[i]))
            throw NumericalError(std::string(what) + ": non-finite value at index " + std::to_string(i));
    }
}

Tensor Tensor::clone() const {
    return Tensor(impl_->shape, impl_->values);
}

}  // namespace dibmap
