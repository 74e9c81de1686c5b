#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "dibmap/rng.hpp"

namespace dibmap {

// Dense 64-bit float tensor with a gradient buffer of the same extent.
// Copies share storage (handle semantics), which is what lets the tape hold
// cheap references to operands and results.
class Tensor {
public:
    Tensor();
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, double value);
    static Tensor scalar(double value);
    static Tensor from_vector(std::vector<double> values);  // 1-D
    static Tensor uniform(std::vector<std::size_t> shape, double lo, double hi, RngStream& rng);
    static Tensor gaussian(std::vector<std::size_t> shape, RngStream& rng);

    const std::vector<std::size_t>& shape() const;
    std::size_t size() const;
    std::size_t rank() const;
    // Rows/cols of a rank-2 tensor; a rank-1 tensor is treated as one row.
    std::size_t rows() const;
    std::size_t cols() const;

    // Handle semantics: a const Tensor is a const handle, not a read-only
    // buffer, so these stay mutable (mirrors shared_ptr).
    std::span<double> data() const;
    std::span<double> grad() const;

    double& at(std::size_t i) const;

    // Scalar accessor; throws DimensionError unless size() == 1.
    double value() const;

    void zero_grad() const;
    // Throws NumericalError naming the first non-finite element.
    void ensure_finite(const char* what) const;

    bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }
    // Deep copy with fresh (zero) gradient.
    Tensor clone() const;

private:
    struct Impl {
        std::vector<std::size_t> shape;
        std::vector<double> values;
        std::vector<double> grad;
    };
    std::shared_ptr<Impl> impl_;
};

}  // namespace dibmap
