#pragma once

#include <functional>
#include <vector>

#include "dibmap/tensor.hpp"

namespace dibmap {

// Reverse-mode tape.  Ops below append adjoint closures when handed a tape;
// with a null tape they are plain forward arithmetic.  backward() may run
// once per recording; reset() clears the recording for the next step and a
// second backward() without reset throws.
class Tape {
public:
    void record(std::function<void()> fn) { nodes_.push_back(std::move(fn)); }

    // Seeds d(loss)/d(loss) = 1 and accumulates into every operand's grad
    // buffer.  loss must be scalar.
    void backward(const Tensor& loss);

    void reset();

    std::size_t size() const { return nodes_.size(); }
    bool spent() const { return spent_; }

private:
    std::vector<std::function<void()>> nodes_;
    bool spent_ = false;
};

// Elementwise binary ops accept equal shapes or a scalar on either side.
Tensor add(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor sub(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor mul(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor div(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor scale(const Tensor& x, double c, Tape* tape = nullptr);

Tensor sin(const Tensor& x, Tape* tape = nullptr);
Tensor relu(const Tensor& x, Tape* tape = nullptr);
Tensor sigmoid(const Tensor& x, Tape* tape = nullptr);
Tensor softplus(const Tensor& x, Tape* tape = nullptr);
Tensor exp(const Tensor& x, Tape* tape = nullptr);
Tensor log(const Tensor& x, Tape* tape = nullptr);
Tensor square(const Tensor& x, Tape* tape = nullptr);
// Clamped elements get zero gradient.
Tensor clamp(const Tensor& x, double lo, double hi, Tape* tape = nullptr);

// a: [m x k], b: [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor transpose(const Tensor& x, Tape* tape = nullptr);
// a: [n x m], bias: [m] broadcast over rows.
Tensor add_rows(const Tensor& a, const Tensor& bias, Tape* tape = nullptr);

Tensor sum(const Tensor& x, Tape* tape = nullptr);
Tensor mean(const Tensor& x, Tape* tape = nullptr);
Tensor dot(const Tensor& a, const Tensor& b, Tape* tape = nullptr);

// Copies values and drops the autodiff link (gradient barrier).
Tensor detach(const Tensor& x);

// Numerically stable scalar helpers shared by ops and plain-math code.
double stable_softplus(double x);
double stable_sigmoid(double x);

}  // namespace dibmap
