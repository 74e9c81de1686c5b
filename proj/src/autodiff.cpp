#include "dibmap/autodiff.hpp"

#include <cmath>
#include <string>

#include "dibmap/errors.hpp"

namespace dibmap {

void Tape::backward(const Tensor& loss) {
    if (loss.size() != 1) throw DimensionError("backward: loss must be scalar");
    if (spent_) throw NumericalError("backward: tape already consumed; call reset() between steps");
    spent_ = true;
    Tensor seed = loss;  // shares storage
    seed.grad()[0] += 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
}

void Tape::reset() {
    nodes_.clear();
    spent_ = false;
}

double stable_softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

enum class Broadcast { None, Left, Right };

// Elementwise ops pair up flattened buffers, so [n] against [n, 1] is fine;
// only a genuine extent mismatch (with no scalar side) is an error.
Broadcast binary_mode(const Tensor& a, const Tensor& b, const char* op) {
    if (a.size() == b.size()) return Broadcast::None;
    if (a.size() == 1) return Broadcast::Left;
    if (b.size() == 1) return Broadcast::Right;
    throw DimensionError(std::string(op) + ": incompatible sizes (" +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

// out = f(a, b) elementwise with scalar broadcast on either side.
template <typename Fwd, typename BwdA, typename BwdB>
Tensor binary_op(const Tensor& a, const Tensor& b, Tape* tape, const char* name,
                 Fwd fwd, BwdA dfda, BwdB dfdb) {
    Broadcast mode = binary_mode(a, b, name);
    const Tensor& big = (mode == Broadcast::Left) ? b : a;
    Tensor out = Tensor::zeros(big.shape());
    auto av = a.data(), bv = b.data();
    auto ov = out.data();
    std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
        double x = av[mode == Broadcast::Left ? 0 : i];
        double y = bv[mode == Broadcast::Right ? 0 : i];
        ov[i] = fwd(x, y);
    }
    if (tape) {
        tape->record([a, b, out, mode, dfda, dfdb]() mutable {
            auto g = out.grad();
            auto ga = a.grad(), gb = b.grad();
            auto av2 = a.data(), bv2 = b.data();
            std::size_t n2 = out.size();
            for (std::size_t i = 0; i < n2; ++i) {
                double x = av2[mode == Broadcast::Left ? 0 : i];
                double y = bv2[mode == Broadcast::Right ? 0 : i];
                ga[mode == Broadcast::Left ? 0 : i] += g[i] * dfda(x, y);
                gb[mode == Broadcast::Right ? 0 : i] += g[i] * dfdb(x, y);
            }
        });
    }
    return out;
}

template <typename Fwd, typename Bwd>
Tensor unary_op(const Tensor& x, Tape* tape, Fwd fwd, Bwd dfdx) {
    Tensor out = Tensor::zeros(x.shape());
    auto xv = x.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < x.size(); ++i) ov[i] = fwd(xv[i]);
    if (tape) {
        tape->record([x, out, dfdx]() mutable {
            auto g = out.grad();
            auto gx = x.grad();
            auto xv2 = x.data();
            auto ov2 = out.data();
            for (std::size_t i = 0; i < x.size(); ++i) gx[i] += g[i] * dfdx(xv2[i], ov2[i]);
        });
    }
    return out;
}

// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            double aip = a[i * k + p];
            if (aip == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) c[i * n + j] += aip * b[p * n + j];
        }
}

// C[m x k] += A[m x n] * B^T where B is [k x n]
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t n, std::size_t k) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < n; ++p) acc += a[i * n + p] * b[j * n + p];
            c[i * k + j] += acc;
        }
}

// C[k x n] += A^T * B where A is [m x k], B is [m x n]
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            double aip = a[i * k + p];
            if (aip == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) c[p * n + j] += aip * b[i * n + j];
        }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b, Tape* tape) {
    return binary_op(a, b, tape, "add",
                     [](double x, double y) { return x + y; },
                     [](double, double) { return 1.0; },
                     [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b, Tape* tape) {
    return binary_op(a, b, tape, "sub",
                     [](double x, double y) { return x - y; },
                     [](double, double) { return 1.0; },
                     [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b, Tape* tape) {
    return binary_op(a, b, tape, "mul",
                     [](double x, double y) { return x * y; },
                     [](double, double y) { return y; },
                     [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b, Tape* tape) {
    return binary_op(a, b, tape, "div",
                     [](double x, double y) { return x / y; },
                     [](double, double y) { return 1.0 / y; },
                     [](double x, double y) { return -x / (y * y); });
}

Tensor scale(const Tensor& x, double c, Tape* tape) {
    return unary_op(x, tape,
                    [c](double v) { return c * v; },
                    [c](double, double) { return c; });
}

Tensor sin(const Tensor& x, Tape* tape) {
    return unary_op(x, tape,
                    [](double v) { return std::sin(v); },
                    [](double v, double) { return std::cos(v); });
}

Tensor relu(const Tensor& x, Tape* tape) {
    return unary_op(x, tape,
                    [](double v) { return v > 0.0 ? v : 0.0; },
                    [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& x, Tape* tape) {
    return unary_op(x, tape,
                    [](double v) { return stable_sigmoid(v); },
                    [](double, double y) { return y * (1.0 - y); });
}

Tensor softplus(const Tensor& x, Tape* tape) {
    return unary_op(x, tape,
                    [](double v) { return stable_softplus(v); },
                    [](double v, double) { return stable_sigmoid(v); });
}

Tensor exp(const Tensor& x, Tape* tape) {
    return unary_op(x, tape,
                    [](double v) { return std::exp(v); },
                    [](double, double y) { return y; });
}

Tensor log(const Tensor& x, Tape* tape) {
    return unary_op(x, tape,
                    [](double v) { return std::log(v); },
                    [](double v, double) { return 1.0 / v; });
}

Tensor square(const Tensor& x, Tape* tape) {
    return unary_op(x, tape,
                    [](double v) { return v * v; },
                    [](double v, double) { return 2.0 * v; });
}

Tensor clamp(const Tensor& x, double lo, double hi, Tape* tape) {
    if (!(lo < hi)) throw DimensionError("clamp: lo must be < hi");
    return unary_op(x, tape,
                    [lo, hi](double v) { return v < lo ? lo : (v > hi ? hi : v); },
                    [lo, hi](double v, double) { return (v > lo && v < hi) ? 1.0 : 0.0; });
}

Tensor matmul(const Tensor& a, const Tensor& b, Tape* tape) {
    if (a.rank() != 2 || b.rank() != 2)
        throw DimensionError("matmul: operands must be rank-2");
    std::size_t m = a.shape()[0], k = a.shape()[1];
    std::size_t k2 = b.shape()[0], n = b.shape()[1];
    if (k != k2)
        throw DimensionError("matmul: inner extents " + std::to_string(k) + " vs " + std::to_string(k2));
    Tensor out = Tensor::zeros({m, n});
    gemm_nn(a.data(), b.data(), out.data(), m, k, n);
    if (tape) {
        tape->record([a, b, out, m, k, n]() mutable {
            gemm_nt(out.grad(), b.data(), a.grad(), m, n, k);   // dA = G B^T
            gemm_tn(a.data(), out.grad(), b.grad(), m, k, n);   // dB = A^T G
        });
    }
    return out;
}

Tensor transpose(const Tensor& x, Tape* tape) {
    if (x.rank() != 2) throw DimensionError("transpose: operand must be rank-2");
    std::size_t r = x.shape()[0], c = x.shape()[1];
    Tensor out = Tensor::zeros({c, r});
    auto xv = x.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) ov[j * r + i] = xv[i * c + j];
    if (tape) {
        tape->record([x, out, r, c]() mutable {
            auto g = out.grad();
            auto gx = x.grad();
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += g[j * r + i];
        });
    }
    return out;
}

Tensor add_rows(const Tensor& a, const Tensor& bias, Tape* tape) {
    if (a.rank() != 2 || bias.rank() != 1)
        throw DimensionError("add_rows: expected [n x m] and [m]");
    std::size_t n = a.shape()[0], m = a.shape()[1];
    if (bias.size() != m)
        throw DimensionError("add_rows: bias extent " + std::to_string(bias.size()) +
                             " != column count " + std::to_string(m));
    Tensor out = Tensor::zeros({n, m});
    auto av = a.data(), bv = bias.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) ov[i * m + j] = av[i * m + j] + bv[j];
    if (tape) {
        tape->record([a, bias, out, n, m]() mutable {
            auto g = out.grad();
            auto ga = a.grad(), gb = bias.grad();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    ga[i * m + j] += g[i * m + j];
                    gb[j] += g[i * m + j];
                }
        });
    }
    return out;
}

Tensor sum(const Tensor& x, Tape* tape) {
    double acc = 0.0;
    for (double v : x.data()) acc += v;
    Tensor out = Tensor::scalar(acc);
    if (tape) {
        tape->record([x, out]() mutable {
            double g = out.grad()[0];
            auto gx = x.grad();
            for (std::size_t i = 0; i < x.size(); ++i) gx[i] += g;
        });
    }
    return out;
}

Tensor mean(const Tensor& x, Tape* tape) {
    if (x.size() == 0) throw DimensionError("mean: empty tensor");
    return scale(sum(x, tape), 1.0 / static_cast<double>(x.size()), tape);
}

Tensor dot(const Tensor& a, const Tensor& b, Tape* tape) {
    if (a.size() != b.size())
        throw DimensionError("dot: size mismatch " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    return sum(mul(a, b, tape), tape);
}

Tensor detach(const Tensor& x) {
    return x.clone();
}

}  // namespace dibmap
