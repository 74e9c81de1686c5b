#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dibmap/autodiff.hpp"
#include "dibmap/state.hpp"
#include "dibmap/tensor.hpp"

namespace dibmap {

// Weight posterior N(mu, softplus(rho)^2), elementwise.
struct GaussianParam {
    Tensor mu;
    Tensor rho;
};

// Deterministic first layer: output = sin(omega * (W x + b)).
struct SirenLayer {
    Tensor weights;  // [out x in]
    Tensor biases;   // [out]
    double omega = 30.0;
};

struct BayesianLinear {
    GaussianParam weights;  // [out x in]
    GaussianParam biases;   // [out]
};

// Occupancy field over normalized coordinates in [-1, 1]^2:
// SIREN(2 -> hidden), four Bayesian hidden layers with ReLU, and a Bayesian
// sigmoid head mapping to occupancy probability.
class MapperNet {
public:
    static constexpr std::size_t kInputDim = 2;
    static constexpr std::size_t kHiddenCount = 4;
    static constexpr double kRhoInit = -5.0;

    MapperNet() = default;

    // Randomized initialization: SIREN weights uniform +/- sqrt(6/in)/omega,
    // Bayesian mu uniform +/- sqrt(1/in), all rho = kRhoInit.
    static MapperNet init(std::uint64_t seed, std::size_t hidden = 256, double omega = 30.0);
    // Zero-parameter net of the given architecture, for restore().
    static MapperNet skeleton(std::size_t hidden, double omega = 30.0);

    // One stochastic forward pass.  eps is taken by value: passing the same
    // stream twice replays identical weight noise, which is what gradient
    // checks rely on.  detach_sigma excludes rho from the taped graph so a
    // prediction loss produces no rho gradients.
    Tensor forward_sample(const Tensor& coords, RngStream eps, Tape* tape = nullptr,
                          bool detach_sigma = false) const;

    // Monte Carlo occupancy mean and sample standard deviation (n-1 in the
    // denominator) over `passes` stochastic forward passes.
    std::pair<Tensor, Tensor> predict_with_uncertainty(const Tensor& coords, std::size_t passes,
                                                       RngStream rng) const;

    StateVector flatten() const;
    // Loads a compatible state; throws DimensionError on shape or
    // fingerprint mismatch.
    void restore(const StateVector& state);

    std::uint64_t fingerprint() const;

    // Parameter tensors by optimization block, in flatten order.
    std::vector<Tensor> mu_params();
    std::vector<Tensor> rho_params();
    std::vector<Tensor> mu_params() const;
    std::vector<Tensor> rho_params() const;

    void zero_grad();

    std::size_t hidden() const { return hidden_; }
    double omega() const { return siren_.omega; }
    std::size_t mu_size() const;
    std::size_t rho_size() const;

    const SirenLayer& siren() const { return siren_; }
    const std::vector<BayesianLinear>& layers() const { return layers_; }

private:
    std::size_t hidden_ = 0;
    SirenLayer siren_;
    std::vector<BayesianLinear> layers_;  // kHiddenCount hidden + 1 output head
};

}  // namespace dibmap
