#pragma once

#include <span>

#include "dibmap/autodiff.hpp"
#include "dibmap/tensor.hpp"

namespace dibmap {

enum class BaseLoss { bce, mse };

// sigma = softplus(rho) and its inverse, the shared parameterization for all
// Gaussian weight posteriors.
double sigma_from_rho(double rho);
double rho_from_sigma(double sigma);

struct LossConfig {
    double kl_weight = 5e-3;
    BaseLoss base_loss = BaseLoss::bce;
    double prior_mu = 0.0;
    double prior_sigma = 1.0;
};

// Mean over elements of -[t log p + (1-t) log(1-p)], predictions clamped to
// [1e-7, 1 - 1e-7] before the logs.
Tensor bce_loss(const Tensor& pred, const Tensor& target, Tape* tape = nullptr);
Tensor mse_loss(const Tensor& pred, const Tensor& target, Tape* tape = nullptr);
Tensor base_loss(BaseLoss kind, const Tensor& pred, const Tensor& target, Tape* tape = nullptr);

// KL(N(mu0, sigma0^2) || N(mu1, sigma1^2)) in closed form.  Requires
// sigma0, sigma1 > 0.
double kl_gaussian(double mu0, double sigma0, double mu1, double sigma1);

// Elementwise closed-form KL summed over all elements.  Inputs are sigma
// tensors (already softplus-mapped); gradients flow through whatever taped
// expression produced them.
Tensor kl_gaussian(const Tensor& mu0, const Tensor& sigma0,
                   const Tensor& mu1, const Tensor& sigma1, Tape* tape = nullptr);

// Uniform Simpson grid for the numeric KL cross-check.
struct QuadGrid {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t points = 0;  // interval count; must be even and >= 2

    // Spans k_sigma standard deviations around both means.
    static QuadGrid spanning(double mu0, double sigma0, double mu1, double sigma1,
                             double k_sigma = 10.0, std::size_t points = 20000);
    // Throws ConfigError unless the grid covers mu +/- 8 sigma for both
    // distributions and has usable resolution.
    void validate(double mu0, double sigma0, double mu1, double sigma1) const;
};

// Direct quadrature of the KL integrand between two Gaussian densities.
double kl_numeric(double mu0, double sigma0, double mu1, double sigma1, const QuadGrid& grid);
double kl_numeric(double mu0, double sigma0, double mu1, double sigma1);

// total = base + kl_weight * kl
double total_loss(double base, double kl, const LossConfig& cfg);

// Sum of squared differences against a constant target.
Tensor l2_reg(const Tensor& params, const Tensor& target, Tape* tape = nullptr);

}  // namespace dibmap
