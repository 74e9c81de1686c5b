#include "dibmap/losses.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dibmap/errors.hpp"

namespace dibmap {

double sigma_from_rho(double rho) { return stable_softplus(rho); }

double rho_from_sigma(double sigma) {
    if (!(sigma > 0.0)) throw NumericalError("rho_from_sigma: sigma must be positive");
    // inverse softplus: log(e^sigma - 1), stable for large sigma
    return sigma > 30.0 ? sigma : std::log(std::expm1(sigma));
}

Tensor bce_loss(const Tensor& pred, const Tensor& target, Tape* tape) {
    if (pred.size() != target.size())
        throw DimensionError("bce_loss: pred/target size mismatch");
    if (pred.size() == 0) throw DimensionError("bce_loss: empty batch");
    Tensor p = clamp(pred, 1e-7, 1.0 - 1e-7, tape);
    Tensor one = Tensor::scalar(1.0);
    Tensor term_pos = mul(target, log(p, tape), tape);
    Tensor term_neg = mul(sub(one, target, tape), log(sub(one, p, tape), tape), tape);
    return scale(mean(add(term_pos, term_neg, tape), tape), -1.0, tape);
}

Tensor mse_loss(const Tensor& pred, const Tensor& target, Tape* tape) {
    if (pred.size() != target.size())
        throw DimensionError("mse_loss: pred/target size mismatch");
    if (pred.size() == 0) throw DimensionError("mse_loss: empty batch");
    return mean(square(sub(pred, target, tape), tape), tape);
}

Tensor base_loss(BaseLoss kind, const Tensor& pred, const Tensor& target, Tape* tape) {
    return kind == BaseLoss::bce ? bce_loss(pred, target, tape) : mse_loss(pred, target, tape);
}

double kl_gaussian(double mu0, double sigma0, double mu1, double sigma1) {
    if (!(sigma0 > 0.0) || !(sigma1 > 0.0))
        throw NumericalError("kl_gaussian: sigmas must be positive");
    double t = sigma0 / sigma1;
    double d = (mu0 - mu1) / sigma1;
    return 0.5 * (t * t + d * d - 1.0) - std::log(t);
}

Tensor kl_gaussian(const Tensor& mu0, const Tensor& sigma0,
                   const Tensor& mu1, const Tensor& sigma1, Tape* tape) {
    if (mu0.size() != sigma0.size())
        throw DimensionError("kl_gaussian: posterior operand size mismatch");
    auto fits = [&](const Tensor& t) { return t.size() == 1 || t.size() == mu0.size(); };
    if (!fits(mu1) || !fits(sigma1))
        throw DimensionError("kl_gaussian: reference operands must match or be scalar");
    // Centered form 0.5 ((s0/s1)^2 + ((m0-m1)/s1)^2 - 1 - 2 log(s0/s1)):
    // identical posteriors hit the exact ratio 1.0, where both the value and
    // the gradient are floating-point zero, so a converged rho block stays
    // bitwise fixed under any optimizer.
    Tensor ratio = div(sigma0, sigma1, tape);
    Tensor shift = div(sub(mu0, mu1, tape), sigma1, tape);
    Tensor per_elem = sub(add(square(ratio, tape), square(shift, tape), tape),
                          add(Tensor::scalar(1.0), scale(log(ratio, tape), 2.0, tape), tape), tape);
    return scale(sum(per_elem, tape), 0.5, tape);
}

QuadGrid QuadGrid::spanning(double mu0, double sigma0, double mu1, double sigma1,
                            double k_sigma, std::size_t points) {
    QuadGrid g;
    g.lo = std::min(mu0 - k_sigma * sigma0, mu1 - k_sigma * sigma1);
    g.hi = std::max(mu0 + k_sigma * sigma0, mu1 + k_sigma * sigma1);
    g.points = points + (points % 2);
    return g;
}

void QuadGrid::validate(double mu0, double sigma0, double mu1, double sigma1) const {
    if (!(hi > lo)) throw ConfigError("kl_numeric: degenerate grid (hi <= lo)");
    if (points < 2 || points % 2 != 0)
        throw ConfigError("kl_numeric: grid needs an even interval count >= 2");
    auto covered = [&](double mu, double sigma) {
        return lo <= mu - 8.0 * sigma && hi >= mu + 8.0 * sigma;
    };
    if (!covered(mu0, sigma0) || !covered(mu1, sigma1))
        throw ConfigError("kl_numeric: grid must span at least 8 sigma around both means");
    // Resolution sanity: the narrower Gaussian needs several points per sigma.
    double h = (hi - lo) / static_cast<double>(points);
    if (h > 0.25 * std::min(sigma0, sigma1))
        throw ConfigError("kl_numeric: grid too coarse for the narrower density");
}

double kl_numeric(double mu0, double sigma0, double mu1, double sigma1, const QuadGrid& grid) {
    if (!(sigma0 > 0.0) || !(sigma1 > 0.0))
        throw NumericalError("kl_numeric: sigmas must be positive");
    grid.validate(mu0, sigma0, mu1, sigma1);
    const double log_norm0 = -std::log(sigma0 * std::sqrt(2.0 * std::numbers::pi));
    const double log_norm1 = -std::log(sigma1 * std::sqrt(2.0 * std::numbers::pi));
    auto integrand = [&](double x) {
        double z0 = (x - mu0) / sigma0;
        double z1 = (x - mu1) / sigma1;
        double log_p = log_norm0 - 0.5 * z0 * z0;
        double log_q = log_norm1 - 0.5 * z1 * z1;
        return std::exp(log_p) * (log_p - log_q);
    };
    // composite Simpson
    double h = (grid.hi - grid.lo) / static_cast<double>(grid.points);
    double acc = integrand(grid.lo) + integrand(grid.hi);
    for (std::size_t i = 1; i < grid.points; ++i)
        acc += integrand(grid.lo + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

double kl_numeric(double mu0, double sigma0, double mu1, double sigma1) {
    QuadGrid g = QuadGrid::spanning(mu0, sigma0, mu1, sigma1);
    // Keep step size fine relative to the narrower density.
    double h_needed = 0.05 * std::min(sigma0, sigma1);
    std::size_t n = static_cast<std::size_t>((g.hi - g.lo) / h_needed) + 1;
    if (n > g.points) g.points = n + (n % 2);
    return kl_numeric(mu0, sigma0, mu1, sigma1, g);
}

double total_loss(double base, double kl, const LossConfig& cfg) {
    if (kl < 0.0 && kl > -1e-12) kl = 0.0;  // tolerate tiny negative rounding
    if (kl < 0.0) throw NumericalError("total_loss: negative KL");
    if (!std::isfinite(base) || !std::isfinite(kl))
        throw NumericalError("total_loss: non-finite component");
    return base + cfg.kl_weight * kl;
}

Tensor l2_reg(const Tensor& params, const Tensor& target, Tape* tape) {
    if (params.size() != target.size())
        throw DimensionError("l2_reg: size mismatch");
    return sum(square(sub(params, target, tape), tape), tape);
}

}  // namespace dibmap
