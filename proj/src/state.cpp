#include "dibmap/state.hpp"

#include <cmath>
#include <string>

#include "dibmap/errors.hpp"

namespace dibmap {

void ensure_finite(const StateVector& s, const char* what) {
    for (double v : s.mu_block)
        if (!std::isfinite(v)) throw NumericalError(std::string(what) + ": non-finite mu element");
    for (double v : s.rho_block)
        if (!std::isfinite(v)) throw NumericalError(std::string(what) + ": non-finite rho element");
}

StateVector mean_state(const std::vector<const StateVector*>& states) {
    if (states.empty()) throw DimensionError("mean_state: no states");
    const StateVector& first = *states[0];
    StateVector out;
    out.mu_block.assign(first.mu_block.size(), 0.0);
    out.rho_block.assign(first.rho_block.size(), 0.0);
    out.model_fingerprint = first.model_fingerprint;
    for (const StateVector* s : states) {
        if (!s->same_shape(first))
            throw DimensionError("mean_state: incompatible state shapes or fingerprints");
        for (std::size_t i = 0; i < out.mu_block.size(); ++i) out.mu_block[i] += s->mu_block[i];
        for (std::size_t i = 0; i < out.rho_block.size(); ++i) out.rho_block[i] += s->rho_block[i];
    }
    double inv = 1.0 / static_cast<double>(states.size());
    for (double& v : out.mu_block) v *= inv;
    for (double& v : out.rho_block) v *= inv;
    return out;
}

double max_abs_diff(const StateVector& a, const StateVector& b) {
    if (!a.same_shape(b)) throw DimensionError("max_abs_diff: incompatible states");
    double m = 0.0;
    for (std::size_t i = 0; i < a.mu_block.size(); ++i)
        m = std::max(m, std::abs(a.mu_block[i] - b.mu_block[i]));
    for (std::size_t i = 0; i < a.rho_block.size(); ++i)
        m = std::max(m, std::abs(a.rho_block[i] - b.rho_block[i]));
    return m;
}

double consensus_residual(const std::vector<StateVector>& states) {
    if (states.empty()) throw DimensionError("consensus_residual: no states");
    std::vector<const StateVector*> ptrs;
    ptrs.reserve(states.size());
    for (const auto& s : states) ptrs.push_back(&s);
    StateVector center = mean_state(ptrs);
    double acc = 0.0;
    for (const auto& s : states) acc += max_abs_diff(s, center);
    return acc / static_cast<double>(states.size());
}

}  // namespace dibmap
