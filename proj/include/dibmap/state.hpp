#pragma once

#include <cstdint>
#include <vector>

namespace dibmap {

// Flat view of a model's parameters exchanged between peers.  mu_block holds
// every location parameter (deterministic SIREN weights included) and
// rho_block every scale parameter, both in the model's fixed layer order.
struct StateVector {
    std::vector<double> mu_block;
    std::vector<double> rho_block;
    std::uint64_t model_fingerprint = 0;

    std::size_t total_size() const { return mu_block.size() + rho_block.size(); }
    bool same_shape(const StateVector& other) const {
        return mu_block.size() == other.mu_block.size() &&
               rho_block.size() == other.rho_block.size() &&
               model_fingerprint == other.model_fingerprint;
    }
};

// Throws NumericalError if any element is non-finite.
void ensure_finite(const StateVector& s, const char* what);

// Elementwise mean of identically shaped states; throws DimensionError on
// shape or fingerprint mismatch, or an empty input list.
StateVector mean_state(const std::vector<const StateVector*>& states);

// max |a - b| over both blocks.
double max_abs_diff(const StateVector& a, const StateVector& b);

// Mean over agents of max|state_i - consensus_mean|, the round residual.
double consensus_residual(const std::vector<StateVector>& states);

}  // namespace dibmap
