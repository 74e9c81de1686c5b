#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "dibmap/bnn.hpp"
#include "dibmap/losses.hpp"
#include "dibmap/world.hpp"

namespace dibmap {

// How each round's primal step is pulled toward the consensus target.
//   uniform_l2: one quadratic penalty with a single weight over the full
//               parameter vector (baseline DiNNO).
//   split_l2:   separate quadratic penalties and dual variables for the mu
//               and rho blocks.
//   split_kl:   quadratic penalty on mu; the rho block is regularized by the
//               KL divergence from the target posterior instead of raw
//               parameter distance.
enum class RegStrategy { uniform_l2, split_l2, split_kl };

enum class OptimizerKind { sgd, adam };

RegStrategy parse_strategy(const std::string& name);
std::string strategy_name(RegStrategy s);

struct ConsensusConfig {
    RegStrategy strategy = RegStrategy::split_kl;
    OptimizerKind optimizer = OptimizerKind::adam;
    double w_mu = 0.5;
    double w_rho = 0.05;
    // 0 means "use the matching penalty weight", the ADMM-style default.
    double dual_step_mu = 0.0;
    double dual_step_rho = 0.0;
    // Per-round geometric penalty schedule: round r runs with weights
    // w * w_scale^r (dual steps follow).  1.0 keeps the penalty constant.
    double w_scale = 1.0;
    std::size_t primal_iters = 20;
    double lr_mu = 1e-3;
    double lr_rho = 1e-3;
    std::size_t batch = 0;  // 0 = full dataset every iteration
    LossConfig loss;        // base loss kind, kl weight, prior
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    double effective_dual_step_mu() const { return dual_step_mu > 0.0 ? dual_step_mu : w_mu; }
    double effective_dual_step_rho() const { return dual_step_rho > 0.0 ? dual_step_rho : w_rho; }
};

// Dual variables and regularization targets, flat and aligned with the
// state blocks.
struct DualState {
    std::vector<double> duals_mu;
    std::vector<double> duals_rho;
    std::vector<double> target_mu;
    std::vector<double> target_rho;

    static DualState init(const StateVector& like);
};

struct PrimalRecord {
    std::uint32_t round = 0;
    std::size_t iter = 0;
    double pred_loss = 0.0;
    double loss_mu = 0.0;
    double loss_rho = 0.0;
};

// SGD or Adam over a fixed list of parameter tensors, reading their grad
// buffers.  Adam moments persist across calls.
class BlockOptimizer {
public:
    BlockOptimizer() = default;
    BlockOptimizer(OptimizerKind kind, double lr, double beta1, double beta2, double eps);
    void step(std::vector<Tensor>& params);

private:
    OptimizerKind kind_ = OptimizerKind::sgd;
    double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    std::uint64_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

// Runs primal_iters descent steps of the block-split augmented objective:
//   loss_mu  = pred_loss(mu; batch) + <theta_mu, duals_mu>
//              + w_mu * |theta_mu - target_mu|^2
//   loss_rho = <theta_rho, duals_rho> + w_rho * Reg(theta_rho, target)
//              + kl_weight * KL(posterior || prior)
// with sigma detached in the prediction path and mu detached in the rho
// terms, so neither block receives gradients from the other's loss.  With
// uniform_l2 the split collapses to one quadratic penalty over everything
// and the prediction/prior losses keep their full gradients.  Every
// stochastic draw comes from streams derived from round_stream.
std::vector<PrimalRecord> primal_step(MapperNet& net, const std::vector<TrainPoint>& data,
                                      const DualState& dual, const ConsensusConfig& cfg,
                                      BlockOptimizer& opt_mu, BlockOptimizer& opt_rho,
                                      std::uint32_t round, RngStream round_stream);

// One DiNNO round: consensus targets = elementwise mean over own and peer
// states (ids ordered, own included), dual ascent before the primal
// descent, then primal_step.  Returns the updated flat state and duals.
std::pair<StateVector, DualState> node_update(const StateVector& own,
                                              const std::map<std::uint32_t, StateVector>& peers,
                                              DualState dual, MapperNet& net,
                                              const std::vector<TrainPoint>& data,
                                              const ConsensusConfig& cfg, BlockOptimizer& opt_mu,
                                              BlockOptimizer& opt_rho, std::uint32_t own_id,
                                              std::uint32_t round, RngStream agent_stream,
                                              std::vector<PrimalRecord>* records = nullptr);

// Mean base loss over stochastic forward passes on a holdout set.
double validation_loss(const MapperNet& net, const std::vector<TrainPoint>& holdout,
                       std::size_t passes, RngStream rng, BaseLoss kind = BaseLoss::bce);

// Batch tensors for a point list: coords [n x 2], labels [n].
std::pair<Tensor, Tensor> make_batch(const std::vector<TrainPoint>& points);
std::pair<Tensor, Tensor> make_batch(const std::vector<TrainPoint>& points,
                                     std::span<const std::size_t> indices);

}  // namespace dibmap
