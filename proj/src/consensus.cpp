#include "dibmap/consensus.hpp"

#include <algorithm>
#include <cmath>

#include "dibmap/errors.hpp"

namespace dibmap {

RegStrategy parse_strategy(const std::string& name) {
    if (name == "uniform_l2") return RegStrategy::uniform_l2;
    if (name == "split_l2") return RegStrategy::split_l2;
    if (name == "split_kl") return RegStrategy::split_kl;
    throw ConfigError("unknown consensus strategy: " + name);
}

std::string strategy_name(RegStrategy s) {
    switch (s) {
        case RegStrategy::uniform_l2: return "uniform_l2";
        case RegStrategy::split_l2: return "split_l2";
        case RegStrategy::split_kl: return "split_kl";
    }
    return "?";
}

DualState DualState::init(const StateVector& like) {
    DualState d;
    d.duals_mu.assign(like.mu_block.size(), 0.0);
    d.duals_rho.assign(like.rho_block.size(), 0.0);
    d.target_mu = like.mu_block;
    d.target_rho = like.rho_block;
    return d;
}

BlockOptimizer::BlockOptimizer(OptimizerKind kind, double lr, double beta1, double beta2,
                               double eps)
    : kind_(kind), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void BlockOptimizer::step(std::vector<Tensor>& params) {
    if (kind_ == OptimizerKind::sgd) {
        for (Tensor& p : params) {
            auto x = p.data();
            auto g = p.grad();
            for (std::size_t i = 0; i < x.size(); ++i) x[i] -= lr_ * g[i];
        }
        return;
    }
    if (m_.empty()) {
        for (const Tensor& p : params) {
            m_.emplace_back(p.size(), 0.0);
            v_.emplace_back(p.size(), 0.0);
        }
    }
    if (m_.size() != params.size())
        throw DimensionError("optimizer: parameter list changed between steps");
    ++t_;
    double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto x = params[k].data();
        auto g = params[k].grad();
        if (m_[k].size() != x.size())
            throw DimensionError("optimizer: parameter extent changed between steps");
        for (std::size_t i = 0; i < x.size(); ++i) {
            m_[k][i] = beta1_ * m_[k][i] + (1.0 - beta1_) * g[i];
            v_[k][i] = beta2_ * v_[k][i] + (1.0 - beta2_) * g[i] * g[i];
            double mhat = m_[k][i] / c1;
            double vhat = v_[k][i] / c2;
            x[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

namespace {

// Slices a flat block into constant tensors shaped like each parameter.
std::vector<Tensor> slice_like(const std::vector<double>& flat, const std::vector<Tensor>& params,
                               const char* what) {
    std::size_t total = 0;
    for (const Tensor& p : params) total += p.size();
    if (flat.size() != total)
        throw DimensionError(std::string(what) + ": flat block does not match parameter extents");
    std::vector<Tensor> out;
    out.reserve(params.size());
    std::size_t at = 0;
    for (const Tensor& p : params) {
        Tensor t = Tensor::zeros(p.shape());
        auto d = t.data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = flat[at + i];
        at += d.size();
        out.push_back(std::move(t));
    }
    return out;
}

Tensor add_scalar_terms(Tensor acc, const Tensor& term, Tape* tape) {
    return add(acc, term, tape);
}

}  // namespace

std::vector<PrimalRecord> primal_step(MapperNet& net, const std::vector<TrainPoint>& data,
                                      const DualState& dual, const ConsensusConfig& cfg,
                                      BlockOptimizer& opt_mu, BlockOptimizer& opt_rho,
                                      std::uint32_t round, RngStream round_stream) {
    if (data.empty()) throw ConfigError("primal_step: empty dataset");
    if (cfg.primal_iters == 0) throw ConfigError("primal_step: needs at least one iteration");

    auto mu_params = net.mu_params();
    auto rho_params = net.rho_params();
    const auto duals_mu = slice_like(dual.duals_mu, mu_params, "duals_mu");
    const auto duals_rho = slice_like(dual.duals_rho, rho_params, "duals_rho");
    const auto target_mu = slice_like(dual.target_mu, mu_params, "target_mu");
    const auto target_rho = slice_like(dual.target_rho, rho_params, "target_rho");

    const bool uniform = cfg.strategy == RegStrategy::uniform_l2;
    const double boost = std::pow(cfg.w_scale, static_cast<double>(round));
    const double w_mu = cfg.w_mu * boost;
    const double w_rho = cfg.w_rho * boost;
    const Tensor prior_mu = Tensor::scalar(cfg.loss.prior_mu);
    const Tensor prior_sigma = Tensor::scalar(cfg.loss.prior_sigma);

    std::vector<PrimalRecord> records;
    records.reserve(cfg.primal_iters);

    RngStream eps_root = round_stream.split("eps");
    RngStream batch_root = round_stream.split("batch");

    for (std::size_t iter = 0; iter < cfg.primal_iters; ++iter) {
        Tape tape;
        net.zero_grad();

        Tensor coords, labels;
        if (cfg.batch > 0 && cfg.batch < data.size()) {
            RngStream bs = batch_root.split(iter);
            std::vector<std::size_t> idx(cfg.batch);
            for (auto& v : idx) v = static_cast<std::size_t>(bs.next_u64() % data.size());
            std::tie(coords, labels) = make_batch(data, idx);
        } else {
            std::tie(coords, labels) = make_batch(data);
        }

        Tensor pred = net.forward_sample(coords, eps_root.split(iter), &tape, !uniform);
        Tensor pred_loss = base_loss(cfg.loss.base_loss, pred, labels, &tape);

        // mu block: prediction + dual inner product + quadratic pull.
        Tensor loss_mu = pred_loss;
        for (std::size_t k = 0; k < mu_params.size(); ++k) {
            loss_mu = add_scalar_terms(loss_mu, dot(mu_params[k], duals_mu[k], &tape), &tape);
            loss_mu = add_scalar_terms(
                loss_mu, scale(l2_reg(mu_params[k], target_mu[k], &tape), w_mu, &tape), &tape);
        }

        // rho block: dual inner product, consensus regularizer, prior pull.
        Tensor loss_rho = Tensor::scalar(0.0);
        for (std::size_t k = 0; k < rho_params.size(); ++k) {
            loss_rho = add_scalar_terms(loss_rho, dot(rho_params[k], duals_rho[k], &tape), &tape);
            if (cfg.strategy == RegStrategy::split_kl) {
                // Posterior distance to the target posterior, means pinned.
                std::size_t mu_k = k + 2;  // rho list skips the SIREN tensors
                Tensor mu_now = detach(mu_params[mu_k]);
                Tensor sigma_now = softplus(rho_params[k], &tape);
                Tensor sigma_tgt = softplus(target_rho[k]);
                loss_rho = add_scalar_terms(
                    loss_rho,
                    scale(kl_gaussian(mu_now, sigma_now, mu_now, sigma_tgt, &tape), w_rho, &tape),
                    &tape);
            } else {
                loss_rho = add_scalar_terms(
                    loss_rho,
                    scale(l2_reg(rho_params[k], target_rho[k], &tape), uniform ? w_mu : w_rho,
                          &tape),
                    &tape);
            }
        }
        if (cfg.loss.kl_weight > 0.0) {
            // Weight-space pull toward the prior (the KL term of the local
            // objective).  The mu block keeps its gradient only under
            // uniform_l2; the split strategies route this term to rho.
            Tensor kl_prior = Tensor::scalar(0.0);
            for (std::size_t k = 0; k < rho_params.size(); ++k) {
                std::size_t mu_k = k + 2;
                Tensor mu_term = uniform ? mu_params[mu_k] : detach(mu_params[mu_k]);
                Tensor sigma_term = softplus(rho_params[k], &tape);
                kl_prior = add_scalar_terms(
                    kl_prior, kl_gaussian(mu_term, sigma_term, prior_mu, prior_sigma, &tape),
                    &tape);
            }
            // Per-datapoint ELBO scaling: the base loss is a mean over the
            // batch, so the summed weight-space KL is amortized over the
            // dataset it competes with.
            double kl_scale = cfg.loss.kl_weight / static_cast<double>(data.size());
            loss_rho = add_scalar_terms(loss_rho, scale(kl_prior, kl_scale, &tape), &tape);
        }

        Tensor total = add(loss_mu, loss_rho, &tape);
        tape.backward(total);

        PrimalRecord rec;
        rec.round = round;
        rec.iter = iter;
        rec.pred_loss = pred_loss.value();
        rec.loss_mu = loss_mu.value();
        rec.loss_rho = loss_rho.value();
        if (!std::isfinite(rec.loss_mu) || !std::isfinite(rec.loss_rho))
            throw NumericalError("primal_step: non-finite loss");
        records.push_back(rec);

        opt_mu.step(mu_params);
        opt_rho.step(rho_params);
    }
    return records;
}

std::pair<StateVector, DualState> node_update(const StateVector& own,
                                              const std::map<std::uint32_t, StateVector>& peers,
                                              DualState dual, MapperNet& net,
                                              const std::vector<TrainPoint>& data,
                                              const ConsensusConfig& cfg, BlockOptimizer& opt_mu,
                                              BlockOptimizer& opt_rho, std::uint32_t own_id,
                                              std::uint32_t round, RngStream agent_stream,
                                              std::vector<PrimalRecord>* records) {
    // Consensus target: mean over own and peer states in ascending id order,
    // so every agent reduces the identical float sequence.
    std::vector<std::pair<std::uint32_t, const StateVector*>> ordered;
    ordered.reserve(peers.size() + 1);
    ordered.emplace_back(own_id, &own);
    for (const auto& [id, s] : peers) {
        if (id == own_id) throw ProtocolError("node_update: peer list contains own id");
        ordered.emplace_back(id, &s);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<const StateVector*> states;
    states.reserve(ordered.size());
    for (const auto& [id, s] : ordered) states.push_back(s);
    StateVector target = mean_state(states);

    // Dual ascent on the disagreement, before the primal descent.  The steps
    // ride the same schedule as the round's quadratic penalty.
    const double boost = std::pow(cfg.w_scale, static_cast<double>(round));
    const double step_mu = cfg.effective_dual_step_mu() * boost;
    const double step_rho = (cfg.strategy == RegStrategy::uniform_l2
                                 ? cfg.effective_dual_step_mu()
                                 : cfg.effective_dual_step_rho()) *
                            boost;
    if (dual.duals_mu.size() != own.mu_block.size() ||
        dual.duals_rho.size() != own.rho_block.size())
        throw DimensionError("node_update: dual state does not match the model");
    for (std::size_t i = 0; i < dual.duals_mu.size(); ++i)
        dual.duals_mu[i] += step_mu * (own.mu_block[i] - target.mu_block[i]);
    for (std::size_t i = 0; i < dual.duals_rho.size(); ++i)
        dual.duals_rho[i] += step_rho * (own.rho_block[i] - target.rho_block[i]);
    dual.target_mu = target.mu_block;
    dual.target_rho = target.rho_block;

    net.restore(own);
    RngStream round_stream = agent_stream.split("round").split(round);
    auto recs = primal_step(net, data, dual, cfg, opt_mu, opt_rho, round, round_stream);
    if (records) *records = std::move(recs);

    StateVector next = net.flatten();
    ensure_finite(next, "node_update state");
    return {std::move(next), std::move(dual)};
}

double validation_loss(const MapperNet& net, const std::vector<TrainPoint>& holdout,
                       std::size_t passes, RngStream rng, BaseLoss kind) {
    if (holdout.empty()) throw ConfigError("validation_loss: empty holdout");
    if (passes == 0) throw ConfigError("validation_loss: needs passes >= 1");
    auto [coords, labels] = make_batch(holdout);
    double acc = 0.0;
    for (std::size_t p = 0; p < passes; ++p) {
        Tensor pred = net.forward_sample(coords, rng.split(p));
        acc += base_loss(kind, pred, labels).value();
    }
    return acc / static_cast<double>(passes);
}

std::pair<Tensor, Tensor> make_batch(const std::vector<TrainPoint>& points) {
    std::vector<std::size_t> idx(points.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return make_batch(points, idx);
}

std::pair<Tensor, Tensor> make_batch(const std::vector<TrainPoint>& points,
                                     std::span<const std::size_t> indices) {
    if (indices.empty()) throw DimensionError("make_batch: empty batch");
    std::vector<double> coords(indices.size() * 2);
    std::vector<double> labels(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const TrainPoint& p = points[indices[i]];
        coords[2 * i] = p.x;
        coords[2 * i + 1] = p.y;
        labels[i] = p.label;
    }
    return {Tensor({indices.size(), 2}, std::move(coords)), Tensor::from_vector(std::move(labels))};
}

}  // namespace dibmap
