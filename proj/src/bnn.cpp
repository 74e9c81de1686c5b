#include "dibmap/bnn.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "dibmap/errors.hpp"

namespace dibmap {
namespace {

GaussianParam make_param(std::vector<std::size_t> shape, double bound, double rho_init, RngStream& rng) {
    GaussianParam p;
    p.mu = Tensor::uniform(shape, -bound, bound, rng);
    p.rho = Tensor::full(std::move(shape), rho_init);
    return p;
}

void copy_out(const Tensor& t, std::vector<double>& dst) {
    auto v = t.data();
    dst.insert(dst.end(), v.begin(), v.end());
}

void copy_in(Tensor& t, const std::vector<double>& src, std::size_t& pos) {
    auto v = t.data();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = src[pos++];
}

}  // namespace

MapperNet MapperNet::skeleton(std::size_t hidden, double omega) {
    if (hidden == 0) throw DimensionError("MapperNet: hidden width must be positive");
    MapperNet net;
    net.hidden_ = hidden;
    net.siren_.weights = Tensor::zeros({hidden, kInputDim});
    net.siren_.biases = Tensor::zeros({hidden});
    net.siren_.omega = omega;
    for (std::size_t l = 0; l < kHiddenCount; ++l) {
        BayesianLinear layer;
        layer.weights.mu = Tensor::zeros({hidden, hidden});
        layer.weights.rho = Tensor::zeros({hidden, hidden});
        layer.biases.mu = Tensor::zeros({hidden});
        layer.biases.rho = Tensor::zeros({hidden});
        net.layers_.push_back(std::move(layer));
    }
    BayesianLinear head;
    head.weights.mu = Tensor::zeros({1, hidden});
    head.weights.rho = Tensor::zeros({1, hidden});
    head.biases.mu = Tensor::zeros({1});
    head.biases.rho = Tensor::zeros({1});
    net.layers_.push_back(std::move(head));
    return net;
}

MapperNet MapperNet::init(std::uint64_t seed, std::size_t hidden, double omega) {
    MapperNet net = skeleton(hidden, omega);
    RngStream root = RngStream(seed).split("mapper-init");

    RngStream siren_rng = root.split("siren");
    double w_bound = std::sqrt(6.0 / static_cast<double>(kInputDim)) / omega;
    double b_bound = 1.0 / std::sqrt(static_cast<double>(kInputDim));
    net.siren_.weights = Tensor::uniform({hidden, kInputDim}, -w_bound, w_bound, siren_rng);
    net.siren_.biases = Tensor::uniform({hidden}, -b_bound, b_bound, siren_rng);

    for (std::size_t l = 0; l < net.layers_.size(); ++l) {
        RngStream lr = root.split("layer").split(l);
        std::size_t fan_in = hidden;
        std::size_t fan_out = (l + 1 == net.layers_.size()) ? 1 : hidden;
        double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
        net.layers_[l].weights = make_param({fan_out, fan_in}, bound, kRhoInit, lr);
        net.layers_[l].biases = make_param({fan_out}, bound, kRhoInit, lr);
    }
    return net;
}

Tensor MapperNet::forward_sample(const Tensor& coords, RngStream eps, Tape* tape,
                                 bool detach_sigma) const {
    if (coords.rank() != 2 || coords.shape()[1] != kInputDim)
        throw DimensionError("forward_sample: coords must be [n x 2]");
    if (coords.size() == 0) throw DimensionError("forward_sample: empty batch");
    coords.ensure_finite("forward_sample coords");

    Tensor x = matmul(coords, transpose(siren_.weights, tape), tape);
    x = sin(scale(add_rows(x, siren_.biases, tape), siren_.omega, tape), tape);

    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const BayesianLinear& layer = layers_[l];
        RngStream wr = eps.split(2 * l), br = eps.split(2 * l + 1);
        Tensor eps_w = Tensor::gaussian(layer.weights.mu.shape(), wr);
        Tensor eps_b = Tensor::gaussian(layer.biases.mu.shape(), br);

        Tape* sig_tape = detach_sigma ? nullptr : tape;
        Tensor sigma_w = softplus(detach_sigma ? detach(layer.weights.rho) : layer.weights.rho, sig_tape);
        Tensor sigma_b = softplus(detach_sigma ? detach(layer.biases.rho) : layer.biases.rho, sig_tape);

        Tensor w = add(layer.weights.mu, mul(sigma_w, eps_w, sig_tape), tape);
        Tensor b = add(layer.biases.mu, mul(sigma_b, eps_b, sig_tape), tape);

        x = add_rows(matmul(x, transpose(w, tape), tape), b, tape);
        if (l + 1 < layers_.size()) x = relu(x, tape);
    }
    return sigmoid(x, tape);
}

std::pair<Tensor, Tensor> MapperNet::predict_with_uncertainty(const Tensor& coords,
                                                              std::size_t passes,
                                                              RngStream rng) const {
    if (passes < 2) throw DimensionError("predict_with_uncertainty: needs passes >= 2");
    std::size_t n = coords.shape()[0];
    // Welford streaming moments per query point.
    std::vector<double> m(n, 0.0), m2(n, 0.0);
    for (std::size_t p = 0; p < passes; ++p) {
        Tensor out = forward_sample(coords, rng.split(p));
        auto ov = out.data();
        double k = static_cast<double>(p + 1);
        for (std::size_t i = 0; i < n; ++i) {
            double delta = ov[i] - m[i];
            m[i] += delta / k;
            m2[i] += delta * (ov[i] - m[i]);
        }
    }
    Tensor mean_t = Tensor::from_vector(std::move(m));
    std::vector<double> sd(n);
    for (std::size_t i = 0; i < n; ++i)
        sd[i] = std::sqrt(m2[i] / static_cast<double>(passes - 1));
    Tensor std_t = Tensor::from_vector(std::move(sd));
    mean_t.ensure_finite("predict mean");
    std_t.ensure_finite("predict std");
    return {mean_t, std_t};
}

std::vector<Tensor> MapperNet::mu_params() {
    std::vector<Tensor> out{siren_.weights, siren_.biases};
    for (auto& layer : layers_) {
        out.push_back(layer.weights.mu);
        out.push_back(layer.biases.mu);
    }
    return out;
}

std::vector<Tensor> MapperNet::rho_params() {
    std::vector<Tensor> out;
    for (auto& layer : layers_) {
        out.push_back(layer.weights.rho);
        out.push_back(layer.biases.rho);
    }
    return out;
}

std::vector<Tensor> MapperNet::mu_params() const {
    return const_cast<MapperNet*>(this)->mu_params();
}

std::vector<Tensor> MapperNet::rho_params() const {
    return const_cast<MapperNet*>(this)->rho_params();
}

std::size_t MapperNet::mu_size() const {
    std::size_t n = 0;
    for (const auto& t : mu_params()) n += t.size();
    return n;
}

std::size_t MapperNet::rho_size() const {
    std::size_t n = 0;
    for (const auto& t : rho_params()) n += t.size();
    return n;
}

StateVector MapperNet::flatten() const {
    StateVector s;
    s.mu_block.reserve(mu_size());
    s.rho_block.reserve(rho_size());
    for (const auto& t : mu_params()) copy_out(t, s.mu_block);
    for (const auto& t : rho_params()) copy_out(t, s.rho_block);
    s.model_fingerprint = fingerprint();
    return s;
}

void MapperNet::restore(const StateVector& state) {
    if (state.model_fingerprint != fingerprint())
        throw DimensionError("restore: model fingerprint mismatch");
    if (state.mu_block.size() != mu_size() || state.rho_block.size() != rho_size())
        throw DimensionError("restore: state block sizes do not match architecture");
    std::size_t pos = 0;
    for (auto& t : mu_params()) copy_in(t, state.mu_block, pos);
    pos = 0;
    for (auto& t : rho_params()) copy_in(t, state.rho_block, pos);
}

std::uint64_t MapperNet::fingerprint() const {
    std::uint64_t h = fnv1a64("dibmap-mapper-v1");
    auto mix_u64 = [&h](std::uint64_t v) { h = fnv1a64(&v, sizeof(v), h); };
    mix_u64(kInputDim);
    mix_u64(hidden_);
    mix_u64(layers_.size());
    std::uint64_t omega_bits;
    std::memcpy(&omega_bits, &siren_.omega, sizeof(omega_bits));
    mix_u64(omega_bits);
    return h;
}

void MapperNet::zero_grad() {
    siren_.weights.zero_grad();
    siren_.biases.zero_grad();
    for (auto& layer : layers_) {
        layer.weights.mu.zero_grad();
        layer.weights.rho.zero_grad();
        layer.biases.mu.zero_grad();
        layer.biases.rho.zero_grad();
    }
}

}  // namespace dibmap
