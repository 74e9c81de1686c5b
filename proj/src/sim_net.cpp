#include "dibmap/sim_net.hpp"

#include "dibmap/errors.hpp"

namespace dibmap {

SimNetwork::SimNetwork(std::vector<StateVector> initial_states, std::uint32_t max_round,
                       UpdateFactory factory, std::uint64_t seed, std::uint64_t max_skew)
    : jitter_(RngStream(seed).split("sim-net-jitter")), max_skew_(max_skew) {
    if (initial_states.empty()) throw ProtocolError("sim: need at least one peer");
    const auto n = static_cast<std::uint32_t>(initial_states.size());
    for (std::uint32_t id = 0; id < n; ++id) {
        std::vector<std::uint32_t> peers;
        for (std::uint32_t j = 0; j < n; ++j)
            if (j != id) peers.push_back(j);
        engines_.push_back(std::make_unique<ProtocolEngine>(
            id, std::move(peers), max_round, std::move(initial_states[id]), factory(id),
            [this, id](const PeerMessage& msg) { broadcast(id, msg); }));
    }
    // Exact message volume of a clean run (per node per round: one State and
    // one RoundComplete to every peer) plus slack; exceeding it means a
    // livelock bug.
    delivery_budget_ = static_cast<std::size_t>(n) * (n - 1) * max_round * 2 + 64;
}

void SimNetwork::broadcast(std::uint32_t from, const PeerMessage& msg) {
    for (std::uint32_t to = 0; to < engines_.size(); ++to) {
        if (to == from) continue;
        std::uint64_t jitter = max_skew_ > 0 ? jitter_.next_u64() % (max_skew_ + 1) : 0;
        queue_.push(InFlight{seq_ + jitter, seq_, to, msg});
        ++seq_;
    }
}

bool SimNetwork::run() {
    for (auto& e : engines_) e->start();
    while (!queue_.empty()) {
        if (deliveries_ > delivery_budget_)
            throw ProtocolError("sim: delivery budget exceeded (livelock)");
        InFlight next = queue_.top();
        queue_.pop();
        ++deliveries_;
        engines_[next.to]->on_message(next.msg);
    }
    for (const auto& e : engines_)
        if (!e->done()) return false;
    return true;
}

std::vector<StateVector> SimNetwork::final_states() const {
    std::vector<StateVector> out;
    out.reserve(engines_.size());
    for (const auto& e : engines_) out.push_back(e->own_state());
    return out;
}

}  // namespace dibmap
