#pragma once

#include <cstdint>
#include <memory>
#include <queue>
#include <vector>

#include "dibmap/protocol.hpp"
#include "dibmap/rng.hpp"

namespace dibmap {

// Deterministic in-process message scheduler for a full mesh of protocol
// engines.  Every broadcast fans out into per-recipient deliveries; each
// delivery is assigned priority = enqueue_seq + jitter with jitter drawn
// uniformly from [0, max_skew], and deliveries happen in priority order
// (ties by sequence).  max_skew = 0 is global FIFO; larger values reorder
// messages adversarially while staying deterministic in the seed.
class SimNetwork {
public:
    using UpdateFactory = std::function<ProtocolEngine::NodeUpdateFn(std::uint32_t id)>;

    SimNetwork(std::vector<StateVector> initial_states, std::uint32_t max_round,
               UpdateFactory factory, std::uint64_t seed, std::uint64_t max_skew);

    // Runs to quiescence.  Returns true if every engine completed all
    // rounds; false means deadlock (no deliverable messages left).  Throws
    // whatever the engines throw on protocol violations.
    bool run();

    ProtocolEngine& engine(std::uint32_t id) { return *engines_[id]; }
    std::size_t peer_count() const { return engines_.size(); }
    std::size_t deliveries() const { return deliveries_; }
    std::vector<StateVector> final_states() const;

private:
    struct InFlight {
        std::uint64_t priority;
        std::uint64_t seq;
        std::uint32_t to;
        PeerMessage msg;
        bool operator>(const InFlight& o) const {
            if (priority != o.priority) return priority > o.priority;
            if (seq != o.seq) return seq > o.seq;
            return to > o.to;
        }
    };

    void broadcast(std::uint32_t from, const PeerMessage& msg);

    std::vector<std::unique_ptr<ProtocolEngine>> engines_;
    std::priority_queue<InFlight, std::vector<InFlight>, std::greater<>> queue_;
    RngStream jitter_;
    std::uint64_t max_skew_;
    std::uint64_t seq_ = 0;
    std::size_t deliveries_ = 0;
    std::size_t delivery_budget_ = 0;
};

}  // namespace dibmap
