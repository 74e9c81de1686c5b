#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dibmap/wire.hpp"

namespace dibmap {

// Epoch-based peers-state-exchange engine for one node.
//
// Round r for a node: broadcast State(r); once State(r) from every peer is
// on hand, run the node update exactly once, broadcast RoundComplete(r);
// once RoundComplete(r) from every peer (and itself) is on hand, advance to
// round r+1.  Messages are matched against their stamped round: stale ones
// are dropped, messages one round ahead (the most a compliant peer can race,
// since advancing twice would need this node's own RoundComplete) are
// buffered and replayed after the local round advances.  More than one round
// ahead is a protocol violation.
class ProtocolEngine {
public:
    using NodeUpdateFn = std::function<StateVector(
        const StateVector& own, const std::map<std::uint32_t, StateVector>& peers,
        std::uint32_t round)>;
    using EmitFn = std::function<void(const PeerMessage&)>;

    ProtocolEngine(std::uint32_t id, std::vector<std::uint32_t> peer_ids,
                   std::uint32_t max_round, StateVector initial,
                   NodeUpdateFn update, EmitFn emit);

    // Broadcasts the round-0 state.  With no peers this already runs every
    // round to completion.
    void start();

    void on_message(const PeerMessage& msg);

    bool done() const { return round_ >= max_round_; }
    std::uint32_t round() const { return round_; }
    std::uint32_t id() const { return id_; }
    const StateVector& own_state() const { return own_state_; }

    // Introspection for tests and diagnostics.
    const std::vector<std::uint32_t>& update_rounds() const { return update_rounds_; }
    std::size_t stale_dropped() const { return stale_dropped_; }
    std::size_t ignored_after_done() const { return ignored_after_done_; }
    std::size_t pending_count() const { return pending_.size(); }
    std::string progress_summary() const;

private:
    void ingest(const PeerMessage& msg);
    void advance();
    bool try_update();
    bool try_finish();
    void finish_round();

    std::uint32_t id_;
    std::vector<std::uint32_t> peer_ids_;
    std::uint32_t max_round_;
    StateVector own_state_;
    NodeUpdateFn update_;
    EmitFn emit_;

    std::uint32_t round_ = 0;
    bool started_ = false;
    bool did_update_ = false;
    bool own_complete_ = false;
    std::map<std::uint32_t, StateVector> peer_states_;
    std::set<std::uint32_t> peer_complete_;
    std::vector<PeerMessage> pending_;

    std::vector<std::uint32_t> update_rounds_;
    std::size_t stale_dropped_ = 0;
    std::size_t ignored_after_done_ = 0;
};

}  // namespace dibmap
