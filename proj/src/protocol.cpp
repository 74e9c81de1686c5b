#include "dibmap/protocol.hpp"

#include <algorithm>
#include <sstream>

#include "dibmap/errors.hpp"

namespace dibmap {

ProtocolEngine::ProtocolEngine(std::uint32_t id, std::vector<std::uint32_t> peer_ids,
                               std::uint32_t max_round, StateVector initial,
                               NodeUpdateFn update, EmitFn emit)
    : id_(id),
      peer_ids_(std::move(peer_ids)),
      max_round_(max_round),
      own_state_(std::move(initial)),
      update_(std::move(update)),
      emit_(std::move(emit)) {
    if (max_round_ == 0) throw ProtocolError("protocol: max_round must be >= 1");
    std::sort(peer_ids_.begin(), peer_ids_.end());
    if (std::adjacent_find(peer_ids_.begin(), peer_ids_.end()) != peer_ids_.end())
        throw ProtocolError("protocol: duplicate peer id");
    if (std::binary_search(peer_ids_.begin(), peer_ids_.end(), id_))
        throw ProtocolError("protocol: own id listed as peer");
}

void ProtocolEngine::start() {
    if (started_) throw ProtocolError("protocol: start() called twice");
    started_ = true;
    emit_(PeerMessage::make_state(id_, 0, own_state_));
    advance();
}

void ProtocolEngine::on_message(const PeerMessage& msg) {
    if (!started_) throw ProtocolError("protocol: message before start()");
    ingest(msg);
    advance();
}

void ProtocolEngine::ingest(const PeerMessage& msg) {
    if (!std::binary_search(peer_ids_.begin(), peer_ids_.end(), msg.sender))
        throw ProtocolError("protocol: message from unknown sender " + std::to_string(msg.sender));
    if ((msg.kind == MsgKind::State) != msg.state.has_value())
        throw ProtocolError("protocol: malformed message (payload/kind mismatch)");
    if (msg.round >= max_round_)
        throw ProtocolError("protocol: message round " + std::to_string(msg.round) +
                            " outside the schedule (max_round " + std::to_string(max_round_) + ")");
    if (msg.state && !msg.state->same_shape(own_state_))
        throw ProtocolError("protocol: peer state shape/fingerprint mismatch");
    if (msg.state) {
        try {
            ensure_finite(*msg.state, "peer state");
        } catch (const NumericalError& e) {
            throw ProtocolError("protocol: " + std::string(e.what()) + " from sender " +
                                std::to_string(msg.sender));
        }
    }

    if (done()) {
        ++ignored_after_done_;
        return;
    }
    if (msg.round < round_) {
        ++stale_dropped_;
        return;
    }
    if (msg.round > round_ + 1)
        throw ProtocolError("protocol: peer " + std::to_string(msg.sender) + " is " +
                            std::to_string(msg.round - round_) + " rounds ahead (skew bound is 1)");
    if (msg.round == round_ + 1) {
        pending_.push_back(msg);
        return;
    }
    if (msg.kind == MsgKind::State) {
        peer_states_.emplace(msg.sender, *msg.state);
    } else {
        peer_complete_.insert(msg.sender);
    }
}

void ProtocolEngine::advance() {
    bool progressed = true;
    while (progressed && !done()) {
        progressed = false;
        if (try_update()) progressed = true;
        if (try_finish()) progressed = true;
    }
}

bool ProtocolEngine::try_update() {
    if (did_update_ || peer_states_.size() < peer_ids_.size()) return false;
    StateVector next = update_(own_state_, peer_states_, round_);
    ensure_finite(next, "node update result");
    if (!next.same_shape(own_state_))
        throw ProtocolError("protocol: node update changed the state shape");
    own_state_ = std::move(next);
    update_rounds_.push_back(round_);
    did_update_ = true;
    own_complete_ = true;
    peer_states_.clear();
    emit_(PeerMessage::make_round_complete(id_, round_, own_state_.model_fingerprint));
    return true;
}

bool ProtocolEngine::try_finish() {
    if (!own_complete_ || peer_complete_.size() < peer_ids_.size()) return false;
    finish_round();
    return true;
}

void ProtocolEngine::finish_round() {
    ++round_;
    did_update_ = false;
    own_complete_ = false;
    peer_complete_.clear();
    peer_states_.clear();
    if (done()) {
        if (!pending_.empty())
            throw ProtocolError("protocol: buffered messages outlive the schedule");
        return;
    }
    emit_(PeerMessage::make_state(id_, round_, own_state_));
    std::vector<PeerMessage> replay;
    replay.swap(pending_);
    for (const PeerMessage& m : replay) ingest(m);
}

std::string ProtocolEngine::progress_summary() const {
    std::ostringstream os;
    os << "node " << id_ << " round " << round_ << "/" << max_round_
       << " states " << peer_states_.size() << "/" << peer_ids_.size()
       << " completes " << peer_complete_.size() << "/" << peer_ids_.size()
       << (own_complete_ ? " own-complete" : "")
       << " pending " << pending_.size();
    return os.str();
}

}  // namespace dibmap
