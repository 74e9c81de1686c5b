#include "dibmap/wire.hpp"

#include <cstring>
#include <string>

#include "dibmap/errors.hpp"

namespace dibmap {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(out, bits);
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[at + i]) << (8 * i);
    return v;
}

double get_f64(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint64_t bits = get_u64(in, at);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

}  // namespace

PeerMessage PeerMessage::make_state(std::uint32_t sender, std::uint32_t round, StateVector s) {
    PeerMessage m;
    m.kind = MsgKind::State;
    m.sender = sender;
    m.round = round;
    m.fingerprint = s.model_fingerprint;
    m.state = std::move(s);
    return m;
}

PeerMessage PeerMessage::make_round_complete(std::uint32_t sender, std::uint32_t round,
                                             std::uint64_t fingerprint) {
    PeerMessage m;
    m.kind = MsgKind::RoundComplete;
    m.sender = sender;
    m.round = round;
    m.fingerprint = fingerprint;
    return m;
}

WireCodec::WireCodec(std::uint64_t fingerprint, std::size_t mu_len, std::size_t rho_len)
    : fingerprint_(fingerprint), mu_len_(mu_len), rho_len_(rho_len) {
    if (mu_len_ + rho_len_ >= (1ull << 32))
        throw WireError("wire: state exceeds the 2^32 element payload bound");
}

std::vector<std::uint8_t> WireCodec::encode(const PeerMessage& msg) const {
    if ((msg.kind == MsgKind::State) != msg.state.has_value())
        throw WireError("wire: state payload must be present exactly for State messages");
    std::vector<std::uint8_t> out;
    std::size_t payload = 0;
    if (msg.state) {
        if (msg.state->mu_block.size() != mu_len_ || msg.state->rho_block.size() != rho_len_)
            throw WireError("wire: state block sizes do not match codec architecture");
        if (msg.state->model_fingerprint != fingerprint_ || msg.fingerprint != fingerprint_)
            throw WireError("wire: encode fingerprint mismatch");
        payload = mu_len_ + rho_len_;
    }
    out.reserve(kHeaderSize + payload * sizeof(double));
    out.insert(out.end(), kWireMagic, kWireMagic + 4);
    out.push_back(static_cast<std::uint8_t>(msg.kind));
    put_u32(out, msg.sender);
    put_u32(out, msg.round);
    put_u64(out, msg.fingerprint);
    put_u32(out, static_cast<std::uint32_t>(payload));
    if (msg.state) {
        for (double v : msg.state->mu_block) put_f64(out, v);
        for (double v : msg.state->rho_block) put_f64(out, v);
    }
    return out;
}

std::size_t WireCodec::frame_size(std::span<const std::uint8_t> header) const {
    if (header.size() < kHeaderSize) throw WireError("wire: short header");
    if (std::memcmp(header.data(), kWireMagic, 4) != 0) throw WireError("wire: bad magic");
    std::uint8_t kind = header[4];
    if (kind > static_cast<std::uint8_t>(MsgKind::RoundComplete))
        throw WireError("wire: unknown message kind " + std::to_string(kind));
    std::uint64_t payload = get_u32(header, 21);
    if (kind == static_cast<std::uint8_t>(MsgKind::RoundComplete) && payload != 0)
        throw WireError("wire: RoundComplete must carry no payload");
    if (kind == static_cast<std::uint8_t>(MsgKind::State) && payload != mu_len_ + rho_len_)
        throw WireError("wire: payload length " + std::to_string(payload) +
                        " does not match expected state size " + std::to_string(mu_len_ + rho_len_));
    return kHeaderSize + static_cast<std::size_t>(payload) * sizeof(double);
}

PeerMessage WireCodec::decode(std::span<const std::uint8_t> frame) const {
    std::size_t expect = frame_size(frame);
    if (frame.size() < expect) throw WireError("wire: truncated frame");
    if (frame.size() > expect) throw WireError("wire: trailing bytes after frame");

    PeerMessage msg;
    msg.kind = static_cast<MsgKind>(frame[4]);
    msg.sender = get_u32(frame, 5);
    msg.round = get_u32(frame, 9);
    msg.fingerprint = get_u64(frame, 13);
    if (msg.fingerprint != fingerprint_)
        throw WireError("wire: fingerprint mismatch (incompatible model architecture)");

    if (msg.kind == MsgKind::State) {
        StateVector s;
        s.model_fingerprint = msg.fingerprint;
        s.mu_block.resize(mu_len_);
        s.rho_block.resize(rho_len_);
        std::size_t at = kHeaderSize;
        for (std::size_t i = 0; i < mu_len_; ++i, at += 8) s.mu_block[i] = get_f64(frame, at);
        for (std::size_t i = 0; i < rho_len_; ++i, at += 8) s.rho_block[i] = get_f64(frame, at);
        msg.state = std::move(s);
    }
    return msg;
}

}  // namespace dibmap
