#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dibmap/state.hpp"

namespace dibmap {

enum class MsgKind : std::uint8_t { State = 0, RoundComplete = 1 };

struct PeerMessage {
    MsgKind kind = MsgKind::RoundComplete;
    std::uint32_t sender = 0;
    std::uint32_t round = 0;
    std::uint64_t fingerprint = 0;
    std::optional<StateVector> state;  // present iff kind == State

    static PeerMessage make_state(std::uint32_t sender, std::uint32_t round, StateVector s);
    static PeerMessage make_round_complete(std::uint32_t sender, std::uint32_t round,
                                           std::uint64_t fingerprint);
};

// Frame layout, little-endian throughout:
//   magic "PSX1" | kind u8 | sender u32 | round u32 | fingerprint u64 |
//   payload_len u32 (f64 element count) | payload (mu_block then rho_block)
// A RoundComplete frame has payload_len 0 and is exactly 25 bytes.
//
// The payload carries mu and rho concatenated without a split marker; both
// endpoints share the model architecture, so the codec is constructed with
// the expected fingerprint and block sizes and validates frames against
// them.
inline constexpr std::size_t kHeaderSize = 25;
inline constexpr std::size_t kRoundCompleteFrameSize = kHeaderSize;
inline constexpr char kWireMagic[4] = {'P', 'S', 'X', '1'};

class WireCodec {
public:
    WireCodec(std::uint64_t fingerprint, std::size_t mu_len, std::size_t rho_len);

    std::vector<std::uint8_t> encode(const PeerMessage& msg) const;
    // Throws WireError on bad magic, unknown kind, truncation, trailing
    // bytes, fingerprint mismatch, or a payload length that does not match
    // the expected blocks.
    PeerMessage decode(std::span<const std::uint8_t> frame) const;

    // Total frame size implied by a header; used by stream transports to
    // read exactly one frame.  Validates magic, kind, and payload length.
    std::size_t frame_size(std::span<const std::uint8_t> header) const;

    std::uint64_t fingerprint() const { return fingerprint_; }
    std::size_t mu_len() const { return mu_len_; }
    std::size_t rho_len() const { return rho_len_; }

private:
    std::uint64_t fingerprint_;
    std::size_t mu_len_;
    std::size_t rho_len_;
};

}  // namespace dibmap
