#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "dibmap/wire.hpp"

namespace dibmap {

// TCP full mesh for one node.  Node k listens on base_port + k and dials
// every other node, so each ordered pair has a simplex byte stream carrying
// wire frames.  All sockets are serviced by a single non-blocking poll loop:
// broadcast() queues bytes and flushes opportunistically, receive() pumps
// reads and pending writes until a full frame is assembled, so no call ever
// blocks on a stalled peer and mutual-flush cycles cannot deadlock.
class SocketTransport {
public:
    SocketTransport(std::uint32_t id, std::uint32_t n_peers, std::uint16_t base_port,
                    WireCodec codec,
                    std::chrono::milliseconds setup_timeout = std::chrono::seconds(30));
    ~SocketTransport();

    SocketTransport(const SocketTransport&) = delete;
    SocketTransport& operator=(const SocketTransport&) = delete;

    void broadcast(const PeerMessage& msg);
    // Next frame from any peer, or nullopt on timeout.  Throws WireError on
    // malformed frames and ProtocolError if a peer disconnects mid-stream.
    std::optional<PeerMessage> receive(std::chrono::milliseconds timeout);
    // Drains queued outbound bytes; call once the protocol is done.
    void flush(std::chrono::milliseconds timeout);

    std::uint32_t id() const { return id_; }

private:
    struct Conn {
        int fd = -1;
        std::vector<std::uint8_t> inbuf;
        std::vector<std::uint8_t> outbuf;
        std::size_t out_at = 0;  // next unflushed byte in outbuf
        bool eof = false;
    };

    void pump(int wait_ms);
    bool pop_frame(Conn& c, PeerMessage& out);

    std::uint32_t id_;
    WireCodec codec_;
    std::vector<Conn> in_;    // accepted streams, one per peer
    std::vector<Conn> out_;   // dialed streams, one per peer
    std::size_t next_in_ = 0;  // round-robin fairness across inbound streams
};

}  // namespace dibmap
