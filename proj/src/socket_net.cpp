#include "dibmap/socket_net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string>
#include <thread>

#include "dibmap/errors.hpp"

namespace dibmap {
namespace {

using Clock = std::chrono::steady_clock;

void set_nonblocking(int fd) {
    int flags = fcntl(fd, F_GETFL, 0);
    if (flags < 0 || fcntl(fd, F_SETFL, flags | O_NONBLOCK) < 0)
        throw IoError("socket: fcntl failed: " + std::string(std::strerror(errno)));
}

sockaddr_in loopback(std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    return addr;
}

int remaining_ms(Clock::time_point deadline) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    return left.count() > 0 ? static_cast<int>(left.count()) : 0;
}

}  // namespace

SocketTransport::SocketTransport(std::uint32_t id, std::uint32_t n_peers,
                                 std::uint16_t base_port, WireCodec codec,
                                 std::chrono::milliseconds setup_timeout)
    : id_(id), codec_(codec) {
    if (n_peers < 1 || id >= n_peers) throw ConfigError("socket: bad id/peer count");
    auto deadline = Clock::now() + setup_timeout;

    int listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd < 0) throw IoError("socket: cannot create listener");
    int one = 1;
    setsockopt(listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr = loopback(static_cast<std::uint16_t>(base_port + id));
    if (bind(listen_fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
        ::close(listen_fd);
        throw IoError("socket: bind failed on port " + std::to_string(base_port + id) + ": " +
                      std::strerror(errno));
    }
    if (listen(listen_fd, static_cast<int>(n_peers)) < 0) {
        ::close(listen_fd);
        throw IoError("socket: listen failed");
    }

    // Dial peers from a helper thread while this thread accepts, so the mesh
    // forms regardless of process startup order.
    std::vector<int> dialed(n_peers, -1);
    std::string dial_error;
    std::thread connector([&]() {
        for (std::uint32_t j = 0; j < n_peers; ++j) {
            if (j == id_) continue;
            while (Clock::now() < deadline) {
                int fd = ::socket(AF_INET, SOCK_STREAM, 0);
                if (fd < 0) break;
                sockaddr_in peer = loopback(static_cast<std::uint16_t>(base_port + j));
                if (connect(fd, reinterpret_cast<sockaddr*>(&peer), sizeof(peer)) == 0) {
                    dialed[j] = fd;
                    break;
                }
                ::close(fd);
                std::this_thread::sleep_for(std::chrono::milliseconds(20));
            }
            if (dialed[j] < 0) {
                dial_error = "socket: could not reach peer " + std::to_string(j);
                return;
            }
        }
    });

    std::size_t expected = n_peers - 1;
    while (in_.size() < expected && Clock::now() < deadline) {
        pollfd pf{listen_fd, POLLIN, 0};
        if (poll(&pf, 1, std::min(remaining_ms(deadline), 100)) > 0) {
            int fd = accept(listen_fd, nullptr, nullptr);
            if (fd >= 0) {
                set_nonblocking(fd);
                one = 1;
                setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
                in_.push_back(Conn{fd, {}, {}, 0, false});
            }
        }
    }
    connector.join();
    ::close(listen_fd);

    if (!dial_error.empty() || in_.size() < expected) {
        for (auto& c : in_) ::close(c.fd);
        for (int fd : dialed)
            if (fd >= 0) ::close(fd);
        throw TimeoutError(dial_error.empty()
                               ? "socket: only " + std::to_string(in_.size()) + "/" +
                                     std::to_string(expected) + " peers connected"
                               : dial_error);
    }
    for (std::uint32_t j = 0; j < n_peers; ++j) {
        if (j == id_) continue;
        set_nonblocking(dialed[j]);
        one = 1;
        setsockopt(dialed[j], IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        out_.push_back(Conn{dialed[j], {}, {}, 0, false});
    }
}

SocketTransport::~SocketTransport() {
    try {
        flush(std::chrono::milliseconds(2000));
    } catch (...) {
    }
    for (auto& c : in_) ::close(c.fd);
    for (auto& c : out_) ::close(c.fd);
}

void SocketTransport::broadcast(const PeerMessage& msg) {
    std::vector<std::uint8_t> frame = codec_.encode(msg);
    for (auto& c : out_) {
        c.outbuf.insert(c.outbuf.end(), frame.begin(), frame.end());
    }
    pump(0);
}

void SocketTransport::pump(int wait_ms) {
    std::vector<pollfd> fds;
    fds.reserve(in_.size() + out_.size());
    for (auto& c : in_) fds.push_back({c.fd, static_cast<short>(c.eof ? 0 : POLLIN), 0});
    for (auto& c : out_)
        fds.push_back({c.fd, static_cast<short>(c.out_at < c.outbuf.size() ? POLLOUT : 0), 0});

    if (poll(fds.data(), fds.size(), wait_ms) < 0) {
        if (errno == EINTR) return;
        throw IoError("socket: poll failed: " + std::string(std::strerror(errno)));
    }

    for (std::size_t i = 0; i < in_.size(); ++i) {
        if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
        Conn& c = in_[i];
        std::uint8_t chunk[65536];
        while (true) {
            ssize_t n = ::read(c.fd, chunk, sizeof(chunk));
            if (n > 0) {
                c.inbuf.insert(c.inbuf.end(), chunk, chunk + n);
                continue;
            }
            if (n == 0) {
                c.eof = true;
                break;
            }
            if (errno == EAGAIN || errno == EWOULDBLOCK) break;
            throw IoError("socket: read failed: " + std::string(std::strerror(errno)));
        }
    }
    for (std::size_t i = 0; i < out_.size(); ++i) {
        if (!(fds[in_.size() + i].revents & POLLOUT)) continue;
        Conn& c = out_[i];
        while (c.out_at < c.outbuf.size()) {
            ssize_t n = ::write(c.fd, c.outbuf.data() + c.out_at, c.outbuf.size() - c.out_at);
            if (n > 0) {
                c.out_at += static_cast<std::size_t>(n);
                continue;
            }
            if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) break;
            throw IoError("socket: write failed: " + std::string(std::strerror(errno)));
        }
        if (c.out_at == c.outbuf.size()) {
            c.outbuf.clear();
            c.out_at = 0;
        }
    }
}

bool SocketTransport::pop_frame(Conn& c, PeerMessage& out) {
    if (c.inbuf.size() < kHeaderSize) return false;
    std::size_t need = codec_.frame_size(std::span(c.inbuf.data(), kHeaderSize));
    if (c.inbuf.size() < need) return false;
    out = codec_.decode(std::span(c.inbuf.data(), need));
    c.inbuf.erase(c.inbuf.begin(), c.inbuf.begin() + static_cast<std::ptrdiff_t>(need));
    return true;
}

std::optional<PeerMessage> SocketTransport::receive(std::chrono::milliseconds timeout) {
    auto deadline = Clock::now() + timeout;
    PeerMessage msg;
    while (true) {
        for (std::size_t k = 0; k < in_.size(); ++k) {
            Conn& c = in_[(next_in_ + k) % in_.size()];
            if (pop_frame(c, msg)) {
                next_in_ = (next_in_ + k + 1) % in_.size();
                return msg;
            }
        }
        for (const Conn& c : in_)
            if (c.eof && !c.inbuf.empty())
                throw ProtocolError("socket: peer closed mid-frame");
        int wait = remaining_ms(deadline);
        if (wait == 0 && Clock::now() >= deadline) return std::nullopt;
        pump(std::min(wait, 100));
    }
}

void SocketTransport::flush(std::chrono::milliseconds timeout) {
    auto deadline = Clock::now() + timeout;
    while (true) {
        bool pending = false;
        for (const Conn& c : out_)
            if (c.out_at < c.outbuf.size()) pending = true;
        if (!pending) return;
        if (Clock::now() >= deadline)
            throw TimeoutError("socket: could not flush outbound frames");
        pump(std::min(remaining_ms(deadline), 100));
    }
}

}  // namespace dibmap
