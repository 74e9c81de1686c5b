#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <vector>

#include "dibmap/errors.hpp"
#include "dibmap/rng.hpp"
#include "dibmap/wire.hpp"

using namespace dibmap;

namespace {

StateVector random_state(std::size_t mu_len, std::size_t rho_len, std::uint64_t fp,
                         std::uint64_t seed) {
    StateVector s;
    s.model_fingerprint = fp;
    RngStream r(seed);
    for (std::size_t i = 0; i < mu_len; ++i) s.mu_block.push_back(r.uniform(-10.0, 10.0));
    for (std::size_t i = 0; i < rho_len; ++i) s.rho_block.push_back(r.uniform(-10.0, 10.0));
    return s;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    return a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::uint32_t read_u32le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t read_u64le(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

}  // namespace

TEST_CASE("round-complete frames are exactly 25 bytes with the documented layout") {
    WireCodec codec(0x1122334455667788ull, 7, 5);
    PeerMessage rc = PeerMessage::make_round_complete(0x0a0b0c0d, 0x00010203, codec.fingerprint());
    std::vector<std::uint8_t> frame = codec.encode(rc);

    REQUIRE(frame.size() == 25);
    CHECK(frame[0] == 'P');
    CHECK(frame[1] == 'S');
    CHECK(frame[2] == 'X');
    CHECK(frame[3] == '1');
    CHECK(frame[4] == 1);  // kind
    CHECK(read_u32le(&frame[5]) == 0x0a0b0c0d);
    CHECK(read_u32le(&frame[9]) == 0x00010203);
    CHECK(read_u64le(&frame[13]) == 0x1122334455667788ull);
    CHECK(read_u32le(&frame[21]) == 0);  // payload element count
}

TEST_CASE("state frame layout: header plus little-endian f64 payload") {
    WireCodec codec(42, 2, 1);
    StateVector s;
    s.model_fingerprint = 42;
    s.mu_block = {1.0, -2.5};
    s.rho_block = {0.125};
    std::vector<std::uint8_t> frame = codec.encode(PeerMessage::make_state(3, 9, s));

    REQUIRE(frame.size() == 25 + 3 * 8);
    CHECK(frame[4] == 0);  // kind = State
    CHECK(read_u32le(&frame[5]) == 3);
    CHECK(read_u32le(&frame[9]) == 9);
    CHECK(read_u32le(&frame[21]) == 3);

    auto f64_at = [&](std::size_t off) {
        std::uint64_t bits = read_u64le(&frame[off]);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    };
    CHECK(f64_at(25) == 1.0);
    CHECK(f64_at(33) == -2.5);
    CHECK(f64_at(41) == 0.125);
}

TEST_CASE("state messages round-trip bitwise") {
    const std::uint64_t fp = 0xdeadbeefcafef00dull;
    WireCodec codec(fp, 33, 17);
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        StateVector s = random_state(33, 17, fp, trial);
        // Exercise exact binary fidelity, including signed zero and denormals.
        if (trial == 0) {
            s.mu_block[0] = -0.0;
            s.mu_block[1] = 5e-324;
            s.mu_block[2] = 1.7976931348623157e308;
        }
        PeerMessage msg = PeerMessage::make_state(static_cast<std::uint32_t>(trial), 1000 + trial, s);
        PeerMessage back = codec.decode(codec.encode(msg));
        CHECK(back.kind == MsgKind::State);
        CHECK(back.sender == msg.sender);
        CHECK(back.round == msg.round);
        CHECK(back.fingerprint == fp);
        REQUIRE(back.state.has_value());
        CHECK(bits_equal(back.state->mu_block, s.mu_block));
        CHECK(bits_equal(back.state->rho_block, s.rho_block));
        CHECK(back.state->model_fingerprint == fp);
    }
}

TEST_CASE("round-complete messages round-trip") {
    WireCodec codec(7, 4, 4);
    PeerMessage msg = PeerMessage::make_round_complete(6, 2, 7);
    PeerMessage back = codec.decode(codec.encode(msg));
    CHECK(back.kind == MsgKind::RoundComplete);
    CHECK(back.sender == 6);
    CHECK(back.round == 2);
    CHECK(!back.state.has_value());
}

TEST_CASE("empty-block states are legal and tiny") {
    WireCodec codec(1, 0, 0);
    StateVector s;
    s.model_fingerprint = 1;
    PeerMessage back = codec.decode(codec.encode(PeerMessage::make_state(0, 0, s)));
    REQUIRE(back.state.has_value());
    CHECK(back.state->mu_block.empty());
    CHECK(back.state->rho_block.empty());
}

TEST_CASE("decode rejects malformed frames") {
    const std::uint64_t fp = 99;
    WireCodec codec(fp, 3, 2);
    StateVector s = random_state(3, 2, fp, 1);
    std::vector<std::uint8_t> good = codec.encode(PeerMessage::make_state(1, 1, s));

    SUBCASE("bad magic") {
        auto bad = good;
        bad[0] = 'Q';
        CHECK_THROWS_AS(codec.decode(bad), WireError);
    }
    SUBCASE("unknown kind") {
        auto bad = good;
        bad[4] = 7;
        CHECK_THROWS_AS(codec.decode(bad), WireError);
    }
    SUBCASE("truncated header") {
        std::vector<std::uint8_t> bad(good.begin(), good.begin() + 10);
        CHECK_THROWS_AS(codec.decode(bad), WireError);
    }
    SUBCASE("truncated payload") {
        std::vector<std::uint8_t> bad(good.begin(), good.end() - 8);
        CHECK_THROWS_AS(codec.decode(bad), WireError);
    }
    SUBCASE("trailing bytes") {
        auto bad = good;
        bad.push_back(0);
        CHECK_THROWS_AS(codec.decode(bad), WireError);
    }
    SUBCASE("fingerprint mismatch") {
        WireCodec other(fp + 1, 3, 2);
        CHECK_THROWS_AS(other.decode(good), WireError);
    }
    SUBCASE("payload length disagrees with the agreed blocks") {
        WireCodec other(fp, 3, 3);
        CHECK_THROWS_AS(other.decode(good), WireError);
    }
    SUBCASE("round-complete with payload") {
        auto bad = good;
        bad[4] = 1;  // relabel as RoundComplete but keep the payload bytes
        CHECK_THROWS_AS(codec.decode(bad), WireError);
    }
}

TEST_CASE("encode validates the message against the codec") {
    WireCodec codec(5, 3, 2);
    StateVector s = random_state(3, 2, 5, 2);

    PeerMessage no_state = PeerMessage::make_state(0, 0, s);
    no_state.state.reset();
    CHECK_THROWS_AS(codec.encode(no_state), WireError);

    StateVector wrong = s;
    wrong.mu_block.push_back(0.0);
    CHECK_THROWS_AS(codec.encode(PeerMessage::make_state(0, 0, wrong)), WireError);

    StateVector bad_fp = s;
    bad_fp.model_fingerprint = 6;
    CHECK_THROWS_AS(codec.encode(PeerMessage::make_state(0, 0, bad_fp)), WireError);
}

TEST_CASE("frame_size reports the full frame length from a header") {
    const std::uint64_t fp = 11;
    WireCodec codec(fp, 4, 3);
    StateVector s = random_state(4, 3, fp, 3);
    auto state_frame = codec.encode(PeerMessage::make_state(0, 0, s));
    auto rc_frame = codec.encode(PeerMessage::make_round_complete(0, 0, fp));

    CHECK(codec.frame_size(std::span(state_frame).first(kHeaderSize)) == 25 + 7 * 8);
    CHECK(codec.frame_size(std::span(rc_frame).first(kHeaderSize)) == 25);

    auto bad = state_frame;
    bad[2] = 'z';
    CHECK_THROWS_AS(codec.frame_size(std::span(bad).first(kHeaderSize)), WireError);
    CHECK_THROWS_AS(codec.frame_size(std::span(state_frame).first(10)), WireError);
}

TEST_CASE("state vector helpers") {
    StateVector a = random_state(5, 4, 1, 10);
    StateVector b = random_state(5, 4, 1, 11);
    CHECK(a.total_size() == 9);
    CHECK(a.same_shape(b));
    b.rho_block.pop_back();
    CHECK(!a.same_shape(b));

    StateVector nan_state = a;
    nan_state.mu_block[2] = std::nan("");
    CHECK_THROWS_AS(ensure_finite(nan_state, "test"), NumericalError);
    CHECK_NOTHROW(ensure_finite(a, "test"));
}

TEST_CASE("mean_state averages elementwise and residual measures spread") {
    StateVector a, b;
    a.model_fingerprint = b.model_fingerprint = 3;
    a.mu_block = {0.0, 2.0};
    a.rho_block = {-4.0};
    b.mu_block = {2.0, 0.0};
    b.rho_block = {4.0};
    std::vector<const StateVector*> both{&a, &b};
    StateVector m = mean_state(both);
    CHECK(m.mu_block[0] == doctest::Approx(1.0));
    CHECK(m.mu_block[1] == doctest::Approx(1.0));
    CHECK(m.rho_block[0] == doctest::Approx(0.0));

    CHECK(max_abs_diff(a, m) == doctest::Approx(4.0));  // rho differs by 4
    CHECK(consensus_residual({a, b}) == doctest::Approx(4.0));
    CHECK(consensus_residual({a}) == doctest::Approx(0.0));
}
