#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace dibmap {

// Counter-based splittable PRNG.
//
// Every stream is a pure function of (key, counter), so draws depend only on
// the stream's derivation path and position, never on global call order or on
// which process performs the draw.  split() derives statistically independent
// child streams from integer lanes or string labels; copying a stream freezes
// its position, which is how callers replay an identical noise sequence.
class RngStream {
public:
    RngStream() : RngStream(0) {}
    explicit RngStream(std::uint64_t seed);

    RngStream split(std::uint64_t lane) const;
    RngStream split(std::string_view label) const;

    std::uint64_t next_u64();

    // Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller (one sample per two u64 draws, no cache,
    // so the stream position advances identically everywhere).
    double normal();

    void fill_uniform(std::span<double> out, double lo, double hi);
    void fill_normal(std::span<double> out);

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    RngStream(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// 64-bit FNV-1a, also used for model fingerprints and label hashing.
std::uint64_t fnv1a64(std::string_view text);
std::uint64_t fnv1a64(const void* bytes, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace dibmap
