#include "dibmap/rng.hpp"

#include <cmath>
#include <numbers>

namespace dibmap {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// SplitMix64 finalizer: bijective avalanche mix.
std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : key_(mix64(seed + kGolden)), counter_(0) {}

RngStream RngStream::split(std::uint64_t lane) const {
    std::uint64_t child = mix64(key_ ^ mix64((lane + 1) * 0xa0761d6478bd642full));
    return RngStream(child, 0);
}

RngStream RngStream::split(std::string_view label) const {
    return split(fnv1a64(label));
}

std::uint64_t RngStream::next_u64() {
    return mix64(key_ + kGolden * ++counter_);
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double RngStream::normal() {
    // u in (0, 1] keeps log(u) finite.
    double u = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double v = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

void RngStream::fill_uniform(std::span<double> out, double lo, double hi) {
    for (double& x : out) x = uniform(lo, hi);
}

void RngStream::fill_normal(std::span<double> out) {
    for (double& x : out) x = normal();
}

std::uint64_t fnv1a64(const void* bytes, std::size_t len, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64(std::string_view text) {
    return fnv1a64(text.data(), text.size());
}

}  // namespace dibmap
