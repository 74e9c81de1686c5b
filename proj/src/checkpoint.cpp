#include "dibmap/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "dibmap/errors.hpp"

namespace dibmap {
namespace {

constexpr char kMagic[8] = {'D', 'I', 'B', 'M', 'C', 'K', '0', '1'};

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw IoError("checkpoint: truncated file");
    return v;
}

}  // namespace

void save_checkpoint(const MapperNet& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("checkpoint: cannot open " + path.string() + " for writing");
    StateVector s = net.flatten();
    out.write(kMagic, sizeof(kMagic));
    put<std::uint64_t>(out, net.hidden());
    put<double>(out, net.omega());
    put<std::uint64_t>(out, s.model_fingerprint);
    put<std::uint64_t>(out, s.mu_block.size());
    put<std::uint64_t>(out, s.rho_block.size());
    out.write(reinterpret_cast<const char*>(s.mu_block.data()),
              static_cast<std::streamsize>(s.mu_block.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(s.rho_block.data()),
              static_cast<std::streamsize>(s.rho_block.size() * sizeof(double)));
    if (!out) throw IoError("checkpoint: write failed for " + path.string());
}

MapperNet load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError("checkpoint: bad magic in " + path.string());
    auto hidden = get<std::uint64_t>(in);
    auto omega = get<double>(in);
    auto fingerprint = get<std::uint64_t>(in);
    auto mu_len = get<std::uint64_t>(in);
    auto rho_len = get<std::uint64_t>(in);

    MapperNet net = MapperNet::skeleton(hidden, omega);
    if (net.fingerprint() != fingerprint)
        throw IoError("checkpoint: fingerprint does not match architecture header");
    StateVector s;
    s.model_fingerprint = fingerprint;
    s.mu_block.resize(mu_len);
    s.rho_block.resize(rho_len);
    in.read(reinterpret_cast<char*>(s.mu_block.data()),
            static_cast<std::streamsize>(mu_len * sizeof(double)));
    in.read(reinterpret_cast<char*>(s.rho_block.data()),
            static_cast<std::streamsize>(rho_len * sizeof(double)));
    if (!in) throw IoError("checkpoint: truncated parameter blocks");
    net.restore(s);
    return net;
}

}  // namespace dibmap
