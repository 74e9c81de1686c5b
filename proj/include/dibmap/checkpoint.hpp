#pragma once

#include <filesystem>

#include "dibmap/bnn.hpp"

namespace dibmap {

// Binary checkpoint: architecture header plus flattened parameter blocks.
// Load rebuilds the net and verifies the stored fingerprint.
void save_checkpoint(const MapperNet& net, const std::filesystem::path& path);
MapperNet load_checkpoint(const std::filesystem::path& path);

}  // namespace dibmap
