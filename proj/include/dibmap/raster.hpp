#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dibmap {

// Scalar field over the normalized [-1, 1]^2 map square, row iy covering
// ny = -1 + (iy + 0.5) * 2/side.
struct MapRaster {
    std::size_t side = 0;
    std::vector<double> values;  // side x side, row-major
    double lo = 0.0;             // value mapped to pixel 0
    double hi = 1.0;             // value mapped to pixel 65535

    double& at(std::size_t ix, std::size_t iy) { return values[iy * side + ix]; }
    double at(std::size_t ix, std::size_t iy) const { return values[iy * side + ix]; }
};

// 16-bit binary PGM (big-endian samples per the format), image rows
// top-down, values clipped into [lo, hi].  A .meta sidecar records the
// value range and grid.
void write_raster_pgm(const MapRaster& raster, const std::filesystem::path& path);

// Plain CSV, one raster row per line, full precision.
void write_raster_csv(const MapRaster& raster, const std::filesystem::path& path);
MapRaster read_raster_csv(const std::filesystem::path& path);

}  // namespace dibmap
