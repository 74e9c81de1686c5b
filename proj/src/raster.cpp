#include "dibmap/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dibmap/errors.hpp"

namespace dibmap {

void write_raster_pgm(const MapRaster& raster, const std::filesystem::path& path) {
    if (raster.side == 0 || raster.values.size() != raster.side * raster.side)
        throw DimensionError("raster: bad extent");
    if (!(raster.hi > raster.lo)) throw DimensionError("raster: hi must exceed lo");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("raster: cannot open " + path.string() + " for writing");
    out << "P5\n" << raster.side << " " << raster.side << "\n65535\n";
    double span = raster.hi - raster.lo;
    for (std::size_t row = 0; row < raster.side; ++row) {
        std::size_t iy = raster.side - 1 - row;
        for (std::size_t ix = 0; ix < raster.side; ++ix) {
            double v = (raster.at(ix, iy) - raster.lo) / span;
            v = std::clamp(v, 0.0, 1.0);
            auto q = static_cast<unsigned>(std::lround(v * 65535.0));
            out.put(static_cast<char>(q >> 8));  // most significant byte first
            out.put(static_cast<char>(q & 0xff));
        }
    }
    if (!out) throw IoError("raster: write failed for " + path.string());

    std::ofstream meta(path.string() + ".meta");
    meta << "side=" << raster.side << "\nlo=" << raster.lo << "\nhi=" << raster.hi << "\n";
}

void write_raster_csv(const MapRaster& raster, const std::filesystem::path& path) {
    if (raster.side == 0 || raster.values.size() != raster.side * raster.side)
        throw DimensionError("raster: bad extent");
    std::ofstream out(path);
    if (!out) throw IoError("raster: cannot open " + path.string() + " for writing");
    out.precision(17);
    for (std::size_t iy = 0; iy < raster.side; ++iy) {
        for (std::size_t ix = 0; ix < raster.side; ++ix) {
            if (ix) out << ",";
            out << raster.at(ix, iy);
        }
        out << "\n";
    }
    if (!out) throw IoError("raster: write failed for " + path.string());
}

MapRaster read_raster_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("raster: cannot open " + path.string());
    MapRaster raster;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::size_t count = 0;
        while (std::getline(row, cell, ',')) {
            raster.values.push_back(std::stod(cell));
            ++count;
        }
        if (raster.side == 0) raster.side = count;
        else if (count != raster.side)
            throw IoError("raster: ragged CSV in " + path.string());
    }
    if (raster.side == 0 || raster.values.size() != raster.side * raster.side)
        throw IoError("raster: CSV is not square in " + path.string());
    return raster;
}

}  // namespace dibmap
