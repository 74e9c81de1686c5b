#include "dibmap/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include "dibmap/errors.hpp"

namespace dibmap {

bool Floorplan::wall_at_world(double x, double y) const {
    auto ix = static_cast<std::size_t>(x / resolution);
    auto iy = static_cast<std::size_t>(y / resolution);
    ix = std::min(ix, width - 1);
    iy = std::min(iy, height - 1);
    return wall_at(ix, iy);
}

std::array<double, 2> Floorplan::normalize(double x, double y) const {
    return {2.0 * x / extent_x() - 1.0, 2.0 * y / extent_y() - 1.0};
}

std::array<double, 2> Floorplan::denormalize(double nx, double ny) const {
    return {(nx + 1.0) * 0.5 * extent_x(), (ny + 1.0) * 0.5 * extent_y()};
}

void Floorplan::validate() const {
    if (width < 8 || height < 8) throw ConfigError("floorplan: too small to be a map");
    if (walls.size() != width * height) throw ConfigError("floorplan: cell buffer size mismatch");
    for (std::size_t ix = 0; ix < width; ++ix)
        if (!wall_at(ix, 0) || !wall_at(ix, height - 1))
            throw ConfigError("floorplan: border must be walled");
    for (std::size_t iy = 0; iy < height; ++iy)
        if (!wall_at(0, iy) || !wall_at(width - 1, iy))
            throw ConfigError("floorplan: border must be walled");
    if (std::count(walls.begin(), walls.end(), std::uint8_t{0}) == 0)
        throw ConfigError("floorplan: no free space");
}

namespace {

struct Builder {
    Floorplan& fp;
    RngStream& rng;

    void wall_row(std::size_t iy, std::size_t x0, std::size_t x1) {
        for (std::size_t x = x0; x <= x1; ++x) fp.walls[iy * fp.width + x] = 1;
    }
    void wall_col(std::size_t ix, std::size_t y0, std::size_t y1) {
        for (std::size_t y = y0; y <= y1; ++y) fp.walls[y * fp.width + ix] = 1;
    }
    void gap_row(std::size_t iy, std::size_t x0, std::size_t x1) {
        for (std::size_t x = x0; x <= x1 && x < fp.width; ++x) fp.walls[iy * fp.width + x] = 0;
    }
    void gap_col(std::size_t ix, std::size_t y0, std::size_t y1) {
        for (std::size_t y = y0; y <= y1 && y < fp.height; ++y) fp.walls[y * fp.width + ix] = 0;
    }

    // Partition the open region [x0, x1] x [y0, y1] (inclusive, all free).
    void split(std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1, int depth) {
        std::size_t w = x1 - x0 + 1, h = y1 - y0 + 1;
        std::size_t min_side = static_cast<std::size_t>(std::max(3.0 / fp.resolution, 12.0));
        if (depth <= 0 || (w < 2 * min_side + 1 && h < 2 * min_side + 1)) return;

        bool vertical = w >= h;
        std::size_t door = std::max<std::size_t>(static_cast<std::size_t>(0.9 / fp.resolution), 3);
        if (vertical) {
            if (w < 2 * min_side + 1) return;
            std::size_t cut = x0 + min_side +
                              rng.next_u64() % (w - 2 * min_side);
            wall_col(cut, y0, y1);
            std::size_t gy = y0 + rng.next_u64() % (h > door ? h - door : 1);
            gap_col(cut, gy, gy + door - 1);
            split(x0, y0, cut - 1, y1, depth - 1);
            split(cut + 1, y0, x1, y1, depth - 1);
        } else {
            if (h < 2 * min_side + 1) return;
            std::size_t cut = y0 + min_side +
                              rng.next_u64() % (h - 2 * min_side);
            wall_row(cut, x0, x1);
            std::size_t gx = x0 + rng.next_u64() % (w > door ? w - door : 1);
            gap_row(cut, gx, gx + door - 1);
            split(x0, y0, x1, cut - 1, depth - 1);
            split(x0, cut + 1, x1, y1, depth - 1);
        }
    }
};

}  // namespace

Floorplan generate_floorplan(double width_m, double height_m, double resolution, RngStream rng) {
    if (!(width_m > 0.0) || !(height_m > 0.0) || !(resolution > 0.0))
        throw ConfigError("floorplan: extents and resolution must be positive");
    Floorplan fp;
    fp.resolution = resolution;
    fp.width = static_cast<std::size_t>(std::lround(width_m / resolution));
    fp.height = static_cast<std::size_t>(std::lround(height_m / resolution));
    if (fp.width < 8 || fp.height < 8)
        throw ConfigError("floorplan: extents too small for the resolution");
    fp.walls.assign(fp.width * fp.height, 0);

    Builder b{fp, rng};
    b.wall_row(0, 0, fp.width - 1);
    b.wall_row(fp.height - 1, 0, fp.width - 1);
    b.wall_col(0, 0, fp.height - 1);
    b.wall_col(fp.width - 1, 0, fp.height - 1);
    b.split(1, 1, fp.width - 2, fp.height - 2, 4);

    fp.validate();
    return fp;
}

void save_floorplan_pgm(const Floorplan& fp, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("floorplan: cannot open " + path.string() + " for writing");
    out << "P5\n" << fp.width << " " << fp.height << "\n255\n";
    for (std::size_t row = 0; row < fp.height; ++row) {
        std::size_t iy = fp.height - 1 - row;  // image rows top-down
        for (std::size_t ix = 0; ix < fp.width; ++ix)
            out.put(fp.wall_at(ix, iy) ? '\0' : static_cast<char>(255));
    }
    if (!out) throw IoError("floorplan: write failed for " + path.string());
}

Floorplan load_floorplan_pgm(const std::filesystem::path& path, double resolution) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("floorplan: cannot open " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5") throw IoError("floorplan: expected binary PGM (P5)");
    auto next_token = [&in, &path]() {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw IoError("floorplan: truncated PGM header in " + path.string());
    };
    std::size_t w = std::stoul(next_token());
    std::size_t h = std::stoul(next_token());
    unsigned maxval = static_cast<unsigned>(std::stoul(next_token()));
    if (maxval == 0 || maxval > 255) throw IoError("floorplan: only 8-bit PGM supported");
    in.get();  // single whitespace after maxval

    Floorplan fp;
    fp.resolution = resolution;
    fp.width = w;
    fp.height = h;
    fp.walls.assign(w * h, 0);
    std::vector<char> row(w);
    for (std::size_t r = 0; r < h; ++r) {
        in.read(row.data(), static_cast<std::streamsize>(w));
        if (!in) throw IoError("floorplan: truncated PGM pixel data");
        std::size_t iy = h - 1 - r;
        for (std::size_t ix = 0; ix < w; ++ix)
            fp.walls[iy * w + ix] = static_cast<unsigned char>(row[ix]) < 128 ? 1 : 0;
    }
    fp.validate();
    return fp;
}

LidarScan raycast(const Floorplan& fp, double px, double py, const SensorConfig& sensor,
                  RngStream rng) {
    if (!fp.free_at_world(px, py))
        throw ConfigError("raycast: pose must be inside free space");
    if (sensor.beams == 0 || !(sensor.max_range > 0.0))
        throw ConfigError("raycast: sensor needs beams and a positive max range");

    LidarScan scan;
    scan.pose_x = px;
    scan.pose_y = py;
    scan.max_range = sensor.max_range;
    scan.beams.reserve(sensor.beams);

    const double res = fp.resolution;
    for (std::size_t b = 0; b < sensor.beams; ++b) {
        double angle = 2.0 * std::numbers::pi * static_cast<double>(b) /
                       static_cast<double>(sensor.beams);
        double dx = std::cos(angle), dy = std::sin(angle);

        // Amanatides-Woo grid traversal.
        auto ix = static_cast<long>(px / res);
        auto iy = static_cast<long>(py / res);
        long step_x = dx > 0.0 ? 1 : -1;
        long step_y = dy > 0.0 ? 1 : -1;
        double inv_dx = dx != 0.0 ? 1.0 / dx : 0.0;
        double inv_dy = dy != 0.0 ? 1.0 / dy : 0.0;
        double t_max_x = dx != 0.0
            ? ((static_cast<double>(ix + (step_x > 0)) * res) - px) * inv_dx
            : std::numeric_limits<double>::infinity();
        double t_max_y = dy != 0.0
            ? ((static_cast<double>(iy + (step_y > 0)) * res) - py) * inv_dy
            : std::numeric_limits<double>::infinity();
        double t_delta_x = dx != 0.0 ? res * std::abs(inv_dx) : std::numeric_limits<double>::infinity();
        double t_delta_y = dy != 0.0 ? res * std::abs(inv_dy) : std::numeric_limits<double>::infinity();

        Beam beam;
        beam.angle = angle;
        beam.range = sensor.max_range;
        beam.hit = false;
        while (true) {
            double t;
            if (t_max_x < t_max_y) {
                t = t_max_x;
                t_max_x += t_delta_x;
                ix += step_x;
            } else {
                t = t_max_y;
                t_max_y += t_delta_y;
                iy += step_y;
            }
            if (t > sensor.max_range) break;
            if (ix < 0 || iy < 0 || ix >= static_cast<long>(fp.width) ||
                iy >= static_cast<long>(fp.height))
                break;
            if (fp.wall_at(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy))) {
                double r = t + sensor.range_noise * rng.normal();
                beam.range = std::clamp(r, 2.0 * res, sensor.max_range);
                beam.hit = true;
                break;
            }
        }
        scan.beams.push_back(beam);
    }
    return scan;
}

std::vector<TrainPoint> scan_to_points(const Floorplan& fp, const LidarScan& scan,
                                       std::size_t free_samples_per_beam, RngStream rng) {
    std::vector<TrainPoint> points;
    points.reserve(scan.beams.size() * (free_samples_per_beam + 1));
    for (const Beam& beam : scan.beams) {
        if (!(beam.range >= 0.0) || beam.range > scan.max_range + 1e-9)
            throw ConfigError("scan_to_points: beam range outside [0, max_range]");
        double dx = std::cos(beam.angle), dy = std::sin(beam.angle);
        if (beam.hit) {
            auto [nx, ny] = fp.normalize(scan.pose_x + beam.range * dx,
                                         scan.pose_y + beam.range * dy);
            points.push_back({nx, ny, 1.0});
        }
        // Stratified interior samples, kept one cell short of the endpoint.
        double usable = std::max(beam.range - fp.resolution, 0.0);
        for (std::size_t s = 0; s < free_samples_per_beam; ++s) {
            double frac = (static_cast<double>(s) + rng.uniform()) /
                          static_cast<double>(free_samples_per_beam);
            double r = usable * frac;
            auto [nx, ny] = fp.normalize(scan.pose_x + r * dx, scan.pose_y + r * dy);
            points.push_back({nx, ny, 0.0});
        }
    }
    return points;
}

std::vector<std::array<double, 2>> scan_poses(const AgentPath& path) {
    if (path.waypoints.size() < 2) throw ConfigError("path: needs at least two waypoints");
    if (!(path.scan_stride > 0.0)) throw ConfigError("path: scan stride must be positive");
    std::vector<std::array<double, 2>> poses;
    double leftover = 0.0;
    for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i) {
        auto [x0, y0] = path.waypoints[i];
        auto [x1, y1] = path.waypoints[i + 1];
        double len = std::hypot(x1 - x0, y1 - y0);
        if (len <= 1e-12) continue;
        double along = leftover;
        while (along <= len) {
            double f = along / len;
            poses.push_back({x0 + f * (x1 - x0), y0 + f * (y1 - y0)});
            along += path.scan_stride;
        }
        leftover = along - len;
    }
    if (poses.empty()) throw ConfigError("path: produced no scan poses");
    return poses;
}

namespace {

bool line_of_sight(const Floorplan& fp, std::array<double, 2> a, std::array<double, 2> b) {
    double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    auto steps = static_cast<std::size_t>(len / (0.5 * fp.resolution)) + 2;
    for (std::size_t s = 0; s <= steps; ++s) {
        double f = static_cast<double>(s) / static_cast<double>(steps);
        double x = a[0] + f * (b[0] - a[0]);
        double y = a[1] + f * (b[1] - a[1]);
        if (!fp.free_at_world(x, y)) return false;
    }
    return true;
}

std::array<double, 2> random_free_pose(const Floorplan& fp, RngStream& rng) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        double x = rng.uniform(fp.resolution * 2, fp.extent_x() - fp.resolution * 2);
        double y = rng.uniform(fp.resolution * 2, fp.extent_y() - fp.resolution * 2);
        // Keep a small clearance so scan poses along segments stay free.
        bool clear = true;
        for (int ox = -2; ox <= 2 && clear; ++ox)
            for (int oy = -2; oy <= 2 && clear; ++oy)
                if (!fp.free_at_world(x + ox * fp.resolution, y + oy * fp.resolution)) clear = false;
        if (clear) return {x, y};
    }
    throw ConfigError("path: could not find free space for a waypoint");
}

}  // namespace

std::vector<AgentPath> default_agent_paths(const Floorplan& fp, std::size_t n_agents,
                                           RngStream rng) {
    if (n_agents == 0) throw ConfigError("paths: need at least one agent");
    std::vector<AgentPath> paths;
    paths.reserve(n_agents);
    for (std::size_t a = 0; a < n_agents; ++a) {
        RngStream ar = rng.split(a);
        AgentPath path;
        path.scan_stride = 0.25;
        auto pos = random_free_pose(fp, ar);
        path.waypoints.push_back(pos);
        const std::size_t want = 6;
        int attempts = 0;
        while (path.waypoints.size() < want && attempts < 20000) {
            ++attempts;
            auto cand = random_free_pose(fp, ar);
            double d = std::hypot(cand[0] - pos[0], cand[1] - pos[1]);
            if (d < 1.5) continue;
            if (!line_of_sight(fp, pos, cand)) continue;
            path.waypoints.push_back(cand);
            pos = cand;
        }
        if (path.waypoints.size() < 2)
            throw ConfigError("paths: world too cluttered to route agent " + std::to_string(a));
        paths.push_back(std::move(path));
    }
    return paths;
}

std::vector<TrainPoint> collect_points(const Floorplan& fp, const AgentPath& path,
                                       const SensorConfig& sensor, RngStream rng) {
    std::vector<TrainPoint> all;
    auto poses = scan_poses(path);
    for (std::size_t p = 0; p < poses.size(); ++p) {
        RngStream pr = rng.split(p);
        LidarScan scan = raycast(fp, poses[p][0], poses[p][1], sensor, pr.split("beam-noise"));
        auto pts = scan_to_points(fp, scan, sensor.free_samples_per_beam, pr.split("free"));
        all.insert(all.end(), pts.begin(), pts.end());
    }
    return all;
}

std::vector<std::vector<TrainPoint>> stream_segments(const Floorplan& fp, const AgentPath& path,
                                                     std::size_t n_rounds,
                                                     const SensorConfig& sensor, RngStream rng) {
    if (n_rounds == 0) throw ConfigError("stream: n_rounds must be >= 1");
    auto poses = scan_poses(path);
    if (n_rounds > poses.size())
        throw ConfigError("stream: n_rounds " + std::to_string(n_rounds) +
                          " exceeds scan pose count " + std::to_string(poses.size()));
    // Poses are spaced one stride apart, so equal pose counts are equal arc
    // length chunks.
    std::vector<std::vector<TrainPoint>> batches(n_rounds);
    for (std::size_t p = 0; p < poses.size(); ++p) {
        std::size_t k = std::min(p * n_rounds / poses.size(), n_rounds - 1);
        RngStream pr = rng.split(p);
        LidarScan scan = raycast(fp, poses[p][0], poses[p][1], sensor, pr.split("beam-noise"));
        auto pts = scan_to_points(fp, scan, sensor.free_samples_per_beam, pr.split("free"));
        batches[k].insert(batches[k].end(), pts.begin(), pts.end());
    }
    return batches;
}

DensityField kde_density(const std::vector<TrainPoint>& points, std::size_t grid,
                         double bandwidth) {
    if (grid < 2) throw ConfigError("kde: grid must be >= 2");
    if (!(bandwidth > 0.0)) throw ConfigError("kde: bandwidth must be positive");
    if (points.empty()) throw ConfigError("kde: no points");

    DensityField field;
    field.grid = grid;
    field.raw.assign(grid * grid, 0.0);

    const double cell = 2.0 / static_cast<double>(grid);
    const double norm = 1.0 / (2.0 * std::numbers::pi * bandwidth * bandwidth *
                               static_cast<double>(points.size()));
    const auto reach = static_cast<long>(std::ceil(4.0 * bandwidth / cell)) + 1;
    const auto g = static_cast<long>(grid);

    for (const TrainPoint& p : points) {
        long cx = static_cast<long>((p.x + 1.0) / cell);
        long cy = static_cast<long>((p.y + 1.0) / cell);
        for (long iy = std::max<long>(0, cy - reach); iy <= std::min(g - 1, cy + reach); ++iy) {
            double y = -1.0 + (static_cast<double>(iy) + 0.5) * cell;
            double dy = y - p.y;
            for (long ix = std::max<long>(0, cx - reach); ix <= std::min(g - 1, cx + reach); ++ix) {
                double x = -1.0 + (static_cast<double>(ix) + 0.5) * cell;
                double dx = x - p.x;
                double d2 = (dx * dx + dy * dy) / (2.0 * bandwidth * bandwidth);
                if (d2 > 12.0) continue;
                field.raw[static_cast<std::size_t>(iy) * grid + static_cast<std::size_t>(ix)] +=
                    norm * std::exp(-d2);
            }
        }
    }

    double peak = *std::max_element(field.raw.begin(), field.raw.end());
    field.normalized.resize(field.raw.size());
    for (std::size_t i = 0; i < field.raw.size(); ++i)
        field.normalized[i] = peak > 0.0 ? field.raw[i] / peak : 0.0;
    return field;
}

}  // namespace dibmap
