#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "dibmap/rng.hpp"

namespace dibmap {

// Rectilinear occupancy world on a uniform grid.  Cell (ix, iy) covers the
// world rectangle [ix*res, (ix+1)*res) x [iy*res, (iy+1)*res) in meters,
// row iy stored at walls[iy*width + ix].
struct Floorplan {
    std::size_t width = 0;   // cells
    std::size_t height = 0;  // cells
    double resolution = 0.05;  // meters per cell
    std::vector<std::uint8_t> walls;  // 1 = wall

    bool wall_at(std::size_t ix, std::size_t iy) const { return walls[iy * width + ix] != 0; }
    bool in_bounds(double x, double y) const {
        return x >= 0.0 && y >= 0.0 && x < extent_x() && y < extent_y();
    }
    double extent_x() const { return static_cast<double>(width) * resolution; }
    double extent_y() const { return static_cast<double>(height) * resolution; }
    bool wall_at_world(double x, double y) const;
    bool free_at_world(double x, double y) const { return in_bounds(x, y) && !wall_at_world(x, y); }

    // World meters -> normalized map coordinates in [-1, 1]^2.
    std::array<double, 2> normalize(double x, double y) const;
    std::array<double, 2> denormalize(double nx, double ny) const;

    // Border must be walled and at least one cell free.
    void validate() const;
};

// Procedural floorplan: walled border, BSP rooms with door gaps.
Floorplan generate_floorplan(double width_m, double height_m, double resolution, RngStream rng);

// 8-bit PGM, walls black (cell is a wall iff pixel < 128).  Row 0 of the
// image is the top of the map (highest iy).
void save_floorplan_pgm(const Floorplan& fp, const std::filesystem::path& path);
Floorplan load_floorplan_pgm(const std::filesystem::path& path, double resolution);

struct Beam {
    double angle = 0.0;  // radians, world frame
    double range = 0.0;  // meters
    bool hit = false;    // false: traveled max_range without a wall
};

struct LidarScan {
    double pose_x = 0.0;
    double pose_y = 0.0;
    double max_range = 0.0;
    std::vector<Beam> beams;
};

struct SensorConfig {
    std::size_t beams = 40;
    double max_range = 6.0;
    double range_noise = 0.01;  // meters, gaussian, applied to hit ranges
    std::size_t free_samples_per_beam = 4;
};

// Grid-stepped DDA march from a free-space pose.  Throws ConfigError if the
// pose is out of bounds or inside a wall.
LidarScan raycast(const Floorplan& fp, double px, double py, const SensorConfig& sensor,
                  RngStream rng);

// One labeled training sample in normalized coordinates.
struct TrainPoint {
    double x = 0.0;
    double y = 0.0;
    double label = 0.0;  // 1 occupied, 0 free
};

// Hit beams contribute one occupied point at the endpoint; every beam
// contributes stratified free-space samples along its traversed length.
std::vector<TrainPoint> scan_to_points(const Floorplan& fp, const LidarScan& scan,
                                       std::size_t free_samples_per_beam, RngStream rng);

// Sensing route: straight segments between waypoints (world meters), scanned
// every scan_stride meters of arc length.
struct AgentPath {
    std::vector<std::array<double, 2>> waypoints;
    double scan_stride = 0.25;
};

std::vector<std::array<double, 2>> scan_poses(const AgentPath& path);

// Random mutually line-of-sight waypoint walks through free space, one per
// agent.
std::vector<AgentPath> default_agent_paths(const Floorplan& fp, std::size_t n_agents,
                                           RngStream rng);

// Points gathered by scanning every pose of the path.
std::vector<TrainPoint> collect_points(const Floorplan& fp, const AgentPath& path,
                                       const SensorConfig& sensor, RngStream rng);

// Splits the path's scan poses into n_rounds contiguous chunks of (nearly)
// equal arc length and returns the points gathered in each chunk.  Throws
// ConfigError when n_rounds exceeds the pose count.
std::vector<std::vector<TrainPoint>> stream_segments(const Floorplan& fp, const AgentPath& path,
                                                     std::size_t n_rounds,
                                                     const SensorConfig& sensor, RngStream rng);

// Gaussian KDE over normalized [-1, 1]^2 on a grid x grid lattice of cell
// centers.  raw integrates to ~1 over the square; normalized is raw scaled
// to max 1.
struct DensityField {
    std::size_t grid = 0;
    std::vector<double> raw;
    std::vector<double> normalized;
};

DensityField kde_density(const std::vector<TrainPoint>& points, std::size_t grid,
                         double bandwidth);

}  // namespace dibmap
