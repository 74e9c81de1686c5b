#pragma once

#include <optional>

#include "dibmap/checkpoint.hpp"
#include "dibmap/config.hpp"
#include "dibmap/raster.hpp"

namespace dibmap {

struct WorldSetup {
    Floorplan floor;
    std::vector<AgentPath> paths;
};

// World, routes, datasets, and streams are all pure functions of the config
// seed, so every process (and every transport) derives identical values.
RngStream run_root(const ExperimentConfig& cfg);
WorldSetup build_world(const ExperimentConfig& cfg, std::size_t n_agents);
std::uint64_t net_seed(const ExperimentConfig& cfg, std::size_t agent);

struct AgentData {
    std::vector<std::vector<TrainPoint>> segments;  // per round, holdout removed
    std::vector<TrainPoint> train_union;
    std::vector<TrainPoint> holdout;
};

AgentData agent_data(const ExperimentConfig& cfg, const WorldSetup& world, std::size_t agent,
                     std::size_t n_segments);

// Monte Carlo occupancy mean/std rasters over the eval grid.  The same rng
// is replayed for every row chunk, so the result equals a single-batch
// evaluation.
std::pair<MapRaster, MapRaster> render_maps(const MapperNet& net, std::size_t grid,
                                            std::size_t passes, RngStream rng);

// Cells within `dilate` cells (Chebyshev) of any training point.
std::vector<std::uint8_t> explored_mask(const std::vector<TrainPoint>& points, std::size_t grid,
                                        int dilate);

// Raw StateVector snapshot, for cross-process and cross-transport
// comparisons.
void save_state(const StateVector& s, const std::filesystem::path& path);
StateVector load_state(const std::filesystem::path& path);

struct RunSummary {
    double final_val = 0.0;
    double final_residual = 0.0;  // distributed runs only
};

RunSummary run_single_agent(const ExperimentConfig& cfg);
RunSummary run_online(const ExperimentConfig& cfg);
RunSummary run_kl_sweep(const ExperimentConfig& cfg);
// agent_exe is the binary re-invoked for socket-mode agents ("" means this
// process's own executable); ignored for the sim transport.
RunSummary run_distributed(const ExperimentConfig& cfg, const std::string& agent_exe = "");
// Socket-mode agent body (child process entry).
int run_distributed_agent(const ExperimentConfig& cfg, std::uint32_t agent_index);

void run_export(const std::filesystem::path& checkpoint, const std::filesystem::path& out_dir,
                std::size_t grid, std::size_t passes, std::uint64_t seed);

RunSummary run_scenario(const ExperimentConfig& cfg, const std::string& agent_exe = "");

}  // namespace dibmap
