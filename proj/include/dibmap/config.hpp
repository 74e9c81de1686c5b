#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dibmap/consensus.hpp"

namespace dibmap {

enum class Scenario { single_agent, kl_sweep, online, distributed };
enum class Retention { cdr, dr };
enum class TransportKind { sim, socket };

Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario s);

// Experiment description, loadable from a key=value file (# comments, one
// pair per line).  Unknown keys are rejected.
struct ExperimentConfig {
    Scenario scenario = Scenario::single_agent;
    std::uint64_t seed = 1;
    std::filesystem::path out_dir = "out";

    // world
    double floor_width_m = 20.0;
    double floor_height_m = 20.0;
    double floor_resolution = 0.05;
    double scan_stride = 0.25;

    // model
    std::size_t hidden = 256;
    double omega = 30.0;

    // sensing
    SensorConfig sensor;

    // local training and consensus
    ConsensusConfig consensus;
    std::size_t agents = 7;
    std::uint32_t rounds = 10;
    Retention retention = Retention::cdr;

    // evaluation
    std::size_t eval_grid = 128;
    std::size_t eval_passes = 50;
    double val_fraction = 0.1;

    // distributed transport
    TransportKind transport = TransportKind::sim;
    std::uint16_t base_port = 46600;
    std::uint64_t sim_max_skew = 8;
    std::uint32_t timeout_ms = 60000;

    // sweep
    std::vector<double> sweep_kl = {1e-4, 5e-3, 5e-1};

    void validate() const;
    // Canonical key=value dump of every effective setting.
    void echo(const std::filesystem::path& path) const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
// Applies one key=value pair; throws ConfigError for unknown keys or
// unparseable values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

}  // namespace dibmap
