#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dibmap/errors.hpp"
#include "dibmap/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
    std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "key=value experiment config file");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--out", args.out, "override the output directory");
}

dibmap::ExperimentConfig resolve(const CommonArgs& args, dibmap::Scenario scenario) {
    dibmap::ExperimentConfig cfg;
    if (!args.config.empty()) cfg = dibmap::load_config(args.config);
    cfg.scenario = scenario;
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    if (!args.out.empty()) cfg.out_dir = args.out;
    cfg.validate();
    return cfg;
}

void print_summary(const dibmap::RunSummary& s, bool with_residual) {
    std::printf("final_val=%.6f\n", s.final_val);
    if (with_residual) std::printf("final_residual=%.6g\n", s.final_residual);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized Bayesian occupancy mapping experiments"};
    app.require_subcommand(1);

    CommonArgs single_args, sweep_args, online_args, dist_args;
    auto* single = app.add_subcommand("single", "train one agent on its full dataset");
    add_common(single, single_args);

    auto* sweep = app.add_subcommand("sweep", "single-agent runs across kl_weight values");
    add_common(sweep, sweep_args);

    auto* online = app.add_subcommand("online", "single agent on a streamed route (cdr/dr)");
    add_common(online, online_args);

    auto* dist = app.add_subcommand("dist", "multi-agent consensus mapping");
    add_common(dist, dist_args);
    std::int64_t agent_index = -1;
    dist->add_option("--agent-index", agent_index,
                     "internal: run as this socket-mode agent and exit");

    auto* exp = app.add_subcommand("export", "render rasters from a checkpoint");
    std::string ckpt, exp_out = "export";
    std::uint64_t exp_seed = 1;
    std::size_t exp_grid = 128, exp_passes = 50;
    exp->add_option("--checkpoint", ckpt, "checkpoint file")->required();
    exp->add_option("--out", exp_out, "output directory");
    exp->add_option("--grid", exp_grid, "raster side length");
    exp->add_option("--passes", exp_passes, "forward passes per cell");
    exp->add_option("--seed", exp_seed, "noise seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (single->parsed()) {
            print_summary(dibmap::run_single_agent(resolve(single_args, dibmap::Scenario::single_agent)), false);
        } else if (sweep->parsed()) {
            print_summary(dibmap::run_kl_sweep(resolve(sweep_args, dibmap::Scenario::kl_sweep)), false);
        } else if (online->parsed()) {
            print_summary(dibmap::run_online(resolve(online_args, dibmap::Scenario::online)), false);
        } else if (dist->parsed()) {
            auto cfg = resolve(dist_args, dibmap::Scenario::distributed);
            if (agent_index >= 0)
                return dibmap::run_distributed_agent(cfg, static_cast<std::uint32_t>(agent_index));
            print_summary(dibmap::run_distributed(cfg), true);
        } else if (exp->parsed()) {
            dibmap::run_export(ckpt, exp_out, exp_grid, exp_passes, exp_seed);
        }
    } catch (const dibmap::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
