#include "dibmap/experiment.hpp"

#include <sys/wait.h>
#include <unistd.h>
#include <fcntl.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>

#include "dibmap/errors.hpp"
#include "dibmap/protocol.hpp"
#include "dibmap/sim_net.hpp"
#include "dibmap/socket_net.hpp"

namespace dibmap {
namespace {

namespace fs = std::filesystem;

void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create directory " + p.string() + ": " + ec.message());
}

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

struct MetricsWriter {
    std::ofstream out;
    explicit MetricsWriter(const fs::path& path) : out(path) {
        if (!out) throw IoError("cannot write " + path.string());
        out.precision(12);
        out << "round,iter,pred_loss,loss_mu,loss_rho,val_loss\n";
    }
    void row(const PrimalRecord& r, std::optional<double> val) {
        out << r.round << "," << r.iter << "," << r.pred_loss << "," << r.loss_mu << ","
            << r.loss_rho << ",";
        if (val) out << *val;
        out << "\n";
    }
};

struct AgentRuntime {
    MapperNet net;
    DualState dual;
    BlockOptimizer opt_mu;
    BlockOptimizer opt_rho;
    RngStream stream;
    std::vector<PrimalRecord> records;
    std::vector<StateVector> history;
};

AgentRuntime make_runtime(const ExperimentConfig& cfg, std::size_t agent) {
    AgentRuntime rt;
    rt.net = MapperNet::init(net_seed(cfg, agent), cfg.hidden, cfg.omega);
    rt.dual = DualState::init(rt.net.flatten());
    const auto& c = cfg.consensus;
    rt.opt_mu = BlockOptimizer(c.optimizer, c.lr_mu, c.adam_beta1, c.adam_beta2, c.adam_eps);
    rt.opt_rho = BlockOptimizer(c.optimizer, c.lr_rho, c.adam_beta1, c.adam_beta2, c.adam_eps);
    rt.stream = run_root(cfg).split("agent").split(agent);
    return rt;
}

ProtocolEngine::NodeUpdateFn consensus_update_fn(const ExperimentConfig& cfg, AgentRuntime& rt,
                                                 const std::vector<TrainPoint>& data,
                                                 std::uint32_t id) {
    return [&cfg, &rt, &data, id](const StateVector& own,
                                  const std::map<std::uint32_t, StateVector>& peers,
                                  std::uint32_t round) {
        std::vector<PrimalRecord> recs;
        auto [next, dual] = node_update(own, peers, std::move(rt.dual), rt.net, data,
                                        cfg.consensus, rt.opt_mu, rt.opt_rho, id, round,
                                        rt.stream, &recs);
        rt.dual = std::move(dual);
        rt.records.insert(rt.records.end(), recs.begin(), recs.end());
        rt.history.push_back(next);
        return next;
    };
}

void write_maps(const MapperNet& net, const ExperimentConfig& cfg, const fs::path& dir) {
    auto [mean_map, std_map] = render_maps(net, cfg.eval_grid, cfg.eval_passes,
                                           run_root(cfg).split("eval"));
    mean_map.lo = 0.0;
    mean_map.hi = 1.0;
    std_map.lo = 0.0;
    std_map.hi = 0.5;
    write_raster_pgm(mean_map, dir / "map_mean.pgm");
    write_raster_csv(mean_map, dir / "map_mean.csv");
    write_raster_pgm(std_map, dir / "map_std.pgm");
    write_raster_csv(std_map, dir / "map_std.csv");
}

void write_summary(const fs::path& path, const RunSummary& s, bool with_residual) {
    std::ofstream out(path);
    out.precision(12);
    out << "final_val=" << s.final_val << "\n";
    if (with_residual) out << "final_residual=" << s.final_residual << "\n";
}

std::string self_exe() {
    char buf[4096];
    ssize_t n = readlink("/proc/self/exe", buf, sizeof(buf) - 1);
    if (n <= 0) throw IoError("cannot resolve own executable path");
    buf[n] = '\0';
    return buf;
}

RunSummary finalize_distributed(const ExperimentConfig& cfg,
                                const std::vector<AgentData>& ads,
                                const std::vector<StateVector>& final_states,
                                const std::vector<std::vector<StateVector>>& history) {
    const fs::path out = cfg.out_dir;
    RunSummary summary;
    summary.final_residual = consensus_residual(final_states);

    if (!history.empty()) {
        std::ofstream cons(out / "consensus.csv");
        cons.precision(12);
        cons << "round,residual\n";
        for (std::uint32_t r = 0; r < cfg.rounds; ++r) {
            std::vector<StateVector> at_round;
            for (const auto& h : history) {
                if (r < h.size()) at_round.push_back(h[r]);
            }
            if (at_round.size() == history.size())
                cons << r << "," << consensus_residual(at_round) << "\n";
        }
    }

    std::vector<const StateVector*> ptrs;
    for (const auto& s : final_states) ptrs.push_back(&s);
    StateVector mean = mean_state(ptrs);
    MapperNet net = MapperNet::skeleton(cfg.hidden, cfg.omega);
    net.restore(mean);

    std::vector<TrainPoint> global_holdout;
    for (const auto& ad : ads)
        global_holdout.insert(global_holdout.end(), ad.holdout.begin(), ad.holdout.end());
    summary.final_val = validation_loss(net, global_holdout, cfg.eval_passes,
                                        run_root(cfg).split("val-final"),
                                        cfg.consensus.loss.base_loss);

    save_checkpoint(net, out / "checkpoint.bin");
    save_state(mean, out / "state.bin");
    write_maps(net, cfg, out);
    write_summary(out / "summary.txt", summary, true);
    return summary;
}

void write_agent_outputs(const ExperimentConfig& cfg, std::uint32_t agent, AgentRuntime& rt,
                         const StateVector& final_state) {
    fs::path dir = cfg.out_dir / "agents" / std::to_string(agent);
    ensure_dir(dir);
    MetricsWriter metrics(dir / "metrics.csv");
    for (const auto& r : rt.records) metrics.row(r, std::nullopt);
    save_state(final_state, dir / "state.bin");
    rt.net.restore(final_state);
    save_checkpoint(rt.net, dir / "checkpoint.bin");
}

RunSummary run_distributed_sim(const ExperimentConfig& cfg) {
    WorldSetup world = build_world(cfg, cfg.agents);
    save_floorplan_pgm(world.floor, cfg.out_dir / "floorplan.pgm");

    std::vector<AgentData> ads;
    std::vector<AgentRuntime> rts;
    ads.reserve(cfg.agents);
    rts.reserve(cfg.agents);
    for (std::size_t i = 0; i < cfg.agents; ++i) {
        ads.push_back(agent_data(cfg, world, i, 1));
        rts.push_back(make_runtime(cfg, i));
    }

    std::vector<StateVector> initial;
    for (auto& rt : rts) initial.push_back(rt.net.flatten());

    SimNetwork sim(std::move(initial), cfg.rounds,
                   [&](std::uint32_t id) {
                       return consensus_update_fn(cfg, rts[id], ads[id].train_union, id);
                   },
                   run_root(cfg).split("jitter").next_u64(), cfg.sim_max_skew);
    if (!sim.run()) throw ProtocolError("distributed sim deadlocked");

    std::vector<StateVector> final_states = sim.final_states();
    for (std::uint32_t i = 0; i < cfg.agents; ++i)
        write_agent_outputs(cfg, i, rts[i], final_states[i]);

    std::vector<std::vector<StateVector>> history;
    for (auto& rt : rts) history.push_back(rt.history);
    return finalize_distributed(cfg, ads, final_states, history);
}

RunSummary run_distributed_socket(const ExperimentConfig& cfg, const std::string& agent_exe) {
    const fs::path out = cfg.out_dir;
    const fs::path cfg_file = out / "config_used.txt";
    std::string exe = agent_exe.empty() ? self_exe() : agent_exe;

    std::vector<pid_t> pids;
    for (std::size_t i = 0; i < cfg.agents; ++i) {
        fs::path dir = out / "agents" / std::to_string(i);
        ensure_dir(dir);
        pid_t pid = fork();
        if (pid < 0) throw IoError("fork failed");
        if (pid == 0) {
            int log = open((dir / "log.txt").c_str(), O_CREAT | O_WRONLY | O_TRUNC, 0644);
            if (log >= 0) {
                dup2(log, 1);
                dup2(log, 2);
                close(log);
            }
            std::string idx = std::to_string(i);
            execl(exe.c_str(), exe.c_str(), "dist", "--config", cfg_file.c_str(),
                  "--agent-index", idx.c_str(), static_cast<char*>(nullptr));
            std::perror("execl");
            _exit(127);
        }
        pids.push_back(pid);
    }

    std::string failures;
    for (std::size_t i = 0; i < pids.size(); ++i) {
        int status = 0;
        if (waitpid(pids[i], &status, 0) < 0 || !WIFEXITED(status) ||
            WEXITSTATUS(status) != 0)
            failures += " agent " + std::to_string(i) +
                        " (status " + std::to_string(status) + ")";
    }
    if (!failures.empty())
        throw ProtocolError("distributed socket run failed:" + failures +
                            "; see agents/*/log.txt under " + out.string());

    WorldSetup world = build_world(cfg, cfg.agents);
    save_floorplan_pgm(world.floor, out / "floorplan.pgm");
    std::vector<AgentData> ads;
    std::vector<StateVector> final_states;
    for (std::size_t i = 0; i < cfg.agents; ++i) {
        ads.push_back(agent_data(cfg, world, i, 1));
        final_states.push_back(load_state(out / "agents" / std::to_string(i) / "state.bin"));
    }
    return finalize_distributed(cfg, ads, final_states, {});
}

}  // namespace

RngStream run_root(const ExperimentConfig& cfg) {
    return RngStream(cfg.seed).split("dibmap-run");
}

std::uint64_t net_seed(const ExperimentConfig& cfg, std::size_t) {
    // All agents share one initialization. Weight-space consensus averages
    // parameters directly, and the mean of independently initialized sine
    // networks is a near-zero function no agent can train out of.
    return run_root(cfg).split("net").next_u64();
}

WorldSetup build_world(const ExperimentConfig& cfg, std::size_t n_agents) {
    WorldSetup w;
    w.floor = generate_floorplan(cfg.floor_width_m, cfg.floor_height_m, cfg.floor_resolution,
                                 run_root(cfg).split("floor"));
    w.paths = default_agent_paths(w.floor, n_agents, run_root(cfg).split("paths"));
    for (auto& p : w.paths) p.scan_stride = cfg.scan_stride;
    return w;
}

AgentData agent_data(const ExperimentConfig& cfg, const WorldSetup& world, std::size_t agent,
                     std::size_t n_segments) {
    if (agent >= world.paths.size()) throw ConfigError("agent index out of range");
    AgentData ad;
    auto raw = stream_segments(world.floor, world.paths[agent], n_segments, cfg.sensor,
                               run_root(cfg).split("data").split(agent));

    std::size_t total = 0;
    for (const auto& seg : raw) total += seg.size();
    if (total == 0) throw ConfigError("agent " + std::to_string(agent) + " collected no data");

    // Holdout indices over the concatenated stream, identical no matter how
    // many segments the stream is cut into.
    auto n_hold = std::max<std::size_t>(1, static_cast<std::size_t>(
                                               std::llround(cfg.val_fraction *
                                                            static_cast<double>(total))));
    std::vector<std::size_t> idx(total);
    for (std::size_t i = 0; i < total; ++i) idx[i] = i;
    RngStream hr = run_root(cfg).split("holdout").split(agent);
    for (std::size_t i = total - 1; i > 0; --i) {
        std::size_t j = hr.next_u64() % (i + 1);
        std::swap(idx[i], idx[j]);
    }
    std::set<std::size_t> hold(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_hold));

    std::size_t flat = 0;
    ad.segments.resize(raw.size());
    for (std::size_t s = 0; s < raw.size(); ++s) {
        for (const TrainPoint& p : raw[s]) {
            if (hold.count(flat)) ad.holdout.push_back(p);
            else {
                ad.segments[s].push_back(p);
                ad.train_union.push_back(p);
            }
            ++flat;
        }
    }
    if (ad.train_union.empty()) throw ConfigError("holdout consumed the whole dataset");
    return ad;
}

std::pair<MapRaster, MapRaster> render_maps(const MapperNet& net, std::size_t grid,
                                            std::size_t passes, RngStream rng) {
    MapRaster mean_map, std_map;
    mean_map.side = std_map.side = grid;
    mean_map.values.assign(grid * grid, 0.0);
    std_map.values.assign(grid * grid, 0.0);

    const double cell = 2.0 / static_cast<double>(grid);
    const std::size_t chunk = 4096;
    std::size_t total = grid * grid;
    for (std::size_t start = 0; start < total; start += chunk) {
        std::size_t n = std::min(chunk, total - start);
        std::vector<double> coords(n * 2);
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t cell_idx = start + k;
            std::size_t iy = cell_idx / grid, ix = cell_idx % grid;
            coords[2 * k] = -1.0 + (static_cast<double>(ix) + 0.5) * cell;
            coords[2 * k + 1] = -1.0 + (static_cast<double>(iy) + 0.5) * cell;
        }
        auto [m, s] = net.predict_with_uncertainty(Tensor({n, 2}, std::move(coords)), passes, rng);
        for (std::size_t k = 0; k < n; ++k) {
            mean_map.values[start + k] = m.at(k);
            std_map.values[start + k] = s.at(k);
        }
    }
    return {mean_map, std_map};
}

std::vector<std::uint8_t> explored_mask(const std::vector<TrainPoint>& points, std::size_t grid,
                                        int dilate) {
    std::vector<std::uint8_t> base(grid * grid, 0);
    const auto g = static_cast<long>(grid);
    for (const TrainPoint& p : points) {
        long ix = std::clamp<long>(static_cast<long>((p.x + 1.0) * 0.5 * static_cast<double>(g)),
                                   0, g - 1);
        long iy = std::clamp<long>(static_cast<long>((p.y + 1.0) * 0.5 * static_cast<double>(g)),
                                   0, g - 1);
        base[static_cast<std::size_t>(iy) * grid + static_cast<std::size_t>(ix)] = 1;
    }
    if (dilate <= 0) return base;
    std::vector<std::uint8_t> out(grid * grid, 0);
    for (long iy = 0; iy < g; ++iy)
        for (long ix = 0; ix < g; ++ix) {
            bool near = false;
            for (long dy = -dilate; dy <= dilate && !near; ++dy)
                for (long dx = -dilate; dx <= dilate && !near; ++dx) {
                    long jx = ix + dx, jy = iy + dy;
                    if (jx < 0 || jy < 0 || jx >= g || jy >= g) continue;
                    if (base[static_cast<std::size_t>(jy) * grid + static_cast<std::size_t>(jx)])
                        near = true;
                }
            out[static_cast<std::size_t>(iy) * grid + static_cast<std::size_t>(ix)] = near ? 1 : 0;
        }
    return out;
}

void save_state(const StateVector& s, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    const char magic[8] = {'D', 'I', 'B', 'M', 'S', 'T', '0', '1'};
    out.write(magic, 8);
    std::uint64_t fp = s.model_fingerprint, mu = s.mu_block.size(), rho = s.rho_block.size();
    out.write(reinterpret_cast<const char*>(&fp), 8);
    out.write(reinterpret_cast<const char*>(&mu), 8);
    out.write(reinterpret_cast<const char*>(&rho), 8);
    out.write(reinterpret_cast<const char*>(s.mu_block.data()),
              static_cast<std::streamsize>(8 * s.mu_block.size()));
    out.write(reinterpret_cast<const char*>(s.rho_block.data()),
              static_cast<std::streamsize>(8 * s.rho_block.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

StateVector load_state(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "DIBMST01", 8) != 0)
        throw IoError("bad state snapshot " + path.string());
    std::uint64_t fp = 0, mu = 0, rho = 0;
    in.read(reinterpret_cast<char*>(&fp), 8);
    in.read(reinterpret_cast<char*>(&mu), 8);
    in.read(reinterpret_cast<char*>(&rho), 8);
    StateVector s;
    s.model_fingerprint = fp;
    s.mu_block.resize(mu);
    s.rho_block.resize(rho);
    in.read(reinterpret_cast<char*>(s.mu_block.data()), static_cast<std::streamsize>(8 * mu));
    in.read(reinterpret_cast<char*>(s.rho_block.data()), static_cast<std::streamsize>(8 * rho));
    if (!in) throw IoError("truncated state snapshot " + path.string());
    return s;
}

RunSummary run_online(const ExperimentConfig& cfg) {
    ensure_dir(cfg.out_dir);
    cfg.echo(cfg.out_dir / "config_used.txt");
    WorldSetup world = build_world(cfg, 1);
    save_floorplan_pgm(world.floor, cfg.out_dir / "floorplan.pgm");
    AgentData ad = agent_data(cfg, world, 0, cfg.rounds);

    MapperNet net = MapperNet::init(net_seed(cfg, 0), cfg.hidden, cfg.omega);
    DualState dual = DualState::init(net.flatten());  // zero duals: plain Eq-style local loss
    ConsensusConfig local = cfg.consensus;
    local.strategy = RegStrategy::uniform_l2;
    local.w_mu = 0.0;
    local.w_rho = 0.0;
    BlockOptimizer opt_mu(local.optimizer, local.lr_mu, local.adam_beta1, local.adam_beta2,
                          local.adam_eps);
    BlockOptimizer opt_rho(local.optimizer, local.lr_rho, local.adam_beta1, local.adam_beta2,
                           local.adam_eps);
    RngStream astream = run_root(cfg).split("agent").split(0);

    MetricsWriter metrics(cfg.out_dir / "metrics.csv");
    std::vector<TrainPoint> pool;
    for (std::uint32_t cr = 0; cr < cfg.rounds; ++cr) {
        const auto& seg = ad.segments[cr];
        if (cfg.retention == Retention::cdr) pool.insert(pool.end(), seg.begin(), seg.end());
        else pool = seg;
        if (pool.empty())
            throw ConfigError("round " + std::to_string(cr) + " has no training points");
        auto recs = primal_step(net, pool, dual, local, opt_mu, opt_rho, cr,
                                astream.split("round").split(cr));
        double val = validation_loss(net, ad.holdout, 8, run_root(cfg).split("val").split(cr),
                                     cfg.consensus.loss.base_loss);
        for (std::size_t k = 0; k < recs.size(); ++k)
            metrics.row(recs[k], k + 1 == recs.size() ? std::optional<double>(val) : std::nullopt);
    }

    RunSummary summary;
    summary.final_val = validation_loss(net, ad.holdout, cfg.eval_passes,
                                        run_root(cfg).split("val-final"),
                                        cfg.consensus.loss.base_loss);
    save_checkpoint(net, cfg.out_dir / "checkpoint.bin");
    save_state(net.flatten(), cfg.out_dir / "state.bin");
    write_maps(net, cfg, cfg.out_dir);
    write_summary(cfg.out_dir / "summary.txt", summary, false);
    return summary;
}

RunSummary run_single_agent(const ExperimentConfig& cfg) {
    ExperimentConfig one = cfg;
    one.rounds = 1;
    one.retention = Retention::cdr;
    return run_online(one);
}

RunSummary run_kl_sweep(const ExperimentConfig& cfg) {
    ensure_dir(cfg.out_dir);
    cfg.echo(cfg.out_dir / "config_used.txt");

    // Same world and data for every weight; only the loss changes.
    ExperimentConfig base = cfg;
    base.rounds = 1;
    base.retention = Retention::cdr;
    WorldSetup world = build_world(base, 1);
    AgentData ad = agent_data(base, world, 0, 1);
    std::vector<TrainPoint> all_points = ad.train_union;
    all_points.insert(all_points.end(), ad.holdout.begin(), ad.holdout.end());
    auto mask = explored_mask(all_points, cfg.eval_grid, 2);

    std::ofstream table(cfg.out_dir / "sweep_summary.csv");
    table.precision(12);
    table << "kl_weight,std_explored,std_unexplored,ratio\n";

    RunSummary last;
    for (double klw : cfg.sweep_kl) {
        ExperimentConfig run = base;
        run.scenario = Scenario::single_agent;
        run.consensus.loss.kl_weight = klw;
        run.out_dir = cfg.out_dir / ("kl_" + fmt_g(klw));
        last = run_online(run);

        MapRaster std_map = read_raster_csv(run.out_dir / "map_std.csv");
        double in_sum = 0.0, out_sum = 0.0;
        std::size_t in_n = 0, out_n = 0;
        for (std::size_t i = 0; i < std_map.values.size(); ++i) {
            if (mask[i]) {
                in_sum += std_map.values[i];
                ++in_n;
            } else {
                out_sum += std_map.values[i];
                ++out_n;
            }
        }
        double in_mean = in_n ? in_sum / static_cast<double>(in_n) : 0.0;
        double out_mean = out_n ? out_sum / static_cast<double>(out_n) : 0.0;
        double ratio = in_mean > 0.0 ? out_mean / in_mean : 0.0;
        table << fmt_g(klw) << "," << in_mean << "," << out_mean << "," << ratio << "\n";
    }
    return last;
}

RunSummary run_distributed(const ExperimentConfig& cfg, const std::string& agent_exe) {
    ensure_dir(cfg.out_dir);
    cfg.echo(cfg.out_dir / "config_used.txt");
    if (cfg.transport == TransportKind::sim) return run_distributed_sim(cfg);
    return run_distributed_socket(cfg, agent_exe);
}

int run_distributed_agent(const ExperimentConfig& cfg, std::uint32_t agent_index) {
    if (agent_index >= cfg.agents) throw ConfigError("agent index out of range");
    WorldSetup world = build_world(cfg, cfg.agents);
    AgentData ad = agent_data(cfg, world, agent_index, 1);
    AgentRuntime rt = make_runtime(cfg, agent_index);

    WireCodec codec(rt.net.fingerprint(), rt.net.mu_size(), rt.net.rho_size());
    auto setup = std::chrono::milliseconds(std::max<std::uint32_t>(cfg.timeout_ms, 30000));
    SocketTransport transport(agent_index, static_cast<std::uint32_t>(cfg.agents),
                              cfg.base_port, codec, setup);

    std::vector<std::uint32_t> peers;
    for (std::uint32_t j = 0; j < cfg.agents; ++j)
        if (j != agent_index) peers.push_back(j);

    ProtocolEngine engine(agent_index, peers, cfg.rounds, rt.net.flatten(),
                          consensus_update_fn(cfg, rt, ad.train_union, agent_index),
                          [&transport](const PeerMessage& m) { transport.broadcast(m); });
    engine.start();
    while (!engine.done()) {
        auto msg = transport.receive(std::chrono::milliseconds(cfg.timeout_ms));
        if (!msg)
            throw TimeoutError("agent " + std::to_string(agent_index) +
                               " timed out waiting for peers: " + engine.progress_summary());
        engine.on_message(*msg);
    }
    transport.flush(std::chrono::milliseconds(5000));
    write_agent_outputs(cfg, agent_index, rt, engine.own_state());
    return 0;
}

void run_export(const std::filesystem::path& checkpoint, const std::filesystem::path& out_dir,
                std::size_t grid, std::size_t passes, std::uint64_t seed) {
    MapperNet net = load_checkpoint(checkpoint);
    ensure_dir(out_dir);
    auto [mean_map, std_map] = render_maps(net, grid, passes, RngStream(seed).split("export"));
    mean_map.lo = 0.0;
    mean_map.hi = 1.0;
    std_map.lo = 0.0;
    std_map.hi = 0.5;
    write_raster_pgm(mean_map, out_dir / "map_mean.pgm");
    write_raster_csv(mean_map, out_dir / "map_mean.csv");
    write_raster_pgm(std_map, out_dir / "map_std.pgm");
    write_raster_csv(std_map, out_dir / "map_std.csv");
}

RunSummary run_scenario(const ExperimentConfig& cfg, const std::string& agent_exe) {
    switch (cfg.scenario) {
        case Scenario::single_agent: return run_single_agent(cfg);
        case Scenario::kl_sweep: return run_kl_sweep(cfg);
        case Scenario::online: return run_online(cfg);
        case Scenario::distributed: return run_distributed(cfg, agent_exe);
    }
    throw ConfigError("unhandled scenario");
}

}  // namespace dibmap
