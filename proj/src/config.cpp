#include "dibmap/config.hpp"

#include <fstream>
#include <sstream>

#include "dibmap/errors.hpp"

namespace dibmap {
namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for " + key + ": '" + v + "'");
    }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        unsigned long long d = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
    }
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    if (out.empty()) throw ConfigError("config: empty list for " + key);
    return out;
}

}  // namespace

Scenario parse_scenario(const std::string& name) {
    if (name == "single") return Scenario::single_agent;
    if (name == "sweep") return Scenario::kl_sweep;
    if (name == "online") return Scenario::online;
    if (name == "dist") return Scenario::distributed;
    throw ConfigError("config: unknown scenario '" + name + "'");
}

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::single_agent: return "single";
        case Scenario::kl_sweep: return "sweep";
        case Scenario::online: return "online";
        case Scenario::distributed: return "dist";
    }
    return "?";
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "scenario") cfg.scenario = parse_scenario(value);
    else if (key == "seed") cfg.seed = to_u64(key, value);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "floor_width_m") cfg.floor_width_m = to_double(key, value);
    else if (key == "floor_height_m") cfg.floor_height_m = to_double(key, value);
    else if (key == "floor_resolution") cfg.floor_resolution = to_double(key, value);
    else if (key == "scan_stride") cfg.scan_stride = to_double(key, value);
    else if (key == "hidden") cfg.hidden = to_u64(key, value);
    else if (key == "omega") cfg.omega = to_double(key, value);
    else if (key == "sensor_beams") cfg.sensor.beams = to_u64(key, value);
    else if (key == "sensor_max_range") cfg.sensor.max_range = to_double(key, value);
    else if (key == "sensor_noise") cfg.sensor.range_noise = to_double(key, value);
    else if (key == "free_samples_per_beam") cfg.sensor.free_samples_per_beam = to_u64(key, value);
    else if (key == "iters") cfg.consensus.primal_iters = to_u64(key, value);
    else if (key == "lr_mu") cfg.consensus.lr_mu = to_double(key, value);
    else if (key == "lr_rho") cfg.consensus.lr_rho = to_double(key, value);
    else if (key == "batch") cfg.consensus.batch = to_u64(key, value);
    else if (key == "optimizer") {
        if (value == "sgd") cfg.consensus.optimizer = OptimizerKind::sgd;
        else if (value == "adam") cfg.consensus.optimizer = OptimizerKind::adam;
        else throw ConfigError("config: unknown optimizer '" + value + "'");
    } else if (key == "base_loss") {
        if (value == "bce") cfg.consensus.loss.base_loss = BaseLoss::bce;
        else if (value == "mse") cfg.consensus.loss.base_loss = BaseLoss::mse;
        else throw ConfigError("config: unknown base loss '" + value + "'");
    } else if (key == "kl_weight") cfg.consensus.loss.kl_weight = to_double(key, value);
    else if (key == "prior_mu") cfg.consensus.loss.prior_mu = to_double(key, value);
    else if (key == "prior_sigma") cfg.consensus.loss.prior_sigma = to_double(key, value);
    else if (key == "strategy") cfg.consensus.strategy = parse_strategy(value);
    else if (key == "w_mu") cfg.consensus.w_mu = to_double(key, value);
    else if (key == "w_rho") cfg.consensus.w_rho = to_double(key, value);
    else if (key == "dual_step_mu") cfg.consensus.dual_step_mu = to_double(key, value);
    else if (key == "dual_step_rho") cfg.consensus.dual_step_rho = to_double(key, value);
    else if (key == "w_scale") cfg.consensus.w_scale = to_double(key, value);
    else if (key == "agents") cfg.agents = to_u64(key, value);
    else if (key == "rounds") cfg.rounds = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "retention") {
        if (value == "cdr") cfg.retention = Retention::cdr;
        else if (value == "dr") cfg.retention = Retention::dr;
        else throw ConfigError("config: unknown retention '" + value + "'");
    } else if (key == "eval_grid") cfg.eval_grid = to_u64(key, value);
    else if (key == "eval_passes") cfg.eval_passes = to_u64(key, value);
    else if (key == "val_fraction") cfg.val_fraction = to_double(key, value);
    else if (key == "transport") {
        if (value == "sim") cfg.transport = TransportKind::sim;
        else if (value == "socket") cfg.transport = TransportKind::socket;
        else throw ConfigError("config: unknown transport '" + value + "'");
    } else if (key == "base_port") cfg.base_port = static_cast<std::uint16_t>(to_u64(key, value));
    else if (key == "sim_max_skew") cfg.sim_max_skew = to_u64(key, value);
    else if (key == "timeout_ms") cfg.timeout_ms = static_cast<std::uint32_t>(to_u64(key, value));
    else if (key == "sweep_kl") cfg.sweep_kl = to_list(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    ExperimentConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not key=value");
        apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    if (hidden == 0) throw ConfigError("config: hidden must be positive");
    if (agents == 0) throw ConfigError("config: agents must be positive");
    if (rounds == 0) throw ConfigError("config: rounds must be positive");
    if (consensus.primal_iters == 0) throw ConfigError("config: iters must be positive");
    if (!(consensus.lr_mu > 0.0) || !(consensus.lr_rho > 0.0))
        throw ConfigError("config: learning rates must be positive");
    if (!(consensus.w_mu >= 0.0) || !(consensus.w_rho >= 0.0))
        throw ConfigError("config: penalty weights must be non-negative");
    if (!(consensus.w_scale > 0.0)) throw ConfigError("config: w_scale must be positive");
    if (consensus.loss.kl_weight < 0.0) throw ConfigError("config: kl_weight must be >= 0");
    if (!(consensus.loss.prior_sigma > 0.0))
        throw ConfigError("config: prior_sigma must be positive");
    if (eval_grid < 2) throw ConfigError("config: eval_grid must be >= 2");
    if (eval_passes < 2) throw ConfigError("config: eval_passes must be >= 2");
    if (!(val_fraction > 0.0) || val_fraction >= 0.5)
        throw ConfigError("config: val_fraction must be in (0, 0.5)");
    if (sensor.beams == 0 || !(sensor.max_range > 0.0))
        throw ConfigError("config: sensor needs beams and positive max range");
    if (scenario == Scenario::kl_sweep && sweep_kl.empty())
        throw ConfigError("config: sweep needs kl values");
}

void ExperimentConfig::echo(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("config: cannot write " + path.string());
    out.precision(17);
    out << "scenario=" << scenario_name(scenario) << "\n"
        << "seed=" << seed << "\n"
        << "out_dir=" << out_dir.string() << "\n"
        << "floor_width_m=" << floor_width_m << "\n"
        << "floor_height_m=" << floor_height_m << "\n"
        << "floor_resolution=" << floor_resolution << "\n"
        << "scan_stride=" << scan_stride << "\n"
        << "hidden=" << hidden << "\n"
        << "omega=" << omega << "\n"
        << "sensor_beams=" << sensor.beams << "\n"
        << "sensor_max_range=" << sensor.max_range << "\n"
        << "sensor_noise=" << sensor.range_noise << "\n"
        << "free_samples_per_beam=" << sensor.free_samples_per_beam << "\n"
        << "iters=" << consensus.primal_iters << "\n"
        << "lr_mu=" << consensus.lr_mu << "\n"
        << "lr_rho=" << consensus.lr_rho << "\n"
        << "batch=" << consensus.batch << "\n"
        << "optimizer=" << (consensus.optimizer == OptimizerKind::adam ? "adam" : "sgd") << "\n"
        << "base_loss=" << (consensus.loss.base_loss == BaseLoss::bce ? "bce" : "mse") << "\n"
        << "kl_weight=" << consensus.loss.kl_weight << "\n"
        << "prior_mu=" << consensus.loss.prior_mu << "\n"
        << "prior_sigma=" << consensus.loss.prior_sigma << "\n"
        << "strategy=" << strategy_name(consensus.strategy) << "\n"
        << "w_mu=" << consensus.w_mu << "\n"
        << "w_rho=" << consensus.w_rho << "\n"
        << "dual_step_mu=" << consensus.dual_step_mu << "\n"
        << "dual_step_rho=" << consensus.dual_step_rho << "\n"
        << "w_scale=" << consensus.w_scale << "\n"
        << "agents=" << agents << "\n"
        << "rounds=" << rounds << "\n"
        << "retention=" << (retention == Retention::cdr ? "cdr" : "dr") << "\n"
        << "eval_grid=" << eval_grid << "\n"
        << "eval_passes=" << eval_passes << "\n"
        << "val_fraction=" << val_fraction << "\n"
        << "transport=" << (transport == TransportKind::sim ? "sim" : "socket") << "\n"
        << "base_port=" << base_port << "\n"
        << "sim_max_skew=" << sim_max_skew << "\n"
        << "timeout_ms=" << timeout_ms << "\n";
    out << "sweep_kl=";
    for (std::size_t i = 0; i < sweep_kl.size(); ++i) out << (i ? "," : "") << sweep_kl[i];
    out << "\n";
}

}  // namespace dibmap
