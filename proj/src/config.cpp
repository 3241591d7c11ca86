#include "fdmimo/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fdmimo {

using nlohmann::json;

void SystemConfig::validate() const {
  std::vector<std::string> bad;
  auto req = [&](bool ok, const std::string& msg) {
    if (!ok) bad.push_back(msg);
  };

  req(n_tx >= 1, "n_tx: expected >= 1");
  req(m_rx >= 1, "m_rx: expected >= 1");
  req(std::isfinite(p_max_dbm), "p_max_dbm: expected finite dBm");
  req(p_max_mw() > 0, "p_max_dbm: expected positive linear power");
  req(noise_mw() > 0, "noise_dbm: expected positive linear power");
  req(epsilon_mw() > 0, "epsilon_dbm: expected positive linear power");
  req(pathloss_comm_db >= 0, "pathloss_comm_db: expected >= 0");
  req(pathloss_si_db >= 0, "pathloss_si_db: expected >= 0");
  req(std::isfinite(k_factor_db), "k_factor_db: expected finite dB");
  req(beta() >= 0 && beta() < 1, "beta_db: expected linear ratio in [0, 1)");
  req(tau_sq() >= 0 && tau_sq() < 1, "tau_db: expected tau^2 in [0, 1)");
  for (double t : tau_grid_db)
    req(tau_sq_from_db(t) >= 0 && tau_sq_from_db(t) < 1,
        "tau_grid_db: expected every tau^2 in [0, 1)");
  req(!tau_grid_db.empty(), "tau_grid_db: expected non-empty grid");
  req(n_tap >= 1 && n_tap <= n_tx * m_rx, "n_tap: expected in [1, m_rx*n_tx]");
  req(amp_imperf_db >= 0, "amp_imperf_db: expected >= 0");
  req(phase_imperf_deg >= 0, "phase_imperf_deg: expected >= 0");
  req(ula_spacing > 0, "ula_spacing: expected > 0");
  req(trials >= 1, "trials: expected >= 1");

  req(opt.memory_len >= 1, "opt.memory_len: expected >= 1");
  req(opt.max_iters >= 1, "opt.max_iters: expected >= 1");
  req(opt.conv_tol > 0, "opt.conv_tol: expected > 0");
  req(opt.step_delta > 0, "opt.step_delta: expected > 0");
  req(opt.armijo_nu > 0 && opt.armijo_nu < 1, "opt.armijo_nu: expected in (0, 1)");
  req(opt.armijo_iota > 0 && opt.armijo_iota < 1, "opt.armijo_iota: expected in (0, 1)");
  req(opt.armijo_max_m >= 1, "opt.armijo_max_m: expected >= 1");
  req(opt.proj_tol > 0, "opt.proj_tol: expected > 0");
  req(opt.proj_max_iters >= 1, "opt.proj_max_iters: expected >= 1");

  if (!bad.empty()) {
    std::ostringstream os;
    os << "invalid config:";
    for (const auto& b : bad) os << "\n  " << b;
    throw ConfigError(os.str());
  }
}

namespace {

const std::set<std::string> kTopKeys = {
    "n_tx",          "m_rx",          "p_max_dbm",        "noise_dbm",
    "epsilon_dbm",   "pathloss_comm_db", "pathloss_si_db", "k_factor_db",
    "beta_db",       "tau_db",        "tau_grid_db",      "n_tap",
    "amp_imperf_db", "phase_imperf_deg", "ula_spacing",   "optimizer",
    "trials",        "master_seed",   "hd_use_optimizer"};

const std::set<std::string> kOptKeys = {
    "memory_len", "max_iters",    "conv_tol", "step_delta",    "armijo_nu",
    "armijo_iota", "armijo_max_m", "proj_tol", "proj_max_iters"};

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

SystemConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("invalid config: expected a JSON object");
  for (const auto& [key, _] : j.items())
    if (!kTopKeys.count(key)) throw ConfigError("invalid config:\n  " + key + ": unknown key");

  SystemConfig cfg;
  try {
    get_if(j, "n_tx", cfg.n_tx);
    get_if(j, "m_rx", cfg.m_rx);
    get_if(j, "p_max_dbm", cfg.p_max_dbm);
    get_if(j, "noise_dbm", cfg.noise_dbm);
    get_if(j, "epsilon_dbm", cfg.epsilon_dbm);
    get_if(j, "pathloss_comm_db", cfg.pathloss_comm_db);
    get_if(j, "pathloss_si_db", cfg.pathloss_si_db);
    get_if(j, "k_factor_db", cfg.k_factor_db);
    get_if(j, "beta_db", cfg.beta_db);
    get_if(j, "tau_db", cfg.tau_db);
    get_if(j, "tau_grid_db", cfg.tau_grid_db);
    get_if(j, "n_tap", cfg.n_tap);
    get_if(j, "amp_imperf_db", cfg.amp_imperf_db);
    get_if(j, "phase_imperf_deg", cfg.phase_imperf_deg);
    get_if(j, "ula_spacing", cfg.ula_spacing);
    get_if(j, "trials", cfg.trials);
    get_if(j, "master_seed", cfg.master_seed);
    get_if(j, "hd_use_optimizer", cfg.hd_use_optimizer);
    if (auto it = j.find("optimizer"); it != j.end()) {
      if (!it->is_object()) throw ConfigError("invalid config:\n  optimizer: expected object");
      for (const auto& [key, _] : it->items())
        if (!kOptKeys.count(key))
          throw ConfigError("invalid config:\n  optimizer." + key + ": unknown key");
      get_if(*it, "memory_len", cfg.opt.memory_len);
      get_if(*it, "max_iters", cfg.opt.max_iters);
      get_if(*it, "conv_tol", cfg.opt.conv_tol);
      get_if(*it, "step_delta", cfg.opt.step_delta);
      get_if(*it, "armijo_nu", cfg.opt.armijo_nu);
      get_if(*it, "armijo_iota", cfg.opt.armijo_iota);
      get_if(*it, "armijo_max_m", cfg.opt.armijo_max_m);
      get_if(*it, "proj_tol", cfg.opt.proj_tol);
      get_if(*it, "proj_max_iters", cfg.opt.proj_max_iters);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config:\n  ") + e.what());
  }
  cfg.validate();
  return cfg;
}

SystemConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const SystemConfig& cfg) {
  return json{
      {"n_tx", cfg.n_tx},
      {"m_rx", cfg.m_rx},
      {"p_max_dbm", cfg.p_max_dbm},
      {"noise_dbm", cfg.noise_dbm},
      {"epsilon_dbm", cfg.epsilon_dbm},
      {"pathloss_comm_db", cfg.pathloss_comm_db},
      {"pathloss_si_db", cfg.pathloss_si_db},
      {"k_factor_db", cfg.k_factor_db},
      {"beta_db", cfg.beta_db},
      {"tau_db", cfg.tau_db},
      {"tau_grid_db", cfg.tau_grid_db},
      {"n_tap", cfg.n_tap},
      {"amp_imperf_db", cfg.amp_imperf_db},
      {"phase_imperf_deg", cfg.phase_imperf_deg},
      {"ula_spacing", cfg.ula_spacing},
      {"optimizer",
       {{"memory_len", cfg.opt.memory_len},
        {"max_iters", cfg.opt.max_iters},
        {"conv_tol", cfg.opt.conv_tol},
        {"step_delta", cfg.opt.step_delta},
        {"armijo_nu", cfg.opt.armijo_nu},
        {"armijo_iota", cfg.opt.armijo_iota},
        {"armijo_max_m", cfg.opt.armijo_max_m},
        {"proj_tol", cfg.opt.proj_tol},
        {"proj_max_iters", cfg.opt.proj_max_iters}}},
      {"trials", cfg.trials},
      {"master_seed", cfg.master_seed},
      {"hd_use_optimizer", cfg.hd_use_optimizer}};
}

std::vector<std::string> apply_env_overrides(SystemConfig& cfg) {
  std::vector<std::string> applied;
  auto env = [&](const char* name) -> const char* { return std::getenv(name); };
  auto as_double = [&](const char* name, double& out) {
    if (const char* s = env(name)) {
      out = std::stod(s);
      applied.push_back(name);
    }
  };
  auto as_int = [&](const char* name, int& out) {
    if (const char* s = env(name)) {
      out = std::stoi(s);
      applied.push_back(name);
    }
  };
  try {
    as_int("FDMIMO_N_TX", cfg.n_tx);
    as_int("FDMIMO_M_RX", cfg.m_rx);
    as_double("FDMIMO_P_MAX_DBM", cfg.p_max_dbm);
    as_double("FDMIMO_NOISE_DBM", cfg.noise_dbm);
    as_double("FDMIMO_EPSILON_DBM", cfg.epsilon_dbm);
    as_double("FDMIMO_TAU_DB", cfg.tau_db);
    as_int("FDMIMO_N_TAP", cfg.n_tap);
    as_int("FDMIMO_TRIALS", cfg.trials);
    if (const char* s = env("FDMIMO_MASTER_SEED")) {
      cfg.master_seed = std::stoull(s);
      applied.push_back("FDMIMO_MASTER_SEED");
    }
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid environment override: ") + e.what());
  }
  return applied;
}

}  // namespace fdmimo
