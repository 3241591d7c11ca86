#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fdmimo/types.hpp"

namespace fdmimo {

/// Invalid or inconsistent configuration; message lists each bad field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OptimizerConfig {
  int memory_len = 8;        // non-monotone window length c
  int max_iters = 50;        // t_max
  double conv_tol = 1e-6;    // |g[t] - g[t-1]| gap test
  double step_delta = 1.0;   // gradient step on the power-normalized precoder
  double armijo_nu = 0.5;    // backtracking ratio
  double armijo_iota = 0.1;  // sufficient-ascent fraction
  int armijo_max_m = 30;
  double proj_tol = 1e-8;    // projection primal violation (relative)
  int proj_max_iters = 5000;
};

/// All scalar system parameters. dB/dBm at this boundary only; accessors
/// provide the linear-domain values used everywhere inside.
struct SystemConfig {
  int n_tx = 4;  // N
  int m_rx = 4;  // M

  double p_max_dbm = 20.0;
  double noise_dbm = -90.0;
  double epsilon_dbm = -47.0;  // per-antenna residual-SI target

  double pathloss_comm_db = 110.0;
  double pathloss_si_db = 40.0;
  double k_factor_db = 35.0;  // Rician K of the SI channel
  double beta_db = -50.0;     // transmit-distortion power ratio

  double tau_db = -40.0;  // channel estimation accuracy (single-run value)
  std::vector<double> tau_grid_db = {-40.0, -35.0, -30.0, -25.0, -20.0, -15.0};

  int n_tap = 8;
  double amp_imperf_db = 0.01;
  double phase_imperf_deg = 0.065;

  double ula_spacing = 0.5;  // element spacing in wavelengths

  OptimizerConfig opt;

  int trials = 100;
  std::uint64_t master_seed = 1;
  bool hd_use_optimizer = false;  // gradient-based HD baseline instead of matched filter

  double p_max_mw() const { return dbm_to_mw(p_max_dbm); }
  double noise_mw() const { return dbm_to_mw(noise_dbm); }
  double epsilon_mw() const { return dbm_to_mw(epsilon_dbm); }
  double q_comm() const { return pathloss_to_gain(pathloss_comm_db); }
  double q_si() const { return pathloss_to_gain(pathloss_si_db); }
  double kappa() const { return db_to_linear(k_factor_db); }
  double beta() const { return db_to_linear(beta_db); }
  double tau_sq() const { return db_to_linear(tau_db); }
  static double tau_sq_from_db(double db) { return db_to_linear(db); }

  /// Throws ConfigError naming every invalid field with its expected range.
  void validate() const;
};

/// Parse a JSON config file; unknown keys are rejected by name. Missing file
/// or malformed JSON throws ConfigError.
SystemConfig parse_config(const std::string& path);

/// Build a config from parsed JSON (defaults filled for absent keys).
SystemConfig config_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const SystemConfig& cfg);

/// Apply FDMIMO_*-prefixed environment overrides (e.g. FDMIMO_TRIALS,
/// FDMIMO_MASTER_SEED, FDMIMO_TAU_DB). Returns the list of applied names.
std::vector<std::string> apply_env_overrides(SystemConfig& cfg);

}  // namespace fdmimo
