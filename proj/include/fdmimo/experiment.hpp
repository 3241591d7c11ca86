#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fdmimo/optimizer.hpp"

namespace fdmimo {

/// One CSV row: a node's end-of-trial link state.
struct TrialRow {
  double tau_db = 0.0;
  int trial = 0;
  int node = 0;  // 1 or 2
  double sinr_db = 0.0;
  double throughput_bps_hz = 0.0;  // log2(1 + sinr)
  RVector resid_si_dbm;            // length M
  int iters = 0;
  bool converged = false;
  bool rollback = false;
};

struct TrialResult {
  std::array<LinkMetrics, 2> metrics;
  OptTrace trace;
  NodeDesignPair designs;
  double fd_sum_throughput = 0.0;
  double hd_throughput = 0.0;
};

/// Sample channels, build cancellers, run the optimizer, evaluate final
/// closed-form metrics and the half-duplex baseline. Deterministic per seed.
TrialResult run_trial(const SystemConfig& cfg, double tau_db, std::uint64_t trial_seed);

double sum_throughput(const std::array<LinkMetrics, 2>& metrics);

/// Half-duplex reference rate: each direction gets half the time resource at
/// full power with matched-filter precoding/combining on the comm estimate;
/// SI terms vanish, CSI-error and transmit-distortion terms remain. When
/// cfg.hd_use_optimizer is set, each direction is instead optimized by
/// gradient projection over the power ball.
double half_duplex_baseline(const ChannelSet& set, const HardwareProfile& hw,
                            const SystemConfig& cfg, std::uint64_t rng_seed);

struct SweepSpec {
  std::vector<double> tau_db_grid;
  int trials_per_point = 100;
  SystemConfig base;
  std::uint64_t master_seed = 1;
  int parallel = 1;  // worker threads; results are identical for any value
};

/// Per-grid-point aggregates (means with 95% normal-approximation CIs).
struct GridPointStats {
  double tau_db = 0.0;
  int trials = 0;
  double fd_mean = 0.0, fd_ci_hw = 0.0;
  double hd_mean = 0.0, hd_ci_hw = 0.0;
  double mean_sinr_db = 0.0;
  double mean_max_resid_dbm = 0.0;
  double frac_resid_within_target = 0.0;  // max_m phi_mm <= epsilon*(1+1e-6), both nodes
  double frac_converged = 0.0;
  double frac_rollback = 0.0;
  double mean_iters = 0.0;
};

/// Per-trial scalars retained for paired statistics.
struct TrialSummary {
  int grid_index = 0;
  int trial = 0;
  double fd_sum = 0.0;
  double hd_sum = 0.0;
  double max_resid_dbm = 0.0;
  bool converged = false;
  bool rollback = false;
  int iters = 0;
};

struct SweepResult {
  std::vector<TrialRow> rows;          // 2 per trial, grid-major then trial order
  std::vector<TrialSummary> trials;    // 1 per trial
  std::vector<GridPointStats> stats;   // 1 per grid point
  std::vector<std::string> failures;   // non-empty only if a trial threw
};

/// Run the tau sweep. Trial seeds derive from (master_seed, grid_index,
/// trial_index), so results do not depend on scheduling or thread count.
SweepResult run_sweep(const SweepSpec& spec);

/// Fixed-schema CSV: tau_db, trial, node, sinr_db, throughput_bps_hz,
/// resid_si_dbm_1..M, iters, converged, rollback.
void write_csv(const SweepResult& result, int m_rx, std::ostream& out);

/// Aggregate summary (config echo, per-point stats, deterministic run id).
nlohmann::json summary_json(const SweepSpec& spec, const SweepResult& result);

}  // namespace fdmimo
