#include "fdmimo/cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fdmimo/experiment.hpp"
#include "fdmimo/verify.hpp"

namespace fdmimo {

namespace {

using nlohmann::json;

/// Machine-readable error record on stderr, one line.
void emit_error(const std::string& kind, const std::string& message) {
  json err;
  err["error"]["kind"] = kind;
  err["error"]["message"] = message;
  std::cerr << err.dump() << "\n";
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  bool trials_set = false;
  std::vector<double> tau_db;
  int parallel = 1;
  std::string format = "json";
};

/// File config (if any), then environment, then command-line flags.
SystemConfig resolve_config(const CommonFlags& flags) {
  SystemConfig cfg = flags.config_path.empty() ? SystemConfig{} : parse_config(flags.config_path);
  apply_env_overrides(cfg);
  if (flags.seed_set) cfg.master_seed = flags.seed;
  if (flags.trials_set) cfg.trials = flags.trials;
  if (!flags.tau_db.empty()) {
    cfg.tau_grid_db = flags.tau_db;
    cfg.tau_db = flags.tau_db.front();
  }
  cfg.validate();
  return cfg;
}

json trial_to_json(const SystemConfig& cfg, double tau_db, std::uint64_t seed,
                   const TrialResult& res) {
  json j;
  j["config"] = config_to_json(cfg);
  j["tau_db"] = tau_db;
  j["seed"] = seed;
  j["nodes"] = json::array();
  for (int k = 0; k < 2; ++k) {
    const LinkMetrics& m = res.metrics[static_cast<std::size_t>(k)];
    json node;
    node["node"] = k + 1;
    node["sinr_db"] = linear_to_db(m.sinr);
    node["throughput_bps_hz"] = std::log2(1.0 + m.sinr);
    node["signal_power_mw"] = m.p_com;
    node["interference_plus_noise_mw"] = m.sigma_ipn;
    node["resid_si_dbm"] = std::vector<double>(m.phi_diag.size());
    for (Eigen::Index i = 0; i < m.phi_diag.size(); ++i)
      node["resid_si_dbm"][static_cast<std::size_t>(i)] = mw_to_dbm(m.phi_diag(i));
    j["nodes"].push_back(node);
  }
  j["fd_sum_throughput_bps_hz"] = res.fd_sum_throughput;
  j["hd_throughput_bps_hz"] = res.hd_throughput;
  j["iterations"] = res.trace.iterations;
  j["converged"] = res.trace.converged;
  j["rollback_applied"] = res.trace.rollback_applied;
  j["best_window_index"] = res.trace.best_window_index;
  j["objective_history"] = res.trace.objective_history;
  return j;
}

std::string trial_to_csv(const SystemConfig& cfg, double tau_db, const TrialResult& res) {
  std::ostringstream os;
  os << "tau_db,trial,node,sinr_db,throughput_bps_hz";
  for (int i = 1; i <= cfg.m_rx; ++i) os << ",resid_si_dbm_" << i;
  os << ",iters,converged,rollback\n";
  os.precision(12);
  for (int k = 0; k < 2; ++k) {
    const LinkMetrics& m = res.metrics[static_cast<std::size_t>(k)];
    os << tau_db << ",0," << (k + 1) << ',' << linear_to_db(m.sinr) << ','
       << std::log2(1.0 + m.sinr);
    for (Eigen::Index i = 0; i < m.phi_diag.size(); ++i) os << ',' << mw_to_dbm(m.phi_diag(i));
    os << ',' << res.trace.iterations << ',' << (res.trace.converged ? 1 : 0) << ','
       << (res.trace.rollback_applied ? 1 : 0) << '\n';
  }
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw std::ios_base::failure("write failed for " + path.string());
}

int cmd_solve(const CommonFlags& flags) {
  const SystemConfig cfg = resolve_config(flags);
  const double tau_db = flags.tau_db.empty() ? cfg.tau_db : flags.tau_db.front();
  const std::uint64_t trial_seed = derive_seed(cfg.master_seed, 0, 0);
  const TrialResult res = run_trial(cfg, tau_db, trial_seed);

  const std::string text = flags.format == "csv"
                               ? trial_to_csv(cfg, tau_db, res)
                               : trial_to_json(cfg, tau_db, trial_seed, res).dump(2) + "\n";
  std::cout << text;
  if (!flags.out_dir.empty()) {
    const std::filesystem::path dir(flags.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / (flags.format == "csv" ? "solve.csv" : "solve.json"), text);
  }
  return kExitOk;
}

int cmd_sweep(const CommonFlags& flags) {
  const SystemConfig cfg = resolve_config(flags);

  SweepSpec spec;
  spec.base = cfg;
  spec.tau_db_grid = cfg.tau_grid_db;
  spec.trials_per_point = cfg.trials;
  spec.master_seed = cfg.master_seed;
  spec.parallel = flags.parallel;

  const SweepResult result = run_sweep(spec);

  const std::filesystem::path dir(flags.out_dir.empty() ? "." : flags.out_dir);
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  write_csv(result, cfg.m_rx, csv);
  write_file(dir / "sweep.csv", csv.str());
  write_file(dir / "summary.json", summary_json(spec, result).dump(2) + "\n");

  for (const GridPointStats& st : result.stats) {
    std::cout << "tau_db=" << st.tau_db << "  fd=" << st.fd_mean << "+-" << st.fd_ci_hw
              << " bps/Hz  hd=" << st.hd_mean << "+-" << st.hd_ci_hw
              << " bps/Hz  resid_ok=" << st.frac_resid_within_target * 100.0 << "%  iters="
              << st.mean_iters << "\n";
  }
  std::cout << "wrote " << (dir / "sweep.csv").string() << " and "
            << (dir / "summary.json").string() << "\n";
  if (!result.failures.empty()) {
    emit_error("numerical", std::to_string(result.failures.size()) + " trial(s) failed");
    return kExitNumericalError;
  }
  return kExitOk;
}

int cmd_selfcheck(std::uint64_t seed, int instances, int draws) {
  using namespace verify;
  const CheckReport reports[] = {
      selfcheck_gradient(seed, instances, 1e-5),
      selfcheck_projection(seed, std::max(instances / 2, 10), 1e-6),
      selfcheck_covariance(seed, 2, draws, 0.02),
      selfcheck_second_moment_identity(seed, draws, 0.02),
  };
  bool all_pass = true;
  for (const CheckReport& rep : reports) {
    std::cout << (rep.pass ? "[PASS] " : "[FAIL] ") << rep.detail << "\n";
    all_pass = all_pass && rep.pass;
  }
  if (!all_pass) {
    emit_error("numerical", "one or more selfcheck suites failed");
    return kExitNumericalError;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& argv) {
  CLI::App app{"Full-duplex MIMO link designer: joint precoder/combiner optimization "
               "under per-antenna residual self-interference constraints"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::uint64_t check_seed = 1;
  int check_instances = 100;
  int check_draws = 200000;

  const auto add_common = [&](CLI::App* sub, bool with_sweep_flags) {
    sub->add_option("--config", flags.config_path, "JSON config file");
    sub->add_option("--out", flags.out_dir, "output directory");
    sub->add_option("--seed", flags.seed, "master seed")->each([&](const std::string&) {
      flags.seed_set = true;
    });
    sub->add_option("--tau-db", flags.tau_db,
                    "channel estimation accuracy tau^2 in dB (list for sweep)");
    if (with_sweep_flags) {
      sub->add_option("--trials", flags.trials, "trials per grid point")
          ->each([&](const std::string&) { flags.trials_set = true; });
      sub->add_option("--parallel", flags.parallel, "worker threads")
          ->check(CLI::PositiveNumber);
    }
  };

  CLI::App* solve = app.add_subcommand("solve", "run one trial and print its metrics");
  add_common(solve, false);
  solve->add_option("--format", flags.format, "stdout format")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI::App* sweep = app.add_subcommand("sweep", "tau sweep; writes sweep.csv and summary.json");
  add_common(sweep, true);

  CLI::App* selfcheck =
      app.add_subcommand("selfcheck", "run the verification oracle suites");
  selfcheck->add_option("--seed", check_seed, "oracle seed");
  selfcheck->add_option("--instances", check_instances, "instances per suite")
      ->check(CLI::PositiveNumber);
  selfcheck->add_option("--draws", check_draws, "Monte Carlo draws per suite")
      ->check(CLI::PositiveNumber);

  std::vector<const char*> cargv;
  cargv.reserve(argv.size() + 1);
  cargv.push_back("fdmimo");
  for (const std::string& a : argv) cargv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    emit_error("config", e.what());
    return kExitConfigError;
  }

  try {
    if (solve->parsed()) return cmd_solve(flags);
    if (sweep->parsed()) return cmd_sweep(flags);
    if (selfcheck->parsed()) return cmd_selfcheck(check_seed, check_instances, check_draws);
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return kExitConfigError;
  } catch (const std::ios_base::failure& e) {
    emit_error("io", e.what());
    return kExitIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    emit_error("io", e.what());
    return kExitIoError;
  } catch (const std::exception& e) {
    emit_error("numerical", e.what());
    return kExitNumericalError;
  }
  return kExitOk;
}

}  // namespace fdmimo
