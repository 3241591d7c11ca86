// Python bindings for the full-duplex MIMO self-interference lab.
//
// Exposes the configuration types, single-trial and sweep drivers, the
// numerical self-checks, and the command-line entry point. Heavy calls
// release the GIL; sweep workers are pure C++ threads.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fdmimo/cli.hpp"
#include "fdmimo/config.hpp"
#include "fdmimo/experiment.hpp"
#include "fdmimo/types.hpp"
#include "fdmimo/verify.hpp"

namespace py = pybind11;
using namespace fdmimo;

namespace {

py::dict trial_to_dict(const TrialResult& res) {
  py::list nodes;
  for (int k = 0; k < 2; ++k) {
    const LinkMetrics& m = res.metrics[static_cast<std::size_t>(k)];
    py::dict n;
    n["node"] = k + 1;
    n["sinr_db"] = linear_to_db(m.sinr);
    n["throughput_bps_hz"] = std::log2(1.0 + m.sinr);
    n["signal_power_mw"] = m.p_com;
    n["interference_plus_noise_mw"] = m.sigma_ipn;
    n["mse"] = m.mse;
    std::vector<double> resid(static_cast<std::size_t>(m.phi_diag.size()));
    for (Eigen::Index i = 0; i < m.phi_diag.size(); ++i) {
      resid[static_cast<std::size_t>(i)] = mw_to_dbm(m.phi_diag(i));
    }
    n["resid_si_dbm"] = std::move(resid);
    nodes.append(std::move(n));
  }
  py::dict d;
  d["nodes"] = std::move(nodes);
  d["fd_sum_throughput_bps_hz"] = res.fd_sum_throughput;
  d["hd_throughput_bps_hz"] = res.hd_throughput;
  d["iterations"] = res.trace.iterations;
  d["converged"] = res.trace.converged;
  d["rollback_applied"] = res.trace.rollback_applied;
  d["best_window_index"] = res.trace.best_window_index;
  d["objective_history"] = res.trace.objective_history;
  return d;
}

py::tuple report_to_tuple(const verify::CheckReport& rep) {
  return py::make_tuple(rep.pass, rep.detail);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Core routines for the full-duplex MIMO self-interference "
      "cancellation lab: trial/sweep drivers, numerical self-checks, and "
      "the command-line interface.";

  py::register_exception<ConfigError>(m, "ConfigError");

  py::class_<OptimizerConfig>(m, "OptimizerConfig")
      .def(py::init<>())
      .def_readwrite("max_iters", &OptimizerConfig::max_iters)
      .def_readwrite("memory_len", &OptimizerConfig::memory_len)
      .def_readwrite("conv_tol", &OptimizerConfig::conv_tol)
      .def_readwrite("step_delta", &OptimizerConfig::step_delta)
      .def_readwrite("armijo_nu", &OptimizerConfig::armijo_nu)
      .def_readwrite("armijo_iota", &OptimizerConfig::armijo_iota)
      .def_readwrite("armijo_max_m", &OptimizerConfig::armijo_max_m)
      .def_readwrite("proj_max_iters", &OptimizerConfig::proj_max_iters)
      .def_readwrite("proj_tol", &OptimizerConfig::proj_tol)
      .def("__repr__", [](const OptimizerConfig& c) {
        std::ostringstream os;
        os << "OptimizerConfig(max_iters=" << c.max_iters
           << ", memory_len=" << c.memory_len << ", conv_tol=" << c.conv_tol
           << ", step_delta=" << c.step_delta << ")";
        return os.str();
      });

  py::class_<SystemConfig>(m, "SystemConfig")
      .def(py::init<>())
      .def_readwrite("n_tx", &SystemConfig::n_tx)
      .def_readwrite("m_rx", &SystemConfig::m_rx)
      .def_readwrite("n_tap", &SystemConfig::n_tap)
      .def_readwrite("p_max_dbm", &SystemConfig::p_max_dbm)
      .def_readwrite("noise_dbm", &SystemConfig::noise_dbm)
      .def_readwrite("epsilon_dbm", &SystemConfig::epsilon_dbm)
      .def_readwrite("pathloss_comm_db", &SystemConfig::pathloss_comm_db)
      .def_readwrite("pathloss_si_db", &SystemConfig::pathloss_si_db)
      .def_readwrite("k_factor_db", &SystemConfig::k_factor_db)
      .def_readwrite("beta_db", &SystemConfig::beta_db)
      .def_readwrite("tau_db", &SystemConfig::tau_db)
      .def_readwrite("amp_imperf_db", &SystemConfig::amp_imperf_db)
      .def_readwrite("phase_imperf_deg", &SystemConfig::phase_imperf_deg)
      .def_readwrite("ula_spacing", &SystemConfig::ula_spacing)
      .def_readwrite("tau_grid_db", &SystemConfig::tau_grid_db)
      .def_readwrite("trials", &SystemConfig::trials)
      .def_readwrite("master_seed", &SystemConfig::master_seed)
      .def_readwrite("hd_use_optimizer", &SystemConfig::hd_use_optimizer)
      .def_readwrite("opt", &SystemConfig::opt)
      .def("validate", &SystemConfig::validate)
      .def("to_json", [](const SystemConfig& c) { return config_to_json(c).dump(2); })
      .def_static("from_json", [](const std::string& text) {
        nlohmann::json j = nlohmann::json::parse(text);
        return config_from_json(j);
      })
      .def("__repr__", [](const SystemConfig& c) {
        std::ostringstream os;
        os << "SystemConfig(n_tx=" << c.n_tx << ", m_rx=" << c.m_rx
           << ", n_tap=" << c.n_tap << ", p_max_dbm=" << c.p_max_dbm
           << ", tau_db=" << c.tau_db << ")";
        return os.str();
      });

  m.def(
      "run_trial",
      [](const SystemConfig& cfg, double tau_db, std::uint64_t seed) {
        cfg.validate();
        TrialResult res;
        {
          py::gil_scoped_release release;
          res = run_trial(cfg, tau_db, seed);
        }
        return trial_to_dict(res);
      },
      py::arg("config"), py::arg("tau_db"), py::arg("seed"),
      "Run one random full-duplex trial at the given channel-estimation "
      "error level and seed; returns per-node link metrics, the "
      "half-duplex baseline, and the solver trace.");

  m.def(
      "run_sweep",
      [](const SystemConfig& cfg, std::uint64_t master_seed, int parallel) {
        cfg.validate();
        SweepSpec spec;
        spec.base = cfg;
        spec.tau_db_grid = cfg.tau_grid_db;
        spec.trials_per_point = cfg.trials;
        spec.master_seed = master_seed;
        spec.parallel = parallel;
        SweepResult result;
        std::string csv_text;
        std::string summary_text;
        {
          py::gil_scoped_release release;
          result = run_sweep(spec);
          std::ostringstream csv;
          write_csv(result, cfg.m_rx, csv);
          csv_text = csv.str();
          summary_text = summary_json(spec, result).dump(2);
        }
        py::dict d;
        d["csv"] = std::move(csv_text);
        d["summary_json"] = std::move(summary_text);
        return d;
      },
      py::arg("config"), py::arg("master_seed") = 1, py::arg("parallel") = 1,
      "Sweep the configured channel-estimation-error grid, running "
      "config.trials trials per point; returns the per-trial CSV text and "
      "the aggregate summary as a JSON string.");

  m.def(
      "selfcheck_gradient",
      [](std::uint64_t seed, int instances, double tol) {
        verify::CheckReport rep;
        {
          py::gil_scoped_release release;
          rep = verify::selfcheck_gradient(seed, instances, tol);
        }
        return report_to_tuple(rep);
      },
      py::arg("seed") = 1, py::arg("instances") = 100, py::arg("tol") = 1e-5,
      "Compare analytic objective gradients against central finite "
      "differences on random instances; returns (pass, detail).");

  m.def(
      "selfcheck_projection",
      [](std::uint64_t seed, int instances, double tol) {
        verify::CheckReport rep;
        {
          py::gil_scoped_release release;
          rep = verify::selfcheck_projection(seed, instances, tol);
        }
        return report_to_tuple(rep);
      },
      py::arg("seed") = 1, py::arg("instances") = 50, py::arg("tol") = 1e-6,
      "Compare the dual-ascent projection against a log-barrier "
      "interior-point reference on random instances; returns (pass, detail).");

  m.def(
      "selfcheck_covariance",
      [](std::uint64_t seed, int instances, int draws, double tol) {
        verify::CheckReport rep;
        {
          py::gil_scoped_release release;
          rep = verify::selfcheck_covariance(seed, instances, draws, tol);
        }
        return report_to_tuple(rep);
      },
      py::arg("seed") = 1, py::arg("instances") = 10, py::arg("draws") = 1000000,
      py::arg("tol") = 0.01,
      "Validate the closed-form received-power and residual-interference "
      "expressions against Monte Carlo sampling; returns (pass, detail).");

  m.def(
      "selfcheck_second_moment_identity",
      [](std::uint64_t seed, int draws, double tol) {
        verify::CheckReport rep;
        {
          py::gil_scoped_release release;
          rep = verify::selfcheck_second_moment_identity(seed, draws, tol);
        }
        return report_to_tuple(rep);
      },
      py::arg("seed") = 1, py::arg("draws") = 100000, py::arg("tol") = 0.02,
      "Validate the Gaussian second-moment identity E[H A H^H] = "
      "sigma^2 tr(A) I by sampling; returns (pass, detail).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        py::gil_scoped_release release;
        return run_cli(args);
      },
      py::arg("args"),
      "Invoke the command-line interface with the given argument list "
      "(without the program name); returns the process exit code.");

  m.attr("__version__") = "0.1.0";
}
