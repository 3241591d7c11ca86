#include "fdmimo/experiment.hpp"

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "fdmimo/canceller.hpp"

namespace fdmimo {

namespace {

// Stream tags for per-trial child seeds.
constexpr std::uint64_t kStreamChannels = 11;
constexpr std::uint64_t kStreamCanceller1 = 12;
constexpr std::uint64_t kStreamCanceller2 = 13;
constexpr std::uint64_t kStreamOptimizer = 14;
constexpr std::uint64_t kStreamHdBaseline = 15;

double log2p1(double x) { return std::log2(1.0 + x); }

struct HdPower {
  double sig = 0.0;
  double den = 0.0;
};

/// Single-direction half-duplex powers for a given precoder/combiner: no SI
/// terms, but the comm CSI-error floor and transmit distortion remain.
HdPower hd_power(const CRowVector& u, const CMatrix& h_hat, const CVector& v, double tau_sq,
                 double q_comm, const HardwareProfile& hw) {
  HdPower p;
  p.sig = (1.0 - tau_sq) * std::norm((u * h_hat * v)(0, 0));
  const CRowVector uh = u * h_hat;
  double distortion = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    distortion += std::norm(uh(i)) * std::norm(v(i));
  p.den = q_comm * tau_sq * v.squaredNorm() * (1.0 + hw.beta) +
          hw.beta * (1.0 - tau_sq) * distortion + hw.noise_power;
  return p;
}

double hd_sinr(const CRowVector& u, const CMatrix& h_hat, const CVector& v, double tau_sq,
               double q_comm, const HardwareProfile& hw) {
  const HdPower p = hd_power(u, h_hat, v, tau_sq, q_comm, hw);
  return p.sig / p.den;
}

/// Matched-filter design from the dominant singular pair at full power.
std::pair<CVector, CRowVector> matched_filter(const CMatrix& h_hat, double power_budget) {
  Eigen::JacobiSVD<CMatrix> svd(h_hat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const CVector v = std::sqrt(power_budget) * svd.matrixV().col(0);
  const CRowVector u = svd.matrixU().col(0).adjoint();
  return {v, u};
}

/// MMSE combiner of the half-duplex link (interference = distortion through
/// the estimate plus the isotropic CSI-error/noise floor).
CRowVector hd_mmse(const CMatrix& h_hat, const CVector& v, double tau_sq, double q_comm,
                   const HardwareProfile& hw) {
  const Eigen::Index m_rx = h_hat.rows();
  const CVector h_eff = h_hat * v;
  CMatrix r = (q_comm * tau_sq * v.squaredNorm() * (1.0 + hw.beta) + hw.noise_power) *
              CMatrix::Identity(m_rx, m_rx);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    r += hw.beta * (1.0 - tau_sq) * std::norm(v(i)) * (h_hat.col(i) * h_hat.col(i).adjoint());
  r += (1.0 - tau_sq) * (h_eff * h_eff.adjoint());
  const CVector w = r.ldlt().solve(h_eff);
  const double n = w.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    CRowVector u = CRowVector::Zero(m_rx);
    u(0) = 1.0;
    return u;
  }
  return (w / n).adjoint();
}

/// Gradient-projection refinement of one half-duplex direction over the power
/// ball, starting from the matched filter (enabled by cfg.hd_use_optimizer).
double hd_direction_optimized(const CMatrix& h_hat, double tau_sq, double q_comm,
                              const HardwareProfile& hw, const SystemConfig& cfg) {
  const double p = cfg.p_max_mw();
  auto [v, u] = matched_filter(h_hat, p);
  u = hd_mmse(h_hat, v, tau_sq, q_comm, hw);
  double f_cur = hd_sinr(u, h_hat, v, tau_sq, q_comm, hw);

  for (int t = 0; t < cfg.opt.max_iters; ++t) {
    // Wirtinger gradient of the single-link SINR wrt conj(v).
    const auto [sig, den] = hd_power(u, h_hat, v, tau_sq, q_comm, hw);
    const Complex gain = (u * h_hat * v)(0, 0);
    const CVector d_sig = (1.0 - tau_sq) * ((h_hat.adjoint() * u.adjoint()) * gain);
    const RVector uh_abs2 = (u * h_hat).cwiseAbs2().transpose();
    CVector d_den = hw.beta * (1.0 - tau_sq) * uh_abs2.cast<Complex>().cwiseProduct(v);
    d_den += q_comm * tau_sq * (1.0 + hw.beta) * v;
    const CVector grad = (d_sig * den - d_den * sig) / (den * den);

    CVector v_bar = v + cfg.opt.step_delta * p * grad;
    if (v_bar.squaredNorm() > p) v_bar *= std::sqrt(p) / v_bar.norm();

    const auto f_of = [&](const CVector& vv) { return hd_sinr(u, h_hat, vv, tau_sq, q_comm, hw); };
    const ArmijoResult arm = armijo_step(v, v_bar, grad, f_of, f_cur, cfg.opt);
    v = arm.v_next;
    u = hd_mmse(h_hat, v, tau_sq, q_comm, hw);
    const double f_new = hd_sinr(u, h_hat, v, tau_sq, q_comm, hw);
    if (std::abs(f_new - f_cur) < cfg.opt.conv_tol) {
      f_cur = std::max(f_new, f_cur);
      break;
    }
    f_cur = f_new;
  }
  return f_cur;
}

double mean_of(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

double ci_halfwidth(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(x.size()));
}

}  // namespace

TrialResult run_trial(const SystemConfig& cfg, double tau_db, std::uint64_t trial_seed) {
  SystemConfig local = cfg;
  local.tau_db = tau_db;

  const ChannelSet set = sample_channel_set(local, derive_seed(trial_seed, kStreamChannels));
  const CancellerSpec spec{local.n_tap, local.amp_imperf_db, local.phase_imperf_deg};
  const CancellerPair cancellers = {
      build_canceller(set.h_hat_si_1, spec, derive_seed(trial_seed, kStreamCanceller1)),
      build_canceller(set.h_hat_si_2, spec, derive_seed(trial_seed, kStreamCanceller2))};
  const HardwareProfile hw{local.beta(), local.noise_mw()};

  SolveResult solved = altnmgap(set, cancellers, hw, local.p_max_mw(), local.epsilon_mw(),
                                local.opt, derive_seed(trial_seed, kStreamOptimizer));

  TrialResult out;
  out.designs = solved.designs;
  out.trace = std::move(solved.trace);
  for (int k = 1; k <= 2; ++k)
    out.metrics[k - 1] = link_metrics(out.designs, set, cancellers, hw, k);
  out.fd_sum_throughput = sum_throughput(out.metrics);
  out.hd_throughput =
      half_duplex_baseline(set, hw, local, derive_seed(trial_seed, kStreamHdBaseline));
  return out;
}

double sum_throughput(const std::array<LinkMetrics, 2>& metrics) {
  return log2p1(metrics[0].sinr) + log2p1(metrics[1].sinr);
}

double half_duplex_baseline(const ChannelSet& set, const HardwareProfile& hw,
                            const SystemConfig& cfg, std::uint64_t /*rng_seed*/) {
  double rate = 0.0;
  for (int k = 1; k <= 2; ++k) {
    const CMatrix& h_hat = set.h_hat_comm_into(k);
    double gamma = 0.0;
    if (cfg.hd_use_optimizer) {
      gamma = hd_direction_optimized(h_hat, set.tau_sq_comm, set.q_comm, hw, cfg);
    } else {
      const auto [v, u] = matched_filter(h_hat, cfg.p_max_mw());
      gamma = hd_sinr(u, h_hat, v, set.tau_sq_comm, set.q_comm, hw);
    }
    rate += 0.5 * log2p1(gamma);
  }
  return rate;
}

SweepResult run_sweep(const SweepSpec& spec) {
  const auto n_grid = static_cast<int>(spec.tau_db_grid.size());
  const int n_trials = spec.trials_per_point;
  const int total = n_grid * n_trials;

  struct Slot {
    TrialRow row_node1, row_node2;
    TrialSummary summary;
    std::string failure;  // non-empty on exception
    bool failed = false;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(std::max(total, 0)));

  const double eps_mw = spec.base.epsilon_mw();
  const auto run_one = [&](int flat) {
    const int gi = flat / n_trials;
    const int tj = flat % n_trials;
    const double tau_db = spec.tau_db_grid[static_cast<std::size_t>(gi)];
    Slot& slot = slots[static_cast<std::size_t>(flat)];
    try {
      const std::uint64_t seed = derive_seed(spec.master_seed, static_cast<std::uint64_t>(gi),
                                             static_cast<std::uint64_t>(tj));
      const TrialResult res = run_trial(spec.base, tau_db, seed);

      double max_resid_mw = 0.0;
      for (int k = 0; k < 2; ++k) {
        TrialRow& row = k == 0 ? slot.row_node1 : slot.row_node2;
        const LinkMetrics& m = res.metrics[static_cast<std::size_t>(k)];
        row.tau_db = tau_db;
        row.trial = tj;
        row.node = k + 1;
        row.sinr_db = linear_to_db(m.sinr);
        row.throughput_bps_hz = log2p1(m.sinr);
        row.resid_si_dbm.resize(m.phi_diag.size());
        for (Eigen::Index i = 0; i < m.phi_diag.size(); ++i)
          row.resid_si_dbm(i) = mw_to_dbm(m.phi_diag(i));
        row.iters = res.trace.iterations;
        row.converged = res.trace.converged;
        row.rollback = res.trace.rollback_applied;
        max_resid_mw = std::max(max_resid_mw, m.phi_diag.maxCoeff());
      }
      slot.summary = TrialSummary{gi,
                                  tj,
                                  res.fd_sum_throughput,
                                  res.hd_throughput,
                                  mw_to_dbm(max_resid_mw),
                                  res.trace.converged,
                                  res.trace.rollback_applied,
                                  res.trace.iterations};
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "grid " << gi << " trial " << tj << ": " << e.what();
      slot.failure = os.str();
      slot.failed = true;
    }
  };

  const int workers = std::max(1, spec.parallel);
  if (workers == 1 || total <= 1) {
    for (int flat = 0; flat < total; ++flat) run_one(flat);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int flat = next.fetch_add(1); flat < total; flat = next.fetch_add(1)) run_one(flat);
      });
    for (auto& th : pool) th.join();
  }

  SweepResult out;
  out.rows.reserve(static_cast<std::size_t>(2 * total));
  out.trials.reserve(static_cast<std::size_t>(total));
  for (const Slot& slot : slots) {
    if (slot.failed) {
      out.failures.push_back(slot.failure);
      continue;
    }
    out.rows.push_back(slot.row_node1);
    out.rows.push_back(slot.row_node2);
    out.trials.push_back(slot.summary);
  }

  // Per-grid-point aggregates over completed trials.
  const double resid_limit_dbm = mw_to_dbm(eps_mw) + 0.1;
  for (int gi = 0; gi < n_grid; ++gi) {
    GridPointStats st;
    st.tau_db = spec.tau_db_grid[static_cast<std::size_t>(gi)];
    std::vector<double> fd, hd, resid, iters;
    int within = 0, conv = 0, rb = 0;
    for (const TrialSummary& s : out.trials) {
      if (s.grid_index != gi) continue;
      fd.push_back(s.fd_sum);
      hd.push_back(s.hd_sum);
      resid.push_back(s.max_resid_dbm);
      iters.push_back(static_cast<double>(s.iters));
      if (s.max_resid_dbm <= resid_limit_dbm) ++within;
      if (s.converged) ++conv;
      if (s.rollback) ++rb;
    }
    st.trials = static_cast<int>(fd.size());
    st.fd_mean = mean_of(fd);
    st.fd_ci_hw = ci_halfwidth(fd);
    st.hd_mean = mean_of(hd);
    st.hd_ci_hw = ci_halfwidth(hd);
    st.mean_max_resid_dbm = mean_of(resid);
    st.mean_iters = mean_of(iters);
    if (st.trials > 0) {
      st.frac_resid_within_target = static_cast<double>(within) / st.trials;
      st.frac_converged = static_cast<double>(conv) / st.trials;
      st.frac_rollback = static_cast<double>(rb) / st.trials;
    }
    double sinr_db_acc = 0.0;
    int sinr_count = 0;
    for (const TrialRow& row : out.rows) {
      if (row.tau_db == st.tau_db) {
        sinr_db_acc += row.sinr_db;
        ++sinr_count;
      }
    }
    st.mean_sinr_db = sinr_count > 0 ? sinr_db_acc / sinr_count : 0.0;
    out.stats.push_back(st);
  }
  return out;
}

void write_csv(const SweepResult& result, int m_rx, std::ostream& out) {
  out << "tau_db,trial,node,sinr_db,throughput_bps_hz";
  for (int i = 1; i <= m_rx; ++i) out << ",resid_si_dbm_" << i;
  out << ",iters,converged,rollback\n";
  out << std::setprecision(12);
  for (const TrialRow& row : result.rows) {
    out << row.tau_db << ',' << row.trial << ',' << row.node << ',' << row.sinr_db << ','
        << row.throughput_bps_hz;
    for (Eigen::Index i = 0; i < row.resid_si_dbm.size(); ++i) out << ',' << row.resid_si_dbm(i);
    out << ',' << row.iters << ',' << (row.converged ? 1 : 0) << ',' << (row.rollback ? 1 : 0)
        << '\n';
  }
}

nlohmann::json summary_json(const SweepSpec& spec, const SweepResult& result) {
  nlohmann::json j;
  j["config"] = config_to_json(spec.base);
  j["config"]["tau_grid_db"] = spec.tau_db_grid;
  j["config"]["trials"] = spec.trials_per_point;
  j["config"]["master_seed"] = spec.master_seed;

  // Deterministic run id: hash of the controlling inputs, no timestamps.
  std::uint64_t id = derive_seed(spec.master_seed, static_cast<std::uint64_t>(spec.trials_per_point),
                                 static_cast<std::uint64_t>(spec.tau_db_grid.size()));
  for (const double tau : spec.tau_db_grid)
    id = mix64(id ^ std::hash<double>{}(tau));
  std::ostringstream run_id;
  run_id << std::hex << std::setw(16) << std::setfill('0') << id;
  j["run_id"] = run_id.str();

  j["grid_points"] = nlohmann::json::array();
  for (const GridPointStats& st : result.stats) {
    nlohmann::json p;
    p["tau_db"] = st.tau_db;
    p["trials"] = st.trials;
    p["fd_throughput_mean_bps_hz"] = st.fd_mean;
    p["fd_throughput_ci95_halfwidth"] = st.fd_ci_hw;
    p["hd_throughput_mean_bps_hz"] = st.hd_mean;
    p["hd_throughput_ci95_halfwidth"] = st.hd_ci_hw;
    p["mean_sinr_db"] = st.mean_sinr_db;
    p["mean_max_resid_si_dbm"] = st.mean_max_resid_dbm;
    p["frac_resid_within_target"] = st.frac_resid_within_target;
    p["frac_converged"] = st.frac_converged;
    p["frac_rollback"] = st.frac_rollback;
    p["mean_iterations"] = st.mean_iters;
    j["grid_points"].push_back(p);
  }
  j["failures"] = result.failures;
  return j;
}

}  // namespace fdmimo
