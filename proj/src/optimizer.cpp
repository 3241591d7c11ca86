#include "fdmimo/optimizer.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace fdmimo {

namespace {

double quad_form(const CVector& z, const CMatrix& a) {
  return std::real((z.adjoint() * a * z)(0, 0));
}

double sum_sinr(const NodeDesignPair& designs, const ChannelSet& set,
                const CancellerPair& cancellers, const HardwareProfile& hw) {
  double acc = 0.0;
  for (int k = 1; k <= 2; ++k) {
    const int l = 3 - k;
    const double p = signal_power(designs[k - 1].combiner, set.h_hat_comm_into(k),
                                  designs[l - 1].precoder, set.tau_sq_comm);
    acc += p / interference_plus_noise(designs, set, cancellers, hw, k);
  }
  return acc;
}

/// Normalized constraint values: entry 0 is ||z||^2/P - 1, entry 1+m is
/// z^H A_m z / eps_m - 1. Feasible iff all entries <= 0.
RVector constraint_values(const CVector& z, const ConstraintSet& cons) {
  const auto n_quad = static_cast<Eigen::Index>(cons.quad_mats.size());
  RVector c(1 + n_quad);
  c(0) = z.squaredNorm() / cons.power_budget - 1.0;
  for (Eigen::Index m = 0; m < n_quad; ++m)
    c(1 + m) = quad_form(z, cons.quad_mats[m]) / cons.si_targets(m) - 1.0;
  return c;
}

/// Largest t in (0,1] with t*z exactly feasible (quadratics scale as t^2).
double feasibility_scale(const CVector& z, const ConstraintSet& cons) {
  double t = 1.0;
  const double nsq = z.squaredNorm();
  if (nsq > cons.power_budget) t = std::min(t, std::sqrt(cons.power_budget / nsq));
  for (std::size_t m = 0; m < cons.quad_mats.size(); ++m) {
    const double q = quad_form(z, cons.quad_mats[m]);
    if (q > cons.si_targets(static_cast<Eigen::Index>(m)))
      t = std::min(t, std::sqrt(cons.si_targets(static_cast<Eigen::Index>(m)) / q));
  }
  return t;
}

}  // namespace

ConstraintSet build_constraint_mats(const ChannelSet& set, const Canceller& canceller,
                                    const HardwareProfile& hw, int node, double power_budget,
                                    double epsilon) {
  const CMatrix h_tilde = set.h_hat_si(node) - canceller.matrix;
  const CMatrix& h_hat = set.h_hat_si(node);
  const double tau_p_sq = set.tau_si_scaled * set.tau_si_scaled;
  const Eigen::Index m_rx = h_tilde.rows();
  const Eigen::Index n_tx = h_tilde.cols();

  ConstraintSet cons;
  cons.power_budget = power_budget;
  cons.si_targets = RVector::Constant(m_rx, epsilon);
  cons.quad_mats.reserve(static_cast<std::size_t>(m_rx));
  for (Eigen::Index m = 0; m < m_rx; ++m) {
    CMatrix a = h_tilde.row(m).adjoint() * h_tilde.row(m);
    a += tau_p_sq * (1.0 + hw.beta) * CMatrix::Identity(n_tx, n_tx);
    for (Eigen::Index i = 0; i < n_tx; ++i) a(i, i) += hw.beta * std::norm(h_hat(m, i));
    cons.quad_mats.push_back(0.5 * (a + a.adjoint().eval()));
  }
  return cons;
}

ProjectionResult project_feasible(const CVector& v_bar, const ConstraintSet& cons,
                                  double proj_tol, int max_iters) {
  const Eigen::Index n = v_bar.size();
  const auto n_quad = static_cast<Eigen::Index>(cons.quad_mats.size());
  ProjectionResult out;

  if ((constraint_values(v_bar, cons).array() <= 0.0).all()) {
    out.v = v_bar;
    out.converged = true;
    return out;
  }
  // Shortcut when only the power ball is active: scaling onto the sphere is
  // the exact projection if it happens to satisfy the quadratics too.
  CVector z_ball = v_bar;
  if (v_bar.squaredNorm() > cons.power_budget)
    z_ball *= std::sqrt(cons.power_budget) / v_bar.norm();
  if ((constraint_values(z_ball, cons).array() <= 1e-15).all()) {
    out.v = std::move(z_ball);
    out.converged = true;
    return out;
  }

  std::vector<CMatrix> a_norm(static_cast<std::size_t>(n_quad));
  double max_mat_norm = 0.0;
  for (Eigen::Index m = 0; m < n_quad; ++m) {
    a_norm[static_cast<std::size_t>(m)] = cons.quad_mats[static_cast<std::size_t>(m)] /
                                          cons.si_targets(m);
    max_mat_norm = std::max(max_mat_norm, a_norm[static_cast<std::size_t>(m)].norm());
  }
  double step = 1.0 / (1.0 + max_mat_norm);

  const auto z_of = [&](const RVector& lam) -> CVector {
    CMatrix k = (1.0 + lam(0) / cons.power_budget) * CMatrix::Identity(n, n);
    for (Eigen::Index m = 0; m < n_quad; ++m)
      k += lam(1 + m) * a_norm[static_cast<std::size_t>(m)];
    return k.ldlt().solve(v_bar);
  };
  const auto dual_value = [&](const RVector& lam, const CVector& z) {
    return (v_bar - z).squaredNorm() + lam.dot(constraint_values(z, cons));
  };

  RVector lam = RVector::Zero(1 + n_quad);
  CVector z = z_of(lam);
  double best_dual = dual_value(lam, z);
  const double comp_scale = std::max(1.0, v_bar.squaredNorm());
  bool tol_met = false;
  double kkt = 0.0;
  int it = 0;
  while (it < max_iters) {
    ++it;
    const RVector c = constraint_values(z, cons);
    const double viol = std::max(c.maxCoeff(), 0.0);
    const double comp = std::abs(lam.dot(c));
    kkt = std::max(viol, comp / comp_scale);
    if (viol <= proj_tol && comp <= proj_tol * comp_scale) {
      tol_met = true;
      break;
    }
    const RVector lam_new = (lam + step * c).cwiseMax(0.0);
    CVector z_new = z_of(lam_new);
    const double d_new = dual_value(lam_new, z_new);
    if (d_new < best_dual - 1e-14 * std::max(1.0, std::abs(best_dual))) {
      step *= 0.5;  // overshoot: the dual objective must not decrease
      if (step < 1e-18) break;
      continue;
    }
    lam = lam_new;
    z = std::move(z_new);
    best_dual = std::max(best_dual, d_new);
    step *= 1.05;
  }

  out.v = feasibility_scale(z, cons) * z;
  out.converged = tol_met;
  out.iterations = it;
  out.kkt_residual = kkt;
  return out;
}

CVector sum_sinr_gradient(int node, const NodeDesignPair& designs, const ChannelSet& set,
                          const CancellerPair& cancellers, const HardwareProfile& hw) {
  const int k = node, l = 3 - node;
  const CVector& v_k = designs[k - 1].precoder;
  const CRowVector& u_k = designs[k - 1].combiner;
  const CRowVector& u_l = designs[l - 1].combiner;
  const CMatrix h_tilde_k = set.h_hat_si(k) - cancellers[k - 1].matrix;
  const CMatrix& h_hat_k = set.h_hat_si(k);
  const CMatrix& h_comm_l = set.h_hat_comm_into(l);  // link from node k into node l
  const double t2 = set.tau_sq_comm;
  const double tau_p_sq = set.tau_si_scaled * set.tau_si_scaled;
  const double one_plus_beta = 1.0 + hw.beta;

  const double p_k = signal_power(u_k, set.h_hat_comm_into(k), designs[l - 1].precoder, t2);
  const double s_k = interference_plus_noise(designs, set, cancellers, hw, k);
  const double p_l = signal_power(u_l, h_comm_l, v_k, t2);
  const double s_l = interference_plus_noise(designs, set, cancellers, hw, l);

  // d Sigma_k / d conj(v_k): own residual SI, error floor, own distortion.
  const Complex si_gain = (u_k * h_tilde_k * v_k)(0, 0);
  CVector d_sigma_k = (h_tilde_k.adjoint() * u_k.adjoint()) * si_gain;
  d_sigma_k += tau_p_sq * one_plus_beta * v_k;
  const RVector w_si = (u_k * h_hat_k).cwiseAbs2().transpose();
  d_sigma_k += hw.beta * w_si.cast<Complex>().cwiseProduct(v_k);

  // d P_l / d conj(v_k): the partner's desired signal rides on v_k.
  const Complex x_gain = (u_l * h_comm_l * v_k)(0, 0);
  const CVector d_p_l = (1.0 - t2) * ((h_comm_l.adjoint() * u_l.adjoint()) * x_gain);

  // d Sigma_l / d conj(v_k): distortion and error leakage into the partner.
  const RVector w_comm = (u_l * h_comm_l).cwiseAbs2().transpose();
  CVector d_sigma_l = hw.beta * (1.0 - t2) * w_comm.cast<Complex>().cwiseProduct(v_k);
  d_sigma_l += set.q_comm * t2 * one_plus_beta * v_k;

  // Quotient rule on gamma_k + gamma_l; d P_k / d conj(v_k) is identically 0.
  return (-p_k / (s_k * s_k)) * d_sigma_k + (d_p_l * s_l - d_sigma_l * p_l) / (s_l * s_l);
}

ArmijoResult armijo_step(const CVector& v_current, const CVector& v_projected,
                         const CVector& grad, const std::function<double(const CVector&)>& f,
                         double f_current, const OptimizerConfig& cfg) {
  const CVector dir = v_projected - v_current;
  const double slope = std::real(grad.dot(dir));  // Re{grad^H (v_proj - v)}

  ArmijoResult res;
  res.v_next = v_current;
  for (int m = 1; m <= cfg.armijo_max_m; ++m) {
    const double rho = std::pow(cfg.armijo_nu, m);
    CVector cand = v_current + rho * dir;
    if (f(cand) - f_current >= cfg.armijo_iota * rho * slope) {
      res.v_next = std::move(cand);
      res.rho = rho;
      res.m = m;
      return res;
    }
  }
  return res;  // no sufficient increase found: keep the current point
}

SolveResult altnmgap(const ChannelSet& set, const CancellerPair& cancellers,
                     const HardwareProfile& hw, double power_budget, double epsilon,
                     const OptimizerConfig& cfg, std::uint64_t rng_seed) {
  if (!(power_budget > 0.0) || !(epsilon > 0.0))
    throw std::invalid_argument("power budget and interference targets must be positive");

  const Eigen::Index n_tx = set.h_hat_si_1.cols();
  Rng rng(rng_seed);

  const std::array<ConstraintSet, 2> cons = {
      build_constraint_mats(set, cancellers[0], hw, 1, power_budget, epsilon),
      build_constraint_mats(set, cancellers[1], hw, 2, power_budget, epsilon)};

  NodeDesignPair designs;
  for (int k = 1; k <= 2; ++k) {
    const CVector v0 = rng.cgaussian_vec(n_tx, 1.0);
    double t = std::min(1.0, std::sqrt(power_budget) / v0.norm());
    for (Eigen::Index m = 0; m < cons[k - 1].si_targets.size(); ++m) {
      const double q = quad_form(v0, cons[k - 1].quad_mats[static_cast<std::size_t>(m)]);
      if (q > 0.0) t = std::min(t, std::sqrt(cons[k - 1].si_targets(m) / q));
    }
    designs[k - 1].precoder = t * v0;
  }

  const auto refresh_combiners = [&](NodeDesignPair& d) {
    for (int k = 1; k <= 2; ++k) {
      const int l = 3 - k;
      const EffectiveInterference eff = effective_interference(d, set, cancellers, hw, k);
      d[k - 1].combiner =
          mmse_filter(d[l - 1].precoder, set.h_hat_comm_into(k), eff, set.tau_sq_comm);
    }
  };
  refresh_combiners(designs);

  struct Snapshot {
    double g;
    NodeDesignPair designs;
  };
  std::vector<Snapshot> hist;
  hist.reserve(static_cast<std::size_t>(cfg.max_iters) + 1);
  hist.push_back({sum_sinr(designs, set, cancellers, hw), designs});

  SolveResult out;
  out.trace.objective_history.push_back(hist[0].g);
  out.trace.step_sizes.reserve(2 * static_cast<std::size_t>(cfg.max_iters));

  const auto window_argmax = [&](int t) {
    const int lo = std::max(t == 0 ? 0 : 1, t - cfg.memory_len);
    int best = lo;
    for (int i = lo; i <= t; ++i)  // ties resolve to the latest iterate
      if (hist[static_cast<std::size_t>(i)].g >= hist[static_cast<std::size_t>(best)].g)
        best = i;
    return best;
  };

  int t = 0;
  int best_i = 0;
  bool converged = false, rollback = false;
  while (t < cfg.max_iters) {
    ++t;
    refresh_combiners(designs);
    const double f_cur = sum_sinr(designs, set, cancellers, hw);

    // Both nodes step from the previous iterate's precoders (committed after).
    std::array<CVector, 2> v_next;
    for (int k = 1; k <= 2; ++k) {
      const CVector grad = sum_sinr_gradient(k, designs, set, cancellers, hw);
      const CVector v_bar = designs[k - 1].precoder + cfg.step_delta * power_budget * grad;
      const ProjectionResult proj =
          project_feasible(v_bar, cons[k - 1], cfg.proj_tol, cfg.proj_max_iters);
      const auto f_of = [&](const CVector& vk) {
        NodeDesignPair d = designs;
        d[k - 1].precoder = vk;
        return sum_sinr(d, set, cancellers, hw);
      };
      const ArmijoResult arm =
          armijo_step(designs[k - 1].precoder, proj.v, grad, f_of, f_cur, cfg);
      v_next[k - 1] = arm.v_next;
      out.trace.step_sizes.push_back(arm.rho);
    }
    designs[0].precoder = std::move(v_next[0]);
    designs[1].precoder = std::move(v_next[1]);

    const double g_t = sum_sinr(designs, set, cancellers, hw);
    hist.push_back({g_t, designs});
    out.trace.objective_history.push_back(g_t);

    best_i = window_argmax(t);
    const bool gap_met =
        std::abs(hist[static_cast<std::size_t>(t)].g - hist[static_cast<std::size_t>(t - 1)].g) <
        cfg.conv_tol;
    const bool oldest_is_best = best_i == t - cfg.memory_len;
    if (gap_met || oldest_is_best) {
      converged = gap_met;
      rollback = oldest_is_best;
      designs = hist[static_cast<std::size_t>(best_i)].designs;
      break;
    }
  }
  if (!converged && !rollback) best_i = window_argmax(t);

  out.designs = std::move(designs);
  out.trace.best_window_index = best_i;
  out.trace.converged = converged;
  out.trace.rollback_applied = rollback;
  out.trace.iterations = t;
  return out;
}

}  // namespace fdmimo
