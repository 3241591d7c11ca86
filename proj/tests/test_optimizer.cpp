#include <doctest.h>

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

#include "fdmimo/verify.hpp"
#include "helpers.hpp"

using namespace fdmimo;

namespace {

/// Max over the sliding non-monotone window ending at t (entry 0 excluded
/// once real iterations exist, matching the solver's window).
double window_max(const std::vector<double>& g, int t, int mem) {
  const int lo = std::max(t == 0 ? 0 : 1, t - mem);
  double best = g[static_cast<std::size_t>(lo)];
  for (int i = lo; i <= t; ++i) best = std::max(best, g[static_cast<std::size_t>(i)]);
  return best;
}

bool window_max_nondecreasing(const std::vector<double>& g, int mem) {
  for (int t = 2; t < static_cast<int>(g.size()); ++t)
    if (window_max(g, t, mem) < window_max(g, t - 1, mem) * (1.0 - 1e-12)) return false;
  return true;
}

double max_quad_violation(const CVector& v, const ConstraintSet& cons) {
  double worst = 0.0;
  for (std::size_t m = 0; m < cons.quad_mats.size(); ++m) {
    const double q = fdtest::quad(v, cons.quad_mats[m]);
    worst = std::max(worst, q / cons.si_targets(static_cast<Eigen::Index>(m)) - 1.0);
  }
  return worst;
}

}  // namespace

TEST_CASE("gradient: impairment-free closed form") {
  // With beta = 0, tau = 0 and an exact canceller the objective reduces to
  // gamma_l = |u_l H v_k|^2 / sigma^2, whose conjugate gradient is
  // H^H u_l^H (u_l H v_k) / sigma^2.
  SystemConfig cfg;
  cfg.n_tap = cfg.m_rx * cfg.n_tx;
  cfg.amp_imperf_db = 0.0;
  cfg.phase_imperf_deg = 0.0;
  fdtest::Instance inst = fdtest::make_instance(50, cfg);
  inst.hw.beta = 0.0;
  inst.set.tau_sq_comm = 0.0;
  inst.set.tau_si_scaled = 0.0;

  Rng rng(51);
  NodeDesignPair designs;
  designs[0].precoder = rng.cgaussian_vec(cfg.n_tx, 1.0);
  designs[1].precoder = rng.cgaussian_vec(cfg.n_tx, 1.0);
  for (int k = 1; k <= 2; ++k) {
    CVector w = rng.cgaussian_vec(cfg.m_rx, 1.0);
    designs[k - 1].combiner = (w / w.norm()).transpose();
  }

  for (int k = 1; k <= 2; ++k) {
    const int l = 3 - k;
    const CMatrix& h = inst.set.h_hat_comm_into(l);  // carries v_k into node l
    const CRowVector& u_l = designs[l - 1].combiner;
    const Complex gain = (u_l * h * designs[k - 1].precoder)(0, 0);
    const CVector expected =
        (h.adjoint() * u_l.adjoint()) * gain / inst.hw.noise_power;
    const CVector grad =
        sum_sinr_gradient(k, designs, inst.set, inst.cancellers, inst.hw);
    CHECK((grad - expected).norm() <= 1e-12 * expected.norm());
  }
}

TEST_CASE("gradient: finite-difference oracle on full-impairment instances") {
  const fdtest::Instance inst = fdtest::make_instance(60);
  const NodeDesignPair designs = fdtest::random_designs(inst, 61);
  for (int k = 1; k <= 2; ++k) {
    const auto f = [&](const CVector& vk) {
      NodeDesignPair d = designs;
      d[k - 1].precoder = vk;
      return fdtest::pair_sum_sinr(d, inst);
    };
    const CVector grad = sum_sinr_gradient(k, designs, inst.set, inst.cancellers, inst.hw);
    const CVector fd = verify::wirtinger_gradient_fd(f, designs[k - 1].precoder);
    CHECK(verify::max_rel_error(grad, fd) <= 1e-5);
  }

  const auto rep = verify::selfcheck_gradient(7, 30, 1e-5);
  INFO(rep.detail);
  CHECK(rep.pass);
}

TEST_CASE("projection: feasible input returns unchanged") {
  const fdtest::Instance inst = fdtest::make_instance(70);
  const ConstraintSet cons = build_constraint_mats(
      inst.set, inst.cancellers[0], inst.hw, 1, inst.cfg.p_max_mw(), inst.cfg.epsilon_mw());
  CVector v = Rng(71).cgaussian_vec(inst.cfg.n_tx, 1.0);
  // Scale strictly inside every constraint.
  double t = 0.5 * std::sqrt(cons.power_budget) / v.norm();
  for (std::size_t m = 0; m < cons.quad_mats.size(); ++m) {
    const double q = fdtest::quad(v, cons.quad_mats[m]);
    if (q > 0.0)
      t = std::min(t, 0.5 * std::sqrt(cons.si_targets(static_cast<Eigen::Index>(m)) / q));
  }
  v *= t;
  const ProjectionResult r = project_feasible(v, cons);
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK((r.v - v).norm() == 0.0);
}

TEST_CASE("projection: pure power ball reduces to radial scaling") {
  ConstraintSet cons;
  cons.power_budget = 4.0;
  cons.quad_mats = {CMatrix::Zero(3, 3)};
  cons.si_targets = RVector::Constant(1, 1.0);
  CVector v(3);
  v << Complex(4.0, 0.0), Complex(0.0, 2.0), Complex(-2.0, 2.0);  // ||v||^2 = 28
  const ProjectionResult r = project_feasible(v, cons);
  CHECK(r.converged);
  const CVector expected = v * std::sqrt(4.0 / 28.0);
  CHECK((r.v - expected).norm() <= 1e-14 * expected.norm());
}

TEST_CASE("projection: dual ascent agrees with the interior-point oracle") {
  const auto rep = verify::selfcheck_projection(11, 15, 1e-6);
  INFO(rep.detail);
  CHECK(rep.pass);
}

TEST_CASE("projection: output is feasible even from far-out points") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const fdtest::Instance inst = fdtest::make_instance(derive_seed(400, seed));
    Rng rng(derive_seed(401, seed));
    for (int node = 1; node <= 2; ++node) {
      const ConstraintSet cons =
          build_constraint_mats(inst.set, inst.cancellers[node - 1], inst.hw, node,
                                inst.cfg.p_max_mw(), inst.cfg.epsilon_mw());
      const CVector v_bar =
          10.0 * std::sqrt(cons.power_budget) * rng.cgaussian_vec(inst.cfg.n_tx, 1.0);
      const ProjectionResult r = project_feasible(v_bar, cons, 1e-8, 5000);
      CHECK(r.v.squaredNorm() <= cons.power_budget * (1.0 + 1e-12));
      CHECK(max_quad_violation(r.v, cons) <= 1e-12);
      if (r.converged) CHECK(r.kkt_residual <= 1e-8);
    }
  }
}

TEST_CASE("backtracking line search: hand-checkable quadratic") {
  const OptimizerConfig cfg;  // nu = 0.5, iota = 0.1
  const auto f = [](const CVector& x) { return -std::norm(x(0) - Complex(1.0, 0.0)); };
  CVector v = CVector::Zero(1);
  CVector v_proj = CVector::Constant(1, Complex(1.0, 0.0));
  CVector grad = CVector::Constant(1, Complex(2.0, 0.0));

  // m = 1: f(0.5) - f(0) = 0.75 >= 0.1 * 0.5 * 2 = 0.1, so the first
  // backtracking level is accepted.
  const ArmijoResult r = armijo_step(v, v_proj, grad, f, f(v), cfg);
  CHECK(r.m == 1);
  CHECK(r.rho == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.v_next(0).real() == doctest::Approx(0.5).epsilon(1e-15));

  // Zero direction: accepted immediately, point unchanged.
  const ArmijoResult same = armijo_step(v, v, grad, f, f(v), cfg);
  CHECK(same.m == 1);
  CHECK((same.v_next - v).norm() == 0.0);

  // A direction along which f only decreases: every level fails and the
  // search falls back to the current point.
  const auto g = [](const CVector& x) { return -std::norm(x(0)); };
  const ArmijoResult fail = armijo_step(v, v_proj, grad, g, g(v), cfg);
  CHECK(fail.rho == 0.0);
  CHECK(fail.m == 0);
  CHECK((fail.v_next - v).norm() == 0.0);
}

TEST_CASE("solver: constraints hold and the returned point matches its trace") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const fdtest::Instance inst = fdtest::make_instance(derive_seed(500, seed));
    const double p_max = inst.cfg.p_max_mw();
    const double eps = inst.cfg.epsilon_mw();
    const SolveResult r = altnmgap(inst.set, inst.cancellers, inst.hw, p_max, eps,
                                   inst.cfg.opt, derive_seed(501, seed));

    for (int k = 1; k <= 2; ++k) {
      const ConstraintSet cons = build_constraint_mats(inst.set, inst.cancellers[k - 1],
                                                       inst.hw, k, p_max, eps);
      CHECK(r.designs[k - 1].precoder.squaredNorm() <= p_max * (1.0 + 1e-9));
      CHECK(max_quad_violation(r.designs[k - 1].precoder, cons) <= 1e-6);
      CHECK(r.designs[k - 1].combiner.norm() == doctest::Approx(1.0).epsilon(1e-9));
    }

    const auto& g = r.trace.objective_history;
    REQUIRE(!g.empty());
    CHECK(static_cast<int>(g.size()) == r.trace.iterations + 1);
    CHECK(r.trace.iterations <= inst.cfg.opt.max_iters);
    CHECK(window_max_nondecreasing(g, inst.cfg.opt.memory_len));
    CHECK(r.trace.best_window_index >= 0);
    CHECK(r.trace.best_window_index <= r.trace.iterations);

    // The returned designs must reproduce the trace: the window argmax value
    // after an early stop, the last iterate otherwise.
    const double g_final = fdtest::pair_sum_sinr(r.designs, inst);
    if (r.trace.converged || r.trace.rollback_applied)
      CHECK(g_final ==
            doctest::Approx(g[static_cast<std::size_t>(r.trace.best_window_index)])
                .epsilon(1e-12));
    else
      CHECK(g_final == doctest::Approx(g.back()).epsilon(1e-12));
  }
}

TEST_CASE("solver: identical seeds give identical runs, different seeds differ") {
  const fdtest::Instance inst = fdtest::make_instance(510);
  const auto run = [&](std::uint64_t s) {
    return altnmgap(inst.set, inst.cancellers, inst.hw, inst.cfg.p_max_mw(),
                    inst.cfg.epsilon_mw(), inst.cfg.opt, s);
  };
  const SolveResult a = run(97), b = run(97), c = run(98);
  REQUIRE(a.trace.objective_history.size() == b.trace.objective_history.size());
  for (std::size_t i = 0; i < a.trace.objective_history.size(); ++i)
    CHECK(a.trace.objective_history[i] == b.trace.objective_history[i]);
  CHECK(a.trace.step_sizes == b.trace.step_sizes);
  for (int k = 0; k < 2; ++k) {
    CHECK((a.designs[k].precoder - b.designs[k].precoder).norm() == 0.0);
    CHECK((a.designs[k].combiner - b.designs[k].combiner).norm() == 0.0);
  }
  CHECK(a.trace.objective_history.front() != c.trace.objective_history.front());
}

TEST_CASE("solver: attains the known optimum when impairments vanish") {
  // No SI leakage, no distortion, perfect CSI: the sum SINR decouples and its
  // maximum is P * (sigma_max(H_1)^2 + sigma_max(H_2)^2) / noise.
  SystemConfig cfg;
  cfg.n_tap = cfg.m_rx * cfg.n_tx;
  cfg.amp_imperf_db = 0.0;
  cfg.phase_imperf_deg = 0.0;
  fdtest::Instance inst = fdtest::make_instance(520, cfg);
  inst.hw.beta = 0.0;
  inst.set.tau_sq_comm = 0.0;
  inst.set.tau_si_scaled = 0.0;

  OptimizerConfig opt = cfg.opt;
  opt.max_iters = 300;
  opt.conv_tol = 1e-10;
  const SolveResult r = altnmgap(inst.set, inst.cancellers, inst.hw, cfg.p_max_mw(),
                                 cfg.epsilon_mw(), opt, 521);

  double optimum = 0.0;
  for (int k = 1; k <= 2; ++k) {
    const Eigen::JacobiSVD<CMatrix> svd(inst.set.h_hat_comm_into(k));
    optimum += cfg.p_max_mw() * std::pow(svd.singularValues()(0), 2) / inst.hw.noise_power;
  }
  CHECK(fdtest::pair_sum_sinr(r.designs, inst) >= 0.98 * optimum);
}

TEST_CASE("solver: rejects non-positive budgets") {
  const fdtest::Instance inst = fdtest::make_instance(530);
  CHECK_THROWS_AS(altnmgap(inst.set, inst.cancellers, inst.hw, 0.0,
                           inst.cfg.epsilon_mw(), inst.cfg.opt, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(altnmgap(inst.set, inst.cancellers, inst.hw, inst.cfg.p_max_mw(), -1.0,
                           inst.cfg.opt, 1),
                  std::invalid_argument);
}

TEST_CASE("solver: rollback restores the oldest-window iterate") {
  // Parameters found by scanning for a run where the non-monotone rule fires
  // with a fully populated window (gap test disabled so the window rule is
  // the only early stop): coarse CSI and a long gradient step.
  SystemConfig cfg;
  cfg.tau_db = -12.0;
  OptimizerConfig opt = cfg.opt;
  opt.conv_tol = 0.0;
  opt.step_delta = 8.0;
  opt.memory_len = 8;
  opt.max_iters = 200;
  const std::uint64_t seed = 1;

  const fdtest::Instance inst = fdtest::make_instance(seed, cfg);
  const SolveResult r = altnmgap(inst.set, inst.cancellers, inst.hw, cfg.p_max_mw(),
                                 cfg.epsilon_mw(), opt, derive_seed(seed, 4));
  REQUIRE(r.trace.rollback_applied);
  CHECK(!r.trace.converged);
  CHECK(r.trace.best_window_index == r.trace.iterations - opt.memory_len);
  CHECK(r.trace.best_window_index >= 1);  // the window was fully populated
  const auto& g = r.trace.objective_history;
  // The restored iterate is the strict window maximum...
  for (int i = r.trace.best_window_index + 1; i <= r.trace.iterations; ++i)
    CHECK(g[static_cast<std::size_t>(r.trace.best_window_index)] >
          g[static_cast<std::size_t>(i)]);
  // ...and the returned designs evaluate to exactly that value.
  CHECK(fdtest::pair_sum_sinr(r.designs, inst) ==
        doctest::Approx(g[static_cast<std::size_t>(r.trace.best_window_index)])
            .epsilon(1e-12));
}
