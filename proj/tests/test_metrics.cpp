#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "helpers.hpp"

using namespace fdmimo;

namespace {

/// u * H * diag(|v|^2) * H^H * u^H, written out for independence from the
/// library's internals.
double diag_power(const CRowVector& u, const CMatrix& h, const CVector& v) {
  const CRowVector uh = u * h;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::norm(uh(i)) * std::norm(v(i));
  return acc;
}

/// Single-antenna scenario with every quantity chosen hand-computable.
struct SisoCase {
  ChannelSet set;
  CancellerPair cancellers;
  HardwareProfile hw;
  NodeDesignPair designs;
};

SisoCase make_siso_case() {
  SisoCase c;
  auto one = [](Complex z) {
    CMatrix m(1, 1);
    m(0, 0) = z;
    return m;
  };
  c.set.h_hat_comm_into_1 = one({2.0, 0.0});
  c.set.h_hat_comm_into_2 = one({1.0, 0.0});
  c.set.h_hat_si_1 = one({0.0, 2.0});
  c.set.h_hat_si_2 = one({1.0, 1.0});
  c.set.e_comm_into_1 = c.set.e_comm_into_2 = one({0.0, 0.0});
  c.set.e_si_1 = c.set.e_si_2 = one({0.0, 0.0});
  c.set.q_comm = 0.3;
  c.set.q_si = 1.0;
  c.set.tau_sq_comm = 0.19;
  c.set.tau_sq_si = 0.0;
  c.set.tau_si_scaled = 0.1;
  c.set.kappa = 1.0;

  c.cancellers[0].matrix = one({0.0, 1.0});  // cancels half of h_hat_si_1
  c.cancellers[0].support = {{0, 0}};
  c.cancellers[1].matrix = one({1.0, 1.0});  // cancels h_hat_si_2 exactly
  c.cancellers[1].support = {{0, 0}};

  c.hw.beta = 0.5;
  c.hw.noise_power = 0.25;

  c.designs[0].precoder = CVector::Constant(1, Complex(2.0, 0.0));
  c.designs[0].combiner = CRowVector::Constant(1, Complex(1.0, 0.0));
  c.designs[1].precoder = CVector::Constant(1, Complex(3.0, 0.0));
  c.designs[1].combiner = CRowVector::Constant(1, Complex(1.0, 0.0));
  return c;
}

}  // namespace

TEST_CASE("signal power: hand value and unit-norm combiner guard") {
  CRowVector u = CRowVector::Constant(1, Complex(1.0, 0.0));
  CMatrix h(1, 1);
  h(0, 0) = Complex(2.0, 0.0);
  CVector v = CVector::Constant(1, Complex(3.0, 0.0));
  // (1 - 0.19) * |1 * 2 * 3|^2 = 0.81 * 36
  CHECK(signal_power(u, h, v, 0.19) == doctest::Approx(29.16).epsilon(1e-12));

  CRowVector bad = CRowVector::Constant(1, Complex(2.0, 0.0));
  CHECK_THROWS_AS(signal_power(bad, h, v, 0.19), std::invalid_argument);

  CRowVector u2(2);
  u2 << Complex(1.0 / std::sqrt(2.0), 0.0), Complex(0.0, 1.0 / std::sqrt(2.0));
  CMatrix h2 = CMatrix::Identity(2, 2);
  CVector v2(2);
  v2 << Complex(1.0, 0.0), Complex(0.0, 0.0);
  // |u2 . e_1|^2 = 1/2, tau^2 = 0
  CHECK(signal_power(u2, h2, v2, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("interference-plus-noise: six terms sum to the hand value") {
  const SisoCase c = make_siso_case();
  // Node 1: h_tilde = 2i - i = i, v_own = 2, v_partner = 3, u = 1.
  //   |u h_tilde v|^2                            = |2i|^2          = 4
  //   tau'^2 ||v||^2 (1+beta) = 0.01*4*1.5                         = 0.06
  //   beta |u h_si|^2 |v|^2   = 0.5*4*4                            = 8
  //   q_comm tau^2 ||v_l||^2 (1+beta) = 0.3*0.19*9*1.5             = 0.7695
  //   beta (1-tau^2) |u h_comm|^2 |v_l|^2 = 0.5*0.81*4*9           = 14.58
  //   noise                                                        = 0.25
  const double expected = 4.0 + 0.06 + 8.0 + 0.7695 + 14.58 + 0.25;
  CHECK(interference_plus_noise(c.designs, c.set, c.cancellers, c.hw, 1) ==
        doctest::Approx(expected).epsilon(1e-12));

  const LinkMetrics m = link_metrics(c.designs, c.set, c.cancellers, c.hw, 1);
  CHECK(m.p_com == doctest::Approx(29.16).epsilon(1e-12));
  CHECK(m.sigma_ipn == doctest::Approx(expected).epsilon(1e-12));
  CHECK(m.sinr == doctest::Approx(29.16 / expected).epsilon(1e-12));
  CHECK(m.mse == doctest::Approx(expected / 29.16).epsilon(1e-12));
  // Residual-SI covariance at node 1: 4 + 0.06 + 8 (the first three terms).
  REQUIRE(m.phi_diag.size() == 1);
  CHECK(m.phi_diag(0) == doctest::Approx(12.06).epsilon(1e-12));

  // Node 2's canceller is exact and its own precoder is 3:
  //   residual = 0 + 0.01*9*1.5 + 0.5*|1+i|^2*9 = 0.135 + 9
  const LinkMetrics m2 = link_metrics(c.designs, c.set, c.cancellers, c.hw, 2);
  CHECK(m2.phi_diag(0) == doctest::Approx(9.135).epsilon(1e-12));
}

TEST_CASE("residual SI covariance vanishes under perfect cancellation") {
  SystemConfig cfg;
  cfg.n_tap = cfg.m_rx * cfg.n_tx;
  cfg.amp_imperf_db = 0.0;
  cfg.phase_imperf_deg = 0.0;
  fdtest::Instance inst = fdtest::make_instance(5, cfg);
  inst.set.tau_si_scaled = 0.0;
  inst.hw.beta = 0.0;

  const CVector v = Rng(9).cgaussian_vec(cfg.n_tx, 1.0);
  const CMatrix phi = residual_si_covariance(v, inst.set, inst.cancellers[0], inst.hw, 1);
  CHECK(phi.norm() == 0.0);
}

TEST_CASE("constraint matrices reproduce the residual-SI diagonal") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const fdtest::Instance inst = fdtest::make_instance(derive_seed(100, seed));
    Rng rng(derive_seed(101, seed));
    for (int node = 1; node <= 2; ++node) {
      const ConstraintSet cons = build_constraint_mats(
          inst.set, inst.cancellers[node - 1], inst.hw, node, 1.0, 1.0);
      REQUIRE(static_cast<int>(cons.quad_mats.size()) == inst.cfg.m_rx);
      const CVector v = rng.cgaussian_vec(inst.cfg.n_tx, 1.0);
      const CMatrix phi =
          residual_si_covariance(v, inst.set, inst.cancellers[node - 1], inst.hw, node);
      for (int m = 0; m < inst.cfg.m_rx; ++m) {
        const CMatrix& a = cons.quad_mats[static_cast<std::size_t>(m)];
        CHECK((a - a.adjoint()).norm() <= 1e-12 * a.norm());  // Hermitian
        CHECK(fdtest::quad(v, a) ==
              doctest::Approx(phi(m, m).real()).epsilon(1e-12));
        Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= -1e-12 * a.norm());  // PSD
      }
    }
  }
}

TEST_CASE("residual-SI dBm mapping") {
  CMatrix phi = CMatrix::Zero(3, 3);
  phi(0, 0) = Complex(1e-3, 0.0);
  phi(1, 1) = Complex(2.0, 0.0);
  const RVector dbm = residual_si_dbm(phi);
  CHECK(dbm(0) == doctest::Approx(-30.0).epsilon(1e-12));
  CHECK(dbm(1) == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-12));
  CHECK(std::isinf(dbm(2)));
  CHECK(dbm(2) < 0.0);
}

TEST_CASE("sampled received power matches the closed forms (Monte Carlo)") {
  const fdtest::Instance inst = fdtest::make_instance(42);
  const NodeDesignPair designs = fdtest::random_designs(inst, 43);
  const int node = 1;
  const LinkMetrics m = link_metrics(designs, inst.set, inst.cancellers, inst.hw, node);
  const CRowVector& u = designs[node - 1].combiner;

  const int draws = 60000;
  Rng rng(4711);
  double full = 0.0, half = 0.0;
  for (int d = 0; d < draws; ++d) {
    const CVector y =
        sample_received_signal(inst.set, designs, inst.cancellers, inst.hw, node, rng);
    full += std::norm((u * y)(0, 0));
  }
  SampleOptions no_si;
  no_si.include_si = false;
  Rng rng2(4712);
  for (int d = 0; d < draws; ++d) {
    const CVector y = sample_received_signal(inst.set, designs, inst.cancellers, inst.hw,
                                             node, rng2, no_si);
    half += std::norm((u * y)(0, 0));
  }
  full /= draws;
  half /= draws;

  CHECK(full == doctest::Approx(m.p_com + m.sigma_ipn).epsilon(0.05));

  // With the own transmitter silent only the partner-side terms remain.
  const CVector& v_l = designs[1].precoder;  // partner of node 1
  const double expected_half =
      m.p_com +
      inst.set.q_comm * inst.set.tau_sq_comm * v_l.squaredNorm() * (1.0 + inst.hw.beta) +
      inst.hw.beta * (1.0 - inst.set.tau_sq_comm) *
          diag_power(u, inst.set.h_hat_comm_into(node), v_l) +
      inst.hw.noise_power;
  CHECK(half == doctest::Approx(expected_half).epsilon(0.05));
}

TEST_CASE("SI-only sample covariance matches the analytic diagonal") {
  const fdtest::Instance inst = fdtest::make_instance(77);
  const NodeDesignPair designs = fdtest::random_designs(inst, 78);
  const int node = 2;
  const CMatrix phi = residual_si_covariance(designs[node - 1].precoder, inst.set,
                                             inst.cancellers[node - 1], inst.hw, node);

  SampleOptions si_only;
  si_only.include_comm = false;
  si_only.include_noise = false;
  const int draws = 60000;
  Rng rng(512);
  RVector acc = RVector::Zero(inst.cfg.m_rx);
  for (int d = 0; d < draws; ++d) {
    const CVector y = sample_received_signal(inst.set, designs, inst.cancellers, inst.hw,
                                             node, rng, si_only);
    for (Eigen::Index i = 0; i < y.size(); ++i) acc(i) += std::norm(y(i));
  }
  acc /= draws;
  for (int i = 0; i < inst.cfg.m_rx; ++i)
    CHECK(acc(i) == doctest::Approx(phi(i, i).real()).epsilon(0.08));
}
