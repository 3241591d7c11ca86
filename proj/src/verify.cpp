#include "fdmimo/verify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "fdmimo/canceller.hpp"
#include "fdmimo/channel.hpp"
#include "fdmimo/combiner.hpp"

namespace fdmimo::verify {

namespace {

using RMatrix = Eigen::MatrixXd;

/// Real embedding of a Hermitian matrix A = S + iK: [[S, -K], [K, S]], so that
/// z^H A z == x^T Q x for x = [Re z; Im z].
RMatrix embed_hermitian(const CMatrix& a) {
  const Eigen::Index n = a.rows();
  RMatrix q(2 * n, 2 * n);
  q.topLeftCorner(n, n) = a.real();
  q.topRightCorner(n, n) = -a.imag();
  q.bottomLeftCorner(n, n) = a.imag();
  q.bottomRightCorner(n, n) = a.real();
  return q;
}

RVector embed_vec(const CVector& v) {
  RVector x(2 * v.size());
  x.head(v.size()) = v.real();
  x.tail(v.size()) = v.imag();
  return x;
}

std::string report_line(const char* what, double measured, double tol, int count,
                        const char* unit) {
  std::ostringstream os;
  os.precision(3);
  os << what << ": worst " << std::scientific << measured << " over " << count << " " << unit
     << " (tol " << tol << ")";
  return os.str();
}

struct Instance {
  ChannelSet set;
  CancellerPair cancellers;
  HardwareProfile hw;
  SystemConfig cfg;
};

Instance make_instance(std::uint64_t seed) {
  Instance inst;
  inst.cfg = SystemConfig{};
  inst.set = sample_channel_set(inst.cfg, derive_seed(seed, 1));
  const CancellerSpec spec{inst.cfg.n_tap, inst.cfg.amp_imperf_db, inst.cfg.phase_imperf_deg};
  inst.cancellers = {build_canceller(inst.set.h_hat_si_1, spec, derive_seed(seed, 2)),
                     build_canceller(inst.set.h_hat_si_2, spec, derive_seed(seed, 3))};
  inst.hw = HardwareProfile{inst.cfg.beta(), inst.cfg.noise_mw()};
  return inst;
}

/// Random designs: feasibility-scaled Gaussian precoders, MMSE combiners.
NodeDesignPair random_designs(const Instance& inst, std::uint64_t seed) {
  Rng rng(seed);
  NodeDesignPair designs;
  for (int k = 1; k <= 2; ++k) {
    const ConstraintSet cons =
        build_constraint_mats(inst.set, inst.cancellers[k - 1], inst.hw, k,
                              inst.cfg.p_max_mw(), inst.cfg.epsilon_mw());
    const CVector v0 = rng.cgaussian_vec(inst.cfg.n_tx, 1.0);
    double t = std::min(1.0, std::sqrt(cons.power_budget) / v0.norm());
    for (Eigen::Index m = 0; m < cons.si_targets.size(); ++m) {
      const double q =
          std::real((v0.adjoint() * cons.quad_mats[static_cast<std::size_t>(m)] * v0)(0, 0));
      if (q > 0.0) t = std::min(t, std::sqrt(cons.si_targets(m) / q));
    }
    designs[k - 1].precoder = t * v0;
  }
  for (int k = 1; k <= 2; ++k) {
    const int l = 3 - k;
    const EffectiveInterference eff =
        effective_interference(designs, inst.set, inst.cancellers, inst.hw, k);
    designs[k - 1].combiner = mmse_filter(designs[l - 1].precoder,
                                          inst.set.h_hat_comm_into(k), eff, inst.set.tau_sq_comm);
  }
  return designs;
}

double pair_sum_sinr(const NodeDesignPair& designs, const Instance& inst) {
  double acc = 0.0;
  for (int k = 1; k <= 2; ++k) {
    const int l = 3 - k;
    const double p = signal_power(designs[k - 1].combiner, inst.set.h_hat_comm_into(k),
                                  designs[l - 1].precoder, inst.set.tau_sq_comm);
    acc += p / interference_plus_noise(designs, inst.set, inst.cancellers, inst.hw, k);
  }
  return acc;
}

CMatrix random_psd(Rng& rng, Eigen::Index n, double scale) {
  const CMatrix b = rng.cgaussian(n, n, 1.0);
  CMatrix a = b.adjoint() * b;
  a *= scale * static_cast<double>(n) / a.trace().real();
  return 0.5 * (a + a.adjoint().eval());
}

}  // namespace

CVector wirtinger_gradient_fd(const std::function<double(const CVector&)>& f, const CVector& v,
                              double step) {
  CVector g(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    CVector vp = v, vm = v;
    vp(i) += step;
    vm(i) -= step;
    const double d_re = (f(vp) - f(vm)) / (2.0 * step);
    vp = v;
    vm = v;
    vp(i) += Complex(0.0, step);
    vm(i) -= Complex(0.0, step);
    const double d_im = (f(vp) - f(vm)) / (2.0 * step);
    g(i) = 0.5 * Complex(d_re, d_im);
  }
  return g;
}

double max_rel_error(const CVector& a, const CVector& b) {
  const double scale = b.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return (a - b).cwiseAbs().maxCoeff();
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

InteriorPointResult project_interior_point(const CVector& v_bar, const ConstraintSet& cons,
                                           double gap_tol) {
  const Eigen::Index n = 2 * v_bar.size();
  const RVector xb = embed_vec(v_bar);

  std::vector<RMatrix> quads;
  std::vector<double> limits;
  quads.push_back(RMatrix::Identity(n, n));
  limits.push_back(cons.power_budget);
  for (std::size_t m = 0; m < cons.quad_mats.size(); ++m) {
    quads.push_back(embed_hermitian(cons.quad_mats[m]));
    limits.push_back(cons.si_targets(static_cast<Eigen::Index>(m)));
  }
  const auto n_con = static_cast<int>(quads.size());

  const auto gap_values = [&](const RVector& x) {
    RVector g(n_con);
    for (int j = 0; j < n_con; ++j)
      g(j) = x.dot(quads[static_cast<std::size_t>(j)] * x) - limits[static_cast<std::size_t>(j)];
    return g;
  };
  // Barrier objective at parameter t; +inf outside the strictly feasible set.
  const auto barrier = [&](const RVector& x, double t) {
    const RVector g = gap_values(x);
    if (g.maxCoeff() >= 0.0) return std::numeric_limits<double>::infinity();
    double val = t * (x - xb).squaredNorm();
    for (int j = 0; j < n_con; ++j) val -= std::log(-g(j));
    return val;
  };

  RVector x = RVector::Zero(n);  // strictly feasible: all limits are positive
  double t = 1.0;
  int newton_total = 0;
  while (static_cast<double>(n_con) / t > gap_tol) {
    for (int inner = 0; inner < 80; ++inner) {
      ++newton_total;
      const RVector g = gap_values(x);
      RVector grad = 2.0 * t * (x - xb);
      RMatrix hess = 2.0 * t * RMatrix::Identity(n, n);
      for (int j = 0; j < n_con; ++j) {
        const RVector qx = quads[static_cast<std::size_t>(j)] * x;
        grad += 2.0 * qx / (-g(j));
        hess += 2.0 * quads[static_cast<std::size_t>(j)] / (-g(j));
        hess += 4.0 * (qx * qx.transpose()) / (g(j) * g(j));
      }
      const RVector dx = hess.ldlt().solve(-grad);
      const double lambda_sq = -grad.dot(dx);
      if (lambda_sq / 2.0 < 1e-14 * std::max(1.0, t)) break;

      const double f0 = barrier(x, t);
      double s = 1.0;
      while (barrier(x + s * dx, t) > f0 - 0.25 * s * lambda_sq && s > 1e-16) s *= 0.5;
      x += s * dx;
    }
    t *= 20.0;
  }

  InteriorPointResult res;
  res.z = x.head(v_bar.size()) + Complex(0.0, 1.0) * x.tail(v_bar.size());
  res.objective = (x - xb).squaredNorm();
  res.duality_gap = static_cast<double>(n_con) / t;
  res.certified = res.duality_gap <= gap_tol;
  res.newton_iters = newton_total;
  return res;
}

CheckReport selfcheck_gradient(std::uint64_t seed, int instances, double tol) {
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const std::uint64_t s = derive_seed(seed, 101, static_cast<std::uint64_t>(i));
    const Instance inst = make_instance(s);
    const NodeDesignPair designs = random_designs(inst, derive_seed(s, 7));
    for (int k = 1; k <= 2; ++k) {
      const CVector analytic =
          sum_sinr_gradient(k, designs, inst.set, inst.cancellers, inst.hw);
      const auto f = [&](const CVector& vk) {
        NodeDesignPair d = designs;
        d[k - 1].precoder = vk;
        return pair_sum_sinr(d, inst);
      };
      const CVector numeric = wirtinger_gradient_fd(f, designs[k - 1].precoder, 1e-6);
      worst = std::max(worst, max_rel_error(analytic, numeric));
    }
  }
  CheckReport rep;
  rep.pass = worst <= tol;
  rep.detail = report_line("gradient vs finite differences", worst, tol, instances, "instances");
  return rep;
}

CheckReport selfcheck_projection(std::uint64_t seed, int instances, double tol) {
  double worst_obj = 0.0, worst_arg = 0.0, worst_viol = 0.0;
  int certified = 0;
  Rng rng(derive_seed(seed, 202));
  for (int i = 0; i < instances; ++i) {
    ConstraintSet cons;
    CVector v_bar;
    const Eigen::Index n = 4;
    if (i % 4 != 3) {  // O(1)-scale synthetic instances
      cons.power_budget = rng.uniform(0.5, 4.0);
      const double eps = rng.uniform(0.05, 1.0);
      cons.si_targets = RVector::Constant(4, eps);
      for (int m = 0; m < 4; ++m)
        cons.quad_mats.push_back(random_psd(rng, n, std::exp(rng.uniform(-1.0, 1.0))));
      v_bar = std::sqrt(cons.power_budget) * rng.cgaussian_vec(n, 2.0);
    } else {  // default-system scale
      const Instance inst = make_instance(derive_seed(seed, 203, static_cast<std::uint64_t>(i)));
      cons = build_constraint_mats(inst.set, inst.cancellers[0], inst.hw, 1,
                                   inst.cfg.p_max_mw(), inst.cfg.epsilon_mw());
      v_bar = std::sqrt(cons.power_budget) * rng.cgaussian_vec(n, 2.0);
    }

    const InteriorPointResult oracle = project_interior_point(v_bar, cons, 1e-9);
    if (!oracle.certified) continue;
    ++certified;
    const ProjectionResult da = project_feasible(v_bar, cons, 1e-10, 20000);

    const double obj_da = (v_bar - da.v).squaredNorm();
    worst_obj = std::max(worst_obj, std::abs(obj_da - oracle.objective) /
                                        std::max(1.0, std::abs(oracle.objective)));
    worst_arg = std::max(worst_arg, (da.v - oracle.z).norm() / std::max(1.0, oracle.z.norm()));
    double viol = da.v.squaredNorm() / cons.power_budget - 1.0;
    for (std::size_t m = 0; m < cons.quad_mats.size(); ++m)
      viol = std::max(viol, std::real((da.v.adjoint() * cons.quad_mats[m] * da.v)(0, 0)) /
                                cons.si_targets(static_cast<Eigen::Index>(m)) -
                            1.0);
    worst_viol = std::max(worst_viol, viol);
  }

  CheckReport rep;
  rep.pass = certified == instances && worst_obj <= tol && worst_arg <= 1e-5 &&
             worst_viol <= 1e-9;
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << "projection vs interior-point oracle: obj " << worst_obj << ", arg "
     << worst_arg << ", violation " << worst_viol << " over " << certified << "/" << instances
     << " certified instances (obj tol " << tol << ")";
  rep.detail = os.str();
  return rep;
}

CheckReport selfcheck_covariance(std::uint64_t seed, int instances, int draws, double tol) {
  double worst_power = 0.0, worst_phi = 0.0;
  for (int i = 0; i < instances; ++i) {
    const std::uint64_t s = derive_seed(seed, 301, static_cast<std::uint64_t>(i));
    const Instance inst = make_instance(s);
    const NodeDesignPair designs = random_designs(inst, derive_seed(s, 302));
    Rng rng(derive_seed(s, 303));
    const int k = 1 + i % 2;
    const int l = 3 - k;

    // Total received power through the combiner vs P_Com + Sigma.
    const double expected =
        signal_power(designs[k - 1].combiner, inst.set.h_hat_comm_into(k),
                     designs[l - 1].precoder, inst.set.tau_sq_comm) +
        interference_plus_noise(designs, inst.set, inst.cancellers, inst.hw, k);
    double acc = 0.0;
    for (int d = 0; d < draws; ++d) {
      const CVector y = sample_received_signal(inst.set, designs, inst.cancellers, inst.hw, k,
                                               rng, SampleOptions{});
      acc += std::norm((designs[k - 1].combiner * y)(0, 0));
    }
    worst_power = std::max(worst_power, std::abs(acc / draws - expected) / expected);

    // Per-antenna residual-SI power vs the closed-form Phi diagonal.
    const CMatrix phi = residual_si_covariance(designs[k - 1].precoder, inst.set,
                                               inst.cancellers[k - 1], inst.hw, k);
    SampleOptions si_only;
    si_only.include_comm = false;
    si_only.include_noise = false;
    RVector acc_diag = RVector::Zero(phi.rows());
    for (int d = 0; d < draws; ++d) {
      const CVector y = sample_received_signal(inst.set, designs, inst.cancellers, inst.hw, k,
                                               rng, si_only);
      acc_diag += y.cwiseAbs2();
    }
    acc_diag /= static_cast<double>(draws);
    for (Eigen::Index m = 0; m < phi.rows(); ++m)
      worst_phi = std::max(worst_phi,
                           std::abs(acc_diag(m) - phi(m, m).real()) / phi(m, m).real());
  }

  CheckReport rep;
  const double worst = std::max(worst_power, worst_phi);
  rep.pass = worst <= tol;
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << "closed forms vs Monte Carlo: received power " << worst_power
     << ", residual-SI diagonal " << worst_phi << " over " << instances << " instances x "
     << draws << " draws (tol " << tol << ")";
  rep.detail = os.str();
  return rep;
}

CheckReport selfcheck_second_moment_identity(std::uint64_t seed, int draws, double tol) {
  Rng rng(derive_seed(seed, 401));
  const Eigen::Index m = 4, n = 4;
  const double variance = 0.37;  // arbitrary non-unit per-entry variance
  const CMatrix a = random_psd(rng, n, 1.3);

  CMatrix acc = CMatrix::Zero(m, m);
  for (int d = 0; d < draws; ++d) {
    const CMatrix h = rng.cgaussian(m, n, variance);
    acc += h * a * h.adjoint();
  }
  acc /= static_cast<double>(draws);
  const CMatrix expected = variance * a.trace().real() * CMatrix::Identity(m, m);
  const double rel = (acc - expected).norm() / expected.norm();

  CheckReport rep;
  rep.pass = rel <= tol;
  rep.detail = report_line("E[H A H^H] = var*tr(A)*I identity", rel, tol, draws, "draws");
  return rep;
}

}  // namespace fdmimo::verify
