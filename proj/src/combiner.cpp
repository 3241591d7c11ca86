#include "fdmimo/combiner.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace fdmimo {

EffectiveInterference effective_interference(const NodeDesignPair& designs,
                                             const ChannelSet& set,
                                             const CancellerPair& cancellers,
                                             const HardwareProfile& hw, int node) {
  const int k = node, l = node == 1 ? 2 : 1;
  const CVector& v_own = designs[k - 1].precoder;
  const CVector& v_partner = designs[l - 1].precoder;
  const CMatrix& h_si = set.h_hat_si(k);
  const CMatrix& h_comm = set.h_hat_comm_into(k);
  const CMatrix h_tilde = h_si - cancellers[k - 1].matrix;

  const Eigen::Index m_rx = h_si.rows();
  const Eigen::Index n_tx = v_own.size();
  const double root_beta = std::sqrt(hw.beta);
  const double root_beta_comm = std::sqrt(hw.beta * (1.0 - set.tau_sq_comm));

  EffectiveInterference eff;
  eff.h_u.resize(m_rx, 2 * n_tx + 1);
  eff.h_u.col(0) = h_tilde * v_own;
  for (Eigen::Index i = 0; i < n_tx; ++i)
    eff.h_u.col(1 + i) = root_beta * std::abs(v_own(i)) * h_si.col(i);
  for (Eigen::Index i = 0; i < n_tx; ++i)
    eff.h_u.col(1 + n_tx + i) = root_beta_comm * std::abs(v_partner(i)) * h_comm.col(i);

  const double tau_p_sq = set.tau_si_scaled * set.tau_si_scaled;
  const double one_plus_beta = 1.0 + hw.beta;
  eff.sigma_prime_sq = tau_p_sq * v_own.squaredNorm() * one_plus_beta +
                       set.q_comm * set.tau_sq_comm * v_partner.squaredNorm() * one_plus_beta +
                       hw.noise_power;
  return eff;
}

CRowVector mmse_filter(const CVector& v_intended, const CMatrix& h_hat_comm,
                       const EffectiveInterference& eff, double tau_sq_comm, MmseInfo* info) {
  const Eigen::Index m_rx = h_hat_comm.rows();
  const CVector h_eff = h_hat_comm * v_intended;

  CMatrix a = eff.h_u * eff.h_u.adjoint();
  a += eff.sigma_prime_sq * CMatrix::Identity(m_rx, m_rx);
  a += (1.0 - tau_sq_comm) * (h_eff * h_eff.adjoint());
  a = 0.5 * (a + a.adjoint().eval());

  Eigen::SelfAdjointEigenSolver<CMatrix> es(a, Eigen::EigenvaluesOnly);
  const double lam_max = es.eigenvalues().maxCoeff();
  const double lam_min = es.eigenvalues().minCoeff();
  const double cond = lam_min > 0.0 ? lam_max / lam_min
                                    : std::numeric_limits<double>::infinity();
  bool regularized = false;
  if (!(cond < 1e12)) {
    a += (lam_max * 1e-12) * CMatrix::Identity(m_rx, m_rx);
    regularized = true;
  }
  if (info != nullptr) {
    info->condition_number = cond;
    info->regularized = regularized;
  }

  CVector w = a.ldlt().solve(h_eff);
  const double n = w.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    // Degenerate intended link: fall back to the first receive antenna.
    CRowVector u = CRowVector::Zero(m_rx);
    u(0) = 1.0;
    return u;
  }
  return (w / n).conjugate().transpose();
}

}  // namespace fdmimo
