#include "fdmimo/metrics.hpp"

#include <stdexcept>

namespace fdmimo {

namespace {

void check_unit_norm(const CRowVector& u) {
  if (std::abs(u.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("combiner must be unit-norm");
}

int partner_of(int node) { return node == 1 ? 2 : 1; }

/// u * H * diag(|v|^2) * H^H * u^H without forming the diagonal matrix.
double beamformed_diag_power(const CRowVector& u, const CMatrix& h, const CVector& v) {
  const CRowVector uh = u * h;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::norm(uh(i)) * std::norm(v(i));
  return acc;
}

}  // namespace

double signal_power(const CRowVector& u, const CMatrix& h_hat_comm, const CVector& v_partner,
                    double tau_sq_comm) {
  check_unit_norm(u);
  const Complex g = (u * h_hat_comm * v_partner)(0, 0);
  return (1.0 - tau_sq_comm) * std::norm(g);
}

double interference_plus_noise(const NodeDesignPair& designs, const ChannelSet& set,
                               const CancellerPair& cancellers, const HardwareProfile& hw,
                               int node) {
  const int k = node, l = partner_of(node);
  const NodeDesign& own = designs[k - 1];
  const NodeDesign& partner = designs[l - 1];
  check_unit_norm(own.combiner);

  const CMatrix h_tilde = set.h_hat_si(k) - cancellers[k - 1].matrix;
  const CMatrix& h_comm = set.h_hat_comm_into(k);
  const double tau_p_sq = set.tau_si_scaled * set.tau_si_scaled;
  const double one_plus_beta = 1.0 + hw.beta;

  const Complex si_gain = (own.combiner * h_tilde * own.precoder)(0, 0);
  double acc = std::norm(si_gain);
  acc += tau_p_sq * own.precoder.squaredNorm() * one_plus_beta;
  acc += hw.beta * beamformed_diag_power(own.combiner, set.h_hat_si(k), own.precoder);
  acc += set.q_comm * set.tau_sq_comm * partner.precoder.squaredNorm() * one_plus_beta;
  acc += hw.beta * (1.0 - set.tau_sq_comm) *
         beamformed_diag_power(own.combiner, h_comm, partner.precoder);
  acc += hw.noise_power;
  return acc;
}

LinkMetrics link_metrics(const NodeDesignPair& designs, const ChannelSet& set,
                         const CancellerPair& cancellers, const HardwareProfile& hw, int node) {
  const int k = node, l = partner_of(node);
  LinkMetrics m;
  m.p_com = signal_power(designs[k - 1].combiner, set.h_hat_comm_into(k),
                         designs[l - 1].precoder, set.tau_sq_comm);
  m.sigma_ipn = interference_plus_noise(designs, set, cancellers, hw, node);
  m.sinr = m.p_com / m.sigma_ipn;
  m.mse = mse_from_sinr(m.sinr);
  m.phi_diag =
      residual_si_covariance(designs[k - 1].precoder, set, cancellers[k - 1], hw, node)
          .diagonal()
          .real();
  return m;
}

CMatrix residual_si_covariance(const CVector& v_own, const ChannelSet& set,
                               const Canceller& canceller, const HardwareProfile& hw, int node) {
  const CMatrix h_tilde = set.h_hat_si(node) - canceller.matrix;
  const CMatrix& h_hat = set.h_hat_si(node);
  const double tau_p_sq = set.tau_si_scaled * set.tau_si_scaled;
  const Eigen::Index m_rx = h_tilde.rows();

  const CVector leak = h_tilde * v_own;
  CMatrix phi = leak * leak.adjoint();
  phi += tau_p_sq * v_own.squaredNorm() * (1.0 + hw.beta) * CMatrix::Identity(m_rx, m_rx);
  phi += hw.beta * h_hat * v_own.cwiseAbs2().asDiagonal() * h_hat.adjoint();
  return 0.5 * (phi + phi.adjoint().eval());
}

RVector residual_si_dbm(const CMatrix& phi) {
  RVector out(phi.rows());
  for (Eigen::Index i = 0; i < phi.rows(); ++i) out(i) = mw_to_dbm(phi(i, i).real());
  return out;
}

CVector sample_received_signal(const ChannelSet& set, const NodeDesignPair& designs,
                               const CancellerPair& cancellers, const HardwareProfile& hw,
                               int node, Rng& rng, const SampleOptions& opts) {
  const int k = node, l = partner_of(node);
  const CVector& v_k = designs[k - 1].precoder;
  const CVector& v_l = designs[l - 1].precoder;
  const Eigen::Index m_rx = set.h_hat_comm_into(k).rows();
  const Eigen::Index n_tx = v_k.size();

  // Per-draw symbols, distortion noise, thermal noise and (optionally) fresh
  // channel-error realizations, so sample covariances converge to the
  // closed-form expectations.
  const Complex s_l = rng.cnormal(1.0);
  const Complex s_k = rng.cnormal(1.0);
  CVector w_l(n_tx), w_k(n_tx);
  for (Eigen::Index i = 0; i < n_tx; ++i) {
    w_l(i) = rng.cnormal(hw.beta * std::norm(v_l(i)));
    w_k(i) = rng.cnormal(hw.beta * std::norm(v_k(i)));
  }

  CVector y = CVector::Zero(m_rx);
  if (opts.include_comm) {
    const CMatrix e_comm = opts.resample_csi_error
                               ? rng.cgaussian(m_rx, n_tx, set.q_comm)
                               : set.e_comm_into(k);
    const double t = std::sqrt(set.tau_sq_comm);
    const double rt = std::sqrt(1.0 - set.tau_sq_comm);
    y += rt * (set.h_hat_comm_into(k) * (v_l * s_l + w_l));
    y += t * (e_comm * (v_l * s_l + w_l));
  }
  if (opts.include_si) {
    const CMatrix e_si =
        opts.resample_csi_error ? rng.cgaussian(m_rx, n_tx, 1.0) : set.e_si(k);
    const CMatrix h_tilde = set.h_hat_si(k) - cancellers[k - 1].matrix;
    y += h_tilde * v_k * s_k;
    y += set.tau_si_scaled * (e_si * (v_k * s_k + w_k));
    y += set.h_hat_si(k) * w_k;
  }
  if (opts.include_noise)
    for (Eigen::Index i = 0; i < m_rx; ++i) y(i) += rng.cnormal(hw.noise_power);
  return y;
}

}  // namespace fdmimo
