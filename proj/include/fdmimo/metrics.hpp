#pragma once

#include <array>

#include "fdmimo/canceller.hpp"
#include "fdmimo/channel.hpp"
#include "fdmimo/types.hpp"

namespace fdmimo {

struct HardwareProfile {
  double beta = 0.0;         // transmit-distortion power ratio (linear)
  double noise_power = 0.0;  // sigma^2, linear mW
};

/// One node's transmit/receive design.
struct NodeDesign {
  CVector precoder;      // v_k, length N
  CRowVector combiner;   // u_k, length M, unit norm
};

using NodeDesignPair = std::array<NodeDesign, 2>;   // index 0 -> node 1, 1 -> node 2
using CancellerPair = std::array<Canceller, 2>;

/// Closed-form link quality at one node. All powers linear mW.
struct LinkMetrics {
  double sinr = 0.0;       // gamma_k
  double mse = 0.0;        // 1 / gamma_k
  double p_com = 0.0;      // received intended-signal power
  double sigma_ipn = 0.0;  // interference-plus-noise power
  RVector phi_diag;        // per-antenna residual SI power, length M
};

/// Received intended-signal power (1 - tau^2) |u Hhat v|^2.
/// Requires ||u|| = 1 within 1e-9; throws std::invalid_argument otherwise.
double signal_power(const CRowVector& u, const CMatrix& h_hat_comm, const CVector& v_partner,
                    double tau_sq_comm);

/// Interference-plus-noise power at `node` (1 or 2): residual SI through the
/// combiner, SI/comm channel-estimation error floors, transmit-distortion
/// leakage, and thermal noise.
double interference_plus_noise(const NodeDesignPair& designs, const ChannelSet& set,
                               const CancellerPair& cancellers, const HardwareProfile& hw,
                               int node);

/// Full closed-form metrics at `node` (SINR, MSE, powers, residual-SI diag).
LinkMetrics link_metrics(const NodeDesignPair& designs, const ChannelSet& set,
                         const CancellerPair& cancellers, const HardwareProfile& hw, int node);

inline double mse_from_sinr(double sinr) { return 1.0 / sinr; }

/// Covariance of the analog-domain residual distorted SI at `node`:
/// Htilde v v^H Htilde^H + tau'^2 ||v||^2 (1+beta) I + beta Hhat diag(vv^H) Hhat^H,
/// Hermitian-symmetrized.
CMatrix residual_si_covariance(const CVector& v_own, const ChannelSet& set,
                               const Canceller& canceller, const HardwareProfile& hw, int node);

/// Diagonal of a residual-SI covariance in dBm; zero power maps to -inf.
RVector residual_si_dbm(const CMatrix& phi);

struct SampleOptions {
  bool include_si = true;          // own transmitter active (full duplex)
  bool include_comm = true;        // partner transmitter active
  bool include_noise = true;       // thermal noise added
  bool resample_csi_error = true;  // draw fresh error matrices per call
};

/// One draw of the received vector y_k including intended signal, residual SI,
/// transmit distortion, CSI error leakage, and thermal noise. Verification
/// oracle for the closed-form powers; not used by any solver path.
CVector sample_received_signal(const ChannelSet& set, const NodeDesignPair& designs,
                               const CancellerPair& cancellers, const HardwareProfile& hw,
                               int node, Rng& rng, const SampleOptions& opts = {});

}  // namespace fdmimo
