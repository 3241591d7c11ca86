#pragma once

#include "fdmimo/metrics.hpp"

namespace fdmimo {

/// Interference covariance in square-root form: the interference-plus-noise
/// covariance at a node equals h_u h_u^H + sigma_prime_sq I.
struct EffectiveInterference {
  CMatrix h_u;                 // M x (2N+1)
  double sigma_prime_sq = 0.0;  // isotropic floor, linear mW
};

/// Build the effective interference of the receive side of `node`. Columns:
/// [Htilde v_k | sqrt(beta) Hhat_si e_i v_k,i | sqrt(beta(1-tau^2)) Hhat_comm e_i v_l,i ...].
EffectiveInterference effective_interference(const NodeDesignPair& designs,
                                             const ChannelSet& set,
                                             const CancellerPair& cancellers,
                                             const HardwareProfile& hw, int node);

struct MmseInfo {
  double condition_number = 0.0;
  bool regularized = false;
};

/// Unit-norm MMSE/max-SINR combiner: direction of
/// (H_u H_u^H + sigma'^2 I + (1-tau^2) Hhat v v^H Hhat^H)^{-1} Hhat v, conjugated.
/// Condition numbers above 1e12 are reported via `info` and handled by a
/// regularized solve.
CRowVector mmse_filter(const CVector& v_intended, const CMatrix& h_hat_comm,
                       const EffectiveInterference& eff, double tau_sq_comm,
                       MmseInfo* info = nullptr);

}  // namespace fdmimo
