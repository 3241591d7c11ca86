#pragma once

#include <cstdint>

#include "fdmimo/config.hpp"
#include "fdmimo/types.hpp"

namespace fdmimo {

struct UlaGeometry {
  int element_count = 0;
  double spacing = 0.5;  // in wavelengths
};

/// Line-of-sight parameters of one self-interference channel.
struct LosParams {
  Complex complex_gain;  // unit-magnitude alpha
  double aod_rad = 0.0;  // departure angle theta_T
  double aoa_rad = 0.0;  // arrival angle theta_R
};

/// ULA steering row vector: element i = exp(j*2*pi*spacing*i*cos(angle)).
CRowVector ula_steering(const UlaGeometry& geo, double angle_rad);

/// Rank-1 LoS SI matrix: alpha * a_rx(aoa)^H * a_tx(aod), shape M x N,
/// every entry of magnitude |alpha|.
CMatrix make_los_si(const UlaGeometry& tx, const UlaGeometry& rx, const LosParams& los);

enum class ChannelId { comm_into_1, comm_into_2, si_1, si_2 };

/// One draw of every channel estimate and its error term for a two-node link.
/// comm_into_k is the estimated channel from the partner into node k;
/// si_k is the estimated self-interference channel at node k.
struct ChannelSet {
  CMatrix h_hat_comm_into_1, h_hat_comm_into_2;  // M x N, i.i.d. CN(0, q_comm)
  CMatrix h_hat_si_1, h_hat_si_2;                // Rician, LoS + NLoS mix
  CMatrix e_comm_into_1, e_comm_into_2;          // error terms, CN(0, q_comm)
  CMatrix e_si_1, e_si_2;                        // error terms, CN(0, 1)
  LosParams los_1, los_2;

  double q_comm = 0.0;
  double q_si = 0.0;
  double tau_sq_comm = 0.0;  // tau^2 of the communication links
  double tau_sq_si = 0.0;    // tau^2 of the SI links
  double tau_si_scaled = 0.0;  // tau' = sqrt(q_si * tau_sq_si / (1 + kappa))
  double kappa = 0.0;

  const CMatrix& h_hat_comm_into(int node) const {
    return node == 1 ? h_hat_comm_into_1 : h_hat_comm_into_2;
  }
  const CMatrix& h_hat_si(int node) const { return node == 1 ? h_hat_si_1 : h_hat_si_2; }
  const CMatrix& e_comm_into(int node) const {
    return node == 1 ? e_comm_into_1 : e_comm_into_2;
  }
  const CMatrix& e_si(int node) const { return node == 1 ? e_si_1 : e_si_2; }
};

/// Draw a full channel set. Same seed, same config: bit-identical result.
ChannelSet sample_channel_set(const SystemConfig& cfg, std::uint64_t rng_seed);

/// Assemble the true channel realization from an estimate and its error term:
/// comm: sqrt(1-tau^2)*Hhat + tau*E;  si: Hhat + tau'*E.
CMatrix true_channel(const ChannelSet& set, ChannelId id);

}  // namespace fdmimo
