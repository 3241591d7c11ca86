#include "fdmimo/channel.hpp"

#include <stdexcept>

namespace fdmimo {

CRowVector ula_steering(const UlaGeometry& geo, double angle_rad) {
  if (geo.element_count < 1) throw std::invalid_argument("ula_steering: element_count < 1");
  CRowVector a(geo.element_count);
  const double phase_step = 2.0 * M_PI * geo.spacing * std::cos(angle_rad);
  for (int i = 0; i < geo.element_count; ++i)
    a(i) = std::polar(1.0, phase_step * static_cast<double>(i));
  return a;
}

CMatrix make_los_si(const UlaGeometry& tx, const UlaGeometry& rx, const LosParams& los) {
  const CRowVector a_tx = ula_steering(tx, los.aod_rad);
  const CRowVector a_rx = ula_steering(rx, los.aoa_rad);
  return los.complex_gain * (a_rx.adjoint() * a_tx);
}

namespace {

CMatrix sample_si_estimate(Rng& rng, const SystemConfig& cfg, double tau_sq_si, LosParams& los) {
  los.complex_gain = std::polar(1.0, rng.uniform(0.0, 2.0 * M_PI));
  los.aod_rad = rng.uniform(0.0, 2.0 * M_PI);
  los.aoa_rad = rng.uniform(0.0, 2.0 * M_PI);
  const UlaGeometry tx{cfg.n_tx, cfg.ula_spacing};
  const UlaGeometry rx{cfg.m_rx, cfg.ula_spacing};
  const CMatrix h_los = make_los_si(tx, rx, los);
  const CMatrix h_nlos = rng.cgaussian(cfg.m_rx, cfg.n_tx, 1.0);
  const double kappa = cfg.kappa();
  const double los_scale = std::sqrt(cfg.q_si() * kappa / (1.0 + kappa));
  const double nlos_scale = std::sqrt(cfg.q_si() * (1.0 - tau_sq_si) / (1.0 + kappa));
  return los_scale * h_los + nlos_scale * h_nlos;
}

}  // namespace

ChannelSet sample_channel_set(const SystemConfig& cfg, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  ChannelSet set;
  set.q_comm = cfg.q_comm();
  set.q_si = cfg.q_si();
  set.kappa = cfg.kappa();
  set.tau_sq_comm = cfg.tau_sq();
  set.tau_sq_si = cfg.tau_sq();
  set.tau_si_scaled = std::sqrt(set.q_si * set.tau_sq_si / (1.0 + set.kappa));

  set.h_hat_comm_into_1 = rng.cgaussian(cfg.m_rx, cfg.n_tx, set.q_comm);
  set.h_hat_comm_into_2 = rng.cgaussian(cfg.m_rx, cfg.n_tx, set.q_comm);
  set.e_comm_into_1 = rng.cgaussian(cfg.m_rx, cfg.n_tx, set.q_comm);
  set.e_comm_into_2 = rng.cgaussian(cfg.m_rx, cfg.n_tx, set.q_comm);

  set.h_hat_si_1 = sample_si_estimate(rng, cfg, set.tau_sq_si, set.los_1);
  set.h_hat_si_2 = sample_si_estimate(rng, cfg, set.tau_sq_si, set.los_2);
  set.e_si_1 = rng.cgaussian(cfg.m_rx, cfg.n_tx, 1.0);
  set.e_si_2 = rng.cgaussian(cfg.m_rx, cfg.n_tx, 1.0);
  return set;
}

CMatrix true_channel(const ChannelSet& set, ChannelId id) {
  switch (id) {
    case ChannelId::comm_into_1:
      return std::sqrt(1.0 - set.tau_sq_comm) * set.h_hat_comm_into_1 +
             std::sqrt(set.tau_sq_comm) * set.e_comm_into_1;
    case ChannelId::comm_into_2:
      return std::sqrt(1.0 - set.tau_sq_comm) * set.h_hat_comm_into_2 +
             std::sqrt(set.tau_sq_comm) * set.e_comm_into_2;
    case ChannelId::si_1:
      return set.h_hat_si_1 + set.tau_si_scaled * set.e_si_1;
    case ChannelId::si_2:
      return set.h_hat_si_2 + set.tau_si_scaled * set.e_si_2;
  }
  throw std::invalid_argument("true_channel: bad ChannelId");
}

}  // namespace fdmimo
