#pragma once

#include "fdmimo/canceller.hpp"
#include "fdmimo/channel.hpp"
#include "fdmimo/combiner.hpp"
#include "fdmimo/config.hpp"
#include "fdmimo/metrics.hpp"
#include "fdmimo/optimizer.hpp"

namespace fdtest {

using namespace fdmimo;

struct Instance {
  SystemConfig cfg;
  ChannelSet set;
  CancellerPair cancellers;
  HardwareProfile hw;
};

/// Default-config instance: channels, cancellers, hardware profile.
inline Instance make_instance(std::uint64_t seed, SystemConfig cfg = {}) {
  Instance inst;
  inst.cfg = cfg;
  inst.set = sample_channel_set(cfg, derive_seed(seed, 1));
  const CancellerSpec spec{cfg.n_tap, cfg.amp_imperf_db, cfg.phase_imperf_deg};
  inst.cancellers = {build_canceller(inst.set.h_hat_si_1, spec, derive_seed(seed, 2)),
                     build_canceller(inst.set.h_hat_si_2, spec, derive_seed(seed, 3))};
  inst.hw = HardwareProfile{cfg.beta(), cfg.noise_mw()};
  return inst;
}

/// Feasibility-scaled random precoders with MMSE combiners.
inline NodeDesignPair random_designs(const Instance& inst, std::uint64_t seed) {
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
    const EffectiveInterference eff =
        effective_interference(designs, inst.set, inst.cancellers, inst.hw, k);
    designs[k - 1].combiner = mmse_filter(designs[(3 - k) - 1].precoder,
                                          inst.set.h_hat_comm_into(k), eff, inst.set.tau_sq_comm);
  }
  return designs;
}

inline double pair_sum_sinr(const NodeDesignPair& designs, const Instance& inst) {
  double acc = 0.0;
  for (int k = 1; k <= 2; ++k) {
    const double p = signal_power(designs[k - 1].combiner, inst.set.h_hat_comm_into(k),
                                  designs[(3 - k) - 1].precoder, inst.set.tau_sq_comm);
    acc += p / interference_plus_noise(designs, inst.set, inst.cancellers, inst.hw, k);
  }
  return acc;
}

inline double quad(const CVector& v, const CMatrix& a) {
  return std::real((v.adjoint() * a * v)(0, 0));
}

}  // namespace fdtest
