#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fdmimo/types.hpp"

namespace fdmimo {

struct CancellerSpec {
  int n_tap = 8;
  double amp_imperf_db = 0.0;    // per-tap amplitude error, uniform in +-this (dB)
  double phase_imperf_deg = 0.0;  // per-tap phase error, uniform in +-this (deg)
};

/// Multi-tap analog canceller: an M x N matrix with n_tap non-zero entries.
struct Canceller {
  CMatrix matrix;
  std::vector<std::pair<int, int>> support;  // (row, col) of each tap
};

/// Taps sit on the n_tap largest-|entry| positions of the SI channel estimate
/// (ties broken by row-major order); each tap copies the estimate entry with
/// a uniform amplitude/phase imperfection applied.
Canceller build_canceller(const CMatrix& h_hat_si, const CancellerSpec& spec,
                          std::uint64_t rng_seed);

}  // namespace fdmimo
