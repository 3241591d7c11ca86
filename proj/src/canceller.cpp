#include "fdmimo/canceller.hpp"

#include <algorithm>
#include <stdexcept>

namespace fdmimo {

Canceller build_canceller(const CMatrix& h_hat_si, const CancellerSpec& spec,
                          std::uint64_t rng_seed) {
  const int rows = static_cast<int>(h_hat_si.rows());
  const int cols = static_cast<int>(h_hat_si.cols());
  if (spec.n_tap < 1 || spec.n_tap > rows * cols)
    throw std::invalid_argument("build_canceller: n_tap outside [1, M*N]");

  // Rank positions by |entry| descending; stable in row-major order, so exact
  // ties resolve to the earlier position.
  struct Slot {
    double mag;
    int flat;
  };
  std::vector<Slot> slots;
  slots.reserve(rows * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) slots.push_back({std::abs(h_hat_si(r, c)), r * cols + c});
  std::stable_sort(slots.begin(), slots.end(),
                   [](const Slot& a, const Slot& b) { return a.mag > b.mag; });

  Rng rng(rng_seed);
  Canceller out;
  out.matrix = CMatrix::Zero(rows, cols);
  out.support.reserve(spec.n_tap);
  for (int i = 0; i < spec.n_tap; ++i) {
    const int r = slots[i].flat / cols;
    const int c = slots[i].flat % cols;
    const double amp = amplitude_db_to_scale(rng.uniform(-spec.amp_imperf_db, spec.amp_imperf_db));
    const double ph = deg_to_rad(rng.uniform(-spec.phase_imperf_deg, spec.phase_imperf_deg));
    out.matrix(r, c) = h_hat_si(r, c) * std::polar(amp, ph);
    out.support.emplace_back(r, c);
  }
  std::sort(out.support.begin(), out.support.end());
  return out;
}

}  // namespace fdmimo
