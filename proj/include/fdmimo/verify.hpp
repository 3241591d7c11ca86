#pragma once

#include <functional>
#include <string>

#include "fdmimo/optimizer.hpp"

// Verification oracles. Each checks a solver-path result by an independent
// method (finite differences, interior-point Newton, Monte Carlo sampling);
// nothing here is called by the solver paths themselves.
namespace fdmimo::verify {

/// Wirtinger gradient d f / d conj(v) by central finite differences on the
/// real and imaginary parts of each entry.
CVector wirtinger_gradient_fd(const std::function<double(const CVector&)>& f, const CVector& v,
                              double step = 1e-6);

/// Max-norm relative disagreement: max_i |a_i - b_i| / max_i |b_i|.
double max_rel_error(const CVector& a, const CVector& b);

struct InteriorPointResult {
  CVector z;
  double objective = 0.0;
  double duality_gap = 0.0;  // certified (m+1)/t barrier gap
  bool certified = false;
  int newton_iters = 0;
};

/// Projection QCQP solved by a log-barrier Newton method on the real
/// embedding of the complex variable. Independent of the dual-ascent path.
InteriorPointResult project_interior_point(const CVector& v_bar, const ConstraintSet& cons,
                                           double gap_tol = 1e-9);

struct CheckReport {
  bool pass = false;
  std::string detail;
};

/// Oracle suites runnable from the command line. Each returns a pass flag and
/// a one-line summary of the measured errors.
CheckReport selfcheck_gradient(std::uint64_t seed, int instances, double tol);
CheckReport selfcheck_projection(std::uint64_t seed, int instances, double tol);
/// Per instance: Monte Carlo received power vs P_Com + Sigma, and Monte Carlo
/// residual-SI covariance diagonal vs the closed-form Phi diagonal.
CheckReport selfcheck_covariance(std::uint64_t seed, int instances, int draws, double tol);
CheckReport selfcheck_second_moment_identity(std::uint64_t seed, int draws, double tol);

}  // namespace fdmimo::verify
