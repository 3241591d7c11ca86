#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fdmimo/combiner.hpp"
#include "fdmimo/config.hpp"
#include "fdmimo/metrics.hpp"

namespace fdmimo {

/// Feasible set of one node's precoder: ||v||^2 <= power_budget and
/// v^H quad_mats[m] v <= si_targets[m] for every receive antenna m.
struct ConstraintSet {
  double power_budget = 0.0;        // P_k, linear mW
  std::vector<CMatrix> quad_mats;   // M Hermitian PSD matrices A_m
  RVector si_targets;               // epsilon_{k,m}, linear mW
};

/// A_m = Htilde^H e_m e_m^H Htilde + tau'^2 (1+beta) I + beta D_m with
/// D_m = diag(|Hhat_si[m,:]|.^2); v^H A_m v equals the residual-SI covariance
/// diagonal entry m.
ConstraintSet build_constraint_mats(const ChannelSet& set, const Canceller& canceller,
                                    const HardwareProfile& hw, int node, double power_budget,
                                    double epsilon);

struct ProjectionResult {
  CVector v;
  bool converged = false;
  int iterations = 0;
  double kkt_residual = 0.0;  // max of primal violation and complementarity residual
};

/// Euclidean projection onto the constraint set, solved by dual ascent:
/// z(lambda) = (I(1+l0) + sum_m l_m A_m)^{-1} v_bar with projected-gradient
/// ascent on the multipliers; the returned point is feasible (a final exact
/// scaling maps the best iterate into the set).
ProjectionResult project_feasible(const CVector& v_bar, const ConstraintSet& cons,
                                  double proj_tol = 1e-8, int max_iters = 5000);

/// Wirtinger gradient of f = gamma_node + gamma_partner with respect to
/// conj(v_node), holding both combiners and the partner precoder fixed.
CVector sum_sinr_gradient(int node, const NodeDesignPair& designs, const ChannelSet& set,
                          const CancellerPair& cancellers, const HardwareProfile& hw);

struct ArmijoResult {
  CVector v_next;
  double rho = 0.0;  // accepted step nu^m, or 0 when no m satisfied the rule
  int m = 0;
};

/// Backtracking rule: minimal m >= 1 with
/// f(v + nu^m (v_proj - v)) - f(v) >= iota * nu^m * Re{grad^H (v_proj - v)}.
/// Falls back to (v_current, rho=0) after armijo_max_m failures.
ArmijoResult armijo_step(const CVector& v_current, const CVector& v_projected,
                         const CVector& grad, const std::function<double(const CVector&)>& f,
                         double f_current, const OptimizerConfig& cfg);

struct OptTrace {
  std::vector<double> objective_history;  // g[0..t]; entry 0 is the post-init value
  std::vector<double> step_sizes;         // accepted rho per iteration and node
  int best_window_index = 0;              // final-window argmax iteration
  bool converged = false;                 // gap test fired
  bool rollback_applied = false;          // oldest-in-window rule fired
  int iterations = 0;
};

struct SolveResult {
  NodeDesignPair designs;
  OptTrace trace;
};

/// Alternating non-monotone gradient projection over both nodes' precoders
/// and MMSE combiners, maximizing the sum SINR subject to per-node power and
/// per-antenna residual-SI constraints.
SolveResult altnmgap(const ChannelSet& set, const CancellerPair& cancellers,
                     const HardwareProfile& hw, double power_budget, double epsilon,
                     const OptimizerConfig& cfg, std::uint64_t rng_seed);

}  // namespace fdmimo
