#pragma once

#include "pdbrf/convex_min.hpp"
#include "pdbrf/product_assembly.hpp"

namespace pdbrf {

struct OracleSolution {
  Vec point;
  double certificate = 0.0;  // residual or optimality gap, >= 0
  std::string method;        // grid | subgradient | closed_form | linear_solve
};

/// Golden-section minimization of a scalar convex function over [lo, hi]
/// down to interval width `tol`. Infinite values (indicator regions) are
/// allowed as long as the function is finite somewhere in the bracket.
double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  double tol);

/// Brute-force proximity oracle for separable functions: per coordinate,
/// scans a grid over [x - R, x + R] with R = 10 gamma (1 + |x|) (widened to
/// cover the family's hint points) and refines by golden section to
/// `resolution`. Independent of the closed-form prox path. Like any search
/// driven by objective-value comparisons, the attainable accuracy bottoms
/// out near sqrt(eps * scale / curvature), a few 1e-8 at unit scales.
Vec grid_prox_oracle(const FunctionSpec& spec, double gamma, const Vec& x,
                     double resolution);

/// Inclusion-membership residual of a candidate primal-dual point, measured
/// through resolvents at the probe step `gamma_probe` (default 1, independent
/// of the solver's step size):
///   primal: || y - J_{gA}( y + g (z - By - Qy - sum_i L_i* v_i) ) ||
///   dual i: || v_i - J_{gA_i}( v_i + g (L_i y - r_i - B_i v_i - Q_i v_i) ) ||
/// Returns the max over blocks; zero exactly at solutions.
double kkt_residual(const OperatorBundle& bundle, const BlockVector& candidate,
                    double gamma_probe = 1.0);

/// Step-size rule for the projected subgradient oracle.
struct StepSizeRule {
  enum class Kind { constant, inv_sqrt, inv_k };
  Kind kind = Kind::inv_sqrt;
  double t0 = 1.0;
  static StepSizeRule constant(double t) { return {Kind::constant, t}; }
  static StepSizeRule inv_sqrt(double t0) { return {Kind::inv_sqrt, t0}; }
  static StepSizeRule inv_k(double t0) { return {Kind::inv_k, t0}; }
  double at(long k) const;
};

/// Projected subgradient descent on the primal objective of a minimization
/// problem. When f is an indicator its set is handled by projection;
/// otherwise a subgradient of f enters the step. Requires primal_objective
/// to be available. Returns the best iterate seen; the certificate is the
/// norm of the final projected-step displacement divided by the step size.
OracleSolution subgradient_oracle(const MinProblem& p, long iters,
                                  const StepSizeRule& rule,
                                  unsigned long long seed);

}  // namespace pdbrf
