#pragma once

/*=============================================================================
 * Convex front end: structured minimization
 *
 *   minimize_x  f(x) + sum_i (g_i [] l_i)(L_i x - r_i) + h(x) - <z, x>
 *
 * with f and the g_i prox-representable, h differentiable with a Lipschitz
 * gradient, and each l_i strongly convex, supplied through the gradient of
 * its conjugate (the cocoercive map the algorithm consumes). The problem is
 * translated into the primal-dual inclusion via
 *
 *   A = subdifferential of f,  B = grad h,        Q   = 0,
 *   A_i = subdifferential of g_i*,  B_i = grad l_i*,  Q_i = 0,
 *
 * and handed to the backward-reflected-forward solver. The associated dual
 * problem is
 *
 *   minimize_v  (f* [] h*)(z - sum_i L_i* v_i)
 *               + sum_i ( g_i*(v_i) + l_i*(v_i) + <v_i, r_i> ).
 *===========================================================================*/

#include "pdbrf/brf_solver.hpp"
#include "pdbrf/functions.hpp"

namespace pdbrf {

/// Differentiable convex term h, given as a gradient map plus the
/// cocoercivity constant beta0 of the gradient (inverse of its Lipschitz
/// constant). The registered families also carry a value oracle.
struct SmoothTerm {
  enum class Family { zero, sq_dist, custom };

  Family family = Family::zero;
  Eigen::Index dim = 0;
  std::function<Vec(const Vec&)> gradient;
  double beta0 = 1.0;
  std::function<double(const Vec&)> value_fn;  // empty when unavailable
  Vec point;       // sq_dist parameters
  double weight = 0.0;

  static SmoothTerm zero(Eigen::Index dim, double beta0 = 1.0);
  /// h(x) = (weight/2)||x - point||^2; beta0 = 1/weight.
  static SmoothTerm sq_dist(Vec point, double weight);
  static SmoothTerm custom(Eigen::Index dim, std::function<Vec(const Vec&)> grad,
                           double beta0,
                           std::function<double(const Vec&)> value = {});

  bool has_value() const { return static_cast<bool>(value_fn); }
  double value(const Vec& x) const;
};

/// Strongly convex term l_i, supplied through the gradient of its conjugate
/// (a beta-cocoercive map). The scaled_sq family l = (1/(2s))||.||^2 makes
/// (g [] l) a Moreau envelope, which is what objective evaluation needs.
struct StronglyConvexTerm {
  Eigen::Index dim = 0;
  std::function<Vec(const Vec&)> grad_conj;
  double beta = 0.0;
  std::optional<double> moreau_s;  // set for scaled_sq(s)
  std::function<double(const Vec&)> conj_value_fn;  // l*(v) when known

  /// l = (1/(2s))||.||^2, s > 0: grad l* = s Id, beta = 1/s,
  /// l*(v) = (s/2)||v||^2.
  static StronglyConvexTerm scaled_sq(Eigen::Index dim, double s);
  static StronglyConvexTerm custom(Eigen::Index dim,
                                   std::function<Vec(const Vec&)> grad_conj,
                                   double beta,
                                   std::function<double(const Vec&)> conj_value = {});
};

struct MinBlock {
  FunctionSpec g;
  StronglyConvexTerm ell;
  LinearMap L;
  Vec r;
};

struct MinProblem {
  FunctionSpec f;
  SmoothTerm h;
  Vec z;
  std::vector<MinBlock> blocks;

  SpaceShape shape() const;
  void validate() const;
};

/// Translates the minimization data into an operator bundle for the
/// primal-dual solver.
OperatorBundle build_inclusion(const MinProblem& p);

struct MinSolveResult {
  Vec primal;             // y_n at termination
  std::vector<Vec> duals; // w_{i,n} at termination
  std::vector<IterateRecord> history;
  RunStatus status = RunStatus::iteration_limit;
  long iterations = 0;
};

/// Delegates to the backward-reflected-forward solver on build_inclusion's
/// bundle; the executed updates are exactly the prox_{gamma f} /
/// prox_{gamma g_i*} routine with one cocoercive call per term per step.
MinSolveResult solve_min(const MinProblem& p, const StepPolicy& policy,
                         const Seeds& seeds, const StopRule& stop,
                         const std::optional<PerturbationSchedule>& schedule =
                             std::nullopt);

/// Primal objective value, or nullopt when some term has no registered
/// closed form (never a numerical approximation).
std::optional<double> primal_objective(const MinProblem& p, const Vec& x);

/// Dual objective value, or nullopt outside the registered closed forms
/// (supported when h is zero or quadratic).
std::optional<double> dual_objective(const MinProblem& p,
                                     const std::vector<Vec>& v);

/// Moreau envelope value env_s g(u) = min_y g(y) + ||u - y||^2 / (2s).
double moreau_envelope_value(const FunctionSpec& g, double s, const Vec& u);

/// Gradient of the Moreau envelope, (u - prox_{s g}(u)) / s. This is the
/// gradient of (g [] l) for l = (1/(2s))||.||^2.
Vec moreau_envelope_gradient(const FunctionSpec& g, double s, const Vec& u);

}  // namespace pdbrf
