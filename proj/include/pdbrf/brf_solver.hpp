#pragma once

/*=============================================================================
 * Primal-dual backward-reflected-forward splitting.
 *
 * Solves the structured inclusion pair
 *
 *   primal:  z in A x + sum_i L_i* (A_i + B_i + Q_i)^{-1} (L_i x - r_i)
 *                 + B x + Q x
 *   dual:    -r_i in -L_i (A + B + Q)^{-1} (z - sum_j L_j* v_j)
 *                 + A_i v_i + B_i v_i + Q_i v_i
 *
 * by running, on the product space K = H (+) G_1 (+) ... (+) G_m,
 *
 *   y_n     = J_{gamma bold A}(x_n)
 *   x_{n+1} = y_n - 2 gamma S_n y_n + gamma S_n y_{n-1} - gamma Bold_n y_n
 *
 * where bold A collects the set-valued blocks together with the shifts z and
 * r_i, S_n is the (possibly perturbed) monotone Lipschitz coupling operator
 * and Bold_n the (possibly perturbed) blockwise cocoercive operator. Each
 * iteration makes exactly one call to every single-valued base operator
 * (B, Q, B_i, Q_i, L_i, L_i*); the reflection reuses the values stored from
 * the previous step.
 *
 * Residual certificates per step:
 *   p_{n+1}   = (x_{n+1} - y_{n+1})/gamma + B_n y_{n+1} + Q_n y_{n+1}
 *               + sum_i L_i* w_{i,n+1}
 *   q_{i,n+1} = (v_{i,n+1} - w_{i,n+1})/gamma + B_{i,n} w_{i,n+1}
 *               + Q_{i,n} w_{i,n+1} - L_i y_{n+1}
 * both of which vanish along convergent runs and certify an approximate
 * solution of the two inclusions.
 *===========================================================================*/

#include "pdbrf/inexact.hpp"
#include "pdbrf/product_assembly.hpp"

namespace pdbrf {

/// Step-size policy. gamma must satisfy, for every n,
///   1 - gamma/(2 beta) - 2 gamma mu - 6 gamma kappa_n - gamma kappa_{n+1}
///     >= epsilon > 0,
/// which is enforced through the conservative bound
///   1 - gamma/(2 beta) - 2 gamma mu - 7 gamma kappa_sup >= epsilon
/// with 0 < beta < beta'.
struct StepPolicy {
  double gamma = 0.0;
  double epsilon = 0.0;
  double kappa_sup = 0.0;
  double beta = 0.0;  // strictly below beta'
  double mu = 0.0;

  /// Left-hand side of the step-size inequality at this gamma.
  double slack() const {
    return 1.0 - gamma / (2.0 * beta) - 2.0 * gamma * mu -
           7.0 * gamma * kappa_sup;
  }
};

/// Largest feasible policy: beta = 0.99 beta' and
/// gamma = (1 - epsilon) / (1/(2 beta) + 2 mu + 7 kappa_sup).
StepPolicy choose_gamma(double beta_prime, double mu, double kappa_sup,
                        double epsilon);

/// Validates a (possibly overridden) gamma against the policy inequality;
/// throws with the inequality spelled out when it fails.
void validate_policy(const StepPolicy& policy);

/// Per-iteration diagnostics.
struct IterateRecord {
  long n = 0;
  double step_norm_sq = 0.0;  // ||y_n - y_{n-1}||^2 in the product norm
  double primal_residual_norm = 0.0;
  std::vector<double> dual_residual_norms;
  double cumulative_step_sum = 0.0;

  double max_residual_norm() const;
};

/// Thrown by the step when an iterate leaves the finite range; carries the
/// last diagnostics row.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::string msg, IterateRecord rec)
      : std::runtime_error(std::move(msg)), record(std::move(rec)) {}
  IterateRecord record;
};

/// Iteration state between steps. Entering step n it holds x_n, the previous
/// resolvent output y_{n-1}, and the values of the single-valued base
/// operators (and perturbation shapes) at y_{n-1} needed by the reflection.
struct SolverState {
  BlockVector x;       // (x_n, v_{1,n}, ..., v_{m,n})
  BlockVector y_prev;  // (y_{n-1}, w_{i,n-1}); after a step, the newest y
  long n = 0;
  double cum_step_sum = 0.0;  // running sum of the squared step norms

  struct Cache {
    Vec Q_primal;             // Q(y^H)
    std::vector<Vec> Lstar;   // L_i* w_i
    std::vector<Vec> Q_dual;  // Q_i w_i
    std::vector<Vec> L_y;     // L_i y^H
    Vec RQ_primal;            // shape value for the primal Q perturbation
    std::vector<Vec> RQ_dual;
  } cache;
};

/// Builds the initial state: y_{-1} is the product-space resolvent of the
/// x_{-1} seed, and the reflection cache is filled by one evaluation of the
/// coupling components at y_{-1}.
SolverState init_state(const OperatorBundle& bundle,
                       const PerturbationSchedule& schedule, double gamma,
                       const BlockVector& x_minus1, const BlockVector& x0);

/// One backward-reflected-forward step; returns the advanced state and the
/// diagnostics row for index state.n.
struct StepOutcome {
  SolverState state;
  IterateRecord record;
};
StepOutcome brf_step(const OperatorBundle& bundle,
                     const PerturbationSchedule& schedule,
                     const StepPolicy& policy, const SolverState& state);

/// Residual certificates recomputed from scratch for a state that has just
/// completed a step (state.x = x_{n+1} with state.n = n+1). Throws on
/// non-finite states.
Vec primal_residual(const OperatorBundle& bundle,
                    const PerturbationSchedule& schedule, double gamma,
                    const SolverState& state);
std::vector<Vec> dual_residuals(const OperatorBundle& bundle,
                                const PerturbationSchedule& schedule,
                                double gamma, const SolverState& state);

/// Predicted limit of the raw iterates: (Id - gamma S - gamma Bold) applied
/// to a zero xbar of the product inclusion, with exact operators.
BlockVector limit_point_formula(const OperatorBundle& bundle, double gamma,
                                const BlockVector& xbar);

struct StopRule {
  long max_iters = 10000;
  double tol = 1e-8;  // on max(||p_n||, max_i ||q_{i,n}||)
};

enum class RunStatus { converged, iteration_limit, diverged };
const char* to_string(RunStatus s);

struct RunResult {
  BlockVector solution;  // (y_n, w_{1,n}, ..., w_{m,n}) at termination
  std::vector<IterateRecord> history;
  RunStatus status = RunStatus::iteration_limit;
  long iterations = 0;
};

struct Seeds {
  BlockVector x_minus1;
  BlockVector x0;
  static Seeds zeros(const SpaceShape& shape);
};

/// Runs the iteration until the residual certificates drop below stop.tol or
/// the iteration budget is exhausted. Divergence is reported through the
/// returned status, never thrown.
RunResult run(const OperatorBundle& bundle,
              const PerturbationSchedule& schedule, const StepPolicy& policy,
              const Seeds& seeds, const StopRule& stop);

}  // namespace pdbrf
