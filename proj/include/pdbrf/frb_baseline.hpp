#pragma once

/*=============================================================================
 * Forward-reflected-backward splitting with a cocoercive term.
 *
 * Finds a zero of A + B + Q on a single space, with A maximally monotone
 * (given through its resolvent), B beta-cocoercive and Q monotone
 * mu-Lipschitz, by iterating
 *
 *   y_n     = J_{gamma A} x_n
 *   x_{n+1} = y_n - gamma (2 Q y_n - Q y_{n-1}) - gamma B y_n
 *
 * for 0 < gamma < 2 beta / (1 + 4 beta mu), seeded with
 * y_{-1} = J_{gamma A} x_{-1}. This is the single-inclusion template that the
 * primal-dual solver instantiates on the product space.
 *===========================================================================*/

#include "pdbrf/brf_solver.hpp"
#include "pdbrf/operators.hpp"

namespace pdbrf {

struct SingleInclusion {
  ResolventOperator A;
  CocoerciveOperator B;
  LipschitzMonotoneOperator Q;
  Eigen::Index dim = 0;

  void validate() const;
};

/// Upper limit 2 beta / (1 + 4 beta mu) of the admissible step sizes; callers
/// must stay strictly below it (default runs use 0.99 of it).
double frb_gamma_bound(double beta, double mu);

struct FrbState {
  Vec x;       // x_n
  Vec y_prev;  // y_{n-1}; after a step, the newest y
  Vec Q_prev;  // Q y_{n-1}
  long n = 0;
  double cum_step_sum = 0.0;
};

FrbState frb_init(const SingleInclusion& problem, double gamma,
                  const Vec& x_minus1, const Vec& x0);

struct FrbStepOutcome {
  FrbState state;
  IterateRecord record;  // dual residual list left empty
};
FrbStepOutcome frb_step(const SingleInclusion& problem, double gamma,
                        const FrbState& state);

struct FrbResult {
  Vec solution;  // y_n at termination
  std::vector<IterateRecord> history;
  RunStatus status = RunStatus::iteration_limit;
  long iterations = 0;
};

struct FrbSeeds {
  Vec x_minus1;
  Vec x0;
  static FrbSeeds zeros(Eigen::Index dim);
};

FrbResult frb_run(const SingleInclusion& problem, double gamma,
                  const FrbSeeds& seeds, const StopRule& stop);

/// The product-space triple of a bundle flattened to a single inclusion, for
/// running the baseline on primal-dual problems. Requires norm bounds.
SingleInclusion flatten_bundle(const OperatorBundle& bundle);

}  // namespace pdbrf
