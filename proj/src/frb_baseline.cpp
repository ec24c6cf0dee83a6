#include "pdbrf/frb_baseline.hpp"

#include <limits>
#include <sstream>

namespace pdbrf {

namespace {
constexpr double kDivergenceNormCap = 1e12;
}

void SingleInclusion::validate() const {
  if (dim < 1) throw ShapeError("SingleInclusion: dim must be >= 1");
  if (A.dim != dim || B.dim != dim || Q.dim != dim) {
    throw ShapeError("SingleInclusion: operator dimensions do not match");
  }
  if (!(B.beta > 0.0)) {
    throw std::invalid_argument("SingleInclusion: beta must be > 0");
  }
  if (Q.mu < 0.0) {
    throw std::invalid_argument("SingleInclusion: mu must be >= 0");
  }
}

double frb_gamma_bound(double beta, double mu) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("frb_gamma_bound: beta must be > 0");
  }
  if (mu < 0.0) {
    throw std::invalid_argument("frb_gamma_bound: mu must be >= 0");
  }
  return 2.0 * beta / (1.0 + 4.0 * beta * mu);
}

FrbSeeds FrbSeeds::zeros(Eigen::Index dim) {
  return {Vec::Zero(dim), Vec::Zero(dim)};
}

FrbState frb_init(const SingleInclusion& problem, double gamma,
                  const Vec& x_minus1, const Vec& x0) {
  problem.validate();
  if (x_minus1.size() != problem.dim || x0.size() != problem.dim) {
    throw ShapeError("frb_init: seed dimensions do not match the problem");
  }
  Vec y_minus1 = problem.A(gamma, x_minus1);
  Vec q = problem.Q.apply(y_minus1);
  return FrbState{.x = x0,
                  .y_prev = std::move(y_minus1),
                  .Q_prev = std::move(q),
                  .n = 0,
                  .cum_step_sum = 0.0};
}

FrbStepOutcome frb_step(const SingleInclusion& problem, double gamma,
                        const FrbState& state) {
  const long n = state.n;
  if (!state.x.allFinite() || state.x.norm() > kDivergenceNormCap) {
    IterateRecord rec;
    rec.n = n;
    rec.step_norm_sq = rec.primal_residual_norm = rec.cumulative_step_sum =
        std::numeric_limits<double>::quiet_NaN();
    throw DivergenceError("frb_step: iterate left the finite range", rec);
  }
  const Vec y = problem.A(gamma, state.x);
  const Vec qy = problem.Q.apply(y);
  const Vec by = problem.B.apply(y);

  IterateRecord rec;
  rec.n = n;
  rec.step_norm_sq = (y - state.y_prev).squaredNorm();
  rec.primal_residual_norm = ((state.x - y) / gamma + qy + by).norm();
  rec.cumulative_step_sum = state.cum_step_sum + rec.step_norm_sq;

  Vec x_next = y - gamma * (2.0 * qy - state.Q_prev) - gamma * by;
  if (!x_next.allFinite()) {
    throw DivergenceError("frb_step: update produced a non-finite iterate",
                          rec);
  }
  FrbState next{.x = std::move(x_next),
                .y_prev = y,
                .Q_prev = qy,
                .n = n + 1,
                .cum_step_sum = rec.cumulative_step_sum};
  return {std::move(next), std::move(rec)};
}

FrbResult frb_run(const SingleInclusion& problem, double gamma,
                  const FrbSeeds& seeds, const StopRule& stop) {
  problem.validate();
  const double bound = frb_gamma_bound(problem.B.beta, problem.Q.mu);
  if (!(gamma > 0.0) || !(gamma < bound)) {
    std::ostringstream msg;
    msg << "frb_run: gamma must satisfy 0 < gamma < 2*beta/(1+4*beta*mu) = "
        << bound << ", got " << gamma;
    throw std::invalid_argument(msg.str());
  }
  if (stop.max_iters == 0) {
    return {problem.A(gamma, seeds.x0), {}, RunStatus::iteration_limit, 0};
  }
  FrbState state = frb_init(problem, gamma, seeds.x_minus1, seeds.x0);
  std::vector<IterateRecord> history;
  for (long k = 0; k < stop.max_iters; ++k) {
    try {
      FrbStepOutcome out = frb_step(problem, gamma, state);
      state = std::move(out.state);
      history.push_back(std::move(out.record));
    } catch (const DivergenceError& err) {
      history.push_back(err.record);
      return {state.y_prev, std::move(history), RunStatus::diverged, k};
    }
    if (history.back().primal_residual_norm <= stop.tol) {
      return {state.y_prev, std::move(history), RunStatus::converged, k + 1};
    }
  }
  return {state.y_prev, std::move(history), RunStatus::iteration_limit,
          stop.max_iters};
}

SingleInclusion flatten_bundle(const OperatorBundle& bundle) {
  bundle.validate();
  const SpaceShape shape = bundle.shape();
  auto b = std::make_shared<const OperatorBundle>(bundle);
  SingleInclusion p;
  p.dim = shape.total_dim();
  p.A.dim = p.dim;
  p.A.resolvent = [b, shape](double gamma, const Vec& v) -> Vec {
    return flatten(resolvent_Abold(*b, gamma, unflatten(shape, v)));
  };
  auto Bb = assemble_B(bundle);
  p.B.dim = p.dim;
  p.B.beta = beta_prime(bundle);
  p.B.apply = [Bb, shape](const Vec& v) -> Vec {
    return flatten(Bb(unflatten(shape, v)));
  };
  auto Sb = assemble_S(bundle);
  p.Q.dim = p.dim;
  p.Q.mu = lipschitz_mu(bundle);
  p.Q.apply = [Sb, shape](const Vec& v) -> Vec {
    return flatten(Sb(unflatten(shape, v)));
  };
  return p;
}

}  // namespace pdbrf
