#include "pdbrf/brf_solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace pdbrf {

namespace {
constexpr double kDivergenceNormCap = 1e12;
constexpr double kPolicyCheckSlop = 1e-12;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

StepPolicy choose_gamma(double beta_prime, double mu, double kappa_sup,
                        double epsilon) {
  if (!(beta_prime > 0.0)) {
    throw std::invalid_argument("choose_gamma: beta_prime must be > 0");
  }
  if (mu < 0.0 || kappa_sup < 0.0) {
    throw std::invalid_argument(
        "choose_gamma: mu and kappa_sup must be >= 0");
  }
  if (!(epsilon > 0.0) || epsilon >= 1.0) {
    throw std::invalid_argument(
        "choose_gamma: epsilon must satisfy 0 < epsilon < 1 (no feasible "
        "gamma otherwise)");
  }
  StepPolicy p;
  p.beta = 0.99 * beta_prime;
  p.mu = mu;
  p.kappa_sup = kappa_sup;
  p.epsilon = epsilon;
  p.gamma =
      (1.0 - epsilon) / (1.0 / (2.0 * p.beta) + 2.0 * mu + 7.0 * kappa_sup);
  return p;
}

void validate_policy(const StepPolicy& policy) {
  if (!(policy.beta > 0.0)) {
    throw std::invalid_argument("StepPolicy: beta must be > 0");
  }
  if (!(policy.gamma > 0.0)) {
    throw std::invalid_argument("StepPolicy: gamma must be > 0");
  }
  if (!(policy.epsilon > 0.0)) {
    throw std::invalid_argument("StepPolicy: epsilon must be > 0");
  }
  const double slack = policy.slack();
  if (!(slack >= policy.epsilon - kPolicyCheckSlop)) {
    std::ostringstream msg;
    msg << "step-size bound violated: require "
        << "1 - gamma/(2*beta) - 2*gamma*mu - 7*gamma*kappa_sup >= epsilon, "
        << "but 1 - " << policy.gamma << "/(2*" << policy.beta << ") - 2*"
        << policy.gamma << "*" << policy.mu << " - 7*" << policy.gamma << "*"
        << policy.kappa_sup << " = " << slack << " < epsilon = "
        << policy.epsilon;
    throw std::invalid_argument(msg.str());
  }
}

double IterateRecord::max_residual_norm() const {
  double r = primal_residual_norm;
  for (double q : dual_residual_norms) r = std::max(r, q);
  return r;
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged:
      return "converged";
    case RunStatus::iteration_limit:
      return "iteration_limit";
    case RunStatus::diverged:
      return "diverged";
  }
  return "unknown";
}

Seeds Seeds::zeros(const SpaceShape& shape) {
  return {BlockVector::zero(shape), BlockVector::zero(shape)};
}

namespace {

// One evaluation of every coupling-operator component (and, for perturbed
// runs, of the primal/dual Q perturbation shapes) at the point y.
SolverState::Cache eval_coupling(const OperatorBundle& bundle,
                                 const PerturbationSchedule& schedule,
                                 const BlockVector& y) {
  SolverState::Cache c;
  const Eigen::Index m = bundle.num_blocks();
  c.Q_primal = bundle.Q.apply(y.primal());
  c.Lstar.reserve(static_cast<std::size_t>(m));
  c.Q_dual.reserve(static_cast<std::size_t>(m));
  c.L_y.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& blk = bundle.blocks[static_cast<std::size_t>(i)];
    c.Lstar.push_back(blk.L.adjoint(y.dual(i)));
    c.Q_dual.push_back(blk.Q.apply(y.dual(i)));
    c.L_y.push_back(blk.L.apply(y.primal()));
  }
  if (!schedule.is_exact()) {
    c.RQ_primal = schedule.block(0).eval_shape_q(y.primal());
    c.RQ_dual.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      c.RQ_dual.push_back(schedule.block(i + 1).eval_shape_q(y.dual(i)));
    }
  }
  return c;
}

IterateRecord nan_record(long n, Eigen::Index m) {
  IterateRecord rec;
  rec.n = n;
  rec.step_norm_sq = kNaN;
  rec.primal_residual_norm = kNaN;
  rec.dual_residual_norms.assign(static_cast<std::size_t>(m), kNaN);
  rec.cumulative_step_sum = kNaN;
  return rec;
}

}  // namespace

SolverState init_state(const OperatorBundle& bundle,
                       const PerturbationSchedule& schedule, double gamma,
                       const BlockVector& x_minus1, const BlockVector& x0) {
  bundle.validate();
  if (schedule.shape() != bundle.shape()) {
    throw ShapeError("init_state: schedule shape does not match bundle");
  }
  detail::require_same_shape(x_minus1, x0, "init_state");
  BlockVector y_minus1 = resolvent_Abold(bundle, gamma, x_minus1);
  SolverState::Cache cache = eval_coupling(bundle, schedule, y_minus1);
  return SolverState{.x = x0,
                     .y_prev = std::move(y_minus1),
                     .n = 0,
                     .cum_step_sum = 0.0,
                     .cache = std::move(cache)};
}

StepOutcome brf_step(const OperatorBundle& bundle,
                     const PerturbationSchedule& schedule,
                     const StepPolicy& policy, const SolverState& state) {
  const double gamma = policy.gamma;
  const Eigen::Index m = bundle.num_blocks();
  const long n = state.n;
  const bool exact = schedule.is_exact();

  if (!state.x.all_finite() || block_norm(state.x) > kDivergenceNormCap) {
    throw DivergenceError("brf_step: iterate left the finite range",
                          nan_record(n, m));
  }

  const BlockVector y = resolvent_Abold(bundle, gamma, state.x);
  if (!y.all_finite()) {
    throw DivergenceError("brf_step: resolvent output is not finite",
                          nan_record(n, m));
  }

  // One call per iteration of each single-valued base operator.
  SolverState::Cache at_y = eval_coupling(bundle, schedule, y);
  const Vec b0 = bundle.B.apply(y.primal());
  std::vector<Vec> bi;
  bi.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    bi.push_back(bundle.blocks[static_cast<std::size_t>(i)].B.apply(y.dual(i)));
  }
  Vec rb0;
  std::vector<Vec> rbi;
  if (!exact) {
    rb0 = schedule.block(0).eval_shape_b(y.primal());
    rbi.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      rbi.push_back(schedule.block(i + 1).eval_shape_b(y.dual(i)));
    }
  }

  // Diagnostics row n. The residual formulas pair the step-(n-1) operator
  // family with the step-n point; the first row reuses the index-0 family.
  const long n_res = n > 0 ? n - 1 : 0;
  IterateRecord rec;
  rec.n = n;
  {
    const BlockVector dy = block_combine(1.0, y, -1.0, state.y_prev);
    rec.step_norm_sq = block_dot(dy, dy);
  }
  {
    Vec p = (state.x.primal() - y.primal()) / gamma + b0 + at_y.Q_primal;
    if (!exact) {
      p += schedule.kappa(0, n_res) * (rb0 + at_y.RQ_primal);
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      p += at_y.Lstar[static_cast<std::size_t>(i)];
    }
    rec.primal_residual_norm = p.norm();
  }
  rec.dual_residual_norms.resize(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    Vec q = (state.x.dual(i) - y.dual(i)) / gamma + bi[k] + at_y.Q_dual[k] -
            at_y.L_y[k];
    if (!exact) {
      q += schedule.kappa(i + 1, n_res) * (rbi[k] + at_y.RQ_dual[k]);
    }
    rec.dual_residual_norms[k] = q.norm();
  }
  rec.cumulative_step_sum = state.cum_step_sum + rec.step_norm_sq;

  // S_n y_n, S_n y_{n-1} (from the cache) and Bold_n y_n.
  const double k0n = exact ? 0.0 : schedule.kappa(0, n);
  Vec s_now_primal = at_y.Q_primal;
  Vec s_prev_primal = state.cache.Q_primal;
  if (!exact) {
    s_now_primal += k0n * at_y.RQ_primal;
    s_prev_primal += k0n * state.cache.RQ_primal;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    s_now_primal += at_y.Lstar[k];
    s_prev_primal += state.cache.Lstar[k];
  }
  Vec b_now_primal = b0;
  if (!exact) b_now_primal += k0n * rb0;

  Vec x_next_primal = y.primal() - 2.0 * gamma * s_now_primal +
                      gamma * s_prev_primal - gamma * b_now_primal;
  std::vector<Vec> x_next_duals;
  x_next_duals.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double kin = exact ? 0.0 : schedule.kappa(i + 1, n);
    Vec s_now = at_y.Q_dual[k] - at_y.L_y[k];
    Vec s_prev = state.cache.Q_dual[k] - state.cache.L_y[k];
    Vec b_now = bi[k];
    if (!exact) {
      s_now += kin * at_y.RQ_dual[k];
      s_prev += kin * state.cache.RQ_dual[k];
      b_now += kin * rbi[k];
    }
    x_next_duals.push_back(y.dual(i) - 2.0 * gamma * s_now + gamma * s_prev -
                           gamma * b_now);
  }
  BlockVector x_next(std::move(x_next_primal), std::move(x_next_duals));
  if (!x_next.all_finite()) {
    throw DivergenceError("brf_step: update produced a non-finite iterate",
                          rec);
  }

  SolverState next{.x = std::move(x_next),
                   .y_prev = y,
                   .n = n + 1,
                   .cum_step_sum = rec.cumulative_step_sum,
                   .cache = std::move(at_y)};
  return {std::move(next), std::move(rec)};
}

namespace {

// Shared core of the standalone residual certificates.
struct ResidualParts {
  BlockVector y;
  Vec p;
  std::vector<Vec> q;
};

ResidualParts compute_residuals(const OperatorBundle& bundle,
                                const PerturbationSchedule& schedule,
                                double gamma, const SolverState& state) {
  if (!state.x.all_finite()) {
    throw DivergenceError("residual: state is not finite",
                          nan_record(state.n, bundle.num_blocks()));
  }
  const long n_res = state.n > 0 ? state.n - 1 : 0;
  const OperatorBundle pb = perturb(bundle, schedule, n_res);
  const BlockVector y = resolvent_Abold(bundle, gamma, state.x);
  Vec p = (state.x.primal() - y.primal()) / gamma + pb.B.apply(y.primal()) +
          pb.Q.apply(y.primal());
  for (Eigen::Index i = 0; i < bundle.num_blocks(); ++i) {
    p += bundle.blocks[static_cast<std::size_t>(i)].L.adjoint(y.dual(i));
  }
  std::vector<Vec> q;
  q.reserve(static_cast<std::size_t>(bundle.num_blocks()));
  for (Eigen::Index i = 0; i < bundle.num_blocks(); ++i) {
    const auto& blk = pb.blocks[static_cast<std::size_t>(i)];
    q.push_back((state.x.dual(i) - y.dual(i)) / gamma +
                blk.B.apply(y.dual(i)) + blk.Q.apply(y.dual(i)) -
                bundle.blocks[static_cast<std::size_t>(i)].L.apply(
                    y.primal()));
  }
  return {y, std::move(p), std::move(q)};
}

}  // namespace

Vec primal_residual(const OperatorBundle& bundle,
                    const PerturbationSchedule& schedule, double gamma,
                    const SolverState& state) {
  return compute_residuals(bundle, schedule, gamma, state).p;
}

std::vector<Vec> dual_residuals(const OperatorBundle& bundle,
                                const PerturbationSchedule& schedule,
                                double gamma, const SolverState& state) {
  return compute_residuals(bundle, schedule, gamma, state).q;
}

BlockVector limit_point_formula(const OperatorBundle& bundle, double gamma,
                                const BlockVector& xbar) {
  if (xbar.shape() != bundle.shape()) {
    throw ShapeError("limit_point_formula: shape mismatch");
  }
  Vec primal = xbar.primal() - gamma * bundle.Q.apply(xbar.primal()) -
               gamma * bundle.B.apply(xbar.primal());
  for (Eigen::Index i = 0; i < bundle.num_blocks(); ++i) {
    primal -=
        gamma * bundle.blocks[static_cast<std::size_t>(i)].L.adjoint(
                    xbar.dual(i));
  }
  std::vector<Vec> duals;
  duals.reserve(static_cast<std::size_t>(bundle.num_blocks()));
  for (Eigen::Index i = 0; i < bundle.num_blocks(); ++i) {
    const auto& blk = bundle.blocks[static_cast<std::size_t>(i)];
    duals.push_back(xbar.dual(i) -
                    gamma * (blk.Q.apply(xbar.dual(i)) -
                             blk.L.apply(xbar.primal())) -
                    gamma * blk.B.apply(xbar.dual(i)));
  }
  return BlockVector(std::move(primal), std::move(duals));
}

RunResult run(const OperatorBundle& bundle,
              const PerturbationSchedule& schedule, const StepPolicy& policy,
              const Seeds& seeds, const StopRule& stop) {
  validate_policy(policy);
  if (stop.max_iters < 0) {
    throw std::invalid_argument("run: max_iters must be >= 0");
  }
  if (stop.max_iters == 0) {
    return {resolvent_Abold(bundle, policy.gamma, seeds.x0),
            {},
            RunStatus::iteration_limit,
            0};
  }
  SolverState state =
      init_state(bundle, schedule, policy.gamma, seeds.x_minus1, seeds.x0);
  std::vector<IterateRecord> history;
  history.reserve(static_cast<std::size_t>(std::min(stop.max_iters, 100000L)));
  for (long k = 0; k < stop.max_iters; ++k) {
    try {
      StepOutcome out = brf_step(bundle, schedule, policy, state);
      state = std::move(out.state);
      history.push_back(std::move(out.record));
    } catch (const DivergenceError& err) {
      history.push_back(err.record);
      return {state.y_prev, std::move(history), RunStatus::diverged, k};
    }
    if (history.back().max_residual_norm() <= stop.tol) {
      return {state.y_prev, std::move(history), RunStatus::converged, k + 1};
    }
  }
  return {state.y_prev, std::move(history), RunStatus::iteration_limit,
          stop.max_iters};
}

}  // namespace pdbrf
