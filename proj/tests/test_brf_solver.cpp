#include <doctest.h>

#include <random>

#include "pdbrf/brf_solver.hpp"
#include "pdbrf/frb_baseline.hpp"
#include "pdbrf/oracles.hpp"
#include "support/blockwise_reference.hpp"
#include "support/counting.hpp"
#include "support/instances.hpp"
#include "support/test_util.hpp"

using namespace pdbrf;
using namespace pdbrf::testing;

namespace {

StepPolicy exact_policy(const OperatorBundle& bundle, double epsilon = 0.01) {
  return choose_gamma(beta_prime(bundle), lipschitz_mu(bundle), 0.0, epsilon);
}

}  // namespace

TEST_CASE("choose_gamma solves the step bound with equality") {
  SUBCASE("worked example") {
    const StepPolicy p = choose_gamma(1.0 / 0.99, 1.0, 0.0, 0.01);
    CHECK(p.beta == doctest::Approx(1.0));
    CHECK(p.gamma == doctest::Approx(0.99 / 2.5));
    CHECK(p.slack() == doctest::Approx(p.epsilon).epsilon(1e-12));
  }
  SUBCASE("with an inexactness budget") {
    const StepPolicy p = choose_gamma(1.0 / 0.99, 0.0, 1.0, 0.01);
    CHECK(p.gamma == doctest::Approx(0.99 / 7.5));
  }
  SUBCASE("pure cocoercive limit") {
    const double beta_prime = 2.0;
    const StepPolicy p = choose_gamma(beta_prime, 0.0, 0.0, 1e-9);
    CHECK(p.gamma == doctest::Approx(2.0 * 0.99 * beta_prime).epsilon(1e-6));
  }
  SUBCASE("infeasible slack") {
    CHECK_THROWS_AS(choose_gamma(1.0, 0.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(choose_gamma(1.0, 0.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(choose_gamma(0.0, 1.0, 0.0, 0.1), std::invalid_argument);
  }
}

TEST_CASE("validate_policy names the violated inequality") {
  StepPolicy p = choose_gamma(1.0, 1.0, 0.0, 0.01);
  p.gamma = 10.0;
  try {
    validate_policy(p);
    FAIL("expected a rejection");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("1 - gamma/(2*beta) - 2*gamma*mu - 7*gamma*kappa_sup >= "
                   "epsilon") != std::string::npos);
  }
}

TEST_CASE("stationary seed is a fixed point with zero residuals") {
  for (const Instance& inst : {lasso_1d(), box_qp_2d()}) {
    CAPTURE(inst.name);
    const StepPolicy policy = exact_policy(inst.bundle);
    const auto sched = PerturbationSchedule::exact(inst.bundle.shape());
    const BlockVector x_stat =
        limit_point_formula(inst.bundle, policy.gamma, inst.reference);
    SolverState st =
        init_state(inst.bundle, sched, policy.gamma, x_stat, x_stat);
    for (int k = 0; k < 5; ++k) {
      auto out = brf_step(inst.bundle, sched, policy, st);
      st = std::move(out.state);
      CHECK(block_norm(block_combine(1, st.x, -1, x_stat)) <= 1e-13);
      CHECK(out.record.max_residual_norm() <= 1e-12);
      CHECK(out.record.step_norm_sq <= 1e-26);
    }
  }
}

TEST_CASE("product form matches the blockwise transcription to 1e-14") {
  for (const Instance& inst : acceptance_suite()) {
    CAPTURE(inst.name);
    const StepPolicy policy = exact_policy(inst.bundle);
    const auto sched = PerturbationSchedule::exact(inst.bundle.shape());
    std::mt19937_64 rng(101);
    const BlockVector xm1 = random_block(rng, inst.bundle.shape());
    const BlockVector x0 = random_block(rng, inst.bundle.shape());

    SolverState fast = init_state(inst.bundle, sched, policy.gamma, xm1, x0);
    BlockwiseState slow = blockwise_init(inst.bundle, policy.gamma, xm1, x0);
    for (int k = 0; k < 100; ++k) {
      auto f = brf_step(inst.bundle, sched, policy, fast);
      auto s = blockwise_step(inst.bundle, sched, policy.gamma, slow);
      fast = std::move(f.state);
      slow = std::move(s.state);
      CHECK(block_norm(block_combine(1, fast.x, -1, slow.x)) <= 1e-14);
      CHECK(block_norm(block_combine(1, fast.y_prev, -1, s.y)) <= 1e-14);
    }
  }
}

TEST_CASE("product form matches the blockwise transcription under perturbation") {
  const Instance inst = mixed_blocks_3();
  const auto sched =
      PerturbationSchedule::geometric_equal(inst.bundle.shape(), 0.1, 0.5);
  const StepPolicy policy = choose_gamma(
      beta_prime(inst.bundle), lipschitz_mu(inst.bundle), kappa_sup(sched),
      0.01);
  std::mt19937_64 rng(103);
  const BlockVector xm1 = random_block(rng, inst.bundle.shape());
  const BlockVector x0 = random_block(rng, inst.bundle.shape());
  SolverState fast = init_state(inst.bundle, sched, policy.gamma, xm1, x0);
  BlockwiseState slow = blockwise_init(inst.bundle, policy.gamma, xm1, x0);
  for (int k = 0; k < 100; ++k) {
    auto f = brf_step(inst.bundle, sched, policy, fast);
    auto s = blockwise_step(inst.bundle, sched, policy.gamma, slow);
    fast = std::move(f.state);
    slow = std::move(s.state);
    CHECK(block_norm(block_combine(1, fast.x, -1, slow.x)) <= 1e-14);
  }
}

TEST_CASE("solver matches the reference solutions") {
  for (const Instance& inst : acceptance_suite()) {
    CAPTURE(inst.name);
    const StepPolicy policy = exact_policy(inst.bundle);
    const auto sched = PerturbationSchedule::exact(inst.bundle.shape());
    const RunResult res = run(inst.bundle, sched, policy,
                              Seeds::zeros(inst.bundle.shape()),
                              StopRule{100000, 1e-9});
    CHECK(res.status == RunStatus::converged);
    CHECK(block_norm(block_combine(1, res.solution, -1, inst.reference)) <=
          1e-5);
    CHECK(kkt_residual(inst.bundle, res.solution) <= 1e-8);
  }
}

TEST_CASE("zero iteration budget returns immediately") {
  const Instance inst = lasso_1d();
  const StepPolicy policy = exact_policy(inst.bundle);
  const auto sched = PerturbationSchedule::exact(inst.bundle.shape());
  const RunResult res = run(inst.bundle, sched, policy,
                            Seeds::zeros(inst.bundle.shape()), StopRule{0, 1e-9});
  CHECK(res.status == RunStatus::iteration_limit);
  CHECK(res.history.empty());
  CHECK(res.iterations == 0);
}

TEST_CASE("infeasible problem: iteration limit with a residual floor") {
  const OperatorBundle bundle = infeasible_1d();
  const StepPolicy policy = exact_policy(bundle);
  const auto sched = PerturbationSchedule::exact(bundle.shape());
  const RunResult res = run(bundle, sched, policy,
                            Seeds::zeros(bundle.shape()), StopRule{2000, 1e-9});
  CHECK(res.status == RunStatus::iteration_limit);
  const double mid =
      res.history[res.history.size() / 2].primal_residual_norm;
  const double last = res.history.back().primal_residual_norm;
  CHECK(last > 0.5);         // bounded away from zero
  CHECK(last >= 0.9 * mid);  // no decaying trend
}

TEST_CASE("misdeclared cocoercivity blows up and is reported as divergence") {
  // A weakly coupled instance where the cocoercive term dominates the step
  // bound, so lying about beta inflates gamma far past the stable range.
  OperatorBundle b;
  b.A = prox_factory(FunctionSpec::l1(1, 1.0));
  b.B = gradient_sq_dist(mk_vec({3.0}), 1.0);
  b.B.beta = 100.0;  // actually 1-cocoercive
  b.Q = zero_lipschitz(1);
  b.z = Vec::Zero(1);
  b.blocks.push_back({prox_factory(FunctionSpec::zero(1)),
                      zero_cocoercive(1, 100.0), zero_lipschitz(1),
                      LinearMap::scaled_identity(1, 0.01), Vec::Zero(1)});
  ensure_norm_bounds(b);
  const StepPolicy policy = exact_policy(b);
  CHECK(policy.gamma > 2.0);  // far beyond the true cocoercive range
  const auto sched = PerturbationSchedule::exact(b.shape());
  const RunResult res = run(b, sched, policy, Seeds::zeros(b.shape()),
                            StopRule{100000, 1e-12});
  CHECK(res.status == RunStatus::diverged);
  CHECK_FALSE(res.history.empty());
}

TEST_CASE("standalone residuals match the in-loop records") {
  const Instance inst = skew_affine_2d();
  const StepPolicy policy = exact_policy(inst.bundle);
  const auto exact = PerturbationSchedule::exact(inst.bundle.shape());
  const auto geom =
      PerturbationSchedule::geometric_equal(inst.bundle.shape(), 0.2, 0.7);
  for (const auto& sched : {exact, geom}) {
    CAPTURE(sched.is_exact());
    std::mt19937_64 rng(107);
    SolverState st = init_state(inst.bundle, sched, policy.gamma,
                                random_block(rng, inst.bundle.shape()),
                                random_block(rng, inst.bundle.shape()));
    for (int k = 0; k < 60; ++k) {
      auto out = brf_step(inst.bundle, sched, policy, st);
      st = std::move(out.state);
      if (k == 50) {
        // recompute the certificates for the state that just completed a step
        const Vec p = primal_residual(inst.bundle, sched, policy.gamma, st);
        const auto q = dual_residuals(inst.bundle, sched, policy.gamma, st);
        // the record at index k pairs x_k with y_k; the standalone pair is
        // (x_{k+1}, y_{k+1}), so advance once more and compare against it
        auto next = brf_step(inst.bundle, sched, policy, st);
        CHECK(next.record.primal_residual_norm ==
              doctest::Approx(p.norm()).epsilon(1e-12));
        CHECK(next.record.dual_residual_norms[0] ==
              doctest::Approx(q[0].norm()).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("residuals on a diverged state raise instead of returning NaN") {
  const Instance inst = lasso_1d();
  const auto sched = PerturbationSchedule::exact(inst.bundle.shape());
  SolverState st = init_state(inst.bundle, sched, 0.3,
                              BlockVector::zero(inst.bundle.shape()),
                              BlockVector::zero(inst.bundle.shape()));
  st.x = BlockVector(mk_vec({std::numeric_limits<double>::quiet_NaN()}),
                     {mk_vec({0.0})});
  st.n = 3;
  CHECK_THROWS_AS(primal_residual(inst.bundle, sched, 0.3, st),
                  DivergenceError);
  CHECK_THROWS_AS(brf_step(inst.bundle, sched, exact_policy(inst.bundle), st),
                  DivergenceError);
}

TEST_CASE("residuals flip sign when the dual shift is negated") {
  auto build = [](double r_sign) {
    OperatorBundle b;
    b.A = prox_factory(FunctionSpec::zero(1));
    b.B = zero_cocoercive(1, 1.0);
    b.Q = zero_lipschitz(1);
    b.z = Vec::Zero(1);
    b.blocks.push_back({prox_factory(FunctionSpec::zero(1)),
                        scaled_identity_cocoercive(1, 1.0), zero_lipschitz(1),
                        LinearMap::identity(1), mk_vec({r_sign * 0.4})});
    ensure_norm_bounds(b);
    return b;
  };
  const OperatorBundle plus = build(1.0), minus = build(-1.0);
  const StepPolicy policy = exact_policy(plus);
  const auto sched = PerturbationSchedule::exact(plus.shape());
  SolverState sp = init_state(plus, sched, policy.gamma,
                              BlockVector::zero(plus.shape()),
                              BlockVector::zero(plus.shape()));
  SolverState sm = init_state(minus, sched, policy.gamma,
                              BlockVector::zero(minus.shape()),
                              BlockVector::zero(minus.shape()));
  for (int k = 0; k < 3; ++k) {
    sp = brf_step(plus, sched, policy, sp).state;
    sm = brf_step(minus, sched, policy, sm).state;
  }
  const auto qp = dual_residuals(plus, sched, policy.gamma, sp);
  const auto qm = dual_residuals(minus, sched, policy.gamma, sm);
  CHECK((qp[0] + qm[0]).norm() <= 1e-14);
}

TEST_CASE("limit point formula") {
  const Instance inst = skew_affine_2d();
  SUBCASE("vanishing step size returns the zero itself") {
    const BlockVector lp =
        limit_point_formula(inst.bundle, 1e-12, inst.reference);
    CHECK(block_norm(block_combine(1, lp, -1, inst.reference)) <= 1e-10);
  }
  SUBCASE("with vanishing B and Q only the coupling shift remains") {
    OperatorBundle b = inst.bundle;
    b.B = zero_cocoercive(2, 1.0);
    b.Q = zero_lipschitz(2);
    const double gamma = 0.3;
    const BlockVector lp = limit_point_formula(b, gamma, inst.reference);
    Vec expect = inst.reference.primal() -
                 gamma * b.blocks[0].L.adjoint(inst.reference.dual(0));
    CHECK((lp.primal() - expect).norm() <= 1e-14);
  }
  SUBCASE("raw iterates converge to the formula on strongly monotone runs") {
    const StepPolicy policy = exact_policy(inst.bundle);
    const auto sched = PerturbationSchedule::exact(inst.bundle.shape());
    const auto stop = StopRule{100000, 1e-12};
    SolverState st = init_state(inst.bundle, sched, policy.gamma,
                                BlockVector::zero(inst.bundle.shape()),
                                BlockVector::zero(inst.bundle.shape()));
    for (long k = 0; k < stop.max_iters; ++k) {
      auto out = brf_step(inst.bundle, sched, policy, st);
      st = std::move(out.state);
      if (out.record.max_residual_norm() <= stop.tol) break;
    }
    const BlockVector predicted =
        limit_point_formula(inst.bundle, policy.gamma, inst.reference);
    CHECK(block_norm(block_combine(1, st.x, -1, predicted)) <= 1e-6);
  }
}

TEST_CASE("one call per iteration of every single-valued map") {
  const Instance base = mixed_blocks_3();
  bool perturbed_run = false;
  SUBCASE("exact operators") { perturbed_run = false; }
  SUBCASE("perturbed operators") { perturbed_run = true; }
  auto count_run = [&](long iters) {
    CallCounters counters(base.bundle.num_blocks());
    const OperatorBundle bundle = instrument(base.bundle, counters);
    const auto sched =
        perturbed_run
            ? PerturbationSchedule::geometric_equal(bundle.shape(), 0.1, 0.5)
            : PerturbationSchedule::exact(bundle.shape());
    const StepPolicy policy =
        choose_gamma(beta_prime(bundle), lipschitz_mu(bundle),
                     kappa_sup(sched), 0.01);
    const RunResult res = run(bundle, sched, policy,
                              Seeds::zeros(bundle.shape()),
                              StopRule{iters, 0.0});
    REQUIRE(res.status == RunStatus::iteration_limit);
    return counters.snapshot();
  };
  const long n1 = 40, n2 = 75;
  const auto c1 = count_run(n1);
  const auto c2 = count_run(n2);
  REQUIRE(c1.size() == c2.size());
  // marginal cost: exactly one call per additional iteration
  for (std::size_t i = 0; i < c1.size(); ++i) {
    CHECK(c2[i] - c1[i] == n2 - n1);
  }
  // absolute: cocoercive maps once per iteration; the coupling components
  // once per iteration plus the one seed evaluation at y_{-1}
  CHECK(c1[0] == n1);      // B
  CHECK(c1[1] == n1 + 1);  // Q
  const auto m = static_cast<std::size_t>(base.bundle.num_blocks());
  for (std::size_t i = 0; i < m; ++i) {
    CHECK(c1[2 + i] == n1);              // B_i
    CHECK(c1[2 + m + i] == n1 + 1);      // Q_i
    CHECK(c1[2 + 2 * m + i] == n1 + 1);  // L_i
    CHECK(c1[2 + 3 * m + i] == n1 + 1);  // L_i*
  }
}

TEST_CASE("step norms are summable along convergent runs") {
  const Instance inst = tv_chain_10d();
  const StepPolicy policy = exact_policy(inst.bundle);
  const auto sched = PerturbationSchedule::exact(inst.bundle.shape());
  const RunResult res = run(inst.bundle, sched, policy,
                            Seeds::zeros(inst.bundle.shape()),
                            StopRule{100000, 1e-10});
  REQUIRE(res.status == RunStatus::converged);
  const std::size_t n = res.history.size();
  const std::size_t tail_at = n - std::max<std::size_t>(1, n / 10);
  const double tail = res.history.back().cumulative_step_sum -
                      res.history[tail_at].cumulative_step_sum;
  CHECK(tail >= 0.0);
  CHECK(tail < 1e-10);
}

TEST_CASE("cocoercive images are square-summable against the solution") {
  const Instance inst = lasso_1d();
  const StepPolicy policy = exact_policy(inst.bundle);
  const auto sched = PerturbationSchedule::exact(inst.bundle.shape());
  const auto Bb = assemble_B(inst.bundle);
  const BlockVector Bxbar = Bb(inst.reference);
  SolverState st = init_state(inst.bundle, sched, policy.gamma,
                              BlockVector::zero(inst.bundle.shape()),
                              BlockVector::zero(inst.bundle.shape()));
  double sum = 0.0, prev_tail = 0.0;
  const int total = 4000;
  for (int k = 0; k < total; ++k) {
    auto out = brf_step(inst.bundle, sched, policy, st);
    st = std::move(out.state);
    const BlockVector d = block_combine(1, Bb(st.y_prev), -1, Bxbar);
    sum += block_dot(d, d);
    if (k == total / 2) prev_tail = sum;
  }
  CHECK(std::isfinite(sum));
  CHECK(sum - prev_tail <= 1e-10);  // the tail contributes nothing
}

TEST_CASE("brf on the product triple coincides with the frb baseline") {
  for (const Instance& inst : {lasso_1d(), skew_affine_2d()}) {
    CAPTURE(inst.name);
    const StepPolicy policy = exact_policy(inst.bundle);
    const auto sched = PerturbationSchedule::exact(inst.bundle.shape());
    const SingleInclusion flat = flatten_bundle(inst.bundle);
    std::mt19937_64 rng(113);
    const BlockVector xm1 = random_block(rng, inst.bundle.shape());
    const BlockVector x0 = random_block(rng, inst.bundle.shape());

    SolverState st = init_state(inst.bundle, sched, policy.gamma, xm1, x0);
    FrbState fs = frb_init(flat, policy.gamma, flatten(xm1), flatten(x0));
    for (int k = 0; k < 100; ++k) {
      st = brf_step(inst.bundle, sched, policy, st).state;
      fs = frb_step(flat, policy.gamma, fs).state;
      CHECK((flatten(st.x) - fs.x).cwiseAbs().maxCoeff() <= 1e-14);
    }
  }
}
