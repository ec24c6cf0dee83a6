#include <doctest.h>

#include <random>

#include "pdbrf/frb_baseline.hpp"
#include "support/test_util.hpp"

using namespace pdbrf;
using pdbrf::testing::random_vec;
using pdbrf::testing::vec;

TEST_CASE("step-size bound") {
  CHECK(frb_gamma_bound(1.0, 1.0) == doctest::Approx(0.4));
  CHECK(frb_gamma_bound(3.0, 0.0) == doctest::Approx(6.0));
  CHECK(frb_gamma_bound(1e9, 1.0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_THROWS_AS(frb_gamma_bound(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("projection plus shifted identity finds the clamped minimizer") {
  SingleInclusion p{prox_factory(FunctionSpec::box(vec({0.0}), vec({1.0}))),
                    gradient_sq_dist(vec({2.0}), 1.0), zero_lipschitz(1), 1};
  const double gamma = 0.99 * frb_gamma_bound(p.B.beta, p.Q.mu);
  const FrbResult res =
      frb_run(p, gamma, FrbSeeds::zeros(1), StopRule{10000, 1e-12});
  CHECK(res.status == RunStatus::converged);
  CHECK(res.solution[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("zero of the identity") {
  SingleInclusion p{prox_factory(FunctionSpec::zero(1)),
                    scaled_identity_cocoercive(1, 1.0), zero_lipschitz(1), 1};
  const FrbResult res =
      frb_run(p, 1.0, {vec({3.0}), vec({-2.0})}, StopRule{10000, 1e-12});
  CHECK(res.status == RunStatus::converged);
  CHECK(std::abs(res.solution[0]) <= 1e-11);
}

TEST_CASE("rotation coupling with a small cocoercive part") {
  // (B + Q) x = 0 has the unique solution 0 for B = 0.2 Id and Q a rotation
  SingleInclusion p{prox_factory(FunctionSpec::zero(2)),
                    scaled_identity_cocoercive(2, 0.2), rotation2d(M_PI / 2.0),
                    2};
  const double gamma = 0.99 * frb_gamma_bound(p.B.beta, p.Q.mu);
  const FrbResult res = frb_run(p, gamma, {vec({1.0, -2.0}), vec({0.5, 0.5})},
                                StopRule{100000, 1e-11});
  CHECK(res.status == RunStatus::converged);
  CHECK(res.solution.norm() <= 1e-9);
}

TEST_CASE("gamma outside the admissible range is rejected") {
  SingleInclusion p{prox_factory(FunctionSpec::zero(1)),
                    scaled_identity_cocoercive(1, 1.0), zero_lipschitz(1), 1};
  CHECK_THROWS_AS(frb_run(p, 2.0, FrbSeeds::zeros(1), StopRule{10, 1e-9}),
                  std::invalid_argument);
  CHECK_THROWS_AS(frb_run(p, 0.0, FrbSeeds::zeros(1), StopRule{10, 1e-9}),
                  std::invalid_argument);
}

TEST_CASE("seeding at the shifted zero keeps the iteration stationary") {
  // zer(A+B+Q) = {1} for the clamped instance above; the raw iterates sit at
  // xbar - gamma (Q + B) xbar
  SingleInclusion p{prox_factory(FunctionSpec::box(vec({0.0}), vec({1.0}))),
                    gradient_sq_dist(vec({2.0}), 1.0), zero_lipschitz(1), 1};
  const double gamma = 0.3;
  const double xbar = 1.0;
  const double seed = xbar - gamma * (0.0 + (xbar - 2.0));
  FrbState st = frb_init(p, gamma, vec({seed}), vec({seed}));
  for (int k = 0; k < 10; ++k) {
    auto out = frb_step(p, gamma, st);
    st = std::move(out.state);
    CHECK(st.x[0] == doctest::Approx(seed).epsilon(1e-14));
    CHECK(st.y_prev[0] == doctest::Approx(xbar).epsilon(1e-14));
    CHECK(out.record.primal_residual_norm <= 1e-13);
  }
}

TEST_CASE("step norms are summable") {
  SingleInclusion p{prox_factory(FunctionSpec::zero(2)),
                    scaled_identity_cocoercive(2, 0.5), rotation2d(M_PI / 4.0),
                    2};
  const double gamma = 0.99 * frb_gamma_bound(p.B.beta, p.Q.mu);
  const FrbResult res = frb_run(p, gamma, {vec({2.0, 1.0}), vec({2.0, 1.0})},
                                StopRule{50000, 1e-12});
  REQUIRE(res.status == RunStatus::converged);
  const std::size_t n = res.history.size();
  const double tail = res.history.back().cumulative_step_sum -
                      res.history[n - std::max<std::size_t>(1, n / 10)]
                          .cumulative_step_sum;
  CHECK(tail < 1e-10);
}

TEST_CASE("divergence guard") {
  SingleInclusion p{prox_factory(FunctionSpec::zero(1)),
                    scaled_identity_cocoercive(1, 1.0), zero_lipschitz(1), 1};
  p.B.beta = 1000.0;  // lie about cocoercivity to force a huge step
  const double gamma = 0.99 * frb_gamma_bound(p.B.beta, p.Q.mu);
  const FrbResult res =
      frb_run(p, gamma, {vec({1.0}), vec({1.0})}, StopRule{100000, 0.0});
  CHECK(res.status == RunStatus::diverged);
}
