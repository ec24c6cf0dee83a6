#include <doctest.h>

#include <random>

#include "pdbrf/operators.hpp"
#include "support/test_util.hpp"

using namespace pdbrf;
using pdbrf::testing::random_vec;
using pdbrf::testing::vec;

TEST_CASE("operator norm estimation on known maps") {
  SUBCASE("diagonal") {
    const LinearMap L = LinearMap::dense(vec({2.0, 1.0}).asDiagonal());
    const NormEstimate est = estimate_operator_norm(L, 1e-12, 10000, 0);
    CHECK(est.converged);
    CHECK(est.value == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("zero map") {
    const LinearMap L = LinearMap::dense(Mat::Zero(3, 2));
    const NormEstimate est = estimate_operator_norm(L, 1e-10, 100, 1);
    CHECK(est.converged);
    CHECK(est.value == 0.0);
  }
  SUBCASE("shear has norm equal to the golden ratio") {
    Mat M(2, 2);
    M << 1.0, 1.0, 0.0, 1.0;
    const LinearMap L = LinearMap::dense(M);
    const NormEstimate est = estimate_operator_norm(L, 1e-13, 100000, 2);
    CHECK(est.converged);
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    CHECK(est.value == doctest::Approx(phi).epsilon(1e-8));
  }
  SUBCASE("iteration budget exhaustion is flagged") {
    Mat M(2, 2);
    M << 1.0, 1.0, 0.0, 1.0;
    const NormEstimate est =
        estimate_operator_norm(LinearMap::dense(M), 1e-16, 2, 3);
    CHECK_FALSE(est.converged);
    CHECK(est.value > 0.0);
  }
}

TEST_CASE("adjoint identity for every linear map constructor") {
  std::mt19937_64 rng(41);
  std::vector<LinearMap> maps;
  Mat M(3, 4);
  for (Eigen::Index r = 0; r < 3; ++r) {
    for (Eigen::Index c = 0; c < 4; ++c) M(r, c) = std::sin(1.0 + 4.0 * static_cast<double>(r) + static_cast<double>(c));
  }
  maps.push_back(LinearMap::dense(M));
  maps.push_back(LinearMap::diagonal(vec({1.0, -2.0, 0.5, 3.0})));
  maps.push_back(LinearMap::identity(4));
  maps.push_back(LinearMap::difference(4));
  maps.push_back(
      LinearMap::compose(LinearMap::dense(M), LinearMap::diagonal(
                                                  vec({2.0, 1.0, -1.0, 0.3}))));
  for (const LinearMap& L : maps) {
    for (int k = 0; k < 1000; ++k) {
      const Vec x = random_vec(rng, L.cols);
      const Vec u = random_vec(rng, L.rows);
      const double lhs = L.apply(x).dot(u);
      const double rhs = x.dot(L.adjoint(u));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("diagonal norm bound is exact and compose multiplies bounds") {
  const LinearMap D = LinearMap::diagonal(vec({1.0, -3.0, 0.5}));
  REQUIRE(D.norm_bound.has_value());
  CHECK(*D.norm_bound == 3.0);
  const LinearMap C = LinearMap::compose(D, LinearMap::scaled_identity(3, 2.0));
  REQUIRE(C.norm_bound.has_value());
  CHECK(*C.norm_bound == doctest::Approx(6.0));
}

TEST_CASE("monotonicity check: identity is 1-cocoercive") {
  std::mt19937_64 rng(43);
  const CocoerciveOperator B = scaled_identity_cocoercive(3, 1.0);
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int k = 0; k < 200; ++k) {
    pairs.emplace_back(random_vec(rng, 3), random_vec(rng, 3));
  }
  const MonotonicityReport rep = sample_monotonicity_check(B, pairs);
  CHECK(rep.worst_monotone_slack >= 0.0);
  CHECK(rep.worst_cocoercive_slack >= -1e-12);
}

TEST_CASE("monotonicity check: quarter-turn rotation is a monotone isometry") {
  std::mt19937_64 rng(47);
  const LipschitzMonotoneOperator Q = rotation2d(M_PI / 2.0, 1.0);
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int k = 0; k < 200; ++k) {
    pairs.emplace_back(random_vec(rng, 2), random_vec(rng, 2));
  }
  const MonotonicityReport rep = sample_monotonicity_check(Q, pairs);
  CHECK(rep.worst_monotone_slack >= -1e-12);
  CHECK(rep.worst_monotone_slack <= 1e-12);  // pure skew: zero inner product
  CHECK(rep.worst_lipschitz_slack >= -1e-12);
  CHECK(rep.worst_lipschitz_slack <= 1e-9);  // isometry: bound is tight
}

TEST_CASE("monotonicity check flags an overdeclared cocoercivity constant") {
  std::mt19937_64 rng(53);
  CocoerciveOperator B = scaled_identity_cocoercive(2, 2.0);  // true beta 1/2
  B.beta = 1.0;                                               // overdeclared
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int k = 0; k < 50; ++k) {
    pairs.emplace_back(random_vec(rng, 2), random_vec(rng, 2));
  }
  const MonotonicityReport rep = sample_monotonicity_check(B, pairs);
  CHECK(rep.worst_cocoercive_slack < 0.0);  // violation reported, not thrown
}

TEST_CASE("linear_monotone validates the symmetric part and sets mu") {
  Mat skew(2, 2);
  skew << 0.0, -0.7, 0.7, 0.0;
  const LipschitzMonotoneOperator Q = linear_monotone(skew);
  CHECK(Q.mu == doctest::Approx(0.7));
  Mat bad(2, 2);
  bad << -1.0, 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(linear_monotone(bad), std::invalid_argument);
}

TEST_CASE("linear_cocoercive derives beta from the largest eigenvalue") {
  Mat M(2, 2);
  M << 2.0, 0.0, 0.0, 1.0;
  const CocoerciveOperator B = linear_cocoercive(M);
  CHECK(B.beta == doctest::Approx(0.5));
  std::mt19937_64 rng(59);
  std::vector<std::pair<Vec, Vec>> pairs;
  for (int k = 0; k < 100; ++k) {
    pairs.emplace_back(random_vec(rng, 2), random_vec(rng, 2));
  }
  CHECK(sample_monotonicity_check(B, pairs).worst_cocoercive_slack >= -1e-12);
  Mat indefinite(2, 2);
  indefinite << 1.0, 0.0, 0.0, -0.1;
  CHECK_THROWS_AS(linear_cocoercive(indefinite), std::invalid_argument);
}

TEST_CASE("gradient_sq_dist is 1/weight cocoercive") {
  const CocoerciveOperator B = gradient_sq_dist(vec({1.0, 2.0}), 4.0);
  CHECK(B.beta == doctest::Approx(0.25));
  CHECK((B.apply(vec({1.0, 2.0}))).norm() == 0.0);
  CHECK(B.apply(vec({2.0, 2.0}))[0] == doctest::Approx(4.0));
}
