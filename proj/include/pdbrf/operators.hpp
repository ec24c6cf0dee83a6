#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pdbrf/block_space.hpp"
#include "pdbrf/functions.hpp"

namespace pdbrf {

/// Maximally monotone operator represented through its resolvent
/// J_{gamma A} = (Id + gamma A)^{-1}; the graph itself is never materialized.
/// The resolvent must accept any gamma > 0 at call time.
struct ResolventOperator {
  std::function<Vec(double gamma, const Vec&)> resolvent;
  Eigen::Index dim = 0;

  Vec operator()(double gamma, const Vec& x) const {
    if (!(gamma > 0.0)) {
      throw std::invalid_argument("resolvent: gamma must be > 0");
    }
    return resolvent(gamma, x);
  }
};

/// Single-valued operator with a declared cocoercivity constant beta:
/// <x - y, Bx - By> >= beta ||Bx - By||^2. The constant is trusted input,
/// audited only by sampling.
struct CocoerciveOperator {
  std::function<Vec(const Vec&)> apply;
  double beta = 0.0;
  Eigen::Index dim = 0;
};

/// Single-valued monotone operator with a declared Lipschitz constant mu.
struct LipschitzMonotoneOperator {
  std::function<Vec(const Vec&)> apply;
  double mu = 0.0;
  Eigen::Index dim = 0;
};

/// Bounded linear operator between coordinate spaces, with its adjoint and an
/// optional upper bound on the operator norm.
struct LinearMap {
  std::function<Vec(const Vec&)> apply;    // R^cols -> R^rows
  std::function<Vec(const Vec&)> adjoint;  // R^rows -> R^cols
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::optional<double> norm_bound;

  static LinearMap dense(Mat M);
  static LinearMap diagonal(Vec d);  // norm bound set exactly to max |d_j|
  static LinearMap identity(Eigen::Index n);
  static LinearMap scaled_identity(Eigen::Index n, double s);
  /// First-difference map R^n -> R^{n-1}, (Dx)_k = x_{k+1} - x_k.
  static LinearMap difference(Eigen::Index n);
  static LinearMap compose(const LinearMap& outer, const LinearMap& inner);
};

/// Resolvent of the subdifferential of a registered convex function; the
/// resolvent map is the exact proximity operator prox_{gamma f}.
ResolventOperator prox_factory(const FunctionSpec& spec);

/// Resolvent of the subdifferential of the conjugate f*, obtained from the
/// proximity operator of f through the Moreau decomposition
/// prox_{gamma f*}(x) = x - gamma prox_{f/gamma}(x/gamma).
ResolventOperator conjugate_prox(const ResolventOperator& base);

/// Common single-valued instances for building test problems.
CocoerciveOperator zero_cocoercive(Eigen::Index dim, double beta = 1.0);
/// Gradient of (weight/2)||x - point||^2; cocoercive with beta = 1/weight.
CocoerciveOperator gradient_sq_dist(Vec point, double weight);
/// x |-> s x with s > 0; cocoercive with beta = 1/s.
CocoerciveOperator scaled_identity_cocoercive(Eigen::Index dim, double s);
/// x |-> Mx for symmetric PSD M; beta = 1/lambda_max(M).
CocoerciveOperator linear_cocoercive(const Mat& M);

LipschitzMonotoneOperator zero_lipschitz(Eigen::Index dim);
/// x |-> Mx where M + M' is PSD (validated); mu = largest singular value.
LipschitzMonotoneOperator linear_monotone(const Mat& M);
/// Planar rotation by `radians` scaled by `scale`; monotone for
/// |radians| <= pi/2, mu = scale.
LipschitzMonotoneOperator rotation2d(double radians, double scale = 1.0);

/// Power-iteration estimate of the operator norm ||L||.
struct NormEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};
NormEstimate estimate_operator_norm(const LinearMap& L, double tol,
                                    int max_iter, unsigned long long seed);

/// Sampled audit of the declared monotonicity / cocoercivity / Lipschitz
/// constants. Slacks are the worst observed margins of the defining
/// inequalities; negative slack means a violation. Violations are reported,
/// never thrown.
struct MonotonicityReport {
  double worst_monotone_slack = 0.0;    // min <x-y, Fx-Fy>
  double worst_cocoercive_slack = 0.0;  // min <x-y,Fx-Fy> - beta||Fx-Fy||^2
  double worst_lipschitz_slack = 0.0;   // min mu||x-y|| - ||Fx-Fy||
  bool has_cocoercive = false;
  bool has_lipschitz = false;
};
MonotonicityReport sample_monotonicity_check(
    const CocoerciveOperator& op, const std::vector<std::pair<Vec, Vec>>& pairs);
MonotonicityReport sample_monotonicity_check(
    const LipschitzMonotoneOperator& op,
    const std::vector<std::pair<Vec, Vec>>& pairs);

}  // namespace pdbrf
