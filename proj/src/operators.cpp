#include "pdbrf/operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <random>

namespace pdbrf {

LinearMap LinearMap::dense(Mat M) {
  auto m = std::make_shared<const Mat>(std::move(M));
  LinearMap L;
  L.rows = m->rows();
  L.cols = m->cols();
  L.apply = [m](const Vec& x) -> Vec { return (*m) * x; };
  L.adjoint = [m](const Vec& u) -> Vec { return m->transpose() * u; };
  return L;
}

LinearMap LinearMap::diagonal(Vec d) {
  auto dd = std::make_shared<const Vec>(std::move(d));
  LinearMap L;
  L.rows = L.cols = dd->size();
  L.apply = [dd](const Vec& x) -> Vec { return dd->cwiseProduct(x); };
  L.adjoint = [dd](const Vec& u) -> Vec { return dd->cwiseProduct(u); };
  L.norm_bound = dd->size() > 0 ? dd->cwiseAbs().maxCoeff() : 0.0;
  return L;
}

LinearMap LinearMap::identity(Eigen::Index n) {
  return diagonal(Vec::Ones(n));
}

LinearMap LinearMap::scaled_identity(Eigen::Index n, double s) {
  return diagonal(Vec::Constant(n, s));
}

LinearMap LinearMap::difference(Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("difference: needs n >= 2");
  Mat D = Mat::Zero(n - 1, n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    D(k, k) = -1.0;
    D(k, k + 1) = 1.0;
  }
  return dense(std::move(D));
}

LinearMap LinearMap::compose(const LinearMap& outer, const LinearMap& inner) {
  if (outer.cols != inner.rows) {
    throw ShapeError("LinearMap::compose: dimension mismatch");
  }
  LinearMap L;
  L.rows = outer.rows;
  L.cols = inner.cols;
  L.apply = [o = outer.apply, i = inner.apply](const Vec& x) -> Vec {
    return o(i(x));
  };
  L.adjoint = [o = outer.adjoint, i = inner.adjoint](const Vec& u) -> Vec {
    return i(o(u));
  };
  if (outer.norm_bound && inner.norm_bound) {
    L.norm_bound = *outer.norm_bound * *inner.norm_bound;
  }
  return L;
}

ResolventOperator prox_factory(const FunctionSpec& spec) {
  ResolventOperator op;
  op.dim = spec.dim();
  op.resolvent = [spec](double gamma, const Vec& x) -> Vec {
    return spec.prox(gamma, x);
  };
  return op;
}

ResolventOperator conjugate_prox(const ResolventOperator& base) {
  ResolventOperator op;
  op.dim = base.dim;
  op.resolvent = [base](double gamma, const Vec& x) -> Vec {
    return x - gamma * base(1.0 / gamma, x / gamma);
  };
  return op;
}

CocoerciveOperator zero_cocoercive(Eigen::Index dim, double beta) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("zero_cocoercive: beta must be > 0");
  }
  return {[dim](const Vec&) -> Vec { return Vec::Zero(dim); }, beta, dim};
}

CocoerciveOperator gradient_sq_dist(Vec point, double weight) {
  if (!(weight > 0.0)) {
    throw std::invalid_argument("gradient_sq_dist: weight must be > 0");
  }
  auto p = std::make_shared<const Vec>(std::move(point));
  const Eigen::Index dim = p->size();
  return {[p, weight](const Vec& x) -> Vec { return weight * (x - *p); },
          1.0 / weight, dim};
}

CocoerciveOperator scaled_identity_cocoercive(Eigen::Index dim, double s) {
  if (!(s > 0.0)) {
    throw std::invalid_argument("scaled_identity_cocoercive: s must be > 0");
  }
  return {[s](const Vec& x) -> Vec { return s * x; }, 1.0 / s, dim};
}

CocoerciveOperator linear_cocoercive(const Mat& M) {
  const double scale = 1.0 + M.cwiseAbs().maxCoeff();
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("linear_cocoercive: M must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (lmin < -1e-10 * scale) {
    throw std::invalid_argument("linear_cocoercive: M must be PSD");
  }
  if (!(lmax > 0.0)) {
    throw std::invalid_argument(
        "linear_cocoercive: zero map needs an explicit beta; use "
        "zero_cocoercive");
  }
  auto m = std::make_shared<const Mat>(M);
  return {[m](const Vec& x) -> Vec { return (*m) * x; }, 1.0 / lmax,
          M.cols()};
}

LipschitzMonotoneOperator zero_lipschitz(Eigen::Index dim) {
  return {[dim](const Vec&) -> Vec { return Vec::Zero(dim); }, 0.0, dim};
}

LipschitzMonotoneOperator linear_monotone(const Mat& M) {
  if (M.rows() != M.cols()) {
    throw std::invalid_argument("linear_monotone: M must be square");
  }
  const Mat sym = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  const double scale = 1.0 + M.cwiseAbs().maxCoeff();
  if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw std::invalid_argument(
        "linear_monotone: M + M' must be PSD for monotonicity");
  }
  const double mu = M.jacobiSvd().singularValues()(0);
  auto m = std::make_shared<const Mat>(M);
  return {[m](const Vec& x) -> Vec { return (*m) * x; }, mu, M.cols()};
}

LipschitzMonotoneOperator rotation2d(double radians, double scale) {
  if (std::abs(radians) > 0.5 * M_PI + 1e-12) {
    throw std::invalid_argument(
        "rotation2d: |angle| must be <= pi/2 for monotonicity");
  }
  if (!(scale >= 0.0)) {
    throw std::invalid_argument("rotation2d: scale must be >= 0");
  }
  Mat R(2, 2);
  R << std::cos(radians), -std::sin(radians), std::sin(radians),
      std::cos(radians);
  R *= scale;
  auto m = std::make_shared<const Mat>(std::move(R));
  return {[m](const Vec& x) -> Vec { return (*m) * x; }, scale, 2};
}

NormEstimate estimate_operator_norm(const LinearMap& L, double tol,
                                    int max_iter, unsigned long long seed) {
  if (!(tol > 0.0) || max_iter < 1) {
    throw std::invalid_argument(
        "estimate_operator_norm: tol > 0 and max_iter >= 1 required");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(L.cols);
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = normal(rng);
  if (v.norm() == 0.0) v.setOnes();
  v /= v.norm();

  NormEstimate est;
  double lambda_prev = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vec w = L.adjoint(L.apply(v));  // one step of L*L
    const double lambda = v.dot(w);       // Rayleigh quotient
    est.value = std::sqrt(std::max(lambda, 0.0));
    est.iterations = it + 1;
    const double wn = w.norm();
    if (wn <= 1e-300) {  // image numerically zero: the zero map
      est.value = 0.0;
      est.converged = true;
      return est;
    }
    if (lambda_prev >= 0.0 &&
        std::abs(lambda - lambda_prev) <= tol * std::abs(lambda)) {
      est.converged = true;
      return est;
    }
    lambda_prev = lambda;
    v = w / wn;
  }
  return est;  // best estimate, flagged unconverged
}

namespace {

MonotonicityReport run_check(const std::function<Vec(const Vec&)>& apply,
                             std::optional<double> beta,
                             std::optional<double> mu,
                             const std::vector<std::pair<Vec, Vec>>& pairs) {
  MonotonicityReport rep;
  rep.worst_monotone_slack = std::numeric_limits<double>::infinity();
  rep.worst_cocoercive_slack = std::numeric_limits<double>::infinity();
  rep.worst_lipschitz_slack = std::numeric_limits<double>::infinity();
  rep.has_cocoercive = beta.has_value();
  rep.has_lipschitz = mu.has_value();
  for (const auto& [x, y] : pairs) {
    const Vec dx = x - y;
    const Vec dF = apply(x) - apply(y);
    const double inner = dx.dot(dF);
    rep.worst_monotone_slack = std::min(rep.worst_monotone_slack, inner);
    if (beta) {
      rep.worst_cocoercive_slack =
          std::min(rep.worst_cocoercive_slack, inner - *beta * dF.squaredNorm());
    }
    if (mu) {
      rep.worst_lipschitz_slack =
          std::min(rep.worst_lipschitz_slack, *mu * dx.norm() - dF.norm());
    }
  }
  return rep;
}

}  // namespace

MonotonicityReport sample_monotonicity_check(
    const CocoerciveOperator& op,
    const std::vector<std::pair<Vec, Vec>>& pairs) {
  return run_check(op.apply, op.beta, std::nullopt, pairs);
}

MonotonicityReport sample_monotonicity_check(
    const LipschitzMonotoneOperator& op,
    const std::vector<std::pair<Vec, Vec>>& pairs) {
  return run_check(op.apply, std::nullopt, op.mu, pairs);
}

}  // namespace pdbrf
