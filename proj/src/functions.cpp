#include "pdbrf/functions.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace pdbrf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_prox_gamma(double gamma) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("prox: gamma must be > 0");
  }
}

double soft_threshold(double t, double tau) {
  if (t > tau) return t - tau;
  if (t < -tau) return t + tau;
  return 0.0;
}

void check_psd(const Mat& P) {
  if (P.rows() != P.cols()) {
    throw std::invalid_argument("affine_quad: P must be square");
  }
  const double scale = 1.0 + P.cwiseAbs().maxCoeff();
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("affine_quad: P must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(P, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw std::invalid_argument(
        "affine_quad: P must be positive semidefinite");
  }
}

}  // namespace

FunctionSpec FunctionSpec::zero(Eigen::Index dim) {
  FunctionSpec f;
  f.family_ = Family::zero;
  f.dim_ = dim;
  return f;
}

FunctionSpec FunctionSpec::l1(Eigen::Index dim, double weight) {
  if (weight < 0.0) throw std::invalid_argument("l1: weight must be >= 0");
  FunctionSpec f;
  f.family_ = Family::l1;
  f.dim_ = dim;
  f.weight_ = weight;
  return f;
}

FunctionSpec FunctionSpec::sq_dist(Vec point, double weight) {
  if (!(weight > 0.0)) {
    throw std::invalid_argument("sq_dist: weight must be > 0");
  }
  FunctionSpec f;
  f.family_ = Family::sq_dist;
  f.dim_ = point.size();
  f.point_ = std::move(point);
  f.weight_ = weight;
  return f;
}

FunctionSpec FunctionSpec::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size()) {
    throw ShapeError("box: lo and hi must have the same length");
  }
  if (!lo.allFinite() || !hi.allFinite()) {
    throw std::invalid_argument("box: bounds must be finite");
  }
  if ((lo.array() > hi.array()).any()) {
    throw std::invalid_argument("box: requires lo <= hi componentwise");
  }
  FunctionSpec f;
  f.family_ = Family::box;
  f.dim_ = lo.size();
  f.lo_ = std::move(lo);
  f.hi_ = std::move(hi);
  return f;
}

FunctionSpec FunctionSpec::ball2(Vec center, double radius) {
  if (radius < 0.0) throw std::invalid_argument("ball2: radius must be >= 0");
  FunctionSpec f;
  f.family_ = Family::ball2;
  f.dim_ = center.size();
  f.point_ = std::move(center);
  f.radius_ = radius;
  return f;
}

FunctionSpec FunctionSpec::affine_quad(Mat P, Vec b) {
  if (P.rows() != b.size()) {
    throw ShapeError("affine_quad: P and b sizes do not match");
  }
  check_psd(P);
  FunctionSpec f;
  f.family_ = Family::affine_quad;
  f.dim_ = b.size();
  f.P_ = std::move(P);
  f.b_ = std::move(b);
  return f;
}

FunctionSpec FunctionSpec::separable(std::vector<FunctionSpec> parts) {
  if (parts.empty()) {
    throw std::invalid_argument("separable: needs at least one part");
  }
  FunctionSpec f;
  f.family_ = Family::separable;
  f.dim_ = 0;
  for (const FunctionSpec& p : parts) f.dim_ += p.dim();
  f.parts_ =
      std::make_shared<const std::vector<FunctionSpec>>(std::move(parts));
  return f;
}

double FunctionSpec::value(const Vec& x, double indicator_tol) const {
  if (x.size() != dim_) throw ShapeError("FunctionSpec::value: wrong length");
  switch (family_) {
    case Family::zero:
      return 0.0;
    case Family::l1:
      return weight_ * x.cwiseAbs().sum();
    case Family::sq_dist:
      return 0.5 * weight_ * (x - point_).squaredNorm();
    case Family::box:
      if ((x.array() < lo_.array() - indicator_tol).any() ||
          (x.array() > hi_.array() + indicator_tol).any()) {
        return kInf;
      }
      return 0.0;
    case Family::ball2:
      return (x - point_).norm() <= radius_ + indicator_tol ? 0.0 : kInf;
    case Family::affine_quad:
      return 0.5 * x.dot(P_ * x) + b_.dot(x);
    case Family::separable: {
      double acc = 0.0;
      Eigen::Index at = 0;
      for (const FunctionSpec& p : *parts_) {
        acc += p.value(x.segment(at, p.dim()), indicator_tol);
        at += p.dim();
      }
      return acc;
    }
  }
  throw std::logic_error("FunctionSpec::value: unknown family");
}

Vec FunctionSpec::prox(double gamma, const Vec& x) const {
  require_prox_gamma(gamma);
  if (x.size() != dim_) throw ShapeError("FunctionSpec::prox: wrong length");
  switch (family_) {
    case Family::zero:
      return x;
    case Family::l1: {
      Vec out(dim_);
      const double tau = gamma * weight_;
      for (Eigen::Index j = 0; j < dim_; ++j) {
        out[j] = soft_threshold(x[j], tau);
      }
      return out;
    }
    case Family::sq_dist:
      return (x + gamma * weight_ * point_) / (1.0 + gamma * weight_);
    case Family::box:
      return x.cwiseMax(lo_).cwiseMin(hi_);
    case Family::ball2: {
      const Vec d = x - point_;
      const double nd = d.norm();
      if (nd <= radius_) return x;
      return point_ + (radius_ / nd) * d;
    }
    case Family::affine_quad: {
      Mat M = gamma * P_;
      M.diagonal().array() += 1.0;
      return Eigen::LLT<Mat>(M).solve(x - gamma * b_);
    }
    case Family::separable: {
      Vec out(dim_);
      Eigen::Index at = 0;
      for (const FunctionSpec& p : *parts_) {
        out.segment(at, p.dim()) = p.prox(gamma, x.segment(at, p.dim()));
        at += p.dim();
      }
      return out;
    }
  }
  throw std::logic_error("FunctionSpec::prox: unknown family");
}

double FunctionSpec::conjugate_value(const Vec& u, double feas_tol) const {
  if (u.size() != dim_) {
    throw ShapeError("FunctionSpec::conjugate_value: wrong length");
  }
  switch (family_) {
    case Family::zero:  // conjugate is the indicator of {0}
      return u.cwiseAbs().maxCoeff() <= feas_tol ? 0.0 : kInf;
    case Family::l1:  // indicator of the sup-norm ball of radius `weight`
      return u.cwiseAbs().maxCoeff() <= weight_ + feas_tol ? 0.0 : kInf;
    case Family::sq_dist:
      return 0.5 / weight_ * u.squaredNorm() + point_.dot(u);
    case Family::box: {  // support function of the box
      double acc = 0.0;
      for (Eigen::Index j = 0; j < dim_; ++j) {
        acc += std::max(lo_[j] * u[j], hi_[j] * u[j]);
      }
      return acc;
    }
    case Family::ball2:
      return radius_ * u.norm() + point_.dot(u);
    case Family::affine_quad: {
      Eigen::LLT<Mat> llt(P_);
      if (llt.info() != Eigen::Success) {
        throw std::invalid_argument(
            "conjugate_value: affine_quad requires positive definite P");
      }
      const Vec d = u - b_;
      return 0.5 * d.dot(llt.solve(d));
    }
    case Family::separable: {
      double acc = 0.0;
      Eigen::Index at = 0;
      for (const FunctionSpec& p : *parts_) {
        acc += p.conjugate_value(u.segment(at, p.dim()), feas_tol);
        at += p.dim();
      }
      return acc;
    }
  }
  throw std::logic_error("FunctionSpec::conjugate_value: unknown family");
}

Vec FunctionSpec::subgradient(const Vec& x) const {
  if (x.size() != dim_) {
    throw ShapeError("FunctionSpec::subgradient: wrong length");
  }
  switch (family_) {
    case Family::zero:
      return Vec::Zero(dim_);
    case Family::l1: {
      Vec g(dim_);
      for (Eigen::Index j = 0; j < dim_; ++j) {
        g[j] = x[j] > 0.0 ? weight_ : (x[j] < 0.0 ? -weight_ : 0.0);
      }
      return g;
    }
    case Family::sq_dist:
      return weight_ * (x - point_);
    case Family::affine_quad:
      return P_ * x + b_;
    case Family::box:
    case Family::ball2:
      throw std::invalid_argument(
          "subgradient: not defined for indicator families; use project()");
    case Family::separable: {
      Vec g(dim_);
      Eigen::Index at = 0;
      for (const FunctionSpec& p : *parts_) {
        g.segment(at, p.dim()) = p.subgradient(x.segment(at, p.dim()));
        at += p.dim();
      }
      return g;
    }
  }
  throw std::logic_error("FunctionSpec::subgradient: unknown family");
}

bool FunctionSpec::is_indicator() const {
  switch (family_) {
    case Family::box:
    case Family::ball2:
      return true;
    case Family::separable:
      for (const FunctionSpec& p : *parts_) {
        if (p.is_indicator()) return true;
      }
      return false;
    default:
      return false;
  }
}

Vec FunctionSpec::project(const Vec& x) const {
  switch (family_) {
    case Family::box:
    case Family::ball2:
      return prox(1.0, x);  // projections are gamma-independent
    case Family::separable: {
      Vec out(dim_);
      Eigen::Index at = 0;
      for (const FunctionSpec& p : *parts_) {
        out.segment(at, p.dim()) = p.project(x.segment(at, p.dim()));
        at += p.dim();
      }
      return out;
    }
    default:
      return x;
  }
}

std::vector<FunctionSpec::ScalarPart> FunctionSpec::scalar_parts() const {
  std::vector<ScalarPart> out;
  out.reserve(static_cast<std::size_t>(dim_));
  switch (family_) {
    case Family::zero:
      for (Eigen::Index j = 0; j < dim_; ++j) {
        out.push_back({[](double) { return 0.0; }, {}});
      }
      return out;
    case Family::l1:
      for (Eigen::Index j = 0; j < dim_; ++j) {
        const double w = weight_;
        out.push_back({[w](double t) { return w * std::abs(t); }, {0.0}});
      }
      return out;
    case Family::sq_dist:
      for (Eigen::Index j = 0; j < dim_; ++j) {
        const double w = weight_, p = point_[j];
        out.push_back(
            {[w, p](double t) { return 0.5 * w * (t - p) * (t - p); }, {p}});
      }
      return out;
    case Family::box:
      for (Eigen::Index j = 0; j < dim_; ++j) {
        const double lo = lo_[j], hi = hi_[j];
        out.push_back({[lo, hi](double t) {
                         return (t < lo || t > hi) ? kInf : 0.0;
                       },
                       {lo, hi, 0.5 * (lo + hi)}});
      }
      return out;
    case Family::ball2: {
      if (dim_ != 1) {
        throw std::invalid_argument(
            "scalar_parts: ball2 is separable only in dimension 1");
      }
      const double lo = point_[0] - radius_, hi = point_[0] + radius_;
      out.push_back({[lo, hi](double t) {
                       return (t < lo || t > hi) ? kInf : 0.0;
                     },
                     {lo, hi, point_[0]}});
      return out;
    }
    case Family::affine_quad: {
      if (!P_.isDiagonal(1e-14)) {
        throw std::invalid_argument(
            "scalar_parts: affine_quad is separable only for diagonal P");
      }
      for (Eigen::Index j = 0; j < dim_; ++j) {
        const double p = P_(j, j), b = b_[j];
        std::vector<double> hints = {0.0};
        if (p > 0.0) hints.push_back(-b / p);
        out.push_back(
            {[p, b](double t) { return 0.5 * p * t * t + b * t; }, hints});
      }
      return out;
    }
    case Family::separable:
      for (const FunctionSpec& p : *parts_) {
        auto sub = p.scalar_parts();
        out.insert(out.end(), std::make_move_iterator(sub.begin()),
                   std::make_move_iterator(sub.end()));
      }
      return out;
  }
  throw std::logic_error("FunctionSpec::scalar_parts: unknown family");
}

}  // namespace pdbrf
