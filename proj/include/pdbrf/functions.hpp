#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "pdbrf/block_space.hpp"

namespace pdbrf {

/// A proper lower-semicontinuous convex function from one of the registered
/// closed-form families. Every family carries an exact proximity operator,
/// a value oracle and (where it exists in closed form) a conjugate value.
///
/// Registered families:
///   zero            f(x) = 0
///   l1              f(x) = weight * ||x||_1
///   sq_dist         f(x) = (weight/2) * ||x - point||^2
///   box             indicator of {lo <= x <= hi} (componentwise)
///   ball2           indicator of {||x - center|| <= radius}
///   affine_quad     f(x) = (1/2) x'Px + b'x, P symmetric PSD
///   separable       f(x) = sum_j f_j(x_j) over consecutive slices
class FunctionSpec {
 public:
  enum class Family { zero, l1, sq_dist, box, ball2, affine_quad, separable };

  static FunctionSpec zero(Eigen::Index dim);
  static FunctionSpec l1(Eigen::Index dim, double weight);
  static FunctionSpec sq_dist(Vec point, double weight);
  static FunctionSpec box(Vec lo, Vec hi);
  static FunctionSpec ball2(Vec center, double radius);
  static FunctionSpec affine_quad(Mat P, Vec b);
  static FunctionSpec separable(std::vector<FunctionSpec> parts);

  Family family() const { return family_; }
  Eigen::Index dim() const { return dim_; }

  /// f(x); +infinity outside an indicator's domain (membership tested with
  /// tolerance `indicator_tol`).
  double value(const Vec& x, double indicator_tol = 1e-9) const;

  /// prox_{gamma f}(x), the unique minimizer of f(y) + ||x-y||^2/(2 gamma).
  Vec prox(double gamma, const Vec& x) const;

  /// f*(u) when a closed form is registered. Indicator-style conjugates use
  /// `feas_tol` for domain membership. Throws for affine_quad with singular P.
  double conjugate_value(const Vec& u, double feas_tol = 1e-8) const;

  /// One element of the subdifferential at x. Throws for indicator families
  /// (use project() instead).
  Vec subgradient(const Vec& x) const;

  bool is_indicator() const;

  /// Projection onto the domain; identity for finite-valued families.
  Vec project(const Vec& x) const;

  /// Per-coordinate decomposition used by the grid prox oracle. Each entry is
  /// the scalar function of one coordinate together with hint points that must
  /// be scanned (set anchors, distance targets). Throws for families that are
  /// not separable across coordinates (ball2 in dim > 1, non-diagonal
  /// affine_quad).
  struct ScalarPart {
    std::function<double(double)> value;
    std::vector<double> hints;
  };
  std::vector<ScalarPart> scalar_parts() const;

  // Family parameters (valid for the matching family only).
  double weight() const { return weight_; }
  const Vec& point() const { return point_; }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  double radius() const { return radius_; }
  const Mat& quad_matrix() const { return P_; }
  const Vec& linear_term() const { return b_; }
  const std::vector<FunctionSpec>& parts() const { return *parts_; }

 private:
  FunctionSpec() = default;

  Family family_ = Family::zero;
  Eigen::Index dim_ = 0;
  double weight_ = 0.0;
  double radius_ = 0.0;
  Vec point_, lo_, hi_, b_;
  Mat P_;
  std::shared_ptr<const std::vector<FunctionSpec>> parts_;
};

}  // namespace pdbrf
