#include "pdbrf/block_space.hpp"

namespace pdbrf {

Eigen::Index SpaceShape::total_dim() const {
  Eigen::Index total = dim_primal;
  for (Eigen::Index d : dims_dual) total += d;
  return total;
}

void SpaceShape::validate() const {
  if (dims_dual.empty()) {
    throw ShapeError("SpaceShape: at least one dual block is required");
  }
  if (dim_primal < 1) {
    throw ShapeError("SpaceShape: primal dimension must be >= 1");
  }
  for (Eigen::Index d : dims_dual) {
    if (d < 1) throw ShapeError("SpaceShape: dual dimensions must be >= 1");
  }
}

BlockVector::BlockVector(Vec primal, std::vector<Vec> duals)
    : primal_(std::move(primal)), duals_(std::move(duals)) {
  shape().validate();
}

BlockVector BlockVector::zero(const SpaceShape& shape) {
  shape.validate();
  std::vector<Vec> duals;
  duals.reserve(shape.dims_dual.size());
  for (Eigen::Index d : shape.dims_dual) duals.push_back(Vec::Zero(d));
  return BlockVector(Vec::Zero(shape.dim_primal), std::move(duals));
}

SpaceShape BlockVector::shape() const {
  SpaceShape s;
  s.dim_primal = primal_.size();
  s.dims_dual.reserve(duals_.size());
  for (const Vec& d : duals_) s.dims_dual.push_back(d.size());
  return s;
}

bool BlockVector::all_finite() const {
  if (!primal_.allFinite()) return false;
  for (const Vec& d : duals_) {
    if (!d.allFinite()) return false;
  }
  return true;
}

namespace detail {
void require_same_shape(const BlockVector& u, const BlockVector& v,
                        const char* where) {
  if (u.shape() != v.shape()) {
    throw ShapeError(std::string(where) + ": block shapes do not match");
  }
}
}  // namespace detail

double block_dot(const BlockVector& u, const BlockVector& v) {
  detail::require_same_shape(u, v, "block_dot");
  double acc = u.primal().dot(v.primal());
  for (Eigen::Index i = 0; i < u.num_dual_blocks(); ++i) {
    acc += u.dual(i).dot(v.dual(i));
  }
  return acc;
}

double block_norm(const BlockVector& u) { return std::sqrt(block_dot(u, u)); }

BlockVector block_combine(double alpha, const BlockVector& u, double beta,
                          const BlockVector& v) {
  detail::require_same_shape(u, v, "block_combine");
  Vec primal = alpha * u.primal() + beta * v.primal();
  std::vector<Vec> duals;
  duals.reserve(static_cast<std::size_t>(u.num_dual_blocks()));
  for (Eigen::Index i = 0; i < u.num_dual_blocks(); ++i) {
    duals.push_back(alpha * u.dual(i) + beta * v.dual(i));
  }
  return BlockVector(std::move(primal), std::move(duals));
}

Vec flatten(const BlockVector& u) {
  Vec out(u.shape().total_dim());
  Eigen::Index at = 0;
  out.segment(at, u.primal().size()) = u.primal();
  at += u.primal().size();
  for (Eigen::Index i = 0; i < u.num_dual_blocks(); ++i) {
    out.segment(at, u.dual(i).size()) = u.dual(i);
    at += u.dual(i).size();
  }
  return out;
}

BlockVector unflatten(const SpaceShape& shape, const Vec& v) {
  shape.validate();
  if (v.size() != shape.total_dim()) {
    throw ShapeError("unflatten: flat vector length does not match shape");
  }
  Eigen::Index at = 0;
  Vec primal = v.segment(at, shape.dim_primal);
  at += shape.dim_primal;
  std::vector<Vec> duals;
  duals.reserve(shape.dims_dual.size());
  for (Eigen::Index d : shape.dims_dual) {
    duals.push_back(v.segment(at, d));
    at += d;
  }
  return BlockVector(std::move(primal), std::move(duals));
}

}  // namespace pdbrf
