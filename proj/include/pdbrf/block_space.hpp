#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace pdbrf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown when vectors or operators with incompatible shapes are combined.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dimensions of the product space H (+) G_1 (+) ... (+) G_m: one primal
/// block and m >= 1 dual blocks.
struct SpaceShape {
  Eigen::Index dim_primal = 0;
  std::vector<Eigen::Index> dims_dual;

  Eigen::Index num_dual_blocks() const {
    return static_cast<Eigen::Index>(dims_dual.size());
  }
  Eigen::Index total_dim() const;

  bool operator==(const SpaceShape& other) const = default;

  /// Requires m >= 1 and every dimension >= 1.
  void validate() const;
};

/// Element of the product space, stored as contiguous per-block vectors.
/// Immutable after construction; all operations return new values.
class BlockVector {
 public:
  BlockVector(Vec primal, std::vector<Vec> duals);

  static BlockVector zero(const SpaceShape& shape);

  const Vec& primal() const { return primal_; }
  const Vec& dual(Eigen::Index i) const { return duals_.at(static_cast<std::size_t>(i)); }
  Eigen::Index num_dual_blocks() const {
    return static_cast<Eigen::Index>(duals_.size());
  }

  SpaceShape shape() const;
  bool all_finite() const;

 private:
  Vec primal_;
  std::vector<Vec> duals_;
};

/// Product-space scalar product <u_H, v_H> + sum_i <u_i, v_i>.
double block_dot(const BlockVector& u, const BlockVector& v);

/// Product-space norm sqrt(||u_H||^2 + sum_i ||u_i||^2).
double block_norm(const BlockVector& u);

/// Blockwise alpha*u + beta*v.
BlockVector block_combine(double alpha, const BlockVector& u, double beta,
                          const BlockVector& v);

/// Concatenates the blocks into one flat vector (primal first, then the dual
/// blocks in index order).
Vec flatten(const BlockVector& u);

/// Splits a flat vector back into blocks of the given shape.
BlockVector unflatten(const SpaceShape& shape, const Vec& v);

namespace detail {
void require_same_shape(const BlockVector& u, const BlockVector& v,
                        const char* where);
}  // namespace detail

}  // namespace pdbrf
