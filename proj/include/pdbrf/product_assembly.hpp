#pragma once

#include "pdbrf/block_space.hpp"
#include "pdbrf/operators.hpp"

namespace pdbrf {

/// Data of the structured primal-dual inclusion: on the primal space a
/// maximally monotone A, a cocoercive B, a Lipschitz monotone Q and a shift z;
/// per dual block the analogous (A_i, B_i, Q_i), the coupling map L_i and the
/// shift r_i.
struct OperatorBundle {
  ResolventOperator A;
  CocoerciveOperator B;
  LipschitzMonotoneOperator Q;
  Vec z;

  struct DualBlock {
    ResolventOperator A;
    CocoerciveOperator B;
    LipschitzMonotoneOperator Q;
    LinearMap L;  // primal space -> this block's space
    Vec r;
  };
  std::vector<DualBlock> blocks;

  Eigen::Index num_blocks() const {
    return static_cast<Eigen::Index>(blocks.size());
  }
  SpaceShape shape() const;

  /// Checks m >= 1 and that every operator/vector matches the shape.
  void validate() const;
};

/// Estimates missing coupling-map norm bounds by power iteration and inflates
/// the estimates by `safety` before storing them. Bounds already present
/// (declared or exact) are kept as is.
void ensure_norm_bounds(OperatorBundle& bundle, double tol = 1e-9,
                        int max_iter = 10000, unsigned long long seed = 0,
                        double safety = 1.01);

/// The monotone Lipschitz coupling operator on the product space:
///   (x, v_1..v_m) |-> (Qx + sum_i L_i* v_i, Q_1 v_1 - L_1 x, ...,
///                      Q_m v_m - L_m x).
/// The primal sum over i is reduced in fixed index order.
std::function<BlockVector(const BlockVector&)> assemble_S(
    const OperatorBundle& bundle);

/// The blockwise cocoercive operator (x, v) |-> (Bx, B_1 v_1, ..., B_m v_m).
std::function<BlockVector(const BlockVector&)> assemble_B(
    const OperatorBundle& bundle);

/// Cocoercivity constant of the assembled blockwise operator:
/// min over all declared beta_i (primal included).
double beta_prime(const OperatorBundle& bundle);

/// Resolvent of the product-space maximally monotone operator, blockwise:
/// primal J_{gamma A}(x + gamma z), dual i J_{gamma A_i}(v_i - gamma r_i).
BlockVector resolvent_Abold(const OperatorBundle& bundle, double gamma,
                            const BlockVector& xb);

/// Lipschitz constant of the coupling operator:
/// sqrt(sum_i ||L_i||^2) + max over all declared mu_i. Uses the stored norm
/// bounds; requires them to be present and sum ||L_i||^2 > 0.
double lipschitz_mu(const OperatorBundle& bundle);

/// Bundled product-space views plus the constants the step-size policy needs.
struct ProductOperators {
  std::function<BlockVector(const BlockVector&)> S;
  std::function<BlockVector(const BlockVector&)> Bbold;
  std::function<BlockVector(double, const BlockVector&)> resolvent_Abold;
  double mu = 0.0;
  double beta_prime = 0.0;
};
ProductOperators assemble(const OperatorBundle& bundle);

}  // namespace pdbrf
