#include "pdbrf/product_assembly.hpp"

#include <cmath>

namespace pdbrf {

SpaceShape OperatorBundle::shape() const {
  SpaceShape s;
  s.dim_primal = A.dim;
  s.dims_dual.reserve(blocks.size());
  for (const DualBlock& b : blocks) s.dims_dual.push_back(b.A.dim);
  return s;
}

void OperatorBundle::validate() const {
  const SpaceShape s = shape();
  s.validate();
  auto bad = [](const char* what) {
    throw ShapeError(std::string("OperatorBundle: inconsistent shape for ") +
                     what);
  };
  if (B.dim != s.dim_primal) bad("B");
  if (Q.dim != s.dim_primal) bad("Q");
  if (z.size() != s.dim_primal) bad("z");
  if (!(B.beta > 0.0)) {
    throw std::invalid_argument("OperatorBundle: beta_0 must be > 0");
  }
  if (Q.mu < 0.0) {
    throw std::invalid_argument("OperatorBundle: mu_0 must be >= 0");
  }
  for (Eigen::Index i = 0; i < num_blocks(); ++i) {
    const DualBlock& b = blocks[static_cast<std::size_t>(i)];
    const Eigen::Index d = s.dims_dual[static_cast<std::size_t>(i)];
    if (b.B.dim != d) bad("B_i");
    if (b.Q.dim != d) bad("Q_i");
    if (b.r.size() != d) bad("r_i");
    if (b.L.rows != d || b.L.cols != s.dim_primal) bad("L_i");
    if (!(b.B.beta > 0.0)) {
      throw std::invalid_argument("OperatorBundle: beta_i must be > 0");
    }
    if (b.Q.mu < 0.0) {
      throw std::invalid_argument("OperatorBundle: mu_i must be >= 0");
    }
  }
}

void ensure_norm_bounds(OperatorBundle& bundle, double tol, int max_iter,
                        unsigned long long seed, double safety) {
  for (std::size_t i = 0; i < bundle.blocks.size(); ++i) {
    LinearMap& L = bundle.blocks[i].L;
    if (L.norm_bound) continue;
    const NormEstimate est = estimate_operator_norm(
        L, tol, max_iter, seed + static_cast<unsigned long long>(i));
    if (!est.converged) {
      // an understated norm would loosen the step-size bound
      throw std::runtime_error(
          "ensure_norm_bounds: power iteration did not converge for coupling "
          "block " +
          std::to_string(i) + "; raise max_iter or declare a bound");
    }
    L.norm_bound = est.value * safety;
  }
}

std::function<BlockVector(const BlockVector&)> assemble_S(
    const OperatorBundle& bundle) {
  bundle.validate();
  auto b = std::make_shared<const OperatorBundle>(bundle);
  return [b](const BlockVector& u) -> BlockVector {
    if (u.shape() != b->shape()) {
      throw ShapeError("assemble_S: input shape does not match bundle");
    }
    Vec primal = b->Q.apply(u.primal());
    std::vector<Vec> duals;
    duals.reserve(b->blocks.size());
    for (Eigen::Index i = 0; i < b->num_blocks(); ++i) {
      const auto& blk = b->blocks[static_cast<std::size_t>(i)];
      primal += blk.L.adjoint(u.dual(i));
      duals.push_back(blk.Q.apply(u.dual(i)) - blk.L.apply(u.primal()));
    }
    return BlockVector(std::move(primal), std::move(duals));
  };
}

std::function<BlockVector(const BlockVector&)> assemble_B(
    const OperatorBundle& bundle) {
  bundle.validate();
  auto b = std::make_shared<const OperatorBundle>(bundle);
  return [b](const BlockVector& u) -> BlockVector {
    if (u.shape() != b->shape()) {
      throw ShapeError("assemble_B: input shape does not match bundle");
    }
    Vec primal = b->B.apply(u.primal());
    std::vector<Vec> duals;
    duals.reserve(b->blocks.size());
    for (Eigen::Index i = 0; i < b->num_blocks(); ++i) {
      duals.push_back(
          b->blocks[static_cast<std::size_t>(i)].B.apply(u.dual(i)));
    }
    return BlockVector(std::move(primal), std::move(duals));
  };
}

double beta_prime(const OperatorBundle& bundle) {
  double bp = bundle.B.beta;
  for (const auto& blk : bundle.blocks) bp = std::min(bp, blk.B.beta);
  return bp;
}

BlockVector resolvent_Abold(const OperatorBundle& bundle, double gamma,
                            const BlockVector& xb) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("resolvent_Abold: gamma must be > 0");
  }
  if (xb.shape() != bundle.shape()) {
    throw ShapeError("resolvent_Abold: input shape does not match bundle");
  }
  Vec primal = bundle.A(gamma, xb.primal() + gamma * bundle.z);
  std::vector<Vec> duals;
  duals.reserve(bundle.blocks.size());
  for (Eigen::Index i = 0; i < bundle.num_blocks(); ++i) {
    const auto& blk = bundle.blocks[static_cast<std::size_t>(i)];
    duals.push_back(blk.A(gamma, xb.dual(i) - gamma * blk.r));
  }
  return BlockVector(std::move(primal), std::move(duals));
}

double lipschitz_mu(const OperatorBundle& bundle) {
  double sum_sq = 0.0;
  for (const auto& blk : bundle.blocks) {
    if (!blk.L.norm_bound) {
      throw std::invalid_argument(
          "lipschitz_mu: every coupling map needs a norm bound; call "
          "ensure_norm_bounds first");
    }
    sum_sq += *blk.L.norm_bound * *blk.L.norm_bound;
  }
  if (!(sum_sq > 0.0)) {
    throw std::invalid_argument(
        "lipschitz_mu: the coupling maps must not all vanish "
        "(sum ||L_i||^2 > 0 required)");
  }
  double mu_max = bundle.Q.mu;
  for (const auto& blk : bundle.blocks) mu_max = std::max(mu_max, blk.Q.mu);
  return std::sqrt(sum_sq) + mu_max;
}

ProductOperators assemble(const OperatorBundle& bundle) {
  bundle.validate();
  ProductOperators ops;
  ops.S = assemble_S(bundle);
  ops.Bbold = assemble_B(bundle);
  auto b = std::make_shared<const OperatorBundle>(bundle);
  ops.resolvent_Abold = [b](double gamma, const BlockVector& xb) {
    return resolvent_Abold(*b, gamma, xb);
  };
  ops.mu = lipschitz_mu(bundle);
  ops.beta_prime = beta_prime(bundle);
  return ops;
}

}  // namespace pdbrf
