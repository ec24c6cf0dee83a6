#pragma once

#include "pdbrf/brf_solver.hpp"

namespace pdbrf::testing {

/// Hand-rolled transcription of the displayed blockwise iteration, kept
/// deliberately naive (materializes the perturbed operators at each step and
/// applies them twice for the reflection) so it stays an independent route
/// against the cached product-form step.
struct BlockwiseState {
  BlockVector x;
  BlockVector y_prev;
  long n = 0;
};

inline BlockwiseState blockwise_init(const OperatorBundle& bundle,
                                     double gamma,
                                     const BlockVector& x_minus1,
                                     const BlockVector& x0) {
  return {x0, resolvent_Abold(bundle, gamma, x_minus1), 0};
}

struct BlockwiseOutcome {
  BlockwiseState state;
  BlockVector y;  // (y_n, w_{i,n})
};

inline BlockwiseOutcome blockwise_step(const OperatorBundle& bundle,
                                       const PerturbationSchedule& schedule,
                                       double gamma,
                                       const BlockwiseState& state) {
  const OperatorBundle pb = perturb(bundle, schedule, state.n);
  const Eigen::Index m = bundle.num_blocks();

  const Vec y = bundle.A(gamma, state.x.primal() + gamma * bundle.z);
  std::vector<Vec> w(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& blk = bundle.blocks[static_cast<std::size_t>(i)];
    w[static_cast<std::size_t>(i)] =
        blk.A(gamma, state.x.dual(i) - gamma * blk.r);
  }

  Vec x_next = y;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    x_next -= gamma * bundle.blocks[k].L.adjoint(2.0 * w[k] -
                                                 state.y_prev.dual(i));
  }
  x_next -= gamma * (2.0 * pb.Q.apply(y) - pb.Q.apply(state.y_prev.primal()));
  x_next -= gamma * pb.B.apply(y);

  std::vector<Vec> v_next(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const auto& blk = pb.blocks[k];
    v_next[k] = w[k] -
                gamma * (2.0 * blk.Q.apply(w[k]) -
                         blk.Q.apply(state.y_prev.dual(i))) +
                gamma * bundle.blocks[k].L.apply(2.0 * y -
                                                 state.y_prev.primal()) -
                gamma * blk.B.apply(w[k]);
  }

  BlockVector ycur(y, w);
  return {{BlockVector(std::move(x_next), std::move(v_next)), ycur,
           state.n + 1},
          ycur};
}

}  // namespace pdbrf::testing
