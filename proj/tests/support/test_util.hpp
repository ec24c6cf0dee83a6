#pragma once

#include <random>

#include "pdbrf/block_space.hpp"

namespace pdbrf::testing {

inline Vec random_vec(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vec v(n);
  for (Eigen::Index j = 0; j < n; ++j) v[j] = normal(rng);
  return v;
}

inline BlockVector random_block(std::mt19937_64& rng, const SpaceShape& shape,
                                double scale = 1.0) {
  std::vector<Vec> duals;
  duals.reserve(shape.dims_dual.size());
  for (Eigen::Index d : shape.dims_dual) duals.push_back(random_vec(rng, d, scale));
  return BlockVector(random_vec(rng, shape.dim_primal, scale), std::move(duals));
}

inline BlockVector make_block(std::initializer_list<double> primal,
                              std::initializer_list<std::initializer_list<double>> duals) {
  Vec p(static_cast<Eigen::Index>(primal.size()));
  Eigen::Index j = 0;
  for (double v : primal) p[j++] = v;
  std::vector<Vec> ds;
  for (const auto& blk : duals) {
    Vec d(static_cast<Eigen::Index>(blk.size()));
    j = 0;
    for (double v : blk) d[j++] = v;
    ds.push_back(std::move(d));
  }
  return BlockVector(std::move(p), std::move(ds));
}

inline Vec vec(std::initializer_list<double> vals) {
  Vec v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index j = 0;
  for (double x : vals) v[j++] = x;
  return v;
}

}  // namespace pdbrf::testing
