#include "pdbrf/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pdbrf {

namespace {

// Golden-section shrink that keeps a finite-valued interior point m with
// f(m) <= both evaluated neighbors. Safe for convex objectives that are
// +infinity outside their domain.
double golden_refine(const std::function<double(double)>& f, double a,
                     double m, double b, double fm, double tol) {
  constexpr double kGold = 0.3819660112501051;  // 2 - golden ratio
  while (b - a > tol) {
    const bool probe_left = (m - a) > (b - m);
    const double x =
        probe_left ? m - kGold * (m - a) : m + kGold * (b - m);
    const double fx = f(x);
    if (fx < fm) {
      if (x < m) {
        b = m;
      } else {
        a = m;
      }
      m = x;
      fm = fx;
    } else {
      if (x < m) {
        a = x;
      } else {
        b = x;
      }
    }
  }
  return m;
}

}  // namespace

double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  double tol) {
  if (!(hi > lo) || !(tol > 0.0)) {
    throw std::invalid_argument("golden_min: needs hi > lo and tol > 0");
  }
  const int kScan = 64;
  double m = lo, fm = f(lo);
  for (int k = 1; k <= kScan; ++k) {
    const double x = lo + (hi - lo) * k / kScan;
    const double fx = f(x);
    if (fx < fm) {
      m = x;
      fm = fx;
    }
  }
  if (!std::isfinite(fm)) {
    throw std::invalid_argument(
        "golden_min: function is infinite at every scanned point");
  }
  const double cell = (hi - lo) / kScan;
  return golden_refine(f, std::max(lo, m - cell), m, std::min(hi, m + cell),
                       fm, tol);
}

Vec grid_prox_oracle(const FunctionSpec& spec, double gamma, const Vec& x,
                     double resolution) {
  if (!(gamma > 0.0) || !(resolution > 0.0)) {
    throw std::invalid_argument(
        "grid_prox_oracle: gamma and resolution must be > 0");
  }
  if (x.size() != spec.dim()) {
    throw ShapeError("grid_prox_oracle: wrong input length");
  }
  const auto parts = spec.scalar_parts();  // throws for non-separable specs
  const int kGrid = 1024;
  Vec out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const auto& part = parts[static_cast<std::size_t>(j)];
    const double xj = x[j];
    const double inv2g = 0.5 / gamma;
    auto objective = [&](double y) {
      return part.value(y) + inv2g * (xj - y) * (xj - y);
    };
    double lo = xj - 10.0 * gamma * (1.0 + std::abs(xj));
    double hi = xj + 10.0 * gamma * (1.0 + std::abs(xj));
    for (double h : part.hints) {  // widen so set anchors stay reachable
      lo = std::min(lo, h - 1.0);
      hi = std::max(hi, h + 1.0);
    }
    // Coarse scan over the grid plus the hint points and the query itself.
    std::vector<double> candidates;
    candidates.reserve(kGrid + part.hints.size() + 2);
    for (int k = 0; k <= kGrid; ++k) {
      candidates.push_back(lo + (hi - lo) * k / kGrid);
    }
    candidates.push_back(xj);
    for (double h : part.hints) candidates.push_back(h);
    std::sort(candidates.begin(), candidates.end());
    std::size_t best = 0;
    double fbest = objective(candidates[0]);
    for (std::size_t k = 1; k < candidates.size(); ++k) {
      const double fk = objective(candidates[k]);
      if (fk < fbest) {
        fbest = fk;
        best = k;
      }
    }
    if (!std::isfinite(fbest)) {
      throw std::invalid_argument(
          "grid_prox_oracle: objective infinite at every candidate");
    }
    // For a convex objective the minimizer lies within one grid cell of the
    // best candidate (the candidate set contains the full uniform grid, so
    // this holds regardless of where hint/query points fall between grid
    // nodes).
    const double cell = (hi - lo) / kGrid;
    const double a = std::max(lo, candidates[best] - cell);
    const double b = std::min(hi, candidates[best] + cell);
    if (b - a <= resolution) {
      out[j] = candidates[best];
    } else {
      out[j] = golden_refine(objective, a, candidates[best], b, fbest,
                             resolution);
    }
  }
  return out;
}

double kkt_residual(const OperatorBundle& bundle, const BlockVector& candidate,
                    double gamma_probe) {
  if (!(gamma_probe > 0.0)) {
    throw std::invalid_argument("kkt_residual: gamma_probe must be > 0");
  }
  if (candidate.shape() != bundle.shape()) {
    throw ShapeError("kkt_residual: candidate shape does not match bundle");
  }
  const Vec& y = candidate.primal();
  Vec arg = bundle.z - bundle.B.apply(y) - bundle.Q.apply(y);
  for (Eigen::Index i = 0; i < bundle.num_blocks(); ++i) {
    arg -= bundle.blocks[static_cast<std::size_t>(i)].L.adjoint(
        candidate.dual(i));
  }
  double res = (y - bundle.A(gamma_probe, y + gamma_probe * arg)).norm();
  for (Eigen::Index i = 0; i < bundle.num_blocks(); ++i) {
    const auto& blk = bundle.blocks[static_cast<std::size_t>(i)];
    const Vec& vi = candidate.dual(i);
    const Vec argi = blk.L.apply(y) - blk.r - blk.B.apply(vi) -
                     blk.Q.apply(vi);
    res = std::max(res,
                   (vi - blk.A(gamma_probe, vi + gamma_probe * argi)).norm());
  }
  return res;
}

double StepSizeRule::at(long k) const {
  switch (kind) {
    case Kind::constant:
      return t0;
    case Kind::inv_sqrt:
      return t0 / std::sqrt(static_cast<double>(k + 1));
    case Kind::inv_k:
      return t0 / static_cast<double>(k + 1);
  }
  return t0;
}

OracleSolution subgradient_oracle(const MinProblem& p, long iters,
                                  const StepSizeRule& rule,
                                  unsigned long long seed) {
  p.validate();
  if (iters < 1) {
    throw std::invalid_argument("subgradient_oracle: iters must be >= 1");
  }
  const bool project_mode = p.f.is_indicator();
  if (project_mode && p.f.family() == FunctionSpec::Family::separable) {
    throw std::invalid_argument(
        "subgradient_oracle: mixed separable objectives with indicator "
        "parts are not supported");
  }
  for (const MinBlock& b : p.blocks) {
    if (!b.ell.moreau_s) {
      throw std::invalid_argument(
          "subgradient_oracle: objective unavailable (no closed form for a "
          "block term)");
    }
  }
  if (!p.h.has_value()) {
    throw std::invalid_argument(
        "subgradient_oracle: objective unavailable (h has no value oracle)");
  }

  auto smooth_grad = [&](const Vec& x) -> Vec {
    Vec g = p.h.gradient(x) - p.z;
    for (const MinBlock& b : p.blocks) {
      g += b.L.adjoint(moreau_envelope_gradient(b.g, *b.ell.moreau_s,
                                                b.L.apply(x) - b.r));
    }
    return g;
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec x(p.f.dim());
  for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = 0.1 * normal(rng);
  if (project_mode) x = p.f.project(x);

  Vec best = x;
  double fbest = *primal_objective(p, x);
  for (long k = 0; k < iters; ++k) {
    Vec g = smooth_grad(x);
    if (!project_mode) g += p.f.subgradient(x);
    x -= rule.at(k) * g;
    if (project_mode) x = p.f.project(x);
    const double fx = *primal_objective(p, x);
    if (fx < fbest) {
      fbest = fx;
      best = x;
    }
  }

  // Certificate: projected-gradient displacement at the best point with a
  // unit reference step.
  const double t_ref = std::min(1.0, rule.t0);
  Vec probe = best - t_ref * smooth_grad(best);
  if (project_mode) {
    probe = p.f.project(probe);
  } else {
    probe -= t_ref * p.f.subgradient(best);
  }
  OracleSolution sol;
  sol.point = best;
  sol.certificate = (best - probe).norm() / t_ref;
  sol.method = "subgradient";
  return sol;
}

}  // namespace pdbrf
