#include "pdbrf/inexact.hpp"

#include <cmath>
#include <random>

namespace pdbrf {

KappaSchedule KappaSchedule::zero() { return KappaSchedule{}; }

KappaSchedule KappaSchedule::geometric(double kappa0, double rho) {
  if (kappa0 < 0.0) {
    throw std::invalid_argument("KappaSchedule: kappa0 must be >= 0");
  }
  if (rho < 0.0 || rho >= 1.0) {
    throw std::invalid_argument(
        "KappaSchedule: geometric ratio must satisfy 0 <= rho < 1");
  }
  KappaSchedule k;
  k.kind_ = Kind::geometric;
  k.kappa0_ = kappa0;
  k.rho_ = rho;
  return k;
}

KappaSchedule KappaSchedule::finite(std::vector<double> values) {
  for (double v : values) {
    if (v < 0.0) {
      throw std::invalid_argument("KappaSchedule: values must be >= 0");
    }
  }
  KappaSchedule k;
  k.kind_ = Kind::finite;
  k.values_ = std::move(values);
  return k;
}

double KappaSchedule::at(long n) const {
  if (n < 0) throw std::invalid_argument("KappaSchedule::at: n must be >= 0");
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::geometric:
      return kappa0_ * std::pow(rho_, static_cast<double>(n));
    case Kind::finite:
      return n < static_cast<long>(values_.size())
                 ? values_[static_cast<std::size_t>(n)]
                 : 0.0;
  }
  return 0.0;
}

double KappaSchedule::sup() const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::geometric:
      return kappa0_;
    case Kind::finite: {
      double s = 0.0;
      for (double v : values_) s = std::max(s, v);
      return s;
    }
  }
  return 0.0;
}

double KappaSchedule::sum() const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::geometric:
      return kappa0_ / (1.0 - rho_);
    case Kind::finite: {
      double s = 0.0;
      for (double v : values_) s += v;
      return s;
    }
  }
  return 0.0;
}

long KappaSchedule::tail_start() const {
  return kind_ == Kind::finite ? static_cast<long>(values_.size()) : 0;
}

bool KappaSchedule::is_zero() const {
  switch (kind_) {
    case Kind::zero:
      return true;
    case Kind::geometric:
      return kappa0_ == 0.0;
    case Kind::finite:
      for (double v : values_) {
        if (v != 0.0) return false;
      }
      return true;
  }
  return true;
}

Vec BlockPerturbation::eval_shape_b(const Vec& x) const {
  return shape_b ? shape_b(x) : Vec(x - anchor_b);
}

Vec BlockPerturbation::eval_shape_q(const Vec& x) const {
  return shape_q ? shape_q(x) : Vec(x - anchor_q);
}

PerturbationSchedule PerturbationSchedule::exact(const SpaceShape& shape) {
  shape.validate();
  PerturbationSchedule s;
  s.shape_ = shape;
  s.blocks_.resize(static_cast<std::size_t>(shape.num_dual_blocks()) + 1);
  s.blocks_[0].anchor_b = Vec::Zero(shape.dim_primal);
  s.blocks_[0].anchor_q = Vec::Zero(shape.dim_primal);
  for (Eigen::Index i = 0; i < shape.num_dual_blocks(); ++i) {
    auto& b = s.blocks_[static_cast<std::size_t>(i) + 1];
    b.anchor_b = Vec::Zero(shape.dims_dual[static_cast<std::size_t>(i)]);
    b.anchor_q = Vec::Zero(shape.dims_dual[static_cast<std::size_t>(i)]);
  }
  return s;
}

PerturbationSchedule PerturbationSchedule::geometric_equal(
    const SpaceShape& shape, double kappa_aggregate, double rho) {
  PerturbationSchedule s = exact(shape);
  const double per_block =
      kappa_aggregate / std::sqrt(static_cast<double>(s.blocks_.size()));
  for (auto& b : s.blocks_) b.kappa = KappaSchedule::geometric(per_block, rho);
  return s;
}

PerturbationSchedule PerturbationSchedule::from_blocks(
    const SpaceShape& shape, std::vector<BlockPerturbation> blocks) {
  shape.validate();
  if (static_cast<Eigen::Index>(blocks.size()) !=
      shape.num_dual_blocks() + 1) {
    throw ShapeError(
        "PerturbationSchedule: needs one block entry per space block "
        "(primal first)");
  }
  auto check_anchor = [](const Vec& a, Eigen::Index d, const char* what) {
    if (a.size() != d) {
      throw ShapeError(std::string("PerturbationSchedule: anchor ") + what +
                       " has the wrong dimension");
    }
  };
  check_anchor(blocks[0].anchor_b, shape.dim_primal, "c_0");
  check_anchor(blocks[0].anchor_q, shape.dim_primal, "d_0");
  for (Eigen::Index i = 0; i < shape.num_dual_blocks(); ++i) {
    const Eigen::Index d = shape.dims_dual[static_cast<std::size_t>(i)];
    check_anchor(blocks[static_cast<std::size_t>(i) + 1].anchor_b, d, "c_i");
    check_anchor(blocks[static_cast<std::size_t>(i) + 1].anchor_q, d, "d_i");
  }
  PerturbationSchedule s;
  s.shape_ = shape;
  s.blocks_ = std::move(blocks);
  return s;
}

double PerturbationSchedule::kappa(Eigen::Index block, long n) const {
  return blocks_.at(static_cast<std::size_t>(block)).kappa.at(n);
}

bool PerturbationSchedule::is_exact() const {
  for (const auto& b : blocks_) {
    if (!b.kappa.is_zero()) return false;
  }
  return true;
}

double kappa_aggregate(const PerturbationSchedule& schedule, long n) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < schedule.num_blocks(); ++i) {
    const double k = schedule.kappa(i, n);
    acc += k * k;
  }
  return std::sqrt(acc);
}

double kappa_sup(const PerturbationSchedule& schedule) {
  long horizon = 1;
  for (Eigen::Index i = 0; i < schedule.num_blocks(); ++i) {
    horizon = std::max(horizon, schedule.block(i).kappa.tail_start());
  }
  double sup = 0.0;
  for (long n = 0; n <= horizon; ++n) {
    sup = std::max(sup, kappa_aggregate(schedule, n));
  }
  return sup;
}

namespace {

CocoerciveOperator perturb_cocoercive(const CocoerciveOperator& base,
                                      const BlockPerturbation& p, long n) {
  const double k = p.kappa.at(n);
  if (k == 0.0) return base;
  CocoerciveOperator out = base;
  out.apply = [apply = base.apply, p, k](const Vec& x) -> Vec {
    return apply(x) + k * p.eval_shape_b(x);
  };
  return out;
}

LipschitzMonotoneOperator perturb_lipschitz(
    const LipschitzMonotoneOperator& base, const BlockPerturbation& p,
    long n) {
  const double k = p.kappa.at(n);
  if (k == 0.0) return base;
  LipschitzMonotoneOperator out = base;
  out.apply = [apply = base.apply, p, k](const Vec& x) -> Vec {
    return apply(x) + k * p.eval_shape_q(x);
  };
  return out;
}

}  // namespace

OperatorBundle perturb(const OperatorBundle& bundle,
                       const PerturbationSchedule& schedule, long n) {
  if (schedule.shape() != bundle.shape()) {
    throw ShapeError("perturb: schedule shape does not match bundle");
  }
  OperatorBundle out = bundle;
  out.B = perturb_cocoercive(bundle.B, schedule.block(0), n);
  out.Q = perturb_lipschitz(bundle.Q, schedule.block(0), n);
  for (Eigen::Index i = 0; i < bundle.num_blocks(); ++i) {
    auto& blk = out.blocks[static_cast<std::size_t>(i)];
    blk.B = perturb_cocoercive(blk.B, schedule.block(i + 1), n);
    blk.Q = perturb_lipschitz(blk.Q, schedule.block(i + 1), n);
  }
  return out;
}

AuditSamples make_audit_samples(const SpaceShape& shape, int pairs_per_block,
                                unsigned long long seed,
                                std::vector<long> steps) {
  shape.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Eigen::Index d) {
    Vec v(d);
    for (Eigen::Index j = 0; j < d; ++j) v[j] = normal(rng);
    return v;
  };
  AuditSamples s;
  s.steps = std::move(steps);
  s.pairs_per_block.resize(static_cast<std::size_t>(shape.num_dual_blocks()) +
                           1);
  for (int k = 0; k < pairs_per_block; ++k) {
    s.pairs_per_block[0].emplace_back(draw(shape.dim_primal),
                                      draw(shape.dim_primal));
  }
  for (Eigen::Index i = 0; i < shape.num_dual_blocks(); ++i) {
    const Eigen::Index d = shape.dims_dual[static_cast<std::size_t>(i)];
    for (int k = 0; k < pairs_per_block; ++k) {
      s.pairs_per_block[static_cast<std::size_t>(i) + 1].emplace_back(draw(d),
                                                                      draw(d));
    }
  }
  return s;
}

AuditReport audit_condition(const OperatorBundle& bundle,
                            const PerturbationSchedule& schedule,
                            const AuditSamples& samples) {
  if (schedule.shape() != bundle.shape()) {
    throw ShapeError("audit_condition: schedule shape does not match bundle");
  }
  constexpr double kLipTol = 1e-12;
  constexpr double kAnchorTol = 1e-12;
  AuditReport rep;
  rep.worst_lipschitz_slack = std::numeric_limits<double>::infinity();
  rep.worst_anchor_error = 0.0;

  auto check_block = [&](Eigen::Index block_idx,
                         const std::function<Vec(const Vec&)>& base,
                         const std::function<Vec(const Vec&)>& pert,
                         const Vec& anchor, const char* lip_kind,
                         const char* anchor_kind, double kappa_n, long n) {
    // anchor agreement
    const double aerr = (pert(anchor) - base(anchor)).norm();
    rep.worst_anchor_error = std::max(rep.worst_anchor_error, aerr);
    if (aerr > kAnchorTol) {
      rep.violations.push_back({block_idx, n, anchor_kind, aerr});
    }
    // Lipschitz bound on the difference
    const auto& pairs =
        samples.pairs_per_block.at(static_cast<std::size_t>(block_idx));
    for (const auto& [x, y] : pairs) {
      const Vec dx = pert(x) - base(x);
      const Vec dy = pert(y) - base(y);
      const double slack = kappa_n * (x - y).norm() - (dx - dy).norm();
      rep.worst_lipschitz_slack = std::min(rep.worst_lipschitz_slack, slack);
      if (slack < -kLipTol) {
        rep.violations.push_back({block_idx, n, lip_kind, slack});
      }
    }
  };

  for (long n : samples.steps) {
    const OperatorBundle pb = perturb(bundle, schedule, n);
    check_block(0, bundle.B.apply, pb.B.apply, schedule.block(0).anchor_b,
                "lipschitz_b", "anchor_b", schedule.kappa(0, n), n);
    check_block(0, bundle.Q.apply, pb.Q.apply, schedule.block(0).anchor_q,
                "lipschitz_q", "anchor_q", schedule.kappa(0, n), n);
    for (Eigen::Index i = 0; i < bundle.num_blocks(); ++i) {
      const auto& eb = bundle.blocks[static_cast<std::size_t>(i)];
      const auto& qb = pb.blocks[static_cast<std::size_t>(i)];
      check_block(i + 1, eb.B.apply, qb.B.apply,
                  schedule.block(i + 1).anchor_b, "lipschitz_b", "anchor_b",
                  schedule.kappa(i + 1, n), n);
      check_block(i + 1, eb.Q.apply, qb.Q.apply,
                  schedule.block(i + 1).anchor_q, "lipschitz_q", "anchor_q",
                  schedule.kappa(i + 1, n), n);
    }
  }

  // Summability certificate: sum_n kappa_n <= sum_i sum_n kappa_{i,n}, and
  // each per-block sum has a closed form.
  rep.summable = true;
  rep.kappa_sum_bound = 0.0;
  for (Eigen::Index i = 0; i < schedule.num_blocks(); ++i) {
    rep.kappa_sum_bound += schedule.block(i).kappa.sum();
  }
  return rep;
}

}  // namespace pdbrf
