#pragma once

#include "pdbrf/product_assembly.hpp"

namespace pdbrf {

/// Closed-form nonnegative sequence n |-> kappa_n with a certifiable supremum
/// and a certifiable finite sum. Only closed-form families are representable,
/// so summability never has to be tested numerically.
class KappaSchedule {
 public:
  static KappaSchedule zero();
  /// kappa_n = kappa0 * rho^n with kappa0 >= 0 and 0 <= rho < 1.
  static KappaSchedule geometric(double kappa0, double rho);
  /// kappa_n = values[n] for n < len, 0 afterwards.
  static KappaSchedule finite(std::vector<double> values);

  double at(long n) const;
  double sup() const;
  double sum() const;
  /// Index beyond which the sequence is non-increasing (0 for zero/geometric,
  /// the support length for finite schedules).
  long tail_start() const;
  bool is_zero() const;

 private:
  enum class Kind { zero, geometric, finite };
  Kind kind_ = Kind::zero;
  double kappa0_ = 0.0;
  double rho_ = 0.0;
  std::vector<double> values_;
};

/// Inexactness model for one block: the perturbed operators at step n are
///   B_n = B + kappa_n * R_b   and   Q_n = Q + kappa_n * R_q,
/// where R_b, R_q are 1-Lipschitz maps vanishing at the anchors c (B side)
/// and d (Q side). With this construction the required Lipschitz bound on
/// B_n - B and the anchor agreement hold exactly.
struct BlockPerturbation {
  KappaSchedule kappa;
  Vec anchor_b;  // c_i
  Vec anchor_q;  // d_i
  /// Optional custom shapes; when absent the default x |-> x - anchor is
  /// used. Custom shapes must be 1-Lipschitz and vanish at the anchor; this
  /// is the caller's responsibility and is audited by sampling only.
  std::function<Vec(const Vec&)> shape_b = {};
  std::function<Vec(const Vec&)> shape_q = {};

  Vec eval_shape_b(const Vec& x) const;
  Vec eval_shape_q(const Vec& x) const;
};

/// Per-block inexactness schedule over the whole product space. Block 0 is
/// the primal block; blocks 1..m follow the bundle's dual blocks.
class PerturbationSchedule {
 public:
  /// No perturbation (every kappa identically zero, zero anchors).
  static PerturbationSchedule exact(const SpaceShape& shape);

  /// Geometric schedule whose aggregate sqrt(sum_i kappa_{i,n}^2) equals
  /// kappa_aggregate * rho^n, split equally across the m+1 blocks; anchors at
  /// the origin, default shapes.
  static PerturbationSchedule geometric_equal(const SpaceShape& shape,
                                              double kappa_aggregate,
                                              double rho);

  static PerturbationSchedule from_blocks(const SpaceShape& shape,
                                          std::vector<BlockPerturbation> blocks);

  const SpaceShape& shape() const { return shape_; }
  const BlockPerturbation& block(Eigen::Index i) const {
    return blocks_.at(static_cast<std::size_t>(i));
  }
  Eigen::Index num_blocks() const {  // m + 1
    return static_cast<Eigen::Index>(blocks_.size());
  }

  double kappa(Eigen::Index block, long n) const;
  bool is_exact() const;

 private:
  SpaceShape shape_;
  std::vector<BlockPerturbation> blocks_;
};

/// Aggregate kappa_n = sqrt(sum_{i=0}^m kappa_{i,n}^2).
double kappa_aggregate(const PerturbationSchedule& schedule, long n);

/// sup_n of the aggregate, certified from the closed forms (exhaustive over
/// the finite supports, head value for the non-increasing tail).
double kappa_sup(const PerturbationSchedule& schedule);

/// The bundle with its single-valued operators replaced by the perturbed
/// ones at step n. Declared constants are untouched: the perturbed operators
/// carry no cocoercivity/monotonicity guarantees of their own.
OperatorBundle perturb(const OperatorBundle& bundle,
                       const PerturbationSchedule& schedule, long n);

/// Sampled audit of the inexactness conditions: per block and per probed
/// step, checks the Lipschitz bound of (perturbed - base) on the sample
/// pairs and the anchor agreement, and certifies summability from the closed
/// forms. Report-only; violations are never thrown.
struct AuditViolation {
  Eigen::Index block = 0;
  long n = 0;
  std::string kind;  // "lipschitz_b", "lipschitz_q", "anchor_b", "anchor_q"
  double slack = 0.0;
};
struct AuditReport {
  std::vector<AuditViolation> violations;
  double worst_lipschitz_slack = 0.0;  // min over samples; negative = violated
  double worst_anchor_error = 0.0;     // max |perturbed - base| at anchors
  bool summable = false;
  double kappa_sum_bound = 0.0;  // certified bound on sum_n kappa_n
};

struct AuditSamples {
  // pairs_per_block[0] lives in the primal space, entry i in dual block i.
  std::vector<std::vector<std::pair<Vec, Vec>>> pairs_per_block;
  std::vector<long> steps;  // which n to probe
};
AuditSamples make_audit_samples(const SpaceShape& shape, int pairs_per_block,
                                unsigned long long seed,
                                std::vector<long> steps = {0, 1, 2, 5, 10});

AuditReport audit_condition(const OperatorBundle& bundle,
                            const PerturbationSchedule& schedule,
                            const AuditSamples& samples);

}  // namespace pdbrf
