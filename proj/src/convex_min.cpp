#include "pdbrf/convex_min.hpp"

#include <cmath>

namespace pdbrf {

SmoothTerm SmoothTerm::zero(Eigen::Index dim, double beta0) {
  if (!(beta0 > 0.0)) {
    throw std::invalid_argument("SmoothTerm::zero: beta0 must be > 0");
  }
  SmoothTerm h;
  h.family = Family::zero;
  h.dim = dim;
  h.beta0 = beta0;
  h.gradient = [dim](const Vec&) -> Vec { return Vec::Zero(dim); };
  h.value_fn = [](const Vec&) { return 0.0; };
  return h;
}

SmoothTerm SmoothTerm::sq_dist(Vec point, double weight) {
  if (!(weight > 0.0)) {
    throw std::invalid_argument("SmoothTerm::sq_dist: weight must be > 0");
  }
  SmoothTerm h;
  h.family = Family::sq_dist;
  h.dim = point.size();
  h.weight = weight;
  h.point = std::move(point);
  h.beta0 = 1.0 / weight;
  const Vec c = h.point;
  h.gradient = [c, weight](const Vec& x) -> Vec { return weight * (x - c); };
  h.value_fn = [c, weight](const Vec& x) {
    return 0.5 * weight * (x - c).squaredNorm();
  };
  return h;
}

SmoothTerm SmoothTerm::custom(Eigen::Index dim,
                              std::function<Vec(const Vec&)> grad,
                              double beta0,
                              std::function<double(const Vec&)> value) {
  if (!(beta0 > 0.0)) {
    throw std::invalid_argument("SmoothTerm::custom: beta0 must be > 0");
  }
  SmoothTerm h;
  h.family = Family::custom;
  h.dim = dim;
  h.gradient = std::move(grad);
  h.beta0 = beta0;
  h.value_fn = std::move(value);
  return h;
}

double SmoothTerm::value(const Vec& x) const {
  if (!value_fn) {
    throw std::logic_error("SmoothTerm::value: no value oracle registered");
  }
  return value_fn(x);
}

StronglyConvexTerm StronglyConvexTerm::scaled_sq(Eigen::Index dim, double s) {
  if (!(s > 0.0)) {
    throw std::invalid_argument("StronglyConvexTerm::scaled_sq: s must be > 0");
  }
  StronglyConvexTerm ell;
  ell.dim = dim;
  ell.grad_conj = [s](const Vec& v) -> Vec { return s * v; };
  ell.beta = 1.0 / s;
  ell.moreau_s = s;
  ell.conj_value_fn = [s](const Vec& v) { return 0.5 * s * v.squaredNorm(); };
  return ell;
}

StronglyConvexTerm StronglyConvexTerm::custom(
    Eigen::Index dim, std::function<Vec(const Vec&)> grad_conj, double beta,
    std::function<double(const Vec&)> conj_value) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("StronglyConvexTerm::custom: beta must be > 0");
  }
  StronglyConvexTerm ell;
  ell.dim = dim;
  ell.grad_conj = std::move(grad_conj);
  ell.beta = beta;
  ell.conj_value_fn = std::move(conj_value);
  return ell;
}

SpaceShape MinProblem::shape() const {
  SpaceShape s;
  s.dim_primal = f.dim();
  s.dims_dual.reserve(blocks.size());
  for (const MinBlock& b : blocks) s.dims_dual.push_back(b.g.dim());
  return s;
}

void MinProblem::validate() const {
  const SpaceShape s = shape();
  s.validate();
  if (h.dim != s.dim_primal || z.size() != s.dim_primal) {
    throw ShapeError("MinProblem: h or z does not match the primal space");
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const MinBlock& b = blocks[i];
    const Eigen::Index d = s.dims_dual[i];
    if (b.ell.dim != d || b.r.size() != d) {
      throw ShapeError("MinProblem: block term dimensions do not match");
    }
    if (b.L.rows != d || b.L.cols != s.dim_primal) {
      throw ShapeError("MinProblem: coupling map dimensions do not match");
    }
  }
}

OperatorBundle build_inclusion(const MinProblem& p) {
  p.validate();
  OperatorBundle bundle;
  bundle.A = prox_factory(p.f);
  bundle.B = CocoerciveOperator{p.h.gradient, p.h.beta0, p.h.dim};
  bundle.Q = zero_lipschitz(p.f.dim());
  bundle.z = p.z;
  bundle.blocks.reserve(p.blocks.size());
  for (const MinBlock& b : p.blocks) {
    OperatorBundle::DualBlock blk{
        conjugate_prox(prox_factory(b.g)),
        CocoerciveOperator{b.ell.grad_conj, b.ell.beta, b.ell.dim},
        zero_lipschitz(b.g.dim()), b.L, b.r};
    bundle.blocks.push_back(std::move(blk));
  }
  return bundle;
}

MinSolveResult solve_min(const MinProblem& p, const StepPolicy& policy,
                         const Seeds& seeds, const StopRule& stop,
                         const std::optional<PerturbationSchedule>& schedule) {
  OperatorBundle bundle = build_inclusion(p);
  const PerturbationSchedule sched =
      schedule ? *schedule : PerturbationSchedule::exact(bundle.shape());
  RunResult rr = run(bundle, sched, policy, seeds, stop);
  MinSolveResult out;
  out.primal = rr.solution.primal();
  out.duals.reserve(static_cast<std::size_t>(rr.solution.num_dual_blocks()));
  for (Eigen::Index i = 0; i < rr.solution.num_dual_blocks(); ++i) {
    out.duals.push_back(rr.solution.dual(i));
  }
  out.history = std::move(rr.history);
  out.status = rr.status;
  out.iterations = rr.iterations;
  return out;
}

double moreau_envelope_value(const FunctionSpec& g, double s, const Vec& u) {
  if (!(s > 0.0)) {
    throw std::invalid_argument("moreau_envelope_value: s must be > 0");
  }
  const Vec pr = g.prox(s, u);
  return g.value(pr) + (u - pr).squaredNorm() / (2.0 * s);
}

Vec moreau_envelope_gradient(const FunctionSpec& g, double s, const Vec& u) {
  if (!(s > 0.0)) {
    throw std::invalid_argument("moreau_envelope_gradient: s must be > 0");
  }
  return (u - g.prox(s, u)) / s;
}

std::optional<double> primal_objective(const MinProblem& p, const Vec& x) {
  p.validate();
  if (x.size() != p.f.dim()) {
    throw ShapeError("primal_objective: wrong primal dimension");
  }
  if (!p.h.has_value()) return std::nullopt;
  for (const MinBlock& b : p.blocks) {
    if (!b.ell.moreau_s) return std::nullopt;
  }
  double acc = p.f.value(x) + p.h.value(x) - p.z.dot(x);
  for (const MinBlock& b : p.blocks) {
    acc += moreau_envelope_value(b.g, *b.ell.moreau_s,
                                 b.L.apply(x) - b.r);
  }
  return acc;
}

namespace {

// env_w(f*)(t) computed through the conjugate prox and the conjugate value.
double conjugate_envelope(const FunctionSpec& f, double w, const Vec& t) {
  const Vec p = t - w * f.prox(1.0 / w, t / w);  // prox_{w f*}(t)
  return f.conjugate_value(p) + (t - p).squaredNorm() / (2.0 * w);
}

}  // namespace

std::optional<double> dual_objective(const MinProblem& p,
                                     const std::vector<Vec>& v) {
  p.validate();
  if (v.size() != p.blocks.size()) {
    throw ShapeError("dual_objective: wrong number of dual vectors");
  }
  Vec u = p.z;
  double acc = 0.0;
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    const MinBlock& b = p.blocks[i];
    if (v[i].size() != b.g.dim()) {
      throw ShapeError("dual_objective: dual vector has wrong dimension");
    }
    u -= b.L.adjoint(v[i]);
    if (!b.ell.conj_value_fn) return std::nullopt;
    const double gstar = b.g.conjugate_value(v[i]);
    acc += gstar + b.ell.conj_value_fn(v[i]) + v[i].dot(b.r);
  }
  // (f* [] h*)(u)
  switch (p.h.family) {
    case SmoothTerm::Family::zero:
      acc += p.f.conjugate_value(u);
      break;
    case SmoothTerm::Family::sq_dist: {
      const double w = p.h.weight;
      acc += conjugate_envelope(p.f, w, u + w * p.h.point) -
             0.5 * w * p.h.point.squaredNorm();
      break;
    }
    case SmoothTerm::Family::custom:
      return std::nullopt;
  }
  return acc;
}

}  // namespace pdbrf
