#include "pdbrf/config.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

namespace pdbrf {

using nlohmann::json;

const char* to_string(SolverKind s) {
  switch (s) {
    case SolverKind::brf:
      return "brf";
    case SolverKind::frb:
      return "frb";
    case SolverKind::convex_min:
      return "convex_min";
  }
  return "unknown";
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) fail(where, "unknown key '" + key + "'");
  }
}

const json& need(const json& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key '") + key + "'");
  return *it;
}

double get_num(const json& obj, const std::string& where, const char* key) {
  const json& v = need(obj, where, key);
  if (!v.is_number()) fail(where, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

double get_num_or(const json& obj, const std::string& where, const char* key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  return get_num(obj, where, key);
}

Eigen::Index get_dim(const json& obj, const std::string& where,
                     const char* key) {
  const json& v = need(obj, where, key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    fail(where, std::string("'") + key + "' must be a positive integer");
  }
  return static_cast<Eigen::Index>(v.get<long long>());
}

Vec get_vec(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where, "expected a non-empty array");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!v[j].is_number()) fail(where, "expected numbers");
    out[static_cast<Eigen::Index>(j)] = v[j].get<double>();
  }
  return out;
}

Vec get_vec_field(const json& obj, const std::string& where, const char* key) {
  return get_vec(need(obj, where, key), where + "." + key);
}

Mat get_mat_field(const json& obj, const std::string& where, const char* key) {
  const json& v = need(obj, where, key);
  const std::string w = where + "." + key;
  if (!v.is_array() || v.empty()) fail(w, "expected a non-empty array of rows");
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!v[r].is_array() || v[r].empty()) fail(w, "rows must be arrays");
    if (r == 0) {
      cols = v[r].size();
    } else if (v[r].size() != cols) {
      fail(w, "rows must all have the same length");
    }
  }
  Mat out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (!v[r][c].is_number()) fail(w, "expected numbers");
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          v[r][c].get<double>();
    }
  }
  return out;
}

std::string get_family(const json& obj, const std::string& where,
                       const char* key = "family") {
  const json& v = need(obj, where, key);
  if (!v.is_string()) fail(where, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

FunctionSpec parse_function(const json& j, const std::string& where) {
  const std::string fam = get_family(j, where);
  if (fam == "zero") {
    check_keys(j, where, {"family", "dim"});
    return FunctionSpec::zero(get_dim(j, where, "dim"));
  }
  if (fam == "l1") {
    check_keys(j, where, {"family", "dim", "weight"});
    return FunctionSpec::l1(get_dim(j, where, "dim"),
                            get_num(j, where, "weight"));
  }
  if (fam == "sq_dist") {
    check_keys(j, where, {"family", "point", "weight"});
    return FunctionSpec::sq_dist(get_vec_field(j, where, "point"),
                                 get_num(j, where, "weight"));
  }
  if (fam == "box") {
    check_keys(j, where, {"family", "lo", "hi"});
    return FunctionSpec::box(get_vec_field(j, where, "lo"),
                             get_vec_field(j, where, "hi"));
  }
  if (fam == "ball2") {
    check_keys(j, where, {"family", "center", "radius"});
    return FunctionSpec::ball2(get_vec_field(j, where, "center"),
                               get_num(j, where, "radius"));
  }
  if (fam == "affine_quad") {
    check_keys(j, where, {"family", "P", "b"});
    return FunctionSpec::affine_quad(get_mat_field(j, where, "P"),
                                     get_vec_field(j, where, "b"));
  }
  if (fam == "separable") {
    check_keys(j, where, {"family", "parts"});
    const json& parts = need(j, where, "parts");
    if (!parts.is_array() || parts.empty()) {
      fail(where, "'parts' must be a non-empty array");
    }
    std::vector<FunctionSpec> out;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      out.push_back(parse_function(
          parts[k], where + ".parts[" + std::to_string(k) + "]"));
    }
    return FunctionSpec::separable(std::move(out));
  }
  fail(where, "unknown function family '" + fam + "'");
}

LinearMap parse_linmap(const json& j, const std::string& where) {
  const std::string kind = get_family(j, where, "kind");
  if (kind == "identity") {
    check_keys(j, where, {"kind", "dim"});
    return LinearMap::identity(get_dim(j, where, "dim"));
  }
  if (kind == "scaled_identity") {
    check_keys(j, where, {"kind", "dim", "scale"});
    return LinearMap::scaled_identity(get_dim(j, where, "dim"),
                                      get_num(j, where, "scale"));
  }
  if (kind == "diagonal") {
    check_keys(j, where, {"kind", "d"});
    return LinearMap::diagonal(get_vec_field(j, where, "d"));
  }
  if (kind == "dense") {
    check_keys(j, where, {"kind", "matrix"});
    return LinearMap::dense(get_mat_field(j, where, "matrix"));
  }
  if (kind == "difference") {
    check_keys(j, where, {"kind", "dim"});
    return LinearMap::difference(get_dim(j, where, "dim"));
  }
  fail(where, "unknown linear map kind '" + kind + "'");
}

CocoerciveOperator parse_cocoercive(const json& j, const std::string& where) {
  const std::string fam = get_family(j, where);
  CocoerciveOperator op;
  if (fam == "zero") {
    check_keys(j, where, {"family", "dim", "beta"});
    op = zero_cocoercive(get_dim(j, where, "dim"),
                         get_num_or(j, where, "beta", 1.0));
    return op;
  }
  if (fam == "grad_sq_dist") {
    check_keys(j, where, {"family", "point", "weight", "beta"});
    op = gradient_sq_dist(get_vec_field(j, where, "point"),
                          get_num(j, where, "weight"));
  } else if (fam == "scaled_identity") {
    check_keys(j, where, {"family", "dim", "scale", "beta"});
    op = scaled_identity_cocoercive(get_dim(j, where, "dim"),
                                    get_num(j, where, "scale"));
  } else if (fam == "linear_psd") {
    check_keys(j, where, {"family", "matrix", "beta"});
    op = linear_cocoercive(get_mat_field(j, where, "matrix"));
  } else {
    fail(where, "unknown cocoercive family '" + fam + "'");
  }
  if (j.contains("beta")) {  // declared constant wins; audited by sampling only
    op.beta = get_num(j, where, "beta");
    if (!(op.beta > 0.0)) fail(where, "'beta' must be > 0");
  }
  return op;
}

LipschitzMonotoneOperator parse_lipmono(const json& j,
                                        const std::string& where) {
  const std::string fam = get_family(j, where);
  LipschitzMonotoneOperator op;
  if (fam == "zero") {
    check_keys(j, where, {"family", "dim"});
    return zero_lipschitz(get_dim(j, where, "dim"));
  }
  if (fam == "linear") {
    check_keys(j, where, {"family", "matrix", "mu"});
    op = linear_monotone(get_mat_field(j, where, "matrix"));
  } else if (fam == "rotation2d") {
    check_keys(j, where, {"family", "angle", "scale", "mu"});
    op = rotation2d(get_num(j, where, "angle"),
                    get_num_or(j, where, "scale", 1.0));
  } else {
    fail(where, "unknown Lipschitz-monotone family '" + fam + "'");
  }
  if (j.contains("mu")) {
    op.mu = get_num(j, where, "mu");
    if (op.mu < 0.0) fail(where, "'mu' must be >= 0");
  }
  return op;
}

SmoothTerm parse_smooth(const json& j, const std::string& where) {
  const std::string fam = get_family(j, where);
  if (fam == "zero") {
    check_keys(j, where, {"family", "dim", "beta"});
    return SmoothTerm::zero(get_dim(j, where, "dim"),
                            get_num_or(j, where, "beta", 1.0));
  }
  if (fam == "sq_dist") {
    check_keys(j, where, {"family", "point", "weight"});
    return SmoothTerm::sq_dist(get_vec_field(j, where, "point"),
                               get_num(j, where, "weight"));
  }
  fail(where, "unknown smooth family '" + fam + "'");
}

StronglyConvexTerm parse_ell(const json& j, const std::string& where,
                             Eigen::Index dim) {
  const std::string fam = get_family(j, where);
  if (fam == "scaled_sq") {
    check_keys(j, where, {"family", "s"});
    return StronglyConvexTerm::scaled_sq(dim, get_num(j, where, "s"));
  }
  fail(where, "unknown strongly convex family '" + fam + "'");
}

MinProblem parse_min_problem(const json& j, const std::string& where) {
  check_keys(j, where, {"kind", "f", "h", "z", "blocks"});
  MinProblem p{parse_function(need(j, where, "f"), where + ".f"),
               parse_smooth(need(j, where, "h"), where + ".h"),
               get_vec_field(j, where, "z"),
               {}};
  const json& blocks = need(j, where, "blocks");
  if (!blocks.is_array() || blocks.empty()) {
    fail(where, "'blocks' must be a non-empty array");
  }
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const std::string bw = where + ".blocks[" + std::to_string(k) + "]";
    const json& bj = blocks[k];
    check_keys(bj, bw, {"g", "ell", "L", "r"});
    FunctionSpec g = parse_function(need(bj, bw, "g"), bw + ".g");
    StronglyConvexTerm ell = parse_ell(need(bj, bw, "ell"), bw + ".ell",
                                       g.dim());
    LinearMap L = parse_linmap(need(bj, bw, "L"), bw + ".L");
    Vec r = get_vec_field(bj, bw, "r");
    p.blocks.push_back({std::move(g), std::move(ell), std::move(L),
                        std::move(r)});
  }
  p.validate();
  return p;
}

OperatorBundle parse_bundle(const json& j, const std::string& where) {
  check_keys(j, where, {"kind", "A", "B", "Q", "z", "blocks"});
  OperatorBundle b;
  b.A = prox_factory(parse_function(need(j, where, "A"), where + ".A"));
  b.B = parse_cocoercive(need(j, where, "B"), where + ".B");
  b.Q = parse_lipmono(need(j, where, "Q"), where + ".Q");
  b.z = get_vec_field(j, where, "z");
  const json& blocks = need(j, where, "blocks");
  if (!blocks.is_array() || blocks.empty()) {
    fail(where, "'blocks' must be a non-empty array");
  }
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const std::string bw = where + ".blocks[" + std::to_string(k) + "]";
    const json& bj = blocks[k];
    check_keys(bj, bw, {"A", "conjugate", "B", "Q", "L", "r"});
    ResolventOperator A =
        prox_factory(parse_function(need(bj, bw, "A"), bw + ".A"));
    if (bj.contains("conjugate")) {
      const json& c = bj["conjugate"];
      if (!c.is_boolean()) fail(bw, "'conjugate' must be a boolean");
      if (c.get<bool>()) A = conjugate_prox(A);
    }
    b.blocks.push_back({std::move(A),
                        parse_cocoercive(need(bj, bw, "B"), bw + ".B"),
                        parse_lipmono(need(bj, bw, "Q"), bw + ".Q"),
                        parse_linmap(need(bj, bw, "L"), bw + ".L"),
                        get_vec_field(bj, bw, "r")});
  }
  b.validate();
  return b;
}

PerturbationSchedule parse_perturbation(const json& j,
                                        const std::string& where,
                                        const SpaceShape& shape) {
  const std::string fam = get_family(j, where);
  if (fam == "zero") {
    check_keys(j, where, {"family"});
    return PerturbationSchedule::exact(shape);
  }
  if (fam == "geometric") {
    check_keys(j, where, {"family", "rho", "kappa_aggregate", "kappas"});
    const double rho = get_num(j, where, "rho");
    if (j.contains("kappa_aggregate") == j.contains("kappas")) {
      fail(where, "give exactly one of 'kappa_aggregate' and 'kappas'");
    }
    if (j.contains("kappa_aggregate")) {
      return PerturbationSchedule::geometric_equal(
          shape, get_num(j, where, "kappa_aggregate"), rho);
    }
    const Vec kappas = get_vec_field(j, where, "kappas");
    if (kappas.size() != shape.num_dual_blocks() + 1) {
      fail(where, "'kappas' needs one entry per block (primal first)");
    }
    PerturbationSchedule s = PerturbationSchedule::exact(shape);
    std::vector<BlockPerturbation> blocks;
    for (Eigen::Index i = 0; i < s.num_blocks(); ++i) {
      BlockPerturbation bp = s.block(i);
      bp.kappa = KappaSchedule::geometric(kappas[i], rho);
      blocks.push_back(std::move(bp));
    }
    return PerturbationSchedule::from_blocks(shape, std::move(blocks));
  }
  fail(where, "unknown perturbation family '" + fam + "'");
}

Seeds parse_init(const json& j, const std::string& where,
                 const SpaceShape& shape) {
  check_keys(j, where, {"x_minus1", "x0", "v_minus1", "v0"});
  Seeds seeds = Seeds::zeros(shape);
  auto read_block = [&](const char* pk, const char* dk) -> BlockVector {
    Vec primal = Vec::Zero(shape.dim_primal);
    std::vector<Vec> duals;
    for (Eigen::Index d : shape.dims_dual) duals.push_back(Vec::Zero(d));
    if (j.contains(pk)) primal = get_vec_field(j, where, pk);
    if (j.contains(dk)) {
      const json& dv = j[dk];
      if (!dv.is_array() ||
          dv.size() != static_cast<std::size_t>(shape.num_dual_blocks())) {
        fail(where, std::string("'") + dk + "' needs one array per block");
      }
      for (std::size_t i = 0; i < dv.size(); ++i) {
        duals[i] = get_vec(dv[i], where + "." + dk);
      }
    }
    return BlockVector(std::move(primal), std::move(duals));
  };
  seeds.x_minus1 = read_block("x_minus1", "v_minus1");
  seeds.x0 = read_block("x0", "v0");
  if (seeds.x_minus1.shape() != shape || seeds.x0.shape() != shape) {
    fail(where, "seed dimensions do not match the problem");
  }
  return seeds;
}

SolverKind parse_solver_name(const std::string& name,
                             const std::string& where) {
  if (name == "brf") return SolverKind::brf;
  if (name == "frb") return SolverKind::frb;
  if (name == "convex_min") return SolverKind::convex_min;
  fail(where, "unknown solver '" + name + "'");
}

}  // namespace

RunConfig parse_config(const std::string& text, const CliOverrides& over) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    check_keys(root, "top level",
               {"solver", "epsilon", "gamma", "seed", "stop", "perturbation",
                "init", "problem", "output", "derived"});

    RunConfig rc;
    std::string solver_name = "brf";
    if (root.contains("solver")) {
      solver_name = get_family(root, "top level", "solver");
    }
    if (over.solver) solver_name = *over.solver;
    rc.solver = parse_solver_name(solver_name, "solver");

    rc.epsilon = get_num_or(root, "top level", "epsilon", 0.01);
    if (over.epsilon) rc.epsilon = *over.epsilon;

    if (root.contains("seed")) {
      const json& s = root["seed"];
      if (!s.is_number_integer()) fail("seed", "must be an integer");
      rc.seed = static_cast<unsigned long long>(s.get<long long>());
    }
    if (over.seed) rc.seed = static_cast<unsigned long long>(*over.seed);

    if (root.contains("stop")) {
      check_keys(root["stop"], "stop", {"max_iters", "tol"});
      if (root["stop"].contains("max_iters")) {
        const json& mi = root["stop"]["max_iters"];
        if (!mi.is_number_integer() || mi.get<long long>() < 0) {
          fail("stop.max_iters", "must be a nonnegative integer");
        }
        rc.stop.max_iters = mi.get<long>();
      }
      rc.stop.tol = get_num_or(root["stop"], "stop", "tol", rc.stop.tol);
    }
    if (over.max_iters) rc.stop.max_iters = *over.max_iters;
    if (over.tol) rc.stop.tol = *over.tol;

    if (root.contains("output")) {
      const json& o = root["output"];
      if (!o.is_string()) fail("output", "must be a string");
      rc.output_path = o.get<std::string>();
    }
    if (over.output) rc.output_path = *over.output;

    const json& pj = need(root, "top level", "problem");
    const std::string kind = get_family(pj, "problem", "kind");
    if (kind == "min") {
      rc.min = parse_min_problem(pj, "problem");
      rc.bundle = build_inclusion(*rc.min);
    } else if (kind == "bundle") {
      rc.bundle = parse_bundle(pj, "problem");
      if (rc.solver == SolverKind::convex_min) {
        fail("solver", "convex_min requires a problem of kind 'min'");
      }
    } else {
      fail("problem.kind", "must be 'min' or 'bundle'");
    }
    const SpaceShape shape = rc.bundle.shape();

    rc.schedule = root.contains("perturbation")
                      ? parse_perturbation(root["perturbation"],
                                           "perturbation", shape)
                      : PerturbationSchedule::exact(shape);
    rc.seeds = root.contains("init") ? parse_init(root["init"], "init", shape)
                                     : Seeds::zeros(shape);

    ensure_norm_bounds(rc.bundle, 1e-10, 100000, rc.seed);
    rc.beta_prime = beta_prime(rc.bundle);
    rc.mu = lipschitz_mu(rc.bundle);
    rc.kappa_sup = kappa_sup(rc.schedule);

    std::optional<double> gamma_over;
    if (root.contains("gamma")) gamma_over = get_num(root, "top level", "gamma");
    if (over.gamma) gamma_over = *over.gamma;
    rc.gamma_overridden = gamma_over.has_value();

    if (rc.solver == SolverKind::frb) {
      if (!rc.schedule.is_exact()) {
        fail("perturbation", "the frb solver runs with exact operators only");
      }
      const double bound = frb_gamma_bound(rc.beta_prime, rc.mu);
      rc.frb_gamma = gamma_over ? *gamma_over : 0.99 * bound;
      if (!(rc.frb_gamma > 0.0) || !(rc.frb_gamma < bound)) {
        std::ostringstream msg;
        msg << "config: gamma: step-size bound violated: require 0 < gamma < "
            << "2*beta/(1+4*beta*mu) = " << bound << ", got " << rc.frb_gamma;
        throw ConfigError(msg.str());
      }
      rc.policy = StepPolicy{rc.frb_gamma, rc.epsilon, rc.kappa_sup,
                             rc.beta_prime, rc.mu};
    } else {
      if (gamma_over) {
        rc.policy = StepPolicy{*gamma_over, rc.epsilon, rc.kappa_sup,
                               0.99 * rc.beta_prime, rc.mu};
        try {
          validate_policy(rc.policy);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(std::string("config: gamma: ") + e.what());
        }
      } else {
        rc.policy =
            choose_gamma(rc.beta_prime, rc.mu, rc.kappa_sup, rc.epsilon);
      }
    }

    // Normalized echo: parsing it again reproduces this run.
    json norm;
    norm["solver"] = to_string(rc.solver);
    norm["epsilon"] = rc.epsilon;
    norm["gamma"] =
        rc.solver == SolverKind::frb ? rc.frb_gamma : rc.policy.gamma;
    norm["seed"] = static_cast<long long>(rc.seed);
    norm["stop"] = {{"max_iters", rc.stop.max_iters}, {"tol", rc.stop.tol}};
    norm["perturbation"] = root.contains("perturbation")
                               ? root["perturbation"]
                               : json{{"family", "zero"}};
    if (root.contains("init")) norm["init"] = root["init"];
    norm["problem"] = pj;
    rc.normalized_json = norm.dump(2);
    return rc;
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace pdbrf
