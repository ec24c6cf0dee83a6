#pragma once

#include <nlohmann/json_fwd.hpp>

#include <iosfwd>
#include <optional>
#include <string>

#include "pdbrf/convex_min.hpp"
#include "pdbrf/frb_baseline.hpp"
#include "pdbrf/oracles.hpp"

namespace pdbrf {

/// Thrown for malformed configs: syntax errors (with line/column from the
/// JSON parser), unknown keys, unresolved function names, shape
/// inconsistencies and step-size violations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolverKind { brf, frb, convex_min };
const char* to_string(SolverKind s);

/// Command-line overrides; any set field replaces the config file's value
/// before the run is resolved.
struct CliOverrides {
  std::optional<long> max_iters;
  std::optional<double> tol;
  std::optional<double> gamma;
  std::optional<double> epsilon;
  std::optional<long long> seed;
  std::optional<std::string> output;
  std::optional<std::string> solver;
};

/// A fully resolved run: problem objects built from the function registry,
/// coupling-norm bounds ensured, step size chosen (or the override
/// validated), perturbation schedule and seeds materialized.
struct RunConfig {
  SolverKind solver = SolverKind::brf;
  double epsilon = 0.01;
  bool gamma_overridden = false;
  unsigned long long seed = 0;
  StopRule stop{10000, 1e-8};
  std::string output_path;

  OperatorBundle bundle;          // norm bounds present
  std::optional<MinProblem> min;  // set for problem kind "min"
  PerturbationSchedule schedule = PerturbationSchedule::exact(
      SpaceShape{1, {1}});
  Seeds seeds = Seeds::zeros(SpaceShape{1, {1}});

  StepPolicy policy;        // gamma/beta/mu/kappa_sup/epsilon (brf-style)
  double frb_gamma = 0.0;   // resolved step for the frb solver
  double beta_prime = 0.0;  // echoed in the manifest
  double mu = 0.0;
  double kappa_sup = 0.0;

  /// Normalized configuration (the manifest body minus "derived"); parsing
  /// it again reproduces this run exactly.
  std::string normalized_json;
};

/// Parses, validates and resolves a configuration. Unknown keys are
/// rejected; every function family name is resolved against the registry;
/// shapes are checked; the step-size inequality is enforced (spelled out in
/// the error when violated).
RunConfig parse_config(const std::string& text,
                       const CliOverrides& overrides = {});

}  // namespace pdbrf
