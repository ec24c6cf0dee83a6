#include "pdbrf/cli_run.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace pdbrf {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << body;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string history_table(const std::vector<IterateRecord>& history,
                          Eigen::Index m) {
  std::ostringstream t;
  t << "n\tstep_norm_sq\tcum_step_sum\tprimal_residual_norm";
  for (Eigen::Index i = 1; i <= m; ++i) t << "\tdual_residual_norm_" << i;
  t << "\twall_time_ns\n";
  for (const IterateRecord& rec : history) {
    t << rec.n << '\t' << fmt17(rec.step_norm_sq) << '\t'
      << fmt17(rec.cumulative_step_sum) << '\t'
      << fmt17(rec.primal_residual_norm);
    for (Eigen::Index i = 0; i < m; ++i) {
      t << '\t'
        << fmt17(i < static_cast<Eigen::Index>(rec.dual_residual_norms.size())
                     ? rec.dual_residual_norms[static_cast<std::size_t>(i)]
                     : std::numeric_limits<double>::quiet_NaN());
    }
    // Fixed at 0 so history files are reproducible byte for byte; total
    // runtime is reported on stdout instead.
    t << "\t0\n";
  }
  return t.str();
}

struct RunArtifacts {
  BlockVector solution;
  std::vector<IterateRecord> history;
  RunStatus status = RunStatus::iteration_limit;
  long iterations = 0;
  Eigen::Index history_dual_columns = 0;
};

RunArtifacts execute(const RunConfig& rc) {
  if (rc.solver == SolverKind::frb) {
    const SingleInclusion flat = flatten_bundle(rc.bundle);
    FrbSeeds seeds{flatten(rc.seeds.x_minus1), flatten(rc.seeds.x0)};
    FrbResult res = frb_run(flat, rc.frb_gamma, seeds, rc.stop);
    return {unflatten(rc.bundle.shape(), res.solution),
            std::move(res.history), res.status, res.iterations, 0};
  }
  RunResult res = run(rc.bundle, rc.schedule, rc.policy, rc.seeds, rc.stop);
  return {std::move(res.solution), std::move(res.history), res.status,
          res.iterations, rc.bundle.num_blocks()};
}

}  // namespace

int run_cli(const std::string& config_path, const CliOverrides& overrides,
            std::ostream& out, std::ostream& err) {
  RunConfig rc;
  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      err << "error: cannot read config file '" << config_path << "'\n";
      return 1;
    }
    std::ostringstream body;
    body << in.rdbuf();
    rc = parse_config(body.str(), overrides);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  const std::filesystem::path out_dir =
      rc.output_path.empty() ? std::filesystem::path("pdbrf_out")
                             : std::filesystem::path(rc.output_path);

  try {
    std::filesystem::create_directories(out_dir);

    const auto t0 = std::chrono::steady_clock::now();
    const RunArtifacts art = execute(rc);
    const auto t1 = std::chrono::steady_clock::now();
    const long long wall_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();

    // manifest: the normalized config plus the derived run parameters
    json manifest = json::parse(rc.normalized_json);
    json derived;
    derived["gamma"] =
        rc.solver == SolverKind::frb ? rc.frb_gamma : rc.policy.gamma;
    derived["beta"] = rc.policy.beta;
    derived["beta_prime"] = rc.beta_prime;
    derived["mu"] = rc.mu;
    derived["kappa_sup"] = rc.kappa_sup;
    derived["epsilon"] = rc.epsilon;
    {
      json bounds = json::array();
      for (const auto& blk : rc.bundle.blocks) {
        bounds.push_back(blk.L.norm_bound ? json(*blk.L.norm_bound)
                                          : json(nullptr));
      }
      derived["coupling_norm_bounds"] = bounds;
    }
    manifest["derived"] = derived;
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");

    write_file(out_dir / "history.tsv",
               history_table(art.history, art.history_dual_columns));

    json cert;
    cert["solution_norm"] = block_norm(art.solution);
    cert["kkt_residual"] = kkt_residual(rc.bundle, art.solution);
    if (!art.history.empty()) {
      const IterateRecord& last = art.history.back();
      cert["p_norm"] = last.primal_residual_norm;
      cert["q_norms"] = last.dual_residual_norms;
    } else {
      cert["p_norm"] = nullptr;
      cert["q_norms"] = json::array();
    }
    cert["iterations"] = art.iterations;
    cert["status"] = to_string(art.status);
    if (rc.min) {
      std::vector<Vec> duals;
      for (Eigen::Index i = 0; i < art.solution.num_dual_blocks(); ++i) {
        duals.push_back(art.solution.dual(i));
      }
      const auto pobj = primal_objective(*rc.min, art.solution.primal());
      const auto dobj = dual_objective(*rc.min, duals);
      if (pobj && std::isfinite(*pobj)) cert["primal_objective"] = *pobj;
      if (dobj && std::isfinite(*dobj)) cert["dual_objective"] = *dobj;
      if (pobj && dobj && std::isfinite(*pobj) && std::isfinite(*dobj)) {
        cert["duality_gap"] = *pobj + *dobj;
      }
    }
    write_file(out_dir / "certificate.json", cert.dump(2) + "\n");

    out << "status: " << to_string(art.status) << "\n"
        << "iterations: " << art.iterations << "\n"
        << "kkt_residual: " << fmt17(cert["kkt_residual"].get<double>())
        << "\n"
        << "wall_time_ns: " << wall_ns << "\n"
        << "artifacts: " << out_dir.string() << "\n";

    switch (art.status) {
      case RunStatus::converged:
        return 0;
      case RunStatus::iteration_limit:
        return 2;
      case RunStatus::diverged:
        return 3;
    }
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Primal-dual backward-reflected-forward splitting solver"};
  std::string config_path;
  CliOverrides over;
  app.add_option("--config", config_path, "configuration file (JSON)")
      ->required();
  app.add_option("--max-iters", over.max_iters, "iteration cap override");
  app.add_option("--tol", over.tol, "residual tolerance override");
  app.add_option("--gamma", over.gamma, "step size override");
  app.add_option("--epsilon", over.epsilon, "step-size slack override");
  app.add_option("--seed", over.seed, "random seed override");
  app.add_option("--output", over.output, "output directory override");
  app.add_option("--solver", over.solver,
                 "solver override (brf | frb | convex_min)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return run_cli(config_path, over, std::cout, std::cerr);
}

}  // namespace pdbrf
