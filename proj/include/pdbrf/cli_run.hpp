#pragma once

#include <iosfwd>
#include <string>

#include "pdbrf/config.hpp"

namespace pdbrf {

/// Executes one configured run and writes the artifacts into the output
/// directory:
///   manifest.json     resolved parameters (re-parseable as a config)
///   history.tsv       one row per iteration
///   certificate.json  final residual certificates and objective values
/// Returns the process exit code: 0 converged, 2 iteration limit,
/// 3 diverged, 1 configuration or I/O error.
int run_cli(const std::string& config_path, const CliOverrides& overrides,
            std::ostream& out, std::ostream& err);

/// Command-line entry point (flag parsing plus run_cli).
int cli_main(int argc, const char* const* argv);

}  // namespace pdbrf
