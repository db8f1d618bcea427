#pragma once

#include <json.hpp>
#include <string>

#include "modelfile.hpp"

namespace holomap::runner {

/// Command-line overrides; negative values keep the model's analysis block.
struct Options {
  double eps = -1.0;
  int steps = -1;
  int grid = -1;
  double tol_rank = -1.0;
  double tol_cert = -1.0;
  double tol_deg = -1.0;
};

struct RunResult {
  nlohmann::json report;
  int exit_code = 0; // 0 computed, 2 singular verdict (regularity command)
};

/// Dispatches one subcommand: degree, frame, coeffs, holonomy, regularity,
/// singular, variation, example. `arg` carries the builtin name for example
/// and the probe coefficients for variation. Throws holomap::Error on any
/// domain or input failure.
RunResult run(const modelfile::Model& model, const std::string& command,
              const Options& opts, const std::string& arg);

} // namespace holomap::runner
