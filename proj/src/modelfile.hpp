#pragma once

#include <string>
#include <vector>

#include "graded.hpp"
#include "immersion.hpp"
#include "symfield.hpp"

namespace holomap::modelfile {

struct AnalysisBlock {
  double eps = 1.0;
  int steps = 128;
  int grid = 32;
  double tol_rank = 1e-8;
  double tol_cert = 1e-6;
  double tol_deg = 1e-9;
  std::vector<double> sigma0_origin;              // parameter space
  std::vector<std::vector<double>> sigma0_dirs;   // m-1 directions
  std::vector<double> sigma0_extents;
  std::vector<double> region_lo, region_hi;       // degree-scan box
  int target_degree = -1;                         // -1: not declared
};

struct ExpectedEntry {
  std::string key;
  std::string value;
  std::string note; // free-form source remark
};

struct Model {
  std::string name;
  graded::GradedFrame frame;
  immersion::Immersion im;
  AnalysisBlock analysis;
  bool has_controls = false;
  std::vector<sym::Expr> controls;       // expressions in the parameters
  std::vector<std::string> control_text; // original expression text
  std::string controls_csv;              // alternative: CSV path
  std::vector<ExpectedEntry> expected;
};

/// Parses the line-oriented model format with sections [coords], [frame],
/// [immersion], [analysis], [controls], [expected]. Reports errors with line
/// numbers.
Model parse_model(const std::string& text);

/// Serializes back to the same format; parse(to_text(m)) computes
/// identically to m.
std::string to_text(const Model& m);

} // namespace holomap::modelfile
