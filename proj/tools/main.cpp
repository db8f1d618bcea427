#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "holomap/holomap.h"

namespace {

struct CommonArgs {
  std::string model_path;
  std::string output;
  hm_options opts{};
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_model) {
  hm_options_init(&args.opts);
  if (needs_model)
    cmd->add_option("model", args.model_path, "model file")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--output", args.output, "write the JSON report to a file");
  cmd->add_option("--eps", args.opts.eps, "cylinder length");
  cmd->add_option("--steps", args.opts.steps, "integration steps N1");
  cmd->add_option("--grid", args.opts.grid, "lattice resolution");
  cmd->add_option("--tol-rank", args.opts.tol_rank, "numeric rank tolerance");
  cmd->add_option("--tol-cert", args.opts.tol_cert, "certificate tolerance");
  cmd->add_option("--tol-deg", args.opts.tol_deg, "degree threshold");
}

int emit(const char* json, const std::string& output) {
  if (output.empty()) {
    std::cout << json << "\n";
  } else {
    std::ofstream out(output);
    if (!out) {
      std::cerr << "error: cannot write '" << output << "'\n";
      return 1;
    }
    out << json << "\n";
  }
  return 0;
}

void summary(const std::string& command, const char* json) {
  // One-line orientation on stderr; the JSON on stdout is the real report.
  std::string s(json);
  auto find_str = [&](const std::string& key) -> std::string {
    std::string pat = "\"" + key + "\": ";
    size_t p = s.find(pat);
    if (p == std::string::npos) return {};
    size_t a = p + pat.size();
    size_t b = s.find_first_of(",\n}", a);
    std::string v = s.substr(a, b - a);
    if (!v.empty() && v.front() == '"') v = v.substr(1, v.size() - 2);
    return v;
  };
  std::cerr << command;
  for (const char* key : {"model", "degree", "verdict", "slope", "all_match"}) {
    std::string v = find_str(key);
    if (!v.empty()) std::cerr << "  " << key << "=" << v;
  }
  std::cerr << "\n";
}

int run_command(const std::string& command, const hm_model* model, const CommonArgs& args,
                const std::string& arg) {
  char err[1024] = {0};
  char* json = nullptr;
  hm_status st = hm_run(model, command.c_str(), &args.opts, arg.c_str(), &json, err, sizeof err);
  if (st == HM_ERROR) {
    std::cerr << "error: " << err << "\n";
    return 1;
  }
  int rc = emit(json, args.output);
  summary(command, json);
  hm_string_free(json);
  if (rc != 0) return rc;
  return st == HM_SINGULAR ? 2 : 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"holonomy analysis of ruled submanifolds in graded manifolds"};
  app.require_subcommand(1);

  struct Sub {
    std::string name, desc;
    bool needs_model;
  };
  const Sub subs[] = {
      {"degree", "pointwise degree, flag dimensions, singular set", true},
      {"frame", "adapted tangent/complement basis", true},
      {"coeffs", "admissibility coefficient tables A, B", true},
      {"holonomy", "holonomy map endpoint F(eps,.)", true},
      {"regularity", "linear-fullness verdict (exit 2 when singular)", true},
      {"singular", "singularity certificates", true},
      {"variation", "first-order degree variation of a probe field", true},
  };
  std::map<std::string, CommonArgs> args;
  std::string probe_field, example_name;
  for (const auto& s : subs) {
    auto* cmd = app.add_subcommand(s.name, s.desc);
    add_common(cmd, args[s.name], s.needs_model);
    if (s.name == "variation")
      cmd->add_option("--field", probe_field,
                      "comma-separated coefficients over the adapted basis")
          ->required();
  }
  auto* example = app.add_subcommand("example", "run a builtin model end to end");
  example->add_option("name", example_name,
                      "engel-plane, visual-cortex, heisenberg-<n>")->required();
  add_common(example, args["example"], false);
  auto* show = app.add_subcommand("show", "print a builtin model in the model format");
  show->add_option("name", example_name, "builtin model name")->required();

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  char err[1024] = {0};
  if (command == "show") {
    hm_model* m = hm_model_builtin(example_name.c_str(), err, sizeof err);
    if (!m) {
      std::cerr << "error: " << err << "\n";
      return 1;
    }
    char* text = hm_model_to_text(m);
    std::cout << text;
    hm_string_free(text);
    hm_model_free(m);
    return 0;
  }

  CommonArgs& a = args[command];
  if (command == "example") return run_command("example", nullptr, a, example_name);

  hm_model* model = hm_model_from_file(a.model_path.c_str(), err, sizeof err);
  if (!model) {
    std::cerr << "error: " << err << "\n";
    return 1;
  }
  int rc = run_command(command, model, a, command == "variation" ? probe_field : "");
  hm_model_free(model);
  return rc;
}
