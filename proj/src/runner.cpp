#include "runner.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "admissibility.hpp"
#include "models.hpp"
#include "regularity.hpp"
#include "variation.hpp"

namespace holomap::runner {

using nlohmann::json;

namespace {

struct Applied {
  double eps = 1.0;
  int steps = 128;
  int grid = 32;
  double tol_rank = 1e-8, tol_cert = 1e-6, tol_deg = 1e-9;
  std::vector<double> lo, hi;
};

Applied apply(const modelfile::Model& m, const Options& o) {
  const auto& a = m.analysis;
  Applied r;
  r.eps = o.eps > 0 ? o.eps : a.eps;
  r.steps = o.steps > 0 ? o.steps : a.steps;
  r.grid = o.grid > 0 ? o.grid : a.grid;
  r.tol_rank = o.tol_rank > 0 ? o.tol_rank : a.tol_rank;
  r.tol_cert = o.tol_cert > 0 ? o.tol_cert : a.tol_cert;
  r.tol_deg = o.tol_deg > 0 ? o.tol_deg : a.tol_deg;
  const int mdim = m.im.param_dim();
  r.lo = a.region_lo.empty() ? std::vector<double>(static_cast<size_t>(mdim), 0.0) : a.region_lo;
  r.hi = a.region_hi.empty() ? std::vector<double>(static_cast<size_t>(mdim), 1.0) : a.region_hi;
  if (static_cast<int>(r.lo.size()) != mdim || static_cast<int>(r.hi.size()) != mdim)
    throw Error("analysis region dimension does not match the immersion parameters");
  return r;
}

std::vector<std::vector<double>> param_grid(const Applied& ap, int mdim, int budget = 4096) {
  int per = ap.grid;
  while (per > 2 && std::pow(static_cast<double>(per), mdim) > budget) --per;
  per = std::max(per, 2);
  std::vector<std::vector<double>> out;
  int total = 1;
  for (int a = 0; a < mdim; ++a) total *= per;
  out.reserve(static_cast<size_t>(total));
  for (int t = 0; t < total; ++t) {
    std::vector<double> q(static_cast<size_t>(mdim));
    int rem = t;
    for (int a = 0; a < mdim; ++a) {
      int i = rem % per;
      rem /= per;
      q[static_cast<size_t>(a)] =
          ap.lo[static_cast<size_t>(a)] +
          (ap.hi[static_cast<size_t>(a)] - ap.lo[static_cast<size_t>(a)]) * i / (per - 1);
    }
    out.push_back(std::move(q));
  }
  return out;
}

json vec_json(const Eigen::VectorXd& v) {
  json j = json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

json mat_json(const Eigen::MatrixXd& m) {
  json j = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(std::move(row));
  }
  return j;
}

json frame_report_json(const graded::FrameReport& fr) {
  return {{"invertible", fr.invertible},
          {"bracket_compatible", fr.bracket_compatible},
          {"equiregular", fr.equiregular},
          {"worst_bracket_leak", fr.worst_bracket_leak},
          {"min_abs_det", fr.min_abs_det},
          {"pass", fr.pass()}};
}

struct Pipeline {
  immersion::AdaptedBasis basis;
  immersion::CylinderGrid cyl;
  admissibility::RuledSystem sys;
};

Pipeline build_pipeline(const modelfile::Model& m, const Applied& ap) {
  const int mdim = m.im.param_dim();
  Applied coarse = ap;
  coarse.grid = 5;
  auto grid = param_grid(coarse, mdim);
  Pipeline p;
  p.basis = immersion::adapted_split(m.im, m.frame, grid, ap.tol_deg);

  immersion::Sigma0Spec sig;
  const auto& a = m.analysis;
  sig.origin = Eigen::VectorXd(mdim);
  for (int i = 0; i < mdim; ++i)
    sig.origin(i) = a.sigma0_origin.empty() ? ap.lo[static_cast<size_t>(i)]
                                            : a.sigma0_origin[static_cast<size_t>(i)];
  if (!a.sigma0_origin.empty() && static_cast<int>(a.sigma0_origin.size()) != mdim)
    throw Error("sigma0_origin dimension mismatch");
  if (!a.sigma0_dirs.empty() && static_cast<int>(a.sigma0_dirs.size()) != mdim - 1)
    throw Error("need exactly m-1 sigma0_dir lines");
  for (int d = 0; d < mdim - 1; ++d) {
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(mdim);
    if (a.sigma0_dirs.empty()) {
      dir(d + 1) = 1.0;
    } else {
      if (static_cast<int>(a.sigma0_dirs[static_cast<size_t>(d)].size()) != mdim)
        throw Error("sigma0_dir dimension mismatch");
      for (int i = 0; i < mdim; ++i) dir(i) = a.sigma0_dirs[static_cast<size_t>(d)][static_cast<size_t>(i)];
    }
    sig.dirs.push_back(dir);
    double ext = a.sigma0_extents.empty()
                     ? ap.hi[static_cast<size_t>(d + 1)] - ap.lo[static_cast<size_t>(d + 1)]
                     : a.sigma0_extents[static_cast<size_t>(d)];
    sig.extents.push_back(ext);
    sig.counts.push_back(std::min(ap.grid, 64));
  }
  p.cyl = immersion::characteristic_coords(m.im, p.basis, sig, ap.eps, ap.steps);
  p.sys = admissibility::build_system(m.frame, p.basis, p.cyl);
  return p;
}

admissibility::ControlField load_controls(const modelfile::Model& m, const Pipeline& p) {
  if (!m.has_controls) return admissibility::zero_controls(p.sys);
  if (!m.controls_csv.empty()) {
    std::ifstream in(m.controls_csv);
    if (!in) throw Error("cannot open control CSV '" + m.controls_csv + "'");
    return admissibility::controls_from_csv(in, p.sys);
  }
  if (static_cast<int>(m.controls.size()) != p.sys.k)
    throw Error("model declares " + std::to_string(m.controls.size()) + " controls but k = " +
                std::to_string(p.sys.k));
  return admissibility::controls_from_exprs(p.cyl, m.controls);
}

json header(const modelfile::Model& m, const std::string& command) {
  return {{"schema", 1}, {"command", command}, {"model", m.name}};
}

json cmd_degree(const modelfile::Model& m, const Applied& ap) {
  json j = header(m, "degree");
  const int mdim = m.im.param_dim();
  auto grid = param_grid(ap, mdim);
  auto pg = param_grid(ap, mdim, 128);
  std::vector<std::vector<double>> ambient;
  for (const auto& q : pg) ambient.push_back(m.im.map_point(q));
  j["frame_check"] = frame_report_json(graded::validate_frame(m.frame, ambient));
  int deg = immersion::global_degree(m.im, m.frame, grid, ap.tol_deg);
  j["degree"] = deg;
  j["degree_max_possible"] = graded::d_max(m.frame, mdim);
  auto flag = immersion::flag_dims(m.im, m.frame, grid[0], ap.tol_deg);
  j["flag"] = flag;
  auto sing = immersion::singular_scan(m.im, m.frame, grid, ap.tol_deg);
  json sp = json::array();
  for (const auto& q : sing) sp.push_back(q);
  j["singular_points"] = std::move(sp);
  try {
    auto [iota0, k] = immersion::iota_k(m.im, m.frame, grid, ap.tol_deg);
    j["iota0"] = iota0;
    j["k"] = k;
    j["ruled"] = (deg == (mdim - 1) * m.frame.step() + iota0 &&
                  flag[static_cast<size_t>(iota0 - 1)] == 1);
  } catch (const Error& e) {
    j["flag_constant"] = false;
    j["flag_error"] = e.what();
  }
  if (m.analysis.target_degree >= 0) {
    j["target_degree"] = m.analysis.target_degree;
    j["target_met"] = (deg == m.analysis.target_degree);
  }
  return j;
}

json basis_json(const immersion::AdaptedBasis& b, const graded::GradedFrame& frame) {
  json j;
  j["iota0"] = b.iota0;
  j["k"] = b.k;
  j["degree"] = b.degree;
  j["flag"] = b.flag;
  auto fields = [&](const std::vector<sym::VectorField>& fs, const std::vector<int>& degs) {
    json arr = json::array();
    for (size_t i = 0; i < fs.size(); ++i) {
      json comps = json::array();
      for (const auto& c : fs[i].comps) comps.push_back(sym::to_string(c));
      arr.push_back({{"degree", degs[i]}, {"components", std::move(comps)}});
    }
    return arr;
  };
  j["E"] = fields(b.E, b.E_degrees);
  j["V"] = fields(b.V, b.V_degrees);
  j["V_names"] = b.V_names;
  j["coordinates"] = frame.coords;
  return j;
}

json cmd_frame(const modelfile::Model& m, const Applied& ap) {
  json j = header(m, "frame");
  Applied coarse = ap;
  coarse.grid = 5;
  auto grid = param_grid(coarse, m.im.param_dim());
  auto basis = immersion::adapted_split(m.im, m.frame, grid, ap.tol_deg);
  j["adapted_basis"] = basis_json(basis, m.frame);
  std::vector<std::vector<double>> ambient;
  for (const auto& q : grid) ambient.push_back(m.im.map_point(q));
  j["frame_check"] = frame_report_json(graded::validate_frame(m.frame, ambient));
  return j;
}

json cmd_coeffs(const modelfile::Model& m, const Applied& ap) {
  json j = header(m, "coeffs");
  Pipeline p = build_pipeline(m, ap);
  j["q"] = p.sys.q;
  j["k"] = p.sys.k;
  j["rows"] = p.sys.rows();
  j["row_fields"] = p.sys.row_names;
  j["col_fields"] = p.sys.col_names;
  json arr = json::array();
  for (int r = 0; r < p.sys.rows(); ++r) {
    json row;
    json As = json::array(), Bs = json::array();
    for (int i = 0; i < p.sys.nodes(); ++i) {
      As.push_back(mat_json(p.sys.A[static_cast<size_t>(r)][static_cast<size_t>(2 * i)]));
      Bs.push_back(mat_json(p.sys.B[static_cast<size_t>(r)][static_cast<size_t>(2 * i)]));
    }
    row["A"] = std::move(As);
    row["B"] = std::move(Bs);
    arr.push_back(std::move(row));
  }
  j["characteristics"] = std::move(arr);
  j["sup_norm_B"] = p.sys.sup_normB();
  return j;
}

json cmd_holonomy(const modelfile::Model& m, const Applied& ap) {
  json j = header(m, "holonomy");
  Pipeline p = build_pipeline(m, ap);
  auto g = load_controls(m, p);
  auto sol = admissibility::solve_ruled(p.sys, g);
  auto hol = admissibility::holonomy(p.sys, g);
  double agree = 0.0;
  json F = json::array(), D = json::array();
  for (int r = 0; r < p.sys.rows(); ++r) {
    F.push_back(vec_json(hol.F_eps[static_cast<size_t>(r)]));
    D.push_back(mat_json(hol.D_eps[static_cast<size_t>(r)]));
    agree = std::max(agree, (hol.F_eps[static_cast<size_t>(r)] -
                             sol.F[static_cast<size_t>(r)].back())
                                .cwiseAbs()
                                .maxCoeff());
  }
  j["F_eps"] = std::move(F);
  j["D_eps"] = std::move(D);
  j["formula_vs_solver"] = agree;
  j["residual"] = admissibility::general_residual(p.sys, sol, g);
  auto est = admissibility::norm_estimate(p.sys, g, sol);
  j["norm_estimate"] = {{"sup_B", est.sup_B}, {"C1", est.C1},   {"K", est.K},
                        {"sup_AG", est.sup_AG}, {"lhs", est.lhs}, {"bound", est.bound},
                        {"ok", est.ok}};
  return j;
}

json regularity_json(const modelfile::Model& m, const Applied& ap, const Pipeline& p,
                     bool full_certificates) {
  auto rep = regularity::is_regular(p.sys, ap.tol_rank, ap.tol_cert);
  json j;
  j["verdict"] = rep.regular ? "regular" : "singular";
  j["vertical_dim"] = rep.vertical_dim;
  j["tol_rank"] = rep.tau_rank;
  j["tol_cert"] = rep.tau_cert;
  json pts = json::array();
  for (size_t i = 0; i < rep.points.size(); ++i) {
    const auto& pr = rep.points[i];
    json pj;
    pj["index"] = i;
    pj["rank"] = pr.rank;
    pj["full"] = pr.full;
    pj["singular_values"] = vec_json(pr.singular_values);
    if (pr.certificate) {
      const auto& c = *pr.certificate;
      json cj;
      cj["gamma"] = vec_json(c.gamma);
      cj["res_lambda_A"] = c.res_lambda_A;
      cj["res_ode"] = c.res_ode;
      cj["min_lambda"] = c.min_lambda;
      cj["certified"] = (c.res_lambda_A < ap.tol_cert && c.res_ode < ap.tol_cert &&
                         c.min_lambda > 0.0);
      if (full_certificates) {
        json lam = json::array();
        for (const auto& l : c.lambda) lam.push_back(vec_json(l));
        cj["lambda"] = std::move(lam);
      }
      pj["certificate"] = std::move(cj);
    }
    pts.push_back(std::move(pj));
  }
  j["points"] = std::move(pts);
  return j;
}

json cmd_variation(const modelfile::Model& m, const Applied& ap, const std::string& arg) {
  if (arg.empty())
    throw Error("variation needs a probe: comma-separated coefficient expressions over "
                "the adapted basis, in the immersion parameters");
  json j = header(m, "variation");
  Applied coarse = ap;
  coarse.grid = 5;
  auto grid = param_grid(coarse, m.im.param_dim());
  auto basis = immersion::adapted_split(m.im, m.frame, grid, ap.tol_deg);

  variation::Probe probe;
  {
    std::string cur;
    int depth = 0;
    auto flush = [&]() {
      probe.coeffs.push_back(sym::parse(cur, m.im.params));
      cur.clear();
    };
    for (char c : arg) {
      if (c == '(') ++depth;
      if (c == ')') --depth;
      if (c == ',' && depth == 0) flush();
      else cur += c;
    }
    flush();
  }
  if (static_cast<int>(probe.coeffs.size()) != basis.n)
    throw Error("probe needs " + std::to_string(basis.n) + " coefficients (one per adapted field)");

  variation::LatticeSpec lat;
  const int mdim = m.im.param_dim();
  lat.lo = Eigen::VectorXd(mdim);
  lat.hi = Eigen::VectorXd(mdim);
  for (int i = 0; i < mdim; ++i) {
    lat.lo(i) = ap.lo[static_cast<size_t>(i)];
    lat.hi(i) = ap.hi[static_cast<size_t>(i)];
    lat.counts.push_back(17);
  }
  int d = m.analysis.target_degree >= 0
              ? m.analysis.target_degree
              : immersion::global_degree(m.im, m.frame, param_grid(coarse, mdim), ap.tol_deg);
  std::vector<double> times = {1e-2, 3.162e-3, 1e-3, 3.162e-4, 1e-4};
  auto table = variation::first_order_check(m.im, m.frame, basis, probe, lat, d, times);
  j["degree"] = d;
  j["t"] = table.t;
  j["rho"] = table.rho;
  j["slope"] = table.slope;
  j["inconclusive"] = table.inconclusive;
  if (table.inconclusive) j["verdict"] = "inconclusive";
  else if (table.slope >= 1.8) j["verdict"] = "first-order-degree-preserving";
  else if (table.slope <= 1.2) j["verdict"] = "first-order-obstructed";
  else j["verdict"] = "indeterminate";
  return j;
}

json heisenberg_checks(const modelfile::Model& m, const Applied& ap) {
  json j;
  const int dim = m.frame.dim();
  const int n = (dim - 1) / 2;
  const int mdim = m.im.param_dim();
  // Tangent frame of the horizontal plane: E_j = X_j exactly.
  admissibility::HeisenbergData data;
  data.n = n;
  data.alpha.assign(static_cast<size_t>(mdim), std::vector<sym::Expr>());
  data.beta.assign(static_cast<size_t>(mdim), std::vector<sym::Expr>());
  for (int jj = 0; jj < mdim; ++jj)
    for (int i = 0; i < n; ++i) {
      data.alpha[static_cast<size_t>(jj)].push_back(sym::constant(i == jj ? 1.0 : 0.0));
      data.beta[static_cast<size_t>(jj)].push_back(sym::constant(0.0));
    }
  auto pg = param_grid(ap, mdim, 64);
  std::vector<std::vector<double>> ambient;
  for (const auto& q : pg) ambient.push_back(m.im.map_point(q));
  j["horizontality_residual"] = admissibility::horizontality_check(data, ambient);
  std::vector<sym::Expr> controls(static_cast<size_t>(2 * n), sym::constant(1.0));
  j["compatibility_residual"] = admissibility::heisenberg_compat(data, controls, ambient);
  return j;
}

json cmd_example(const modelfile::Model& m, const Applied& ap) {
  json j = header(m, "example");
  j["degree_report"] = cmd_degree(m, ap);
  const bool heis = m.name.rfind("heisenberg", 0) == 0;
  Pipeline p;
  bool ruled = false;
  if (!heis) {
    p = build_pipeline(m, ap);
    ruled = true;
    j["adapted_basis"] = basis_json(p.basis, m.frame);
    j["regularity"] = regularity_json(m, ap, p, false);
  } else {
    j["heisenberg"] = heisenberg_checks(m, ap);
  }

  json matches = json::array();
  bool all_ok = true;
  auto add = [&](const std::string& key, const std::string& expected, json computed, bool ok,
                 const std::string& note) {
    matches.push_back({{"key", key}, {"expected", expected}, {"computed", std::move(computed)},
                       {"ok", ok}, {"note", note}});
    all_ok = all_ok && ok;
  };
  for (const auto& e : m.expected) {
    if (e.key == "degree") {
      int want = std::stoi(e.value);
      int got = j["degree_report"]["degree"].get<int>();
      add(e.key, e.value, got, got == want, e.note);
    } else if (e.key == "growth1") {
      int want = std::stoi(e.value);
      int got = m.frame.layer_dims()[0];
      add(e.key, e.value, got, got == want, e.note);
    } else if (e.key == "verdict" && ruled) {
      std::string got = j["regularity"]["verdict"].get<std::string>();
      add(e.key, e.value, got, got == e.value, e.note);
    } else if ((e.key == "A" || e.key == "B") && ruled && p.sys.q == 1 &&
               (e.key == "B" || p.sys.k == 1)) {
      double want = std::stod(e.value);
      double worst = 0.0;
      const auto& tab = (e.key == "A") ? p.sys.A : p.sys.B;
      for (const auto& row : tab)
        for (const auto& mat : row)
          if (mat.size() > 0) worst = std::max(worst, std::abs(mat(0, 0) - want));
      add(e.key, e.value, worst, worst < 1e-10, e.note + " (max deviation)");
    } else if (e.key == "area4" && ruled) {
      immersion::RegionSpec reg;
      const int mdim = m.im.param_dim();
      reg.lo = Eigen::VectorXd(mdim);
      reg.hi = Eigen::VectorXd(mdim);
      for (int i = 0; i < mdim; ++i) {
        reg.lo(i) = ap.lo[static_cast<size_t>(i)];
        reg.hi(i) = ap.hi[static_cast<size_t>(i)];
        reg.counts.push_back(32);
      }
      double got = immersion::degree_area(m.im, m.frame, reg, 4);
      double want = std::stod(e.value);
      add(e.key, e.value, got, std::abs(got - want) < 1e-6, e.note);
    } else {
      add(e.key, e.value, nullptr, false, "no checker for this key in this context");
    }
  }
  j["expected"] = std::move(matches);
  j["all_match"] = all_ok;
  return j;
}

} // namespace

RunResult run(const modelfile::Model& model, const std::string& command, const Options& opts,
              const std::string& arg) {
  RunResult out;
  if (command == "example") {
    modelfile::Model m = models::builtin(arg);
    Applied ap = apply(m, opts);
    out.report = cmd_example(m, ap);
    return out;
  }
  Applied ap = apply(model, opts);
  if (command == "degree") {
    out.report = cmd_degree(model, ap);
  } else if (command == "frame") {
    out.report = cmd_frame(model, ap);
  } else if (command == "coeffs") {
    out.report = cmd_coeffs(model, ap);
  } else if (command == "holonomy") {
    out.report = cmd_holonomy(model, ap);
  } else if (command == "regularity") {
    Pipeline p = build_pipeline(model, ap);
    json j = header(model, "regularity");
    json r = regularity_json(model, ap, p, false);
    for (auto& [k, v] : r.items()) j[k] = v;
    out.report = std::move(j);
    if (out.report["verdict"] == "singular") out.exit_code = 2;
  } else if (command == "singular") {
    Pipeline p = build_pipeline(model, ap);
    json j = header(model, "singular");
    json r = regularity_json(model, ap, p, true);
    for (auto& [k, v] : r.items()) j[k] = v;
    out.report = std::move(j);
  } else if (command == "variation") {
    out.report = cmd_variation(model, ap, arg);
  } else {
    throw Error("unknown command '" + command +
                "' (degree, frame, coeffs, holonomy, regularity, singular, variation, example)");
  }
  return out;
}

} // namespace holomap::runner
