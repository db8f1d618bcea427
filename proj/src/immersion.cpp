#include "immersion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace holomap::immersion {

using sym::Expr;

namespace {

using ExprVec = std::vector<Expr>;
using ExprMat = std::vector<ExprVec>; // row major

int numeric_rank(const Eigen::MatrixXd& M, double tau) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tau * sv(0)) ++r;
  return r;
}

/// Cofactor-expansion determinant of a small symbolic matrix, expanding along
/// the row with the most structural zeros.
Expr det_expr(const ExprMat& M) {
  const int n = static_cast<int>(M.size());
  if (n == 0) return sym::constant(1.0);
  if (n == 1) return M[0][0];
  if (n > 8) throw Error("symbolic determinant limited to dimension 8");
  int best_row = 0, best_zeros = -1;
  for (int r = 0; r < n; ++r) {
    int z = 0;
    for (int c = 0; c < n; ++c)
      if (sym::is_zero(M[static_cast<size_t>(r)][static_cast<size_t>(c)])) ++z;
    if (z > best_zeros) {
      best_zeros = z;
      best_row = r;
    }
  }
  Expr acc = sym::constant(0.0);
  for (int c = 0; c < n; ++c) {
    const Expr& piv = M[static_cast<size_t>(best_row)][static_cast<size_t>(c)];
    if (sym::is_zero(piv)) continue;
    ExprMat sub;
    sub.reserve(static_cast<size_t>(n - 1));
    for (int r = 0; r < n; ++r) {
      if (r == best_row) continue;
      ExprVec row;
      row.reserve(static_cast<size_t>(n - 1));
      for (int cc = 0; cc < n; ++cc)
        if (cc != c) row.push_back(M[static_cast<size_t>(r)][static_cast<size_t>(cc)]);
      sub.push_back(std::move(row));
    }
    Expr term = sym::mul(piv, det_expr(sub));
    if (((best_row + c) % 2) != 0) term = sym::neg(term);
    acc = sym::add(acc, term);
  }
  return acc;
}

Eigen::VectorXd eval_exprs(const ExprVec& v, std::span<const double> p) {
  Eigen::VectorXd out(static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out(static_cast<int>(i)) = sym::eval(v[i], p);
  return out;
}

} // namespace

std::vector<double> Immersion::map_point(std::span<const double> q) const {
  std::vector<double> out(chart.size());
  for (size_t i = 0; i < chart.size(); ++i) out[i] = sym::eval(chart[i], q);
  return out;
}

namespace {

/// Symbolic chart Jacobian: column j holds d(chart)/du_j.
ExprMat chart_jacobian(const Immersion& im) {
  const int n = static_cast<int>(im.chart.size());
  const int m = im.param_dim();
  ExprMat J(static_cast<size_t>(n), ExprVec(static_cast<size_t>(m)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      J[static_cast<size_t>(i)][static_cast<size_t>(j)] = sym::diff(im.chart[static_cast<size_t>(i)], j);
  return J;
}

/// Frame coordinates of the chart tangents, as expressions in the parameters:
/// the frame matrix is restricted to the chart and the linear system solved by
/// Cramer's rule. Returns (Cmat, detM) with Cmat[i][j] the X_i coordinate of
/// dPhi/du_j.
std::pair<ExprMat, Expr> symbolic_tangent_coords(const Immersion& im,
                                                 const graded::GradedFrame& frame) {
  const int n = frame.dim();
  const int m = im.param_dim();
  if (static_cast<int>(im.chart.size()) != n)
    throw Error("immersion chart must have one component per ambient coordinate");

  ExprMat Mc(static_cast<size_t>(n), ExprVec(static_cast<size_t>(n)));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      Mc[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          sym::substitute(frame.fields[static_cast<size_t>(j)].comps[static_cast<size_t>(i)], im.chart);

  ExprMat T = chart_jacobian(im);
  Expr detM = det_expr(Mc);

  ExprMat C(static_cast<size_t>(n), ExprVec(static_cast<size_t>(m)));
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) {
      ExprMat rep = Mc;
      for (int r = 0; r < n; ++r)
        rep[static_cast<size_t>(r)][static_cast<size_t>(i)] = T[static_cast<size_t>(r)][static_cast<size_t>(j)];
      C[static_cast<size_t>(i)][static_cast<size_t>(j)] = sym::div(det_expr(rep), detM);
    }
  }
  return {std::move(C), std::move(detM)};
}

Eigen::MatrixXd eval_coords(const ExprMat& C, std::span<const double> q) {
  Eigen::MatrixXd out(static_cast<int>(C.size()), static_cast<int>(C[0].size()));
  for (size_t i = 0; i < C.size(); ++i)
    for (size_t j = 0; j < C[i].size(); ++j)
      out(static_cast<int>(i), static_cast<int>(j)) = sym::eval(C[i][j], q);
  return out;
}

std::vector<int> flag_from_coords(const Eigen::MatrixXd& C,
                                  const graded::GradedFrame& frame, double tau) {
  const int n = frame.dim();
  const int m = static_cast<int>(C.cols());
  const int s = frame.step();
  auto layers = frame.layer_dims();
  std::vector<int> flag(static_cast<size_t>(s));
  for (int l = 1; l <= s; ++l) {
    int nl = layers[static_cast<size_t>(l - 1)];
    // dim(TM ^ H^l) = m - rank of the rows above layer l
    Eigen::MatrixXd high = C.bottomRows(n - nl);
    flag[static_cast<size_t>(l - 1)] = m - numeric_rank(high, tau);
  }
  return flag;
}

} // namespace

std::vector<Eigen::VectorXd> tangent_frame(const Immersion& im,
                                           const graded::GradedFrame& frame,
                                           std::span<const double> q) {
  const int n = frame.dim();
  const int m = im.param_dim();
  ExprMat J = chart_jacobian(im);
  Eigen::MatrixXd Jn(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      Jn(i, j) = sym::eval(J[static_cast<size_t>(i)][static_cast<size_t>(j)], q);
  if (numeric_rank(Jn, 1e-12) < m)
    throw Error("chart is not an immersion: Jacobian rank deficient at sample point");
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) out.push_back(Jn.col(j));
  return out;
}

std::vector<int> flag_dims(const Immersion& im, const graded::GradedFrame& frame,
                           std::span<const double> q, double tau) {
  auto tf = tangent_frame(im, frame, q);
  auto ambient = im.map_point(q);
  const int n = frame.dim();
  Eigen::MatrixXd M = frame.matrix_at(ambient);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw Error("flag_dims: frame matrix singular");
  Eigen::MatrixXd C(n, im.param_dim());
  for (int j = 0; j < im.param_dim(); ++j) C.col(j) = lu.solve(tf[static_cast<size_t>(j)]);
  return flag_from_coords(C, frame, tau);
}

int pointwise_degree(const Immersion& im, const graded::GradedFrame& frame,
                     std::span<const double> q, double tau) {
  auto tf = tangent_frame(im, frame, q);
  auto ambient = im.map_point(q);
  auto mv = graded::expand_wedge(tf, frame, ambient);
  if (mv.coeff.empty()) throw Error("pointwise_degree: degenerate immersion (zero tangent wedge)");
  return graded::multivector_degree(mv, frame, tau);
}

int global_degree(const Immersion& im, const graded::GradedFrame& frame,
                  std::span<const std::vector<double>> grid, double tau) {
  if (grid.empty()) throw Error("global_degree: empty grid");
  int d = 0;
  for (const auto& q : grid) d = std::max(d, pointwise_degree(im, frame, q, tau));
  return d;
}

std::vector<std::vector<double>> singular_scan(const Immersion& im,
                                               const graded::GradedFrame& frame,
                                               std::span<const std::vector<double>> grid,
                                               double tau) {
  int dmax = global_degree(im, frame, grid, tau);
  std::vector<std::vector<double>> out;
  for (const auto& q : grid)
    if (pointwise_degree(im, frame, q, tau) < dmax) out.push_back(q);
  return out;
}

std::pair<int, int> iota_k(const Immersion& im, const graded::GradedFrame& frame,
                           std::span<const std::vector<double>> grid, double tau) {
  if (grid.empty()) throw Error("iota_k: empty grid");
  std::vector<int> flag = flag_dims(im, frame, grid[0], tau);
  for (size_t g = 1; g < grid.size(); ++g) {
    if (flag_dims(im, frame, grid[g], tau) != flag)
      throw Error("iota_k: tangent flag dimensions not constant over grid "
                  "(grid crosses the singular set)");
  }
  int iota0 = 0;
  for (size_t l = 0; l < flag.size(); ++l) {
    if (flag[l] != 0) {
      iota0 = static_cast<int>(l) + 1;
      break;
    }
  }
  if (iota0 == 0) throw Error("iota_k: tangent flag empty");
  auto layers = frame.layer_dims();
  int k = layers[static_cast<size_t>(iota0 - 1)] - flag[static_cast<size_t>(iota0 - 1)];
  return {iota0, k};
}

namespace {

/// Maps each parameter to the ambient coordinate it occupies verbatim in the
/// chart. Empty optional if the chart is not a coordinate graph.
std::optional<std::vector<int>> graph_map(const Immersion& im, int ambient_dim) {
  std::vector<int> g(static_cast<size_t>(im.param_dim()), -1);
  std::vector<bool> used(static_cast<size_t>(ambient_dim), false);
  for (int i = 0; i < ambient_dim; ++i) {
    const auto& e = im.chart[static_cast<size_t>(i)];
    if (e->kind == sym::NodeKind::Symbol) {
      int j = e->symbol;
      if (g[static_cast<size_t>(j)] == -1 && !used[static_cast<size_t>(i)]) {
        g[static_cast<size_t>(j)] = i;
        used[static_cast<size_t>(i)] = true;
      }
    }
  }
  for (int v : g)
    if (v == -1) return std::nullopt;
  return g;
}

Expr dot_expr(const ExprVec& a, const ExprVec& b) {
  Expr acc = sym::constant(0.0);
  for (size_t i = 0; i < a.size(); ++i) acc = sym::add(acc, sym::mul(a[i], b[i]));
  return acc;
}

ExprVec axpy(const ExprVec& v, const Expr& c, const ExprVec& w) {
  ExprVec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = sym::sub(v[i], sym::mul(c, w[i]));
  return out;
}

} // namespace

Eigen::MatrixXd AdaptedBasis::basis_matrix_at(std::span<const double> ambient_p) const {
  Eigen::MatrixXd M(n, n);
  int col = 0;
  for (const auto& f : E) {
    auto v = sym::eval_field(f, ambient_p);
    for (int i = 0; i < n; ++i) M(i, col) = v[static_cast<size_t>(i)];
    ++col;
  }
  for (const auto& f : V) {
    auto v = sym::eval_field(f, ambient_p);
    for (int i = 0; i < n; ++i) M(i, col) = v[static_cast<size_t>(i)];
    ++col;
  }
  return M;
}

Eigen::VectorXd AdaptedBasis::coords_at(const Eigen::VectorXd& v,
                                        std::span<const double> ambient_p) const {
  Eigen::MatrixXd M = basis_matrix_at(ambient_p);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw Error("adapted basis singular at point");
  return lu.solve(v);
}

AdaptedBasis adapted_split(const Immersion& im, const graded::GradedFrame& frame,
                           std::span<const std::vector<double>> grid, double tau) {
  if (grid.empty()) throw Error("adapted_split: empty sample grid");
  const int n = frame.dim();
  const int m = im.param_dim();
  const int s = frame.step();
  auto layers = frame.layer_dims();

  auto gmap = graph_map(im, n);
  if (!gmap)
    throw Error("adapted_split: chart must be a coordinate graph (each parameter "
                "appearing verbatim as one chart component)");

  // Substitution that re-reads a parameter expression as an ambient one.
  ExprVec param_to_ambient(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) {
    int ai = (*gmap)[static_cast<size_t>(j)];
    param_to_ambient[static_cast<size_t>(j)] = sym::symbol(ai, frame.coords[static_cast<size_t>(ai)]);
  }

  auto [Cmat, detM] = symbolic_tangent_coords(im, frame);
  const auto& base = grid[0];
  if (std::abs(sym::eval(detM, base)) < 1e-14)
    throw Error("adapted_split: frame matrix singular along the chart");

  // Flag and ruledness checks.
  auto [iota0, k] = iota_k(im, frame, grid, tau);
  std::vector<int> flag = flag_dims(im, frame, grid[0], tau);
  int degree = global_degree(im, frame, grid, tau);
  if (flag[static_cast<size_t>(iota0 - 1)] != 1 || flag[static_cast<size_t>(s - 1)] != m ||
      degree != (m - 1) * s + iota0)
    throw Error("adapted_split: immersion is not ruled (degree pattern mismatch)");

  Eigen::MatrixXd Cbase = eval_coords(Cmat, base);
  double cscale = std::max(Cbase.cwiseAbs().maxCoeff(), 1e-300);

  AdaptedBasis out;
  out.m = m;
  out.n = n;
  out.s = s;
  out.iota0 = iota0;
  out.k = k;
  out.degree = degree;
  out.flag = flag;

  // --- E_1: the ruling direction, the unique tangent combination lying in
  // H^{iota0}. Its coefficients are (m-1)x(m-1) minors of the rows of Cmat
  // above layer iota0, with the rows picked by numeric pivoting at the base
  // point so the minors stay nonzero over the chart.
  const int n_i0 = layers[static_cast<size_t>(iota0 - 1)];
  std::vector<int> high_rows;
  for (int i = n_i0; i < n; ++i) high_rows.push_back(i);

  std::vector<int> sel; // m-1 pivot rows
  {
    Eigen::MatrixXd R(static_cast<int>(high_rows.size()), m);
    for (size_t r = 0; r < high_rows.size(); ++r) R.row(static_cast<int>(r)) = Cbase.row(high_rows[r]);
    Eigen::MatrixXd W = R;
    std::vector<bool> taken(high_rows.size(), false);
    for (int step = 0; step < m - 1; ++step) {
      int best = -1;
      double bestnorm = 0.0;
      for (size_t r = 0; r < high_rows.size(); ++r) {
        if (taken[r]) continue;
        double norm = W.row(static_cast<int>(r)).norm();
        if (norm > bestnorm) {
          bestnorm = norm;
          best = static_cast<int>(r);
        }
      }
      if (best < 0 || bestnorm < 1e-12 * cscale)
        throw Error("adapted_split: could not isolate the ruling direction");
      taken[static_cast<size_t>(best)] = true;
      sel.push_back(high_rows[static_cast<size_t>(best)]);
      Eigen::VectorXd piv = W.row(best).normalized();
      for (size_t r = 0; r < high_rows.size(); ++r)
        if (!taken[r]) W.row(static_cast<int>(r)) -= (W.row(static_cast<int>(r)) * piv) * piv.transpose();
    }
    std::sort(sel.begin(), sel.end());
  }

  ExprVec c1(static_cast<size_t>(m)); // tangent combination coefficients of E_1
  for (int j = 0; j < m; ++j) {
    ExprMat S;
    for (int r : sel) {
      ExprVec row;
      for (int jj = 0; jj < m; ++jj)
        if (jj != j) row.push_back(Cmat[static_cast<size_t>(r)][static_cast<size_t>(jj)]);
      S.push_back(std::move(row));
    }
    Expr minor = det_expr(S);
    c1[static_cast<size_t>(j)] = (j % 2 == 0) ? minor : sym::neg(minor);
  }

  // Frame coordinates of E_1 before scaling.
  ExprVec f1(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    Expr acc = sym::constant(0.0);
    for (int j = 0; j < m; ++j)
      acc = sym::add(acc, sym::mul(c1[static_cast<size_t>(j)], Cmat[static_cast<size_t>(i)][static_cast<size_t>(j)]));
    f1[static_cast<size_t>(i)] = acc;
  }
  Eigen::VectorXd f1b = eval_exprs(f1, base);
  double fmax = f1b.cwiseAbs().maxCoeff();
  if (fmax < 1e-12 * cscale) throw Error("adapted_split: ruling direction degenerate at base point");
  int lead = -1;
  for (int i = 0; i < n; ++i) {
    if (std::abs(f1b(i)) > 1e-9 * fmax) {
      lead = i;
      break;
    }
  }
  const Expr scale1 = f1[static_cast<size_t>(lead)];

  std::vector<ExprVec> E_coords;   // frame coordinates of E_j, in parameters
  std::vector<ExprVec> E_tangent;  // tangent combination coefficients of E_j
  {
    ExprVec coords(static_cast<size_t>(n)), tang(static_cast<size_t>(m));
    for (int i = 0; i < n; ++i) coords[static_cast<size_t>(i)] = sym::div(f1[static_cast<size_t>(i)], scale1);
    for (int j = 0; j < m; ++j) tang[static_cast<size_t>(j)] = sym::div(c1[static_cast<size_t>(j)], scale1);
    E_coords.push_back(std::move(coords));
    E_tangent.push_back(std::move(tang));
  }

  // Cross-check: E_1 stays in H^{iota0} over the whole grid.
  for (const auto& q : grid) {
    Eigen::VectorXd fc = eval_exprs(E_coords[0], q);
    double top = fc.cwiseAbs().maxCoeff();
    for (int i = n_i0; i < n; ++i)
      if (std::abs(fc(i)) > 1e-7 * std::max(top, 1.0))
        throw Error("adapted_split: ruling direction leaves its layer over the grid");
  }

  // --- E_2..E_m: chart tangents orthogonalized (unnormalized, in frame
  // coordinates) against the accepted tangent fields.
  for (int t = 0; t < m && static_cast<int>(E_coords.size()) < m; ++t) {
    ExprVec coords(static_cast<size_t>(n)), tang(static_cast<size_t>(m));
    for (int i = 0; i < n; ++i) coords[static_cast<size_t>(i)] = Cmat[static_cast<size_t>(i)][static_cast<size_t>(t)];
    for (int j = 0; j < m; ++j) tang[static_cast<size_t>(j)] = sym::constant(j == t ? 1.0 : 0.0);
    for (size_t w = 0; w < E_coords.size(); ++w) {
      Expr p = sym::div(dot_expr(coords, E_coords[w]), dot_expr(E_coords[w], E_coords[w]));
      coords = axpy(coords, p, E_coords[w]);
      tang = axpy(tang, p, E_tangent[w]);
    }
    Eigen::VectorXd res = eval_exprs(coords, base);
    if (res.norm() > 1e-7 * std::max(cscale, 1.0)) {
      E_coords.push_back(std::move(coords));
      E_tangent.push_back(std::move(tang));
    }
  }
  if (static_cast<int>(E_coords.size()) != m)
    throw Error("adapted_split: failed to complete the tangent basis");

  // --- Complement V_{m+1}..V_n: layer by layer, seeded by the frame field
  // with the largest projection residual at the base point, orthogonalized
  // against accepted fields of degree <= its layer, rescaled to unit seed
  // coefficient. This realizes completions of the X2 - X1(kappa) X1 type.
  std::vector<ExprVec> V_coords;
  std::vector<int> V_degs;
  std::vector<std::string> V_names;
  std::vector<int> E_degs(static_cast<size_t>(m));
  {
    // Degrees of the accepted tangent fields, from their coordinates.
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd fc = eval_exprs(E_coords[static_cast<size_t>(j)], base);
      double top = fc.cwiseAbs().maxCoeff();
      int dg = 0;
      for (int i = 0; i < n; ++i)
        if (std::abs(fc(i)) > 1e-9 * top) dg = std::max(dg, frame.degrees[static_cast<size_t>(i)]);
      E_degs[static_cast<size_t>(j)] = dg;
    }
  }

  auto project_seq = [&](ExprVec coords, int level, std::span<const double> q_unused) {
    (void)q_unused;
    for (size_t w = 0; w < E_coords.size(); ++w) {
      if (E_degs[w] > level) continue;
      Expr p = sym::div(dot_expr(coords, E_coords[w]), dot_expr(E_coords[w], E_coords[w]));
      coords = axpy(coords, p, E_coords[w]);
    }
    for (size_t w = 0; w < V_coords.size(); ++w) {
      if (V_degs[w] > level) continue;
      Expr p = sym::div(dot_expr(coords, V_coords[w]), dot_expr(V_coords[w], V_coords[w]));
      coords = axpy(coords, p, V_coords[w]);
    }
    return coords;
  };

  std::vector<bool> seed_used(static_cast<size_t>(n), false);
  for (int level = 1; level <= s; ++level) {
    int total = layers[static_cast<size_t>(level - 1)] - (level > 1 ? layers[static_cast<size_t>(level - 2)] : 0);
    int have = 0;
    for (int dg : E_degs)
      if (dg == level) ++have;
    int need = total - have;
    for (int slot = 0; slot < need; ++slot) {
      int best_seed = -1;
      double best_res = 0.0;
      ExprVec best_coords;
      for (int a = 0; a < n; ++a) {
        if (seed_used[static_cast<size_t>(a)] || frame.degrees[static_cast<size_t>(a)] != level) continue;
        ExprVec cand(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) cand[static_cast<size_t>(i)] = sym::constant(i == a ? 1.0 : 0.0);
        cand = project_seq(std::move(cand), level, base);
        double res = eval_exprs(cand, base).norm();
        if (res > best_res) {
          best_res = res;
          best_seed = a;
          best_coords = std::move(cand);
        }
      }
      if (best_seed < 0 || best_res < 1e-10)
        throw Error("adapted_split: could not complete layer " + std::to_string(level));
      // Rescale to unit coefficient on the seed field.
      Expr seed_coeff = best_coords[static_cast<size_t>(best_seed)];
      if (std::abs(sym::eval(seed_coeff, base)) < 1e-12)
        throw Error("adapted_split: degenerate complement normalization");
      ExprVec coords(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i)
        coords[static_cast<size_t>(i)] = sym::div(best_coords[static_cast<size_t>(i)], seed_coeff);
      seed_used[static_cast<size_t>(best_seed)] = true;
      V_coords.push_back(std::move(coords));
      V_degs.push_back(level);
      V_names.push_back(frame.names[static_cast<size_t>(best_seed)]);
    }
  }
  if (static_cast<int>(V_coords.size()) != n - m)
    throw Error("adapted_split: complement has wrong dimension");

  // --- Lift everything to ambient vector fields. Coefficient functions are
  // read as ambient expressions through the graph coordinates, constant in
  // the remaining directions.
  auto lift = [&](const ExprVec& coords) {
    sym::VectorField f = sym::VectorField::zero(n);
    for (int i = 0; i < n; ++i) {
      Expr ci = sym::substitute(coords[static_cast<size_t>(i)], param_to_ambient);
      f = sym::add(f, sym::scale(ci, frame.fields[static_cast<size_t>(i)]));
    }
    return f;
  };

  for (int j = 0; j < m; ++j) {
    out.E.push_back(lift(E_coords[static_cast<size_t>(j)]));
    out.E_param.push_back(E_tangent[static_cast<size_t>(j)]);
  }
  out.E_degrees = E_degs;
  out.e1_param = E_tangent[0];
  for (size_t w = 0; w < V_coords.size(); ++w) out.V.push_back(lift(V_coords[w]));
  out.V_degrees = V_degs;
  out.V_names = V_names;

  // Final sanity: the completed basis is invertible at sample points.
  for (const auto& q : grid) {
    auto amb = im.map_point(q);
    Eigen::MatrixXd M = out.basis_matrix_at(amb);
    if (!Eigen::FullPivLU<Eigen::MatrixXd>(M).isInvertible())
      throw Error("adapted_split: completed basis singular at sample point");
  }
  return out;
}

int Sigma0Spec::lattice_size() const {
  int total = 1;
  for (int c : counts) total *= std::max(c, 1);
  return total;
}

std::vector<Eigen::VectorXd> Sigma0Spec::points() const {
  std::vector<Eigen::VectorXd> out;
  const int dims = static_cast<int>(dirs.size());
  std::vector<int> idx(static_cast<size_t>(dims), 0);
  int total = lattice_size();
  for (int t = 0; t < total; ++t) {
    Eigen::VectorXd p = origin;
    int rem = t;
    for (int d = 0; d < dims; ++d) {
      int cnt = std::max(counts[static_cast<size_t>(d)], 1);
      int i = rem % cnt;
      rem /= cnt;
      double frac = cnt > 1 ? static_cast<double>(i) / (cnt - 1) : 0.0;
      p += frac * extents[static_cast<size_t>(d)] * dirs[static_cast<size_t>(d)];
    }
    out.push_back(std::move(p));
  }
  return out;
}

CylinderGrid characteristic_coords(const Immersion& im, const AdaptedBasis& basis,
                                   const Sigma0Spec& sigma0, double eps, int n1) {
  const int m = im.param_dim();
  if (sigma0.origin.size() != m) throw Error("sigma0 origin has wrong dimension");
  if (static_cast<int>(sigma0.dirs.size()) != m - 1)
    throw Error("sigma0 must be an (m-1)-dimensional lattice");
  if (eps < 0.0) throw Error("eps must be nonnegative");
  if (eps > 0.0 && (n1 < 2 || n1 % 2 != 0))
    throw Error("N1 must be a positive even step count");

  CylinderGrid grid;
  grid.eps = eps;
  grid.n1 = eps > 0.0 ? n1 : 0;
  grid.m = m;
  for (int c : sigma0.counts) grid.hat_shape.push_back(std::max(c, 1));
  if (grid.hat_shape.empty()) grid.hat_shape.push_back(1);

  auto field = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd v(m);
    std::vector<double> up(u.data(), u.data() + m);
    for (int j = 0; j < m; ++j) v(j) = sym::eval(basis.e1_param[static_cast<size_t>(j)], up);
    if (v.norm() < 1e-12) throw Error("characteristic field vanishes on the grid");
    return v;
  };

  grid.sigma0 = sigma0.points();
  const int samples = grid.n1 > 0 ? 2 * grid.n1 + 1 : 1;
  const double h = grid.n1 > 0 ? eps / (2.0 * grid.n1) : 0.0; // half-step
  for (const auto& x0 : grid.sigma0) {
    std::vector<Eigen::VectorXd> row;
    row.reserve(static_cast<size_t>(samples));
    Eigen::VectorXd u = x0;
    row.push_back(u);
    for (int i = 1; i < samples; ++i) {
      Eigen::VectorXd k1 = field(u);
      Eigen::VectorXd k2 = field(u + 0.5 * h * k1);
      Eigen::VectorXd k3 = field(u + 0.5 * h * k2);
      Eigen::VectorXd k4 = field(u + h * k3);
      u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      row.push_back(u);
    }
    std::vector<Eigen::VectorXd> amb_row;
    amb_row.reserve(row.size());
    for (const auto& q : row) {
      std::vector<double> qp(q.data(), q.data() + m);
      auto a = im.map_point(qp);
      amb_row.push_back(Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<int>(a.size())));
    }
    grid.param.push_back(std::move(row));
    grid.ambient.push_back(std::move(amb_row));
  }
  return grid;
}

double degree_area(const Immersion& im, const graded::GradedFrame& frame,
                   const RegionSpec& region, int d) {
  const int m = im.param_dim();
  if (region.lo.size() != m || region.hi.size() != m ||
      static_cast<int>(region.counts.size()) != m)
    throw Error("degree_area: region dimension mismatch");
  double cell = 1.0;
  int total = 1;
  for (int j = 0; j < m; ++j) {
    cell *= (region.hi(j) - region.lo(j)) / region.counts[static_cast<size_t>(j)];
    total *= region.counts[static_cast<size_t>(j)];
  }
  double area = 0.0;
  for (int t = 0; t < total; ++t) {
    std::vector<double> q(static_cast<size_t>(m));
    int rem = t;
    for (int j = 0; j < m; ++j) {
      int cnt = region.counts[static_cast<size_t>(j)];
      int i = rem % cnt;
      rem /= cnt;
      double hj = (region.hi(j) - region.lo(j)) / cnt;
      q[static_cast<size_t>(j)] = region.lo(j) + (i + 0.5) * hj;
    }
    auto tf = tangent_frame(im, frame, q);
    auto ambient = im.map_point(q);
    auto mv = graded::expand_wedge(tf, frame, ambient);
    auto proj = graded::project_degree(mv, frame, d);
    area += graded::multivector_norm(proj) * cell;
  }
  return area;
}

} // namespace holomap::immersion
