#include "admissibility.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace holomap::admissibility {

double RuledSystem::sup_normB() const {
  double sup = 0.0;
  for (const auto& row : B)
    for (const auto& m : row)
      sup = std::max(sup, m.operatorNorm());
  return sup;
}

double RuledSystem::sup_normA() const {
  double sup = 0.0;
  for (const auto& row : A)
    for (const auto& m : row)
      if (m.size() > 0) sup = std::max(sup, m.cwiseAbs().maxCoeff());
  return sup;
}

CoeffCache make_coeff_cache(const immersion::AdaptedBasis& basis) {
  CoeffCache cache;
  cache.brackets.reserve(basis.V.size());
  for (const auto& v : basis.V) cache.brackets.push_back(sym::lie_bracket(basis.E[0], v));
  return cache;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> coefficients(
    const graded::GradedFrame& frame, const immersion::AdaptedBasis& basis,
    const CoeffCache& cache, std::span<const double> ambient_p) {
  (void)frame;
  const int q = basis.vertical_dim();
  const int k = basis.k;
  const int nv = k + q;
  // Coordinates of every bracket [E_1, V_h] in the declared-orthonormal
  // adapted basis [E_1..E_m, V_{m+1}..V_n]; the inner product <V_i, .> is the
  // vertical coordinate at slot m + k + i.
  std::vector<Eigen::VectorXd> bc(static_cast<size_t>(nv));
  for (int i = 0; i < nv; ++i) {
    auto bv = sym::eval_field(cache.brackets[static_cast<size_t>(i)], ambient_p);
    Eigen::Map<const Eigen::VectorXd> bm(bv.data(), static_cast<int>(bv.size()));
    bc[static_cast<size_t>(i)] = basis.coords_at(bm, ambient_p);
  }
  Eigen::MatrixXd A(q, k), B(q, q);
  for (int i = 0; i < q; ++i) {
    const int slot = basis.m + k + i;
    for (int h = 0; h < k; ++h) A(i, h) = bc[static_cast<size_t>(h)](slot);
    for (int r = 0; r < q; ++r) B(i, r) = bc[static_cast<size_t>(k + r)](slot);
  }
  if (!A.allFinite() || !B.allFinite())
    throw Error("admissibility coefficients not finite at sample point");
  return {std::move(A), std::move(B)};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> coefficients(
    const graded::GradedFrame& frame, const immersion::AdaptedBasis& basis,
    std::span<const double> ambient_p) {
  return coefficients(frame, basis, make_coeff_cache(basis), ambient_p);
}

RuledSystem build_system(const graded::GradedFrame& frame,
                         const immersion::AdaptedBasis& basis,
                         const immersion::CylinderGrid& grid) {
  RuledSystem sys;
  sys.eps = grid.eps;
  sys.n1 = grid.n1;
  sys.q = basis.vertical_dim();
  sys.k = basis.k;
  sys.iota0 = basis.iota0;
  sys.s = basis.s;
  for (int h = 0; h < basis.k; ++h) sys.col_names.push_back(basis.V_names[static_cast<size_t>(h)]);
  for (int i = basis.k; i < static_cast<int>(basis.V.size()); ++i)
    sys.row_names.push_back(basis.V_names[static_cast<size_t>(i)]);

  CoeffCache cache = make_coeff_cache(basis);
  for (const auto& amb_row : grid.ambient) {
    std::vector<Eigen::MatrixXd> arow, brow;
    arow.reserve(amb_row.size());
    brow.reserve(amb_row.size());
    for (const auto& p : amb_row) {
      std::vector<double> pv(p.data(), p.data() + p.size());
      auto [a, b] = coefficients(frame, basis, cache, pv);
      arow.push_back(std::move(a));
      brow.push_back(std::move(b));
    }
    sys.A.push_back(std::move(arow));
    sys.B.push_back(std::move(brow));
  }
  return sys;
}

RuledSystem synthetic_system(double eps, int n1, int rows, int q, int k,
                             const MatrixFn& a_fn, const MatrixFn& b_fn) {
  if (eps <= 0.0 || n1 < 2 || n1 % 2 != 0) throw Error("synthetic_system: need eps > 0 and even N1 >= 2");
  RuledSystem sys;
  sys.eps = eps;
  sys.n1 = n1;
  sys.q = q;
  sys.k = k;
  for (int r = 0; r < rows; ++r) {
    std::vector<Eigen::MatrixXd> arow, brow;
    for (int t = 0; t < 2 * n1 + 1; ++t) {
      double x1 = eps * t / (2.0 * n1);
      Eigen::MatrixXd a = a_fn(r, x1), b = b_fn(r, x1);
      if (a.rows() != q || a.cols() != k || b.rows() != q || b.cols() != q)
        throw Error("synthetic_system: matrix dimensions do not match (q, k)");
      arow.push_back(std::move(a));
      brow.push_back(std::move(b));
    }
    sys.A.push_back(std::move(arow));
    sys.B.push_back(std::move(brow));
  }
  return sys;
}

ControlField zero_controls(const RuledSystem& sys) {
  ControlField g;
  g.g.assign(static_cast<size_t>(sys.rows()),
             std::vector<Eigen::VectorXd>(static_cast<size_t>(sys.samples()),
                                          Eigen::VectorXd::Zero(sys.k)));
  return g;
}

ControlField controls_from_function(const RuledSystem& sys, const ControlFn& fn) {
  ControlField g;
  for (int r = 0; r < sys.rows(); ++r) {
    std::vector<Eigen::VectorXd> row;
    for (int t = 0; t < sys.samples(); ++t) {
      Eigen::VectorXd v = fn(r, sys.x1_of_sample(t));
      if (v.size() != sys.k) throw Error("control dimension does not match k");
      row.push_back(std::move(v));
    }
    g.g.push_back(std::move(row));
  }
  return g;
}

ControlField controls_from_exprs(const immersion::CylinderGrid& grid,
                                 std::span<const sym::Expr> gexprs) {
  ControlField g;
  for (const auto& prow : grid.param) {
    std::vector<Eigen::VectorXd> row;
    for (const auto& u : prow) {
      std::vector<double> up(u.data(), u.data() + u.size());
      Eigen::VectorXd v(static_cast<int>(gexprs.size()));
      for (size_t c = 0; c < gexprs.size(); ++c)
        v(static_cast<int>(c)) = sym::eval(gexprs[c], up);
      row.push_back(std::move(v));
    }
    g.g.push_back(std::move(row));
  }
  return g;
}

void controls_to_csv(std::ostream& out, const RuledSystem& sys, const ControlField& g) {
  out << "x1_index,hat_index";
  for (int c = 0; c < sys.k; ++c) out << ",g" << (c + 1);
  out << "\n";
  for (int r = 0; r < sys.rows(); ++r)
    for (int t = 0; t < sys.samples(); ++t) {
      out << t << "," << r;
      const auto& v = g.g[static_cast<size_t>(r)][static_cast<size_t>(t)];
      char buf[32];
      for (int c = 0; c < sys.k; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", v(c));
        out << "," << buf;
      }
      out << "\n";
    }
}

ControlField controls_from_csv(std::istream& in, const RuledSystem& sys) {
  ControlField g = zero_controls(sys);
  std::string line;
  if (!std::getline(in, line)) throw Error("control CSV: missing header");
  int lineno = 1;
  std::vector<std::vector<bool>> seen(static_cast<size_t>(sys.rows()),
                                      std::vector<bool>(static_cast<size_t>(sys.samples()), false));
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != 2 + sys.k)
      throw Error("control CSV line " + std::to_string(lineno) + ": expected " +
                  std::to_string(2 + sys.k) + " columns");
    try {
      int t = std::stoi(cells[0]);
      int r = std::stoi(cells[1]);
      if (t < 0 || t >= sys.samples() || r < 0 || r >= sys.rows())
        throw Error("index out of range");
      for (int c = 0; c < sys.k; ++c)
        g.g[static_cast<size_t>(r)][static_cast<size_t>(t)](c) = std::stod(cells[static_cast<size_t>(2 + c)]);
      seen[static_cast<size_t>(r)][static_cast<size_t>(t)] = true;
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error("control CSV line " + std::to_string(lineno) + ": bad number");
    }
  }
  for (int r = 0; r < sys.rows(); ++r)
    for (int t = 0; t < sys.samples(); ++t)
      if (!seen[static_cast<size_t>(r)][static_cast<size_t>(t)])
        throw Error("control CSV: missing sample (" + std::to_string(t) + ", " +
                    std::to_string(r) + ")");
  return g;
}

void solution_to_csv(std::ostream& out, const RuledSystem& sys, const Solution& f) {
  out << "x1_index,hat_index";
  for (int c = 0; c < sys.q; ++c) out << ",f" << (c + 1);
  out << "\n";
  for (size_t r = 0; r < f.F.size(); ++r)
    for (size_t t = 0; t < f.F[r].size(); ++t) {
      out << (2 * t) << "," << r; // node index in half-step units
      char buf[32];
      for (int c = 0; c < sys.q; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", f.F[r][t](c));
        out << "," << buf;
      }
      out << "\n";
    }
}

namespace {

void check_field(const RuledSystem& sys, const ControlField& g) {
  if (static_cast<int>(g.g.size()) != sys.rows())
    throw Error("control field row count does not match system");
  for (const auto& row : g.g)
    if (static_cast<int>(row.size()) != sys.samples())
      throw Error("control field sample count does not match system");
}

} // namespace

Solution solve_ruled(const RuledSystem& sys, const ControlField& g) {
  check_field(sys, g);
  Solution sol;
  const double h = sys.step();
  for (int r = 0; r < sys.rows(); ++r) {
    const auto& A = sys.A[static_cast<size_t>(r)];
    const auto& B = sys.B[static_cast<size_t>(r)];
    const auto& G = g.g[static_cast<size_t>(r)];
    auto rhs = [&](int t, const Eigen::VectorXd& f) -> Eigen::VectorXd {
      return -B[static_cast<size_t>(t)] * f - A[static_cast<size_t>(t)] * G[static_cast<size_t>(t)];
    };
    std::vector<Eigen::VectorXd> F;
    F.push_back(Eigen::VectorXd::Zero(sys.q));
    for (int i = 0; i < sys.n1; ++i) {
      int t0 = 2 * i;
      const Eigen::VectorXd& f = F.back();
      Eigen::VectorXd k1 = rhs(t0, f);
      Eigen::VectorXd k2 = rhs(t0 + 1, f + 0.5 * h * k1);
      Eigen::VectorXd k3 = rhs(t0 + 1, f + 0.5 * h * k2);
      Eigen::VectorXd k4 = rhs(t0 + 2, f + h * k3);
      Eigen::VectorXd next = f + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!next.allFinite()) throw Error("solve_ruled: solution overflow (chart too large)");
      F.push_back(std::move(next));
    }
    sol.F.push_back(std::move(F));
  }
  return sol;
}

std::vector<std::vector<Eigen::MatrixXd>> fundamental_matrix(const RuledSystem& sys) {
  std::vector<std::vector<Eigen::MatrixXd>> out;
  const double h = sys.step();
  for (int r = 0; r < sys.rows(); ++r) {
    const auto& B = sys.B[static_cast<size_t>(r)];
    std::vector<Eigen::MatrixXd> D;
    D.push_back(Eigen::MatrixXd::Identity(sys.q, sys.q));
    for (int i = 0; i < sys.n1; ++i) {
      int t0 = 2 * i;
      const Eigen::MatrixXd& d = D.back();
      Eigen::MatrixXd k1 = d * B[static_cast<size_t>(t0)];
      Eigen::MatrixXd k2 = (d + 0.5 * h * k1) * B[static_cast<size_t>(t0 + 1)];
      Eigen::MatrixXd k3 = (d + 0.5 * h * k2) * B[static_cast<size_t>(t0 + 1)];
      Eigen::MatrixXd k4 = (d + h * k3) * B[static_cast<size_t>(t0 + 2)];
      Eigen::MatrixXd next = d + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!next.allFinite()) throw Error("fundamental_matrix: overflow");
      D.push_back(std::move(next));
    }
    out.push_back(std::move(D));
  }
  return out;
}

HolonomyResult holonomy(const RuledSystem& sys, const ControlField& g) {
  check_field(sys, g);
  if (sys.n1 % 2 != 0) throw Error("holonomy: Simpson quadrature needs even N1");
  auto D = fundamental_matrix(sys);
  HolonomyResult out;
  const double h = sys.step();
  for (int r = 0; r < sys.rows(); ++r) {
    const auto& Dr = D[static_cast<size_t>(r)];
    auto integrand = [&](int node) -> Eigen::VectorXd {
      int t = 2 * node; // half-step sample of node
      return Dr[static_cast<size_t>(node)] * sys.A[static_cast<size_t>(r)][static_cast<size_t>(t)] *
             g.g[static_cast<size_t>(r)][static_cast<size_t>(t)];
    };
    Eigen::VectorXd I = Eigen::VectorXd::Zero(sys.q);
    for (int i = 0; i + 2 <= sys.n1; i += 2)
      I += (h / 3.0) * (integrand(i) + 4.0 * integrand(i + 1) + integrand(i + 2));
    const Eigen::MatrixXd& De = Dr.back();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(De);
    if (!lu.isInvertible())
      throw Error("holonomy: fundamental matrix singular at eps (internal error)");
    out.F_eps.push_back(-lu.solve(I));
    out.D_eps.push_back(De);
  }
  return out;
}

double general_residual(const RuledSystem& sys, const Solution& f, const ControlField& g) {
  check_field(sys, g);
  if (sys.n1 < 4) throw Error("general_residual: need N1 >= 4 for the difference stencils");
  const double h = sys.step();
  const int N = sys.n1;
  double worst = 0.0;
  for (int r = 0; r < sys.rows(); ++r) {
    const auto& F = f.F[static_cast<size_t>(r)];
    if (static_cast<int>(F.size()) != N + 1) throw Error("general_residual: solution/grid mismatch");
    for (int i = 0; i <= N; ++i) {
      Eigen::VectorXd dF;
      if (i >= 2 && i <= N - 2) {
        dF = (-F[static_cast<size_t>(i + 2)] + 8.0 * F[static_cast<size_t>(i + 1)] -
              8.0 * F[static_cast<size_t>(i - 1)] + F[static_cast<size_t>(i - 2)]) /
             (12.0 * h);
      } else {
        int dir = (i < 2) ? 1 : -1;
        auto at = [&](int off) -> const Eigen::VectorXd& {
          return F[static_cast<size_t>(i + dir * off)];
        };
        dF = dir *
             (-25.0 / 12.0 * at(0) + 4.0 * at(1) - 3.0 * at(2) + 4.0 / 3.0 * at(3) -
              0.25 * at(4)) /
             h;
      }
      int t = 2 * i;
      Eigen::VectorXd res = dF +
                            sys.B[static_cast<size_t>(r)][static_cast<size_t>(t)] * F[static_cast<size_t>(i)] +
                            sys.A[static_cast<size_t>(r)][static_cast<size_t>(t)] *
                                g.g[static_cast<size_t>(r)][static_cast<size_t>(t)];
      worst = std::max(worst, res.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

NormEstimate norm_estimate(const RuledSystem& sys, const ControlField& g, const Solution& f) {
  check_field(sys, g);
  NormEstimate est;
  est.sup_B = sys.sup_normB();
  est.C1 = sys.eps * std::exp(sys.eps * est.sup_B);
  est.K = est.C1 * (1.0 + est.sup_B) + 1.0;
  for (int r = 0; r < sys.rows(); ++r) {
    for (int t = 0; t < sys.samples(); ++t) {
      Eigen::VectorXd ag = sys.A[static_cast<size_t>(r)][static_cast<size_t>(t)] *
                           g.g[static_cast<size_t>(r)][static_cast<size_t>(t)];
      if (ag.size() > 0) est.sup_AG = std::max(est.sup_AG, ag.cwiseAbs().maxCoeff());
    }
    const auto& F = f.F[static_cast<size_t>(r)];
    for (size_t i = 0; i < F.size(); ++i) {
      int t = 2 * static_cast<int>(i);
      est.sup_F = std::max(est.sup_F, F[i].cwiseAbs().maxCoeff());
      // dF/dx1 from the equation itself at the node.
      Eigen::VectorXd dF = -sys.B[static_cast<size_t>(r)][static_cast<size_t>(t)] * F[i] -
                           sys.A[static_cast<size_t>(r)][static_cast<size_t>(t)] *
                               g.g[static_cast<size_t>(r)][static_cast<size_t>(t)];
      est.sup_dF = std::max(est.sup_dF, dF.cwiseAbs().maxCoeff());
    }
  }
  est.lhs = est.sup_F + est.sup_dF;
  est.bound = est.K * est.sup_AG;
  est.ok = est.lhs <= est.bound * (1.0 + 1e-9) + 1e-300;
  return est;
}

namespace {

Eigen::MatrixXd eval_mat(const std::vector<std::vector<sym::Expr>>& mat,
                         std::span<const double> p) {
  Eigen::MatrixXd out(static_cast<int>(mat.size()),
                      mat.empty() ? 0 : static_cast<int>(mat[0].size()));
  for (size_t j = 0; j < mat.size(); ++j)
    for (size_t i = 0; i < mat[j].size(); ++i)
      out(static_cast<int>(j), static_cast<int>(i)) = sym::eval(mat[j][i], p);
  return out;
}

} // namespace

double horizontality_check(const HeisenbergData& data,
                           std::span<const std::vector<double>> points) {
  const int m = static_cast<int>(data.alpha.size());
  double worst = 0.0;
  for (const auto& p : points) {
    Eigen::MatrixXd a = eval_mat(data.alpha, p);
    Eigen::MatrixXd b = eval_mat(data.beta, p);
    Eigen::MatrixXd ab(m, 2 * data.n);
    ab << a, b;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ab);
    if (svd.singularValues().minCoeff() < 1e-10 * svd.singularValues().maxCoeff())
      throw Error("horizontality_check: (alpha|beta) not of full rank (not an immersion)");
    for (int j = 0; j < m; ++j)
      for (int nu = 0; nu < m; ++nu) {
        double s = a.row(j).dot(b.row(nu)) - b.row(j).dot(a.row(nu));
        worst = std::max(worst, std::abs(s));
      }
  }
  return worst;
}

double heisenberg_compat(const HeisenbergData& data,
                         std::span<const sym::Expr> controls,
                         std::span<const std::vector<double>> points) {
  const int n = data.n;
  const int m = static_cast<int>(data.alpha.size());
  if (static_cast<int>(controls.size()) != 2 * n)
    throw Error("heisenberg_compat: expected 2n control expressions");
  horizontality_check(data, points);

  // Frame fields of H^n for the symbolic directional derivatives.
  auto coord = [&](int idx, const char* base, int i) {
    return sym::symbol(idx, std::string(base) + std::to_string(i + 1));
  };
  const int dim = 2 * n + 1;
  std::vector<sym::VectorField> X(static_cast<size_t>(n)), Y(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    sym::VectorField xi = sym::VectorField::unit(dim, i);
    xi.comps[static_cast<size_t>(2 * n)] = sym::mul(sym::constant(0.5), coord(n + i, "y", i));
    sym::VectorField yi = sym::VectorField::unit(dim, n + i);
    yi.comps[static_cast<size_t>(2 * n)] = sym::mul(sym::constant(-0.5), coord(i, "x", i));
    X[static_cast<size_t>(i)] = std::move(xi);
    Y[static_cast<size_t>(i)] = std::move(yi);
  }
  // Xk(g_i), Yk(g_i) for every control.
  std::vector<std::vector<sym::Expr>> Xg(static_cast<size_t>(n)), Yg(static_cast<size_t>(n));
  for (int kk = 0; kk < n; ++kk) {
    for (int i = 0; i < 2 * n; ++i) {
      Xg[static_cast<size_t>(kk)].push_back(sym::apply_field(X[static_cast<size_t>(kk)], controls[static_cast<size_t>(i)]));
      Yg[static_cast<size_t>(kk)].push_back(sym::apply_field(Y[static_cast<size_t>(kk)], controls[static_cast<size_t>(i)]));
    }
  }

  double worst = 0.0;
  for (const auto& p : points) {
    Eigen::MatrixXd a = eval_mat(data.alpha, p);
    Eigen::MatrixXd b = eval_mat(data.beta, p);
    Eigen::MatrixXd xg(n, 2 * n), yg(n, 2 * n);
    for (int kk = 0; kk < n; ++kk)
      for (int i = 0; i < 2 * n; ++i) {
        xg(kk, i) = sym::eval(Xg[static_cast<size_t>(kk)][static_cast<size_t>(i)], p);
        yg(kk, i) = sym::eval(Yg[static_cast<size_t>(kk)][static_cast<size_t>(i)], p);
      }
    for (int j = 0; j < m; ++j)
      for (int nu = 0; nu < m; ++nu) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
          for (int kk = 0; kk < n; ++kk) {
            if (i == kk) continue;
            s += (b(nu, i) * a(j, kk) - b(j, i) * a(nu, kk)) * xg(kk, i);
            s += (b(nu, i) * b(j, kk) - b(j, i) * b(nu, kk)) * yg(kk, i);
            s += (a(j, i) * a(nu, kk) - a(nu, i) * a(j, kk)) * xg(kk, i + n);
            s += (a(j, i) * b(nu, kk) - b(nu, i) * b(j, kk)) * yg(kk, i + n);
          }
        worst = std::max(worst, std::abs(s));
      }
  }
  return worst;
}

} // namespace holomap::admissibility
