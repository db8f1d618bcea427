#include "variation.hpp"

#include <cmath>
#include <ostream>

namespace holomap::variation {

int LatticeSpec::total() const {
  int t = 1;
  for (int c : counts) t *= c;
  return t;
}

std::vector<double> LatticeSpec::spacing() const {
  std::vector<double> h(counts.size());
  for (size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] < 5) throw Error("variation lattice needs at least 5 points per axis");
    h[a] = (hi(static_cast<int>(a)) - lo(static_cast<int>(a))) / (counts[a] - 1);
  }
  return h;
}

namespace {

std::vector<double> lattice_point(const LatticeSpec& lat, int flat) {
  std::vector<double> q(lat.counts.size());
  int rem = flat;
  for (size_t a = 0; a < lat.counts.size(); ++a) {
    int i = rem % lat.counts[a];
    rem /= lat.counts[a];
    double h = (lat.hi(static_cast<int>(a)) - lat.lo(static_cast<int>(a))) / (lat.counts[a] - 1);
    q[a] = lat.lo(static_cast<int>(a)) + i * h;
  }
  return q;
}

/// Ambient index occupied verbatim by each parameter (graph chart).
std::vector<int> graph_indices(const immersion::Immersion& im, int ambient_dim) {
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
    if (v == -1) throw Error("variation probes require a graph chart");
  return g;
}

} // namespace

FlowedGrid flow_immersion(const immersion::Immersion& im,
                          const immersion::AdaptedBasis& basis, const Probe& probe,
                          const LatticeSpec& lattice, double t, int flow_steps) {
  const int n = basis.n;
  if (static_cast<int>(probe.coeffs.size()) != n)
    throw Error("probe needs one coefficient per adapted basis field");
  if (static_cast<int>(lattice.counts.size()) != im.param_dim())
    throw Error("lattice dimension does not match the immersion");

  auto gidx = graph_indices(im, n);
  std::vector<sym::Expr> rename(static_cast<size_t>(im.param_dim()));
  for (int j = 0; j < im.param_dim(); ++j)
    rename[static_cast<size_t>(j)] = sym::symbol(gidx[static_cast<size_t>(j)], "q" + std::to_string(gidx[static_cast<size_t>(j)]));

  sym::VectorField W = sym::VectorField::zero(n);
  for (int i = 0; i < n; ++i) {
    const sym::VectorField& base = (i < basis.m)
                                       ? basis.E[static_cast<size_t>(i)]
                                       : basis.V[static_cast<size_t>(i - basis.m)];
    sym::Expr c = sym::substitute(probe.coeffs[static_cast<size_t>(i)], rename);
    W = sym::add(W, sym::scale(c, base));
  }

  // Exact chart Jacobian and the Jacobian of W, both symbolic, so the flowed
  // tangents come from the variational equation d(delta)/dt = DW(p) delta
  // rather than lattice differences (whose truncation error would mask a
  // second-order excess).
  const int mdim = im.param_dim();
  std::vector<std::vector<sym::Expr>> chart_jac(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    chart_jac[static_cast<size_t>(i)].resize(static_cast<size_t>(mdim));
    for (int j = 0; j < mdim; ++j)
      chart_jac[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          sym::diff(im.chart[static_cast<size_t>(i)], j);
  }
  std::vector<std::vector<sym::Expr>> w_jac(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    w_jac[static_cast<size_t>(i)].resize(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j)
      w_jac[static_cast<size_t>(i)][static_cast<size_t>(j)] = sym::diff(W.comps[static_cast<size_t>(i)], j);
  }

  FlowedGrid out;
  out.shape = lattice.counts;
  out.hsteps = lattice.spacing();
  const int total = lattice.total();
  out.ambient.reserve(static_cast<size_t>(total));
  out.tangents.reserve(static_cast<size_t>(total));
  const double dt = (flow_steps > 0) ? t / flow_steps : 0.0;
  for (int f = 0; f < total; ++f) {
    auto q = lattice_point(lattice, f);
    auto a0 = im.map_point(q);
    Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(a0.data(), static_cast<int>(a0.size()));
    Eigen::MatrixXd D(n, mdim);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < mdim; ++j)
        D(i, j) = sym::eval(chart_jac[static_cast<size_t>(i)][static_cast<size_t>(j)], q);
    if (t != 0.0) {
      auto field = [&](const Eigen::VectorXd& x) {
        std::vector<double> xv(x.data(), x.data() + x.size());
        auto v = sym::eval_field(W, xv);
        return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<int>(v.size())).eval();
      };
      auto jac = [&](const Eigen::VectorXd& x) {
        std::vector<double> xv(x.data(), x.data() + x.size());
        Eigen::MatrixXd J(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            J(i, j) = sym::eval(w_jac[static_cast<size_t>(i)][static_cast<size_t>(j)], xv);
        return J;
      };
      for (int stp = 0; stp < flow_steps; ++stp) {
        Eigen::VectorXd k1 = field(p);
        Eigen::MatrixXd m1 = jac(p) * D;
        Eigen::VectorXd k2 = field(p + 0.5 * dt * k1);
        Eigen::MatrixXd m2 = jac(p + 0.5 * dt * k1) * (D + 0.5 * dt * m1);
        Eigen::VectorXd k3 = field(p + 0.5 * dt * k2);
        Eigen::MatrixXd m3 = jac(p + 0.5 * dt * k2) * (D + 0.5 * dt * m2);
        Eigen::VectorXd k4 = field(p + dt * k3);
        Eigen::MatrixXd m4 = jac(p + dt * k3) * (D + dt * m3);
        p += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        D += (dt / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
        if (!p.allFinite() || !D.allFinite())
          throw Error("variation flow left the chart (overflow)");
      }
    }
    out.ambient.push_back(std::move(p));
    out.tangents.push_back(std::move(D));
  }
  return out;
}

double degree_excess(const FlowedGrid& grid, const graded::GradedFrame& frame, int d) {
  const int m = static_cast<int>(grid.shape.size());
  double worst = 0.0;
  std::vector<Eigen::VectorXd> tangents(static_cast<size_t>(m));
  for (size_t f = 0; f < grid.ambient.size(); ++f) {
    for (int a = 0; a < m; ++a) tangents[static_cast<size_t>(a)] = grid.tangents[f].col(a);
    const Eigen::VectorXd& p = grid.ambient[f];
    std::vector<double> pv(p.data(), p.data() + p.size());
    auto mv = graded::expand_wedge(tangents, frame, pv);
    auto excess = graded::project_above(mv, frame, d);
    worst = std::max(worst, graded::multivector_norm(excess));
  }
  return worst;
}

VariationTable first_order_check(const immersion::Immersion& im,
                                 const graded::GradedFrame& frame,
                                 const immersion::AdaptedBasis& basis,
                                 const Probe& probe, const LatticeSpec& lattice,
                                 int d, std::span<const double> times) {
  VariationTable table;
  for (double t : times) {
    FlowedGrid g = flow_immersion(im, basis, probe, lattice, t);
    table.t.push_back(t);
    table.rho.push_back(degree_excess(g, frame, d));
  }
  // Least-squares slope of log rho against log t over usable samples.
  const double floor = 1e-13;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (size_t i = 0; i < table.t.size(); ++i) {
    if (table.t[i] <= 0.0 || table.rho[i] < floor) continue;
    double x = std::log(table.t[i]), y = std::log(table.rho[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++used;
  }
  if (used < 2) {
    table.inconclusive = true;
    return table;
  }
  table.slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
  return table;
}

void table_to_csv(std::ostream& out, const VariationTable& table) {
  out << "t,rho\n";
  char buf[64];
  for (size_t i = 0; i < table.t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", table.t[i], table.rho[i]);
    out << buf;
  }
}

} // namespace holomap::variation
