#include "graded.hpp"

#include <algorithm>
#include <cmath>

namespace holomap::graded {

GradedFrame::GradedFrame(std::vector<std::string> coord_names,
                         std::vector<std::string> field_names,
                         std::vector<sym::VectorField> frame_fields,
                         std::vector<int> field_degrees)
    : coords(std::move(coord_names)), names(std::move(field_names)),
      fields(std::move(frame_fields)), degrees(std::move(field_degrees)) {
  const int n = static_cast<int>(fields.size());
  if (static_cast<int>(degrees.size()) != n)
    throw Error("frame: one degree per field required");
  if (names.empty()) {
    for (int i = 0; i < n; ++i) names.push_back("X" + std::to_string(i + 1));
  }
  for (int i = 0; i < n; ++i) {
    if (fields[static_cast<size_t>(i)].ambient_dim != static_cast<int>(coords.size()))
      throw Error("frame: field dimension does not match coordinate count");
    if (degrees[static_cast<size_t>(i)] < 1) throw Error("frame: degrees must be positive");
    if (i > 0 && degrees[static_cast<size_t>(i)] < degrees[static_cast<size_t>(i - 1)])
      throw Error("frame: degrees must be nondecreasing");
  }
  if (n != static_cast<int>(coords.size()))
    throw Error("frame: need exactly one field per coordinate (n_s = n)");
}

std::vector<int> GradedFrame::layer_dims() const {
  std::vector<int> out(static_cast<size_t>(step()), 0);
  for (int i = 0; i < dim(); ++i) {
    for (int l = degrees[static_cast<size_t>(i)]; l <= step(); ++l)
      out[static_cast<size_t>(l - 1)] += 1;
  }
  return out;
}

Eigen::MatrixXd GradedFrame::matrix_at(std::span<const double> p) const {
  const int n = dim();
  Eigen::MatrixXd M(n, n);
  for (int j = 0; j < n; ++j) {
    auto col = sym::eval_field(fields[static_cast<size_t>(j)], p);
    for (int i = 0; i < n; ++i) M(i, j) = col[static_cast<size_t>(i)];
  }
  return M;
}

FrameReport validate_frame(const GradedFrame& f,
                           std::span<const std::vector<double>> sample_points,
                           double tau_frame) {
  if (sample_points.empty()) throw Error("validate_frame: no sample points");
  FrameReport rep;
  rep.min_abs_det = std::numeric_limits<double>::infinity();
  const int n = f.dim();
  const int s = f.step();
  auto dims = f.layer_dims();

  // Brackets are symbolic, computed once per pair.
  std::vector<std::vector<sym::VectorField>> brackets(static_cast<size_t>(n));
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      brackets[static_cast<size_t>(a)].push_back(
          sym::lie_bracket(f.fields[static_cast<size_t>(a)], f.fields[static_cast<size_t>(b)]));

  for (const auto& p : sample_points) {
    Eigen::MatrixXd M = f.matrix_at(p);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    double det = std::abs(M.determinant());
    rep.min_abs_det = std::min(rep.min_abs_det, det);
    if (!lu.isInvertible()) {
      rep.invertible = false;
      continue;
    }
    double scale = M.cwiseAbs().maxCoeff();
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        const auto& br = brackets[static_cast<size_t>(a)][static_cast<size_t>(b - a - 1)];
        auto v = sym::eval_field(br, p);
        Eigen::VectorXd vv = Eigen::Map<const Eigen::VectorXd>(v.data(), n);
        Eigen::VectorXd c = lu.solve(vv);
        int allowed = std::min(s, f.degrees[static_cast<size_t>(a)] + f.degrees[static_cast<size_t>(b)]);
        int ok_upto = allowed >= s ? n : dims[static_cast<size_t>(allowed - 1)];
        double vnorm = std::max(vv.cwiseAbs().maxCoeff(), scale);
        for (int i = ok_upto; i < n; ++i) {
          double leak = std::abs(c(i)) / std::max(vnorm, 1.0);
          rep.worst_bracket_leak = std::max(rep.worst_bracket_leak, leak);
          if (leak > tau_frame) rep.bracket_compatible = false;
        }
      }
    }
  }
  return rep;
}

Eigen::VectorXd coords_in_frame(const Eigen::VectorXd& v, const GradedFrame& f,
                                std::span<const double> p) {
  Eigen::MatrixXd M = f.matrix_at(p);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw Error("coords_in_frame: frame matrix singular at point");
  return lu.solve(v);
}

int vector_degree(const Eigen::VectorXd& v, const GradedFrame& f,
                  std::span<const double> p, double tau) {
  Eigen::VectorXd c = coords_in_frame(v, f, p);
  double cmax = c.cwiseAbs().maxCoeff();
  if (cmax == 0.0) throw Error("vector_degree: zero vector has no degree");
  int deg = 0;
  for (int i = 0; i < f.dim(); ++i)
    if (std::abs(c(i)) > tau * cmax) deg = std::max(deg, f.degrees[static_cast<size_t>(i)]);
  if (deg == 0) throw Error("vector_degree: vector below threshold in all coordinates");
  return deg;
}

int index_degree(const MultiIndex& J, const GradedFrame& f) {
  int d = 0;
  for (int j : J) d += f.degrees[static_cast<size_t>(j)];
  return d;
}

namespace {

void enumerate_minors(const Eigen::MatrixXd& C, int n, int m, MultiVector& out,
                      MultiIndex& J, int start, int depth) {
  if (depth == m) {
    Eigen::MatrixXd sub(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) sub(r, c) = C(J[static_cast<size_t>(r)], c);
    double det = m == 1 ? sub(0, 0) : sub.determinant();
    if (det != 0.0) out.coeff[J] = det;
    return;
  }
  for (int i = start; i <= n - (m - depth); ++i) {
    J.push_back(i);
    enumerate_minors(C, n, m, out, J, i + 1, depth + 1);
    J.pop_back();
  }
}

} // namespace

MultiVector expand_wedge_coords(const Eigen::MatrixXd& frame_coords,
                                const GradedFrame& f) {
  const int n = f.dim();
  const int m = static_cast<int>(frame_coords.cols());
  if (m > n) throw Error("expand_wedge: more vectors than frame dimension");
  MultiVector out;
  out.order = m;
  MultiIndex J;
  enumerate_minors(frame_coords, n, m, out, J, 0, 0);
  return out;
}

MultiVector expand_wedge(std::span<const Eigen::VectorXd> vectors,
                         const GradedFrame& f, std::span<const double> p) {
  const int n = f.dim();
  const int m = static_cast<int>(vectors.size());
  Eigen::MatrixXd C(n, m);
  Eigen::MatrixXd M = f.matrix_at(p);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw Error("expand_wedge: frame matrix singular at point");
  for (int j = 0; j < m; ++j) C.col(j) = lu.solve(vectors[static_cast<size_t>(j)]);
  return expand_wedge_coords(C, f);
}

int multivector_degree(const MultiVector& mv, const GradedFrame& f, double tau) {
  double cmax = 0.0;
  for (const auto& [J, c] : mv.coeff) cmax = std::max(cmax, std::abs(c));
  if (cmax == 0.0) throw Error("multivector_degree: degree of zero multivector undefined");
  int deg = 0;
  for (const auto& [J, c] : mv.coeff)
    if (std::abs(c) > tau * cmax) deg = std::max(deg, index_degree(J, f));
  return deg;
}

MultiVector project_degree(const MultiVector& mv, const GradedFrame& f, int d) {
  MultiVector out;
  out.order = mv.order;
  for (const auto& [J, c] : mv.coeff)
    if (index_degree(J, f) == d) out.coeff[J] = c;
  return out;
}

MultiVector project_above(const MultiVector& mv, const GradedFrame& f, int d) {
  MultiVector out;
  out.order = mv.order;
  for (const auto& [J, c] : mv.coeff)
    if (index_degree(J, f) >= d + 1) out.coeff[J] = c;
  return out;
}

double multivector_norm(const MultiVector& mv) {
  double s = 0.0;
  for (const auto& [J, c] : mv.coeff) s += c * c;
  return std::sqrt(s);
}

int d_max(const GradedFrame& f, int m) {
  if (m > f.dim()) throw Error("d_max: m exceeds frame dimension");
  int d = 0;
  for (int i = f.dim() - m; i < f.dim(); ++i) d += f.degrees[static_cast<size_t>(i)];
  return d;
}

} // namespace holomap::graded
