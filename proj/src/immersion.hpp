#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "graded.hpp"
#include "symfield.hpp"

namespace holomap::immersion {

/// Parametrized chart Phi: R^m -> N, components expressed in the parameter
/// symbols. The ambient frame gives the grading.
struct Immersion {
  std::vector<std::string> params;
  std::vector<sym::Expr> chart; // one expression per ambient coordinate

  int param_dim() const { return static_cast<int>(params.size()); }

  std::vector<double> map_point(std::span<const double> q) const;
};

/// Columns of the chart Jacobian at q (exact symbolic partials, evaluated).
/// Throws if the Jacobian is rank deficient at q.
std::vector<Eigen::VectorXd> tangent_frame(const Immersion& im,
                                           const graded::GradedFrame& frame,
                                           std::span<const double> q);

/// Tangent flag dimensions (m~_1, ..., m~_s) at q.
std::vector<int> flag_dims(const Immersion& im, const graded::GradedFrame& frame,
                           std::span<const double> q, double tau = 1e-9);

int pointwise_degree(const Immersion& im, const graded::GradedFrame& frame,
                     std::span<const double> q, double tau = 1e-9);

int global_degree(const Immersion& im, const graded::GradedFrame& frame,
                  std::span<const std::vector<double>> grid, double tau = 1e-9);

/// Grid points whose pointwise degree is below the grid maximum.
std::vector<std::vector<double>> singular_scan(const Immersion& im,
                                               const graded::GradedFrame& frame,
                                               std::span<const std::vector<double>> grid,
                                               double tau = 1e-9);

/// (iota_0, k): degree of the lowest nonzero tangent flag layer and the
/// horizontal codimension n_{iota0} - m~_{iota0}. Throws when the flag
/// dimensions are not constant over the grid.
std::pair<int, int> iota_k(const Immersion& im, const graded::GradedFrame& frame,
                           std::span<const std::vector<double>> grid,
                           double tau = 1e-9);

/// Adapted tangent basis E_1..E_m plus the complement V_{m+1}..V_n for a
/// ruled immersion, all as ambient vector fields with symbolic components.
/// The basis is declared orthonormal; no metric normalization is applied.
struct AdaptedBasis {
  int m = 0, n = 0, s = 0;
  int iota0 = 0, k = 0;
  int degree = 0;
  std::vector<int> flag; // m~_1..m~_s
  std::vector<sym::VectorField> E;        // tangent part, E[0] is the ruling direction
  std::vector<int> E_degrees;
  std::vector<sym::VectorField> V;        // complement; first k horizontal, rest vertical
  std::vector<int> V_degrees;
  std::vector<std::string> V_names;       // seed field names, for reports
  std::vector<sym::Expr> e1_param;        // E_1 projected to parameter space
  std::vector<std::vector<sym::Expr>> E_param; // all E_j in parameter space

  int vertical_dim() const { return n - m - k; }

  /// Columns [E_1..E_m, V_{m+1}..V_n] evaluated at an ambient point.
  Eigen::MatrixXd basis_matrix_at(std::span<const double> ambient_p) const;

  /// Coordinates of an ambient vector in the declared-orthonormal basis.
  Eigen::VectorXd coords_at(const Eigen::VectorXd& v,
                            std::span<const double> ambient_p) const;
};

/// Builds the adapted split. Requires a graph chart (every parameter appears
/// verbatim as one chart component) so tangent frame coordinates extend to
/// ambient expressions, and a ruled degree pattern
/// deg(M) = (m-1)s + iota_0 with a one-dimensional lowest flag layer.
AdaptedBasis adapted_split(const Immersion& im, const graded::GradedFrame& frame,
                           std::span<const std::vector<double>> grid,
                           double tau = 1e-9);

/// Transversal (m-1)-dimensional lattice in parameter space.
struct Sigma0Spec {
  Eigen::VectorXd origin;
  std::vector<Eigen::VectorXd> dirs;
  std::vector<double> extents;
  std::vector<int> counts;

  int lattice_size() const;
  std::vector<Eigen::VectorXd> points() const;
};

/// Characteristic cylinder: for each Sigma_0 point, the RK4 integral curve of
/// the projected ruling field, sampled at 2*N1+1 half-steps over [0, eps]
/// (even indices are the grid nodes, odd ones midpoints for quadrature).
struct CylinderGrid {
  double eps = 0.0;
  int n1 = 0;
  int m = 0;
  std::vector<int> hat_shape;
  std::vector<Eigen::VectorXd> sigma0;
  std::vector<std::vector<Eigen::VectorXd>> param;   // [row][sample]
  std::vector<std::vector<Eigen::VectorXd>> ambient; // [row][sample]

  int rows() const { return static_cast<int>(param.size()); }
  int samples_per_row() const { return n1 > 0 ? 2 * n1 + 1 : 1; }
  double step() const { return n1 > 0 ? eps / n1 : 0.0; }
};

CylinderGrid characteristic_coords(const Immersion& im, const AdaptedBasis& basis,
                                   const Sigma0Spec& sigma0, double eps, int n1);

/// Axis-aligned quadrature region in parameter space.
struct RegionSpec {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  std::vector<int> counts;
};

/// Degree-d area by midpoint quadrature: integral of the norm of the
/// degree-d projection of the tangent wedge, with the Euclidean parameter
/// metric as the reference measure.
double degree_area(const Immersion& im, const graded::GradedFrame& frame,
                   const RegionSpec& region, int d);

} // namespace holomap::immersion
