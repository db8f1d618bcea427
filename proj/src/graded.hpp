#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "symfield.hpp"

namespace holomap::graded {

/// Ordered adapted basis X_1..X_n of an equiregular graded manifold, with
/// nondecreasing declared degrees. layer_dims()[i-1] is n_i, the dimension of
/// the i-th layer of the filtration.
struct GradedFrame {
  std::vector<std::string> coords;
  std::vector<std::string> names;
  std::vector<sym::VectorField> fields;
  std::vector<int> degrees;

  GradedFrame() = default;
  GradedFrame(std::vector<std::string> coord_names,
              std::vector<std::string> field_names,
              std::vector<sym::VectorField> frame_fields,
              std::vector<int> field_degrees);

  int dim() const { return static_cast<int>(fields.size()); }
  int step() const { return degrees.empty() ? 0 : degrees.back(); }
  /// (n_1, ..., n_s), cumulative layer dimensions.
  std::vector<int> layer_dims() const;

  /// Frame matrix at p, column i = X_{i+1}(p).
  Eigen::MatrixXd matrix_at(std::span<const double> p) const;
};

struct FrameReport {
  bool invertible = true;
  bool bracket_compatible = true;
  bool equiregular = true;
  double worst_bracket_leak = 0.0; // largest coordinate above degree i+j
  double min_abs_det = 0.0;
  bool pass() const { return invertible && bracket_compatible && equiregular; }
};

/// Checks frame invertibility, bracket compatibility [H^i,H^j] within
/// H^{i+j}, and constancy of layer dimensions across the sample points.
FrameReport validate_frame(const GradedFrame& f,
                           std::span<const std::vector<double>> sample_points,
                           double tau_frame = 1e-8);

/// Solves sum_i c_i X_i(p) = v. Throws on a singular frame matrix.
Eigen::VectorXd coords_in_frame(const Eigen::VectorXd& v, const GradedFrame& f,
                                std::span<const double> p);

/// Degree of v at p: the largest layer carrying a frame coordinate above the
/// relative threshold tau. Throws if v is below threshold in every coordinate.
int vector_degree(const Eigen::VectorXd& v, const GradedFrame& f,
                  std::span<const double> p, double tau = 1e-9);

/// Strictly increasing 0-based frame indices.
using MultiIndex = std::vector<int>;

/// Sparse m-vector in the frame basis: sum_J coeff[J] X_J.
struct MultiVector {
  int order = 0;
  std::map<MultiIndex, double> coeff;
};

int index_degree(const MultiIndex& J, const GradedFrame& f);

/// Expands v_1 ^ ... ^ v_m in the frame's simple m-vectors at p. The
/// coefficients are the m x m minors of the frame-coordinate matrix.
MultiVector expand_wedge(std::span<const Eigen::VectorXd> vectors,
                         const GradedFrame& f, std::span<const double> p);

/// Same, but the columns of C are already frame coordinates.
MultiVector expand_wedge_coords(const Eigen::MatrixXd& frame_coords,
                                const GradedFrame& f);

/// Max degree over terms with |coeff| > tau * max|coeff|. Throws on the zero
/// multivector.
int multivector_degree(const MultiVector& mv, const GradedFrame& f,
                       double tau = 1e-9);

/// Keeps exactly the terms of degree d.
MultiVector project_degree(const MultiVector& mv, const GradedFrame& f, int d);

/// Keeps exactly the terms of degree >= d+1.
MultiVector project_above(const MultiVector& mv, const GradedFrame& f, int d);

/// Euclidean norm of the coefficients (frame declared orthonormal).
double multivector_norm(const MultiVector& mv);

/// Maximum degree achievable by an m-vector: sum of the top m field degrees.
int d_max(const GradedFrame& f, int m);

} // namespace holomap::graded
