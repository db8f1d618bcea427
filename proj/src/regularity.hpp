#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "admissibility.hpp"

namespace holomap::regularity {

/// Certificate of singularity at one transversal point: a unit row vector
/// Gamma with Lambda(x1) = Gamma D(x1) annihilating every sampled A column.
struct Certificate {
  Eigen::VectorXd gamma;
  std::vector<Eigen::VectorXd> lambda; // per node
  double res_lambda_A = 0.0;           // max |Lambda A| over nodes
  double res_ode = 0.0;                // max |dLambda - Lambda B| over nodes
  double min_lambda = 0.0;             // min |Lambda| over nodes
};

struct PointReport {
  int rank = 0;
  Eigen::VectorXd singular_values;
  bool full = false;
  std::optional<Certificate> certificate;
};

struct RegularityReport {
  bool regular = false;
  int vertical_dim = 0;
  double tau_rank = 0.0, tau_cert = 0.0;
  std::vector<PointReport> points; // one per transversal point
};

/// Columns of A~(x1) = D(x1) A(x1) at every node, stacked into a
/// q x (k*(N1+1)) matrix.
Eigen::MatrixXd stacked_columns(const admissibility::RuledSystem& sys,
                                const std::vector<Eigen::MatrixXd>& D_row, int row);

/// Numeric rank (singular values above tau_rank * sigma_max) and the
/// singular values of the stacked matrix.
std::pair<int, Eigen::VectorXd> linear_fullness(const admissibility::RuledSystem& sys,
                                                int row, double tau_rank = 1e-8);

/// Certificate at a rank-deficient transversal point, or nullopt when the
/// stacked matrix has full rank.
std::optional<Certificate> singular_certificate(const admissibility::RuledSystem& sys,
                                                int row, double tau_rank = 1e-8);

/// Aggregates linear fullness over every transversal point; regular iff the
/// stacked matrices span the vertical space everywhere. Certificates are
/// attached to every deficient point.
RegularityReport is_regular(const admissibility::RuledSystem& sys,
                            double tau_rank = 1e-8, double tau_cert = 1e-6);

/// Max over nodes of |det D(x1) - exp(int_0^x1 Tr B)|. Also verifies
/// det D > 0 at every node (throws otherwise).
double det_identity_check(const admissibility::RuledSystem& sys, int row);

} // namespace holomap::regularity
