#include "regularity.hpp"

#include <cmath>

namespace holomap::regularity {

using admissibility::RuledSystem;

Eigen::MatrixXd stacked_columns(const RuledSystem& sys,
                                const std::vector<Eigen::MatrixXd>& D_row, int row) {
  const int nodes = sys.nodes();
  Eigen::MatrixXd stacked(sys.q, sys.k * nodes);
  for (int i = 0; i < nodes; ++i) {
    const Eigen::MatrixXd& A = sys.A[static_cast<size_t>(row)][static_cast<size_t>(2 * i)];
    stacked.middleCols(sys.k * i, sys.k) = D_row[static_cast<size_t>(i)] * A;
  }
  return stacked;
}

namespace {

std::vector<Eigen::MatrixXd> D_for_row(const RuledSystem& sys, int row) {
  // fundamental_matrix solves every row; slice out the one requested.
  RuledSystem one;
  one.eps = sys.eps;
  one.n1 = sys.n1;
  one.q = sys.q;
  one.k = sys.k;
  one.A.push_back(sys.A[static_cast<size_t>(row)]);
  one.B.push_back(sys.B[static_cast<size_t>(row)]);
  return admissibility::fundamental_matrix(one)[0];
}

std::pair<int, Eigen::VectorXd> rank_of(const Eigen::MatrixXd& stacked, double tau_rank) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  Eigen::VectorXd sv = svd.singularValues();
  int rank = 0;
  if (sv.size() > 0 && sv(0) > 0.0)
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > tau_rank * sv(0)) ++rank;
  return {rank, std::move(sv)};
}

Certificate certificate_from(const RuledSystem& sys, int row,
                             const std::vector<Eigen::MatrixXd>& D_row,
                             const Eigen::MatrixXd& stacked) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullU);
  Certificate cert;
  cert.gamma = svd.matrixU().col(sys.q - 1); // left singular vector of the smallest value
  const int nodes = sys.nodes();
  const double h = sys.step();
  cert.lambda.reserve(static_cast<size_t>(nodes));
  for (int i = 0; i < nodes; ++i)
    cert.lambda.push_back(D_row[static_cast<size_t>(i)].transpose() * cert.gamma);
  cert.min_lambda = 1.0 / 0.0;
  for (int i = 0; i < nodes; ++i) {
    const Eigen::VectorXd& lam = cert.lambda[static_cast<size_t>(i)];
    cert.min_lambda = std::min(cert.min_lambda, lam.norm());
    Eigen::VectorXd la = sys.A[static_cast<size_t>(row)][static_cast<size_t>(2 * i)].transpose() * lam;
    if (la.size() > 0) cert.res_lambda_A = std::max(cert.res_lambda_A, la.cwiseAbs().maxCoeff());
    // ODE residual dLambda/dx1 - Lambda B by fourth-order differences.
    Eigen::VectorXd dlam;
    const int N = nodes - 1;
    auto L = [&](int j) -> const Eigen::VectorXd& { return cert.lambda[static_cast<size_t>(j)]; };
    if (N >= 4) {
      if (i >= 2 && i <= N - 2) {
        dlam = (-L(i + 2) + 8.0 * L(i + 1) - 8.0 * L(i - 1) + L(i - 2)) / (12.0 * h);
      } else {
        int dir = (i < 2) ? 1 : -1;
        dlam = dir *
               (-25.0 / 12.0 * L(i) + 4.0 * L(i + dir) - 3.0 * L(i + 2 * dir) +
                4.0 / 3.0 * L(i + 3 * dir) - 0.25 * L(i + 4 * dir)) /
               h;
      }
      Eigen::VectorXd res =
          dlam - sys.B[static_cast<size_t>(row)][static_cast<size_t>(2 * i)].transpose() * lam;
      cert.res_ode = std::max(cert.res_ode, res.cwiseAbs().maxCoeff());
    }
  }
  return cert;
}

} // namespace

std::pair<int, Eigen::VectorXd> linear_fullness(const RuledSystem& sys, int row,
                                                double tau_rank) {
  auto D = D_for_row(sys, row);
  return rank_of(stacked_columns(sys, D, row), tau_rank);
}

std::optional<Certificate> singular_certificate(const RuledSystem& sys, int row,
                                                double tau_rank) {
  auto D = D_for_row(sys, row);
  Eigen::MatrixXd stacked = stacked_columns(sys, D, row);
  auto [rank, sv] = rank_of(stacked, tau_rank);
  if (rank >= sys.q) return std::nullopt;
  return certificate_from(sys, row, D, stacked);
}

RegularityReport is_regular(const RuledSystem& sys, double tau_rank, double tau_cert) {
  RegularityReport rep;
  rep.vertical_dim = sys.q;
  rep.tau_rank = tau_rank;
  rep.tau_cert = tau_cert;
  rep.regular = true;
  auto D = admissibility::fundamental_matrix(sys);
  for (int r = 0; r < sys.rows(); ++r) {
    PointReport pr;
    Eigen::MatrixXd stacked = stacked_columns(sys, D[static_cast<size_t>(r)], r);
    auto [rank, sv] = rank_of(stacked, tau_rank);
    pr.rank = rank;
    pr.singular_values = std::move(sv);
    pr.full = (rank == sys.q);
    if (!pr.full) {
      rep.regular = false;
      pr.certificate = certificate_from(sys, r, D[static_cast<size_t>(r)], stacked);
    }
    rep.points.push_back(std::move(pr));
  }
  return rep;
}

double det_identity_check(const RuledSystem& sys, int row) {
  auto D = D_for_row(sys, row);
  const double h = sys.step();
  double integral = 0.0; // int_0^x1 Tr B, accumulated per node by Simpson
  double worst = 0.0;
  for (int i = 0; i < sys.nodes(); ++i) {
    double det = D[static_cast<size_t>(i)].determinant();
    if (det <= 0.0) throw Error("fundamental matrix determinant not positive");
    worst = std::max(worst, std::abs(det - std::exp(integral)));
    if (i < sys.nodes() - 1) {
      auto tr = [&](int t) { return sys.B[static_cast<size_t>(row)][static_cast<size_t>(t)].trace(); };
      integral += (h / 6.0) * (tr(2 * i) + 4.0 * tr(2 * i + 1) + tr(2 * i + 2));
    }
  }
  return worst;
}

} // namespace holomap::regularity
