#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "models.hpp"
#include "regularity.hpp"

using namespace holomap;
namespace adm = holomap::admissibility;
namespace reg = holomap::regularity;

namespace {

// q = 2, k = 1, B = 0, A column constant (1, 0): the second vertical
// direction is never reachable, so the point is singular with Gamma = (0, 1).
adm::RuledSystem frozen_column(double eps, int n1) {
  return adm::synthetic_system(
      eps, n1, 1, 2, 1,
      [](int, double) {
        Eigen::MatrixXd a(2, 1);
        a << 1, 0;
        return a;
      },
      [](int, double) { return Eigen::MatrixXd::Zero(2, 2); });
}

// q = 2, k = 1, B = 0, A column (cos x1, sin x1): over [0, pi/2] the column
// sweeps out both directions, so the stacked matrix has full rank.
adm::RuledSystem rotating_column(int n1) {
  return adm::synthetic_system(
      M_PI / 2, n1, 1, 2, 1,
      [](int, double x) {
        Eigen::MatrixXd a(2, 1);
        a << std::cos(x), std::sin(x);
        return a;
      },
      [](int, double) { return Eigen::MatrixXd::Zero(2, 2); });
}

// q = 2, k = 1, B = diag(1, -1), A column (exp(-x1), 0).
// D = diag(e^x, e^-x), so D A = (1, 0)^T is constant: singular, Gamma = (0,1),
// Lambda = (0, e^{-x}) with dLambda = Lambda B exactly.
adm::RuledSystem diag_decay(double eps, int n1) {
  return adm::synthetic_system(
      eps, n1, 1, 2, 1,
      [](int, double x) {
        Eigen::MatrixXd a(2, 1);
        a << std::exp(-x), 0;
        return a;
      },
      [](int, double) {
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 2);
        b(0, 0) = 1;
        b(1, 1) = -1;
        return b;
      });
}

} // namespace

TEST_CASE("frozen column is singular with an exact certificate") {
  auto sys = frozen_column(1.0, 32);
  auto [rank, sv] = reg::linear_fullness(sys, 0);
  CHECK(rank == 1);
  auto cert = reg::singular_certificate(sys, 0);
  REQUIRE(cert.has_value());
  CHECK(std::abs(std::abs(cert->gamma(1)) - 1.0) < 1e-12);
  CHECK(std::abs(cert->gamma(0)) < 1e-12);
  CHECK(cert->res_lambda_A < 1e-12);
  CHECK(cert->res_ode < 1e-12);
  CHECK(cert->min_lambda == doctest::Approx(1.0));
  auto report = reg::is_regular(sys);
  CHECK_FALSE(report.regular);
  CHECK(report.points[0].certificate.has_value());
}

TEST_CASE("rotating column is regular and yields no certificate") {
  auto sys = rotating_column(32);
  auto [rank, sv] = reg::linear_fullness(sys, 0);
  CHECK(rank == 2);
  CHECK_FALSE(reg::singular_certificate(sys, 0).has_value());
  auto report = reg::is_regular(sys);
  CHECK(report.regular);
  CHECK_FALSE(report.points[0].certificate.has_value());
  CHECK(report.points[0].full);
}

TEST_CASE("diagonal decay system: closed-form certificate") {
  auto sys = diag_decay(1.0, 64);
  auto cert = reg::singular_certificate(sys, 0);
  REQUIRE(cert.has_value());
  CHECK(std::abs(std::abs(cert->gamma(1)) - 1.0) < 1e-10);
  double sgn = cert->gamma(1) > 0 ? 1.0 : -1.0;
  for (int i = 0; i <= 64; ++i) {
    double x = i / 64.0;
    CHECK(cert->lambda[static_cast<size_t>(i)](0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(cert->lambda[static_cast<size_t>(i)](1) ==
          doctest::Approx(sgn * std::exp(-x)).epsilon(1e-8));
  }
  CHECK(cert->res_lambda_A < 1e-9);
  CHECK(cert->res_ode < 1e-6);
  CHECK(cert->min_lambda == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("verdict is stable under grid refinement") {
  for (int n1 : {16, 32, 64, 128}) {
    CHECK_FALSE(reg::is_regular(frozen_column(1.0, n1)).regular);
    CHECK(reg::is_regular(rotating_column(n1)).regular);
  }
}

TEST_CASE("determinant identity det D = exp(int Tr B)") {
  // B = 0: det D = 1, residual exactly zero up to roundoff.
  auto sys0 = frozen_column(1.0, 16);
  CHECK(reg::det_identity_check(sys0, 0) < 1e-14);
  // scalar b(x) = sin x: D = exp(int_0^x sin) = exp(1 - cos x).
  auto sys1 = adm::synthetic_system(
      1.0, 64, 1, 1, 1, [](int, double) { return Eigen::MatrixXd::Constant(1, 1, 1.0); },
      [](int, double x) { return Eigen::MatrixXd::Constant(1, 1, std::sin(x)); });
  CHECK(reg::det_identity_check(sys1, 0) < 1e-9);
  // random smooth 3x3 B.
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd W = Eigen::MatrixXd::NullaryExpr(3, 3, [&](int, int) { return u(rng); });
  Eigen::MatrixXd P = Eigen::MatrixXd::NullaryExpr(3, 3, [&](int, int) { return u(rng); });
  auto sys2 = adm::synthetic_system(
      1.0, 128, 1, 3, 1,
      [](int, double) { return Eigen::MatrixXd::Ones(3, 1); },
      [&](int, double x) { return (W * std::cos(2 * x) + P * std::sin(x)).eval(); });
  CHECK(reg::det_identity_check(sys2, 0) < 1e-6);
}

TEST_CASE("engel ruled plane is regular") {
  auto m = models::engel_plane();
  std::vector<std::vector<double>> grid;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) grid.push_back({i / 3.0, j / 3.0});
  auto basis = immersion::adapted_split(m.im, m.frame, grid);
  immersion::Sigma0Spec sig;
  sig.origin = Eigen::Vector2d(0, 0);
  sig.dirs = {Eigen::Vector2d(0, 1)};
  sig.extents = {1.0};
  sig.counts = {5};
  auto cyl = immersion::characteristic_coords(m.im, basis, sig, 1.0, 32);
  auto sys = adm::build_system(m.frame, basis, cyl);
  auto report = reg::is_regular(sys);
  CHECK(report.regular);
  CHECK(report.vertical_dim == 1);
  CHECK(static_cast<int>(report.points.size()) == 5);
  for (const auto& pt : report.points) {
    CHECK(pt.full);
    CHECK_FALSE(pt.certificate.has_value());
  }
  for (int r = 0; r < sys.rows(); ++r) CHECK(reg::det_identity_check(sys, r) < 1e-10);
}

TEST_CASE("stacked columns reproduce D*A at the nodes") {
  auto sys = diag_decay(0.5, 16);
  auto D = adm::fundamental_matrix(sys);
  auto S = reg::stacked_columns(sys, D[0], 0);
  REQUIRE(S.rows() == 2);
  REQUIRE(S.cols() == 17);
  for (int i = 0; i <= 16; ++i) {
    Eigen::MatrixXd expect = D[0][static_cast<size_t>(i)] * sys.A[0][static_cast<size_t>(2 * i)];
    CHECK((S.col(i) - expect.col(0)).cwiseAbs().maxCoeff() < 1e-12);
  }
}
