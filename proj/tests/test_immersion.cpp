#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "immersion.hpp"
#include "models.hpp"

using namespace holomap;

namespace {

std::vector<std::vector<double>> box_grid(double lo, double hi, int per) {
  std::vector<std::vector<double>> g;
  for (int i = 0; i < per; ++i)
    for (int j = 0; j < per; ++j)
      g.push_back({lo + (hi - lo) * i / (per - 1), lo + (hi - lo) * j / (per - 1)});
  return g;
}

double eval_at(const sym::Expr& e, std::vector<double> p) { return sym::eval(e, p); }

} // namespace

TEST_CASE("engel plane: tangents, flag, degree") {
  auto m = models::engel_plane();
  std::vector<double> q = {0.3, -0.2};
  auto pt = m.im.map_point(q);
  CHECK(pt == std::vector<double>{0.0, 0.3, 0.0, -0.2});
  auto tf = immersion::tangent_frame(m.im, m.frame, q);
  CHECK(tf.size() == 2);
  CHECK((tf[0] - Eigen::Vector4d(0, 1, 0, 0)).norm() < 1e-14);
  CHECK((tf[1] - Eigen::Vector4d(0, 0, 0, 1)).norm() < 1e-14);
  CHECK(immersion::flag_dims(m.im, m.frame, q) == std::vector<int>{1, 1, 2});
  CHECK(immersion::pointwise_degree(m.im, m.frame, q) == 4);
  auto grid = box_grid(0, 1, 5);
  CHECK(immersion::global_degree(m.im, m.frame, grid) == 4);
  CHECK(immersion::singular_scan(m.im, m.frame, grid).empty());
  auto [iota0, k] = immersion::iota_k(m.im, m.frame, grid);
  CHECK(iota0 == 1);
  CHECK(k == 1);
}

TEST_CASE("engel plane: adapted split reproduces the closed-form basis") {
  auto m = models::engel_plane();
  auto grid = box_grid(0, 1, 5);
  auto b = immersion::adapted_split(m.im, m.frame, grid);
  CHECK(b.m == 2);
  CHECK(b.n == 4);
  CHECK(b.iota0 == 1);
  CHECK(b.k == 1);
  CHECK(b.degree == 4);
  CHECK(b.vertical_dim() == 1);
  // E1 = X2, E2 = X4, V3 = X1, V4 = X3 as ambient fields.
  std::vector<double> p = {0.7, 0.1, -0.4, 0.2}; // off the surface too
  auto e1 = sym::eval_field(b.E[0], p);
  CHECK(e1[0] == doctest::Approx(0.0));
  CHECK(e1[1] == doctest::Approx(1.0));
  CHECK(e1[2] == doctest::Approx(0.7));        // x1 component of X2
  CHECK(e1[3] == doctest::Approx(0.245));      // x1^2/2
  auto e2 = sym::eval_field(b.E[1], p);
  CHECK((Eigen::Vector4d(e2[0], e2[1], e2[2], e2[3]) - Eigen::Vector4d(0, 0, 0, 1)).norm() < 1e-12);
  auto v3 = sym::eval_field(b.V[0], p);
  CHECK((Eigen::Vector4d(v3[0], v3[1], v3[2], v3[3]) - Eigen::Vector4d(1, 0, 0, 0)).norm() < 1e-12);
  auto v4 = sym::eval_field(b.V[1], p);
  CHECK((Eigen::Vector4d(v4[0], v4[1], v4[2], v4[3]) - Eigen::Vector4d(0, 0, 1, 0.7)).norm() < 1e-12);
  CHECK(b.V_degrees == std::vector<int>{1, 2});
  CHECK(b.E_degrees[0] == 1);
  CHECK(b.E_degrees[1] == 3);
  // ruling direction in parameter space is d/du
  CHECK(eval_at(b.e1_param[0], {0.3, 0.4}) == doctest::Approx(1.0));
  CHECK(eval_at(b.e1_param[1], {0.3, 0.4}) == doctest::Approx(0.0));
}

TEST_CASE("visual cortex: adapted split matches the closed forms for theta = x") {
  auto m = models::visual_cortex("x");
  auto grid = box_grid(0.05, 0.95, 5);
  auto b = immersion::adapted_split(m.im, m.frame, grid);
  CHECK(b.iota0 == 1);
  CHECK(b.k == 1);
  CHECK(b.degree == 4);
  // kappa = cos(x), X1(kappa) = -sin(x)cos(x) on the surface.
  // E1 = X1 + X1(kappa) X2: components (cos th, sin th, k, X1(kappa)).
  for (double x : {0.2, 0.5, 1.1}) {
    std::vector<double> p = {x, 0.3, x, std::cos(x)}; // on the surface: theta=x, k=cos x
    double kp = -std::sin(x) * std::cos(x);
    auto e1 = sym::eval_field(b.E[0], p);
    CHECK(e1[0] == doctest::Approx(std::cos(x)).epsilon(1e-10));
    CHECK(e1[1] == doctest::Approx(std::sin(x)).epsilon(1e-10));
    CHECK(e1[2] == doctest::Approx(std::cos(x)).epsilon(1e-10)); // k dtheta with k=cos x
    CHECK(e1[3] == doctest::Approx(kp).epsilon(1e-10));          // X1(kappa) X2
    // V3 = X2 - X1(kappa) X1
    auto v3 = sym::eval_field(b.V[0], p);
    CHECK(v3[0] == doctest::Approx(-kp * std::cos(x)).epsilon(1e-10));
    CHECK(v3[1] == doctest::Approx(-kp * std::sin(x)).epsilon(1e-10));
    CHECK(v3[2] == doctest::Approx(-kp * std::cos(x)).epsilon(1e-10));
    CHECK(v3[3] == doctest::Approx(1.0).epsilon(1e-10));
    // V4 = X3
    auto v4 = sym::eval_field(b.V[1], p);
    CHECK(v4[0] == doctest::Approx(0.0));
    CHECK(v4[1] == doctest::Approx(0.0));
    CHECK(v4[2] == doctest::Approx(-1.0));
    CHECK(v4[3] == doctest::Approx(0.0));
  }
}

TEST_CASE("adapted split rejects non-ruled charts") {
  // Heisenberg horizontal plane has degree 2 != (m-1)s + iota0 = 3.
  auto m = models::heisenberg(2);
  auto grid = box_grid(0, 1, 3);
  CHECK_THROWS_AS(immersion::adapted_split(m.im, m.frame, grid), Error);
}

TEST_CASE("characteristic cylinder on the engel plane") {
  auto m = models::engel_plane();
  auto grid = box_grid(0, 1, 5);
  auto b = immersion::adapted_split(m.im, m.frame, grid);
  immersion::Sigma0Spec sig;
  sig.origin = Eigen::Vector2d(0, 0);
  sig.dirs = {Eigen::Vector2d(0, 1)};
  sig.extents = {1.0};
  sig.counts = {4};
  auto cyl = immersion::characteristic_coords(m.im, b, sig, 0.5, 8);
  CHECK(cyl.rows() == 4);
  CHECK(cyl.samples_per_row() == 17);
  CHECK(cyl.step() == doctest::Approx(0.0625));
  // characteristics advance along u with v fixed
  for (int r = 0; r < 4; ++r) {
    double v = r / 3.0;
    const auto& row = cyl.param[static_cast<size_t>(r)];
    CHECK(row.front()(0) == doctest::Approx(0.0));
    CHECK(row.back()(0) == doctest::Approx(0.5).epsilon(1e-10));
    for (const auto& q : row) CHECK(q(1) == doctest::Approx(v));
  }
  // ambient samples sit on the surface
  const auto& q8 = cyl.param[1][8];
  const auto& a8 = cyl.ambient[1][8];
  CHECK(a8(1) == doctest::Approx(q8(0)));
  CHECK(a8(3) == doctest::Approx(q8(1)));
  CHECK_THROWS_AS(immersion::characteristic_coords(m.im, b, sig, 0.5, 7), Error);
}

TEST_CASE("sigma0 lattice") {
  immersion::Sigma0Spec sig;
  sig.origin = Eigen::Vector2d(1, 2);
  sig.dirs = {Eigen::Vector2d(0, 1)};
  sig.extents = {3.0};
  sig.counts = {3};
  auto pts = sig.points();
  REQUIRE(pts.size() == 3);
  CHECK((pts[0] - Eigen::Vector2d(1, 2)).norm() < 1e-15);
  CHECK((pts[1] - Eigen::Vector2d(1, 3.5)).norm() < 1e-15);
  CHECK((pts[2] - Eigen::Vector2d(1, 5)).norm() < 1e-15);
}

TEST_CASE("degree area of the engel plane over the unit square is 1") {
  auto m = models::engel_plane();
  immersion::RegionSpec reg;
  reg.lo = Eigen::Vector2d(0, 0);
  reg.hi = Eigen::Vector2d(1, 1);
  reg.counts = {16, 16};
  CHECK(immersion::degree_area(m.im, m.frame, reg, 4) == doctest::Approx(1.0).epsilon(1e-9));
  // no mass in other degrees
  CHECK(immersion::degree_area(m.im, m.frame, reg, 3) == doctest::Approx(0.0));
}

TEST_CASE("visual cortex pointwise degree is 4 via the curvature constraint") {
  auto m = models::visual_cortex("x");
  auto grid = box_grid(0.1, 0.9, 4);
  CHECK(immersion::global_degree(m.im, m.frame, grid) == 4);
  CHECK(immersion::singular_scan(m.im, m.frame, grid).empty());
}
