#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "models.hpp"

using namespace holomap;

namespace {

bool fields_equal(const sym::VectorField& a, const sym::VectorField& b,
                  std::span<const std::vector<double>> pts) {
  for (const auto& p : pts) {
    auto va = sym::eval_field(a, p), vb = sym::eval_field(b, p);
    for (size_t i = 0; i < va.size(); ++i)
      if (std::abs(va[i] - vb[i]) > 1e-12) return false;
  }
  return true;
}

std::vector<std::vector<double>> sample_points(int dim) {
  std::vector<std::vector<double>> pts;
  for (int t = 0; t < 6; ++t) {
    std::vector<double> p(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) p[static_cast<size_t>(i)] = std::sin(1.7 * t + 0.3 * i);
    pts.push_back(std::move(p));
  }
  return pts;
}

} // namespace

TEST_CASE("heisenberg frames satisfy the group bracket table") {
  for (int n : {1, 2, 3}) {
    auto m = models::heisenberg(n);
    const auto& fr = m.frame;
    REQUIRE(fr.dim() == 2 * n + 1);
    auto pts = sample_points(fr.dim());
    sym::VectorField zero = sym::VectorField::zero(fr.dim());
    const auto& T = fr.fields[static_cast<size_t>(2 * n)];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        auto xy = sym::lie_bracket(fr.fields[static_cast<size_t>(i)],
                               fr.fields[static_cast<size_t>(n + j)]);
        CHECK(fields_equal(xy, i == j ? T : zero, pts));
        CHECK(fields_equal(sym::lie_bracket(fr.fields[static_cast<size_t>(i)],
                                        fr.fields[static_cast<size_t>(j)]),
                           zero, pts));
        CHECK(fields_equal(sym::lie_bracket(fr.fields[static_cast<size_t>(n + i)],
                                        fr.fields[static_cast<size_t>(n + j)]),
                           zero, pts));
      }
      CHECK(fields_equal(sym::lie_bracket(fr.fields[static_cast<size_t>(i)], T), zero, pts));
      CHECK(fields_equal(sym::lie_bracket(fr.fields[static_cast<size_t>(n + i)], T), zero, pts));
    }
    // grading: 2n fields of degree 1, one of degree 2
    for (int i = 0; i < 2 * n; ++i) CHECK(fr.degrees[static_cast<size_t>(i)] == 1);
    CHECK(fr.degrees[static_cast<size_t>(2 * n)] == 2);
    CHECK(graded::validate_frame(fr, pts).pass());
  }
}

TEST_CASE("engel fixture carries the documented ledger") {
  auto m = models::engel_plane();
  CHECK(m.name == "engel-plane");
  CHECK(m.frame.dim() == 4);
  CHECK(m.frame.degrees == std::vector<int>{1, 1, 2, 3});
  CHECK(m.im.params == std::vector<std::string>{"u", "v"});
  CHECK(m.analysis.target_degree == 4);
  auto find = [&](const std::string& key) -> std::string {
    for (const auto& e : m.expected)
      if (e.key == key) return e.value;
    return "";
  };
  CHECK(find("degree") == "4");
  CHECK(find("verdict") == "regular");
  CHECK(find("A") == "-1");
  CHECK(find("B") == "0");
  CHECK(find("area4") == "1");
  CHECK(graded::validate_frame(m.frame, sample_points(4)).pass());
}

TEST_CASE("visual cortex recomputes kappa from theta") {
  auto m = models::visual_cortex("x");
  REQUIRE(m.im.chart.size() == 4);
  // chart = (x, y, x, cos x): kappa = X1(theta) = cos(theta) d_x theta = cos x
  for (double x : {0.0, 0.4, 1.1}) {
    std::vector<double> q = {x, 0.25};
    auto p = m.im.map_point(q);
    CHECK(p[2] == doctest::Approx(x));
    CHECK(p[3] == doctest::Approx(std::cos(x)));
  }
  // constant theta: kappa = 0, straight rulings
  auto flat = models::visual_cortex("0.5");
  auto p = flat.im.map_point(std::vector<double>{0.3, 0.7});
  CHECK(p[2] == doctest::Approx(0.5));
  CHECK(p[3] == doctest::Approx(0.0));
  CHECK(graded::validate_frame(m.frame, sample_points(4)).pass());
}

TEST_CASE("builtin lookup") {
  CHECK(models::builtin("engel-plane").name == "engel-plane");
  CHECK(models::builtin("visual-cortex").name == "visual-cortex");
  CHECK(models::builtin("heisenberg-2").frame.dim() == 5);
  CHECK_THROWS_AS(models::builtin("nope"), Error);
  auto names = models::builtin_names();
  CHECK(std::find(names.begin(), names.end(), "engel-plane") != names.end());
}

TEST_CASE("fixtures re-parse from their own text") {
  for (const auto& name : models::builtin_names()) {
    auto m = models::builtin(name);
    auto again = modelfile::parse_model(modelfile::to_text(m));
    CHECK(again.frame.dim() == m.frame.dim());
    CHECK(again.im.params == m.im.params);
    auto pts = sample_points(m.frame.dim());
    for (size_t i = 0; i < m.frame.fields.size(); ++i)
      CHECK(fields_equal(m.frame.fields[i], again.frame.fields[i], pts));
  }
}
