#include "models.hpp"

#include <sstream>

namespace holomap::models {

using modelfile::Model;

Model heisenberg(int n) {
  if (n < 1) throw Error("heisenberg: n must be at least 1");
  std::ostringstream t;
  t << "name heisenberg-" << n << "\n\n[coords]\n";
  for (int i = 1; i <= n; ++i) t << "x" << i << " ";
  for (int i = 1; i <= n; ++i) t << "y" << i << " ";
  t << "t\n\n[frame]\n";
  const int dim = 2 * n + 1;
  auto zeros_except = [&](int pos, const std::string& val, int extra_pos,
                          const std::string& extra) {
    std::string line;
    for (int c = 0; c < dim; ++c) {
      if (c) line += ", ";
      if (c == pos) line += val;
      else if (c == extra_pos) line += extra;
      else line += "0";
    }
    return line;
  };
  for (int i = 1; i <= n; ++i)
    t << "X" << i << " 1 : " << zeros_except(i - 1, "1", dim - 1, "-y" + std::to_string(i) + "/2")
      << "\n";
  for (int i = 1; i <= n; ++i)
    t << "Y" << i << " 1 : " << zeros_except(n + i - 1, "1", dim - 1, "x" + std::to_string(i) + "/2")
      << "\n";
  t << "T 2 : " << zeros_except(dim - 1, "1", -1, "") << "\n";
  const int m = std::min(2, n);
  t << "\n[immersion]\nparams";
  for (int j = 1; j <= m; ++j) t << " u" << j;
  t << "\n";
  for (int c = 0; c < dim; ++c) {
    if (c < m) t << "u" << (c + 1) << "\n";
    else t << "0\n";
  }
  t << "\n[analysis]\n";
  t << "region_lo";
  for (int j = 0; j < m; ++j) t << " 0";
  t << "\nregion_hi";
  for (int j = 0; j < m; ++j) t << " 1";
  t << "\ntarget_degree " << m << "\n";
  t << "\n[expected]\n";
  t << "degree " << m << " exact:horizontal-plane\n";
  t << "growth1 " << 2 * n << " exact:layer-count\n";
  return modelfile::parse_model(t.str());
}

Model engel_plane() {
  static const char* text = R"(name engel-plane

[coords]
x1 x2 x3 x4

[frame]
X1 1 : 1, 0, 0, 0
X2 1 : 0, 1, x1, x1^2/2
X3 2 : 0, 0, 1, x1
X4 3 : 0, 0, 0, 1

[immersion]
params u v
0
u
0
v

[analysis]
eps 1
steps 128
grid 32
sigma0_origin 0 0
sigma0_dir 0 1
sigma0_extent 1
region_lo 0 0
region_hi 1 1
target_degree 4

[expected]
degree 4 exact:wedge-expansion
A -1 exact:structure-constants
B 0 exact:structure-constants
verdict regular closed-form:constant-nonzero-A
area4 1 closed-form:unit-square
)";
  return modelfile::parse_model(text);
}

Model visual_cortex(const std::string& theta_text) {
  std::vector<std::string> params = {"x", "y"};
  sym::Expr theta;
  try {
    theta = sym::parse(theta_text, params);
  } catch (const Error& e) {
    throw Error(std::string("visual_cortex: bad theta expression: ") + e.what());
  }
  // kappa = X1(theta) restricted to the surface:
  // cos(theta) theta_x + sin(theta) theta_y.
  sym::Expr kappa = sym::add(sym::mul(sym::cos(theta), sym::diff(theta, 0)),
                             sym::mul(sym::sin(theta), sym::diff(theta, 1)));
  std::ostringstream t;
  t << R"(name visual-cortex

[coords]
x y theta k

[frame]
X1 1 : cos(theta), sin(theta), k, 0
X2 1 : 0, 0, 0, 1
X3 2 : 0, 0, -1, 0
X4 3 : -sin(theta), cos(theta), 0, 0

[immersion]
params x y
x
y
)";
  t << sym::to_string(theta) << "\n" << sym::to_string(kappa) << "\n";
  t << R"(
[analysis]
eps 1
steps 128
grid 32
sigma0_origin 0 0
sigma0_dir 0 1
sigma0_extent 1
region_lo 0 0
region_hi 1 1
target_degree 4

[expected]
degree 4 exact:curvature-constraint
verdict regular closed-form:A-never-vanishes
)";
  return modelfile::parse_model(t.str());
}

Model builtin(const std::string& name) {
  if (name == "engel-plane") return engel_plane();
  if (name == "visual-cortex") return visual_cortex("x");
  if (name.rfind("heisenberg-", 0) == 0) {
    try {
      return heisenberg(std::stoi(name.substr(11)));
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error("unknown builtin model '" + name + "'");
    }
  }
  throw Error("unknown builtin model '" + name + "' (try: engel-plane, visual-cortex, heisenberg-1)");
}

std::vector<std::string> builtin_names() {
  return {"engel-plane", "visual-cortex", "heisenberg-1", "heisenberg-2", "heisenberg-3"};
}

} // namespace holomap::models
