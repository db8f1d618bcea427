#pragma once

#include "modelfile.hpp"

namespace holomap::models {

/// Heisenberg group H^n: coordinates (x1..xn, y1..yn, t), frame
/// (X1..Xn, Y1..Yn, T) with degrees (1,...,1,2), immersed horizontal plane
/// (or line for n=1) spanned by the first min(2,n) X fields.
modelfile::Model heisenberg(int n);

/// The Engel group with the ruled plane (0, u, 0, v).
modelfile::Model engel_plane();

/// The orientation-curvature lift: coordinates (x, y, theta, k), surface
/// (x, y, theta(x,y), kappa(x,y)) with kappa recomputed symbolically as
/// X1(theta) restricted to the surface. theta_text is an expression in x, y.
modelfile::Model visual_cortex(const std::string& theta_text);

/// Builtin lookup by name: "engel-plane", "visual-cortex",
/// "heisenberg-<n>". Throws on unknown names.
modelfile::Model builtin(const std::string& name);
std::vector<std::string> builtin_names();

} // namespace holomap::models
