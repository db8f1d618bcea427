#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "graded.hpp"
#include "immersion.hpp"
#include "symfield.hpp"

namespace holomap::admissibility {

/// The ruled admissibility ODE dF/dx1 = -B(x1) F - A(x1) G(x1), sampled per
/// characteristic. Samples run over 2*n1+1 half-steps; even indices are the
/// integration nodes, odd indices the RK4 midpoints.
struct RuledSystem {
  double eps = 0.0;
  int n1 = 0;
  int q = 0; // vertical dimension n-m-k
  int k = 0; // horizontal controls
  int iota0 = 0, s = 0;
  std::vector<std::string> row_names; // vertical V_i per row
  std::vector<std::string> col_names; // horizontal V_h per A column
  std::vector<std::vector<Eigen::MatrixXd>> A; // [characteristic][sample], q x k
  std::vector<std::vector<Eigen::MatrixXd>> B; // [characteristic][sample], q x q

  int rows() const { return static_cast<int>(A.size()); }
  int samples() const { return 2 * n1 + 1; }
  int nodes() const { return n1 + 1; }
  double step() const { return eps / n1; }
  double x1_of_sample(int t) const { return eps * t / (2.0 * n1); }
  /// Largest operator 2-norm of B over all samples.
  double sup_normB() const;
  /// Largest max-norm of A over all samples (diagnostics).
  double sup_normA() const;
};

/// Symbolic bracket cache [E_1, V_h] for all complement fields.
struct CoeffCache {
  std::vector<sym::VectorField> brackets; // one per V
};

CoeffCache make_coeff_cache(const immersion::AdaptedBasis& basis);

/// (A, B) at one ambient point: A_{ih} = <V_i, [E_1, V_h]> over horizontal h,
/// B_{ir} = <V_i, [E_1, V_r]> over vertical r, inner products taken in the
/// declared-orthonormal frame.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> coefficients(
    const graded::GradedFrame& frame, const immersion::AdaptedBasis& basis,
    const CoeffCache& cache, std::span<const double> ambient_p);

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> coefficients(
    const graded::GradedFrame& frame, const immersion::AdaptedBasis& basis,
    std::span<const double> ambient_p);

/// Assembles the sampled system over a characteristic cylinder.
RuledSystem build_system(const graded::GradedFrame& frame,
                         const immersion::AdaptedBasis& basis,
                         const immersion::CylinderGrid& grid);

using MatrixFn = std::function<Eigen::MatrixXd(int row, double x1)>;

/// Direct construction from matrix-valued callables (synthetic systems).
RuledSystem synthetic_system(double eps, int n1, int rows, int q, int k,
                             const MatrixFn& a_fn, const MatrixFn& b_fn);

/// Controls G sampled at every half-step of every characteristic.
struct ControlField {
  std::vector<std::vector<Eigen::VectorXd>> g; // [characteristic][sample]
};

using ControlFn = std::function<Eigen::VectorXd(int row, double x1)>;

ControlField zero_controls(const RuledSystem& sys);
ControlField controls_from_function(const RuledSystem& sys, const ControlFn& fn);
/// One expression per control, in the immersion's parameter symbols,
/// evaluated along the cylinder's parameter samples.
ControlField controls_from_exprs(const immersion::CylinderGrid& grid,
                                 std::span<const sym::Expr> gexprs);

/// CSV layout: header "x1_index,hat_index,g1..gk"; one line per sample.
void controls_to_csv(std::ostream& out, const RuledSystem& sys,
                     const ControlField& g);
ControlField controls_from_csv(std::istream& in, const RuledSystem& sys);

/// Vertical components F at the integration nodes, F(0) = 0.
struct Solution {
  std::vector<std::vector<Eigen::VectorXd>> F; // [characteristic][node]
};

void solution_to_csv(std::ostream& out, const RuledSystem& sys, const Solution& f);

/// Fixed-step RK4 per characteristic.
Solution solve_ruled(const RuledSystem& sys, const ControlField& g);

/// Fundamental matrices D at the integration nodes: dD/dx1 = D B, D(0) = I.
std::vector<std::vector<Eigen::MatrixXd>> fundamental_matrix(const RuledSystem& sys);

struct HolonomyResult {
  std::vector<Eigen::VectorXd> F_eps; // per characteristic
  std::vector<Eigen::MatrixXd> D_eps;
};

/// F(eps, xhat) = -D(eps)^{-1} * Simpson_0^eps (D A)(tau) G(tau) dtau.
HolonomyResult holonomy(const RuledSystem& sys, const ControlField& g);

/// Max over characteristics and nodes of |dF/dx1 + B F + A G| with the x1
/// derivative taken by fourth-order finite differences on the node grid.
double general_residual(const RuledSystem& sys, const Solution& f,
                        const ControlField& g);

/// A priori bound ||F||_inf + ||dF||_inf <= K ||AG||_inf with
/// C1 = eps * exp(eps * sup||B||) and K = C1 * (1 + sup||B||) + 1.
struct NormEstimate {
  double sup_B = 0.0, C1 = 0.0, K = 0.0;
  double sup_AG = 0.0, sup_F = 0.0, sup_dF = 0.0;
  double lhs = 0.0, bound = 0.0;
  bool ok = false;
};

NormEstimate norm_estimate(const RuledSystem& sys, const ControlField& g,
                           const Solution& f);

/// Horizontal immersion data in H^n: tangent frame E_j = sum alpha_ji X_i +
/// beta_ji Y_i with expressions over the 2n+1 ambient coordinates.
struct HeisenbergData {
  int n = 0;
  std::vector<std::vector<sym::Expr>> alpha; // m x n
  std::vector<std::vector<sym::Expr>> beta;  // m x n
};

/// Max residual of sum_i alpha_ji beta_nui - beta_ji alpha_nui over all
/// (j, nu) pairs and sample points. Throws when (alpha|beta) drops rank.
double horizontality_check(const HeisenbergData& data,
                           std::span<const std::vector<double>> points);

/// Max residual of the integrability conditions for the horizontal system,
/// with the frame derivatives of the 2n controls taken symbolically.
double heisenberg_compat(const HeisenbergData& data,
                         std::span<const sym::Expr> controls,
                         std::span<const std::vector<double>> points);

} // namespace holomap::admissibility
