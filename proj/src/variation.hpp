#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "graded.hpp"
#include "immersion.hpp"
#include "symfield.hpp"

namespace holomap::variation {

/// Variation field written over the adapted basis [E_1..E_m, V_{m+1}..V_n],
/// one coefficient expression per basis field, in the parameter symbols.
struct Probe {
  std::vector<sym::Expr> coeffs;
};

/// Rectangular parameter lattice, counts points per axis (>= 5 per axis for
/// the interior difference stencils).
struct LatticeSpec {
  Eigen::VectorXd lo, hi;
  std::vector<int> counts;

  int total() const;
  std::vector<double> spacing() const;
};

/// Images of the lattice under the immersion flowed for time t along the
/// ambient extension of the probe field.
struct FlowedGrid {
  std::vector<int> shape;
  std::vector<double> hsteps;
  std::vector<Eigen::VectorXd> ambient;  // row-major over the lattice
  std::vector<Eigen::MatrixXd> tangents; // n x m per point, flowed exactly
};

/// Advances every lattice image point by RK4 along the probe field for time
/// t, carrying the chart tangents through the variational equation
/// d(delta)/dt = DW(p) delta. The probe's coefficient functions extend off
/// the surface as constants in the non-graph coordinates.
FlowedGrid flow_immersion(const immersion::Immersion& im,
                          const immersion::AdaptedBasis& basis, const Probe& probe,
                          const LatticeSpec& lattice, double t, int flow_steps = 8);

/// Max over lattice nodes of the norm of the degree > d part of the flowed
/// tangent wedge.
double degree_excess(const FlowedGrid& grid, const graded::GradedFrame& frame, int d);

struct VariationTable {
  std::vector<double> t;
  std::vector<double> rho;
  double slope = 0.0;
  bool inconclusive = false;
};

/// rho(t) over the given flow times plus a log-log least-squares slope.
/// Inconclusive when every rho sits at the noise floor.
VariationTable first_order_check(const immersion::Immersion& im,
                                 const graded::GradedFrame& frame,
                                 const immersion::AdaptedBasis& basis,
                                 const Probe& probe, const LatticeSpec& lattice,
                                 int d, std::span<const double> times);

void table_to_csv(std::ostream& out, const VariationTable& table);

} // namespace holomap::variation
