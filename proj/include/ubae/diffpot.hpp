#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ubae/closure.hpp"
#include "ubae/geometry.hpp"

namespace ubae {

// Rectangular auxiliary box; its edge nodes carry homogeneous Dirichlet data.
struct AuxiliaryBox {
  Grid grid;

  // Interval counts per axis.
  int cells_x() const { return grid.nx - 1; }
  int cells_y() const { return grid.ny - 1; }
};

// Node values over an auxiliary box; reads off the box return 0.
struct GridFunction {
  Grid grid;
  std::vector<double> values;

  explicit GridFunction(const Grid& g = {}) : grid(g), values(g.size(), 0.0) {}

  double operator()(LatticeIndex m) const { return grid.contains(m) ? values[grid.flat(m)] : 0.0; }
  double& at(LatticeIndex m) { return values[grid.flat(m)]; }
};

// Eigenvalue of the 5-point operator for the sine mode (j, k).
double sine_eigenvalue(int j, int k, int cells_x, int cells_y);

// w with [Aw] = rhs at interior box nodes and w = 0 on the box edge, by
// DST-I diagonalization. Edge values of rhs are ignored.
GridFunction fft_poisson_solve(const GridFunction& rhs);

// Difference potential of gamma data (ordered as ps.gamma): solves
// [Aw] = 0 on M+, [Au] on M- with u the zero extension of u_gamma.
GridFunction difference_potential(std::span<const double> u_gamma, const PointSets& ps, const AuxiliaryBox& box);

// [Au^p] = h^2 f on M+, 0 on M-, u^p = 0 on the box edge.
GridFunction particular_solution(const std::function<double(Vec2)>& f, const PointSets& ps, const AuxiliaryBox& box);

// How the particular solution enters the eta columns of a Robin closure.
enum class EtaCorrection {
  direct,        // u^p sampled at eta nodes
  extrapolated,  // u^p at eta extrapolated from inside, like the homogeneous part
};

// closure.rhs - Phi+ u^p - Phi- u^p - Phi'- u^p on the respective node sets.
Eigen::VectorXd correct_boundary_rhs(const ClosureMatrices& closure, const GridFunction& up,
                                     EtaCorrection eta = EtaCorrection::extrapolated);

GridFunction superpose(const GridFunction& uh, const GridFunction& up);

// CSV "x,y,value" over M+.
void write_grid_function_csv(std::ostream& os, const GridFunction& u, const PointSets& ps);

}  // namespace ubae
