#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Sparse>

#include "ubae/geometry.hpp"

namespace ubae {

enum class BcKind { dirichlet, robin };

// dirichlet: u = g; robin: alpha du/dn + beta u = g. Neumann is robin(1, 0).
struct BoundaryCondition {
  using Data = std::function<double(Vec2 point, Vec2 normal)>;

  BcKind kind = BcKind::dirichlet;
  double alpha_coef = 0.0;
  double beta_coef = 1.0;
  Data data;

  static BoundaryCondition dirichlet(Data g);
  static BoundaryCondition robin(double alpha, double beta, Data g);
  static BoundaryCondition neumann(Data g) { return robin(1.0, 0.0, std::move(g)); }
};

// 3x3 node patch hosting the biquadratic basis of one intersection point.
struct SupportCell {
  LatticeIndex anchor;                // lower-left node
  std::array<LatticeIndex, 9> nodes;  // nodes[3*iy + ix] = anchor + (ix, iy)
  int interior_count = 0;             // nodes in M+
};

// u(target) = sum_i weights[i] u(from[i]); quadratic extrapolation along an axis.
struct ExtrapolationStencil {
  LatticeIndex target;
  std::array<LatticeIndex, 3> from;
  std::array<double, 3> weights;
};

struct SupportCells {
  std::vector<SupportCell> cells;  // one per intersection point
  // gamma_plus followed by the extra M+ nodes the cells and stencils touch.
  std::vector<LatticeIndex> gamma_plus_tilde;
  std::vector<LatticeIndex> eta;  // cell nodes in M- \ gamma-
  std::vector<ExtrapolationStencil> stencils;  // one per eta node
};

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Rows follow gamma_minus (one per intersection point). Columns of phi_plus
// follow gamma_plus_tilde, of phi_minus gamma_minus, of phi_prime_minus eta.
// Extrapolation: u_eta + r_plus u_gamma_plus_tilde + r_minus u_gamma_minus = 0.
struct ClosureMatrices {
  BcKind kind = BcKind::dirichlet;
  SparseRows phi_plus;
  SparseRows phi_minus;
  SparseRows phi_prime_minus;
  SparseRows r_plus;
  SparseRows r_minus;
  Eigen::VectorXd rhs;
  std::vector<LatticeIndex> gamma_plus_tilde;
  std::size_t gamma_plus_count = 0;  // gamma+ is the leading part of gamma_plus_tilde
  std::vector<LatticeIndex> gamma_minus;
  std::vector<LatticeIndex> eta;

  bool has_extrapolation() const { return !eta.empty(); }
};

// Tensor-product hat function of node, zero outside its 2x2 cells.
double bilinear_eval(LatticeIndex node, Vec2 point, const Grid& grid);

// Tensor-product quadratic Lagrange basis on the cell's 3x3 nodes;
// local = (ix, iy) in {0,1,2}^2.
double quadratic_eval(const SupportCell& cell, std::array<int, 2> local, Vec2 point, const Grid& grid);
Vec2 quadratic_grad(const SupportCell& cell, std::array<int, 2> local, Vec2 point, const Grid& grid);

ClosureMatrices assemble_dirichlet(const PointSets& ps, const std::vector<IntersectionPoint>& xs,
                                   const BoundaryCondition& bc, const Grid& grid);

SupportCells build_support_cells(const std::vector<IntersectionPoint>& xs, const PointSets& ps, const Grid& grid);

ClosureMatrices assemble_robin(const PointSets& ps, const std::vector<IntersectionPoint>& xs,
                               const SupportCells& cells, const BoundaryCondition& bc, const Grid& grid);

// CSV "row,col_index,value,block" of the nonzero closure entries.
void write_closure_csv(std::ostream& os, const ClosureMatrices& closure);

}  // namespace ubae
