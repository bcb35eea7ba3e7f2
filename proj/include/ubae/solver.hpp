#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>
#include <Eigen/LU>

#include "ubae/closure.hpp"
#include "ubae/potentials.hpp"

namespace ubae {

// direct_density: unknown is the layer density (M_s, M_d).
// schur: unknown is the trace on gamma- (A_s, A_d), right preconditioned by K-^{-1}.
enum class SystemForm { direct_density, schur };

struct Formulation {
  LayerKind kernel = LayerKind::single;
  SystemForm form = SystemForm::direct_density;

  // "single-direct", "single-schur", "double-direct", "double-schur"
  std::string tag() const;
  static Formulation parse(const std::string& tag);
};

// K- on (gamma-, gamma-) and K+ on (gamma_plus_tilde, gamma-).
struct LayerPair {
  LayerMatrix minus;
  LayerMatrix plus;
};

LayerPair assemble_layers(LayerKind kind, const PointSets& ps, const ClosureMatrices& closure,
                          ConnectionPolicy policy = default_connection_policy);

// LU of K- with a reciprocal-condition check; raises formulation_singular.
class KernelFactor {
 public:
  explicit KernelFactor(const LayerMatrix& minus, LayerKind kind);

  // K-^{-1} b
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const { return lu_.solve(b); }
  // B K-^{-1}, computed as (K-^{-T} B^T)^T
  Eigen::MatrixXd right_solve(const Eigen::MatrixXd& b) const;
  double rcond() const { return rcond_; }

 private:
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double rcond_ = 0.0;
};

inline constexpr double singular_rcond = 1e-13;

struct LinearSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
};

// Dirichlet:  M = Phi+ K+ + Phi- K-,  A = Phi+ K+ K-^{-1} + Phi-.
// Robin adds  - Phi'- (R+ K+ + R- K-)  resp.  - Phi'- (R+ K+ K-^{-1} + R-).
LinearSystem assemble_system(const Formulation& formulation, const ClosureMatrices& closure, const LayerPair& layers,
                             const KernelFactor* factor = nullptr);

struct DenseSolution {
  Eigen::VectorXd x;
  double residual_norm = 0.0;  // ||A x - b||_inf
};

// LU with partial pivoting; singular_system when a pivot falls below
// 1e-14 ||A||_inf or the condition estimate exceeds 1/singular_rcond.
DenseSolution dense_solve(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& rhs);

// sigma_max / sigma_min in the 2-norm; +infinity when sigma_min = 0.
double condition_number(const Eigen::MatrixXd& matrix);

struct SolveResult {
  DensityVector density;          // on gamma-
  Eigen::VectorXd trace_minus;    // u on gamma-
  Eigen::VectorXd trace_plus;     // u on gamma+
  Eigen::VectorXd trace_plus_tilde;  // u on gamma_plus_tilde (gamma+ is its prefix)
  std::optional<double> system_cond;
  double residual_norm = 0.0;
  double matrix_norm = 0.0;  // ||A||_inf of the solved system
};

// Density and both traces from the primary unknown of either form.
SolveResult recover(const DenseSolution& primary, const Formulation& formulation, const LayerPair& layers,
                    const ClosureMatrices& closure, const KernelFactor* factor = nullptr);

// Assemble, solve, recover. rhs overrides closure.rhs when given (particular
// solution correction).
SolveResult solve_bae(const Formulation& formulation, const ClosureMatrices& closure, const LayerPair& layers,
                      const Eigen::VectorXd* rhs = nullptr, bool with_condition = false);

}  // namespace ubae
