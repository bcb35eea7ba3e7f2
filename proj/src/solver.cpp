#include "ubae/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SVD>

namespace ubae {

std::string Formulation::tag() const {
  return std::string(kernel == LayerKind::single ? "single" : "double") +
         (form == SystemForm::direct_density ? "-direct" : "-schur");
}

Formulation Formulation::parse(const std::string& tag) {
  if (tag == "single-direct") return {LayerKind::single, SystemForm::direct_density};
  if (tag == "single-schur") return {LayerKind::single, SystemForm::schur};
  if (tag == "double-direct") return {LayerKind::double_layer, SystemForm::direct_density};
  if (tag == "double-schur") return {LayerKind::double_layer, SystemForm::schur};
  throw Error(ErrorCode::argument, "unknown formulation '" + tag + "'");
}

LayerPair assemble_layers(LayerKind kind, const PointSets& ps, const ClosureMatrices& closure,
                          ConnectionPolicy policy) {
  return {assemble_layer_matrix(closure.gamma_minus, closure.gamma_minus, kind, ps, policy),
          assemble_layer_matrix(closure.gamma_plus_tilde, closure.gamma_minus, kind, ps, policy)};
}

KernelFactor::KernelFactor(const LayerMatrix& minus, LayerKind kind)
    : lu_(minus.entries) {
  rcond_ = lu_.rcond();
  if (!(rcond_ > singular_rcond)) {
    std::ostringstream os;
    os << (kind == LayerKind::single ? "S-" : "D-") << " is singular (reciprocal condition estimate " << rcond_ << ")";
    throw Error(ErrorCode::formulation_singular, os.str());
  }
}

Eigen::MatrixXd KernelFactor::right_solve(const Eigen::MatrixXd& b) const {
  const Eigen::MatrixXd bt = b.transpose();
  const Eigen::MatrixXd xt = lu_.transpose().solve(bt);
  return xt.transpose();
}

LinearSystem assemble_system(const Formulation& formulation, const ClosureMatrices& closure, const LayerPair& layers,
                             const KernelFactor* factor) {
  const auto n = static_cast<Eigen::Index>(closure.gamma_minus.size());
  const auto& km = layers.minus.entries;
  const auto& kp = layers.plus.entries;
  if (km.rows() != n || km.cols() != n || kp.rows() != closure.phi_plus.cols() || kp.cols() != n ||
      closure.phi_plus.rows() != n || closure.phi_minus.rows() != n || closure.phi_minus.cols() != n ||
      closure.phi_prime_minus.rows() != n || closure.r_plus.rows() != closure.phi_prime_minus.cols() ||
      closure.r_minus.rows() != closure.phi_prime_minus.cols() || closure.r_plus.cols() != kp.rows() ||
      closure.r_minus.cols() != n) {
    throw Error(ErrorCode::assembly, "closure and layer block dimensions disagree");
  }
  if (layers.minus.rows != closure.gamma_minus || layers.plus.rows != closure.gamma_plus_tilde) {
    throw Error(ErrorCode::assembly, "closure and layer orderings disagree");
  }

  LinearSystem sys;
  sys.rhs = closure.rhs;
  if (formulation.form == SystemForm::direct_density) {
    sys.matrix = closure.phi_plus * kp + closure.phi_minus * km;
    if (closure.has_extrapolation()) {
      const Eigen::MatrixXd ext = closure.r_plus * kp + closure.r_minus * km;
      sys.matrix -= closure.phi_prime_minus * ext;
    }
    return sys;
  }

  std::optional<KernelFactor> local;
  if (!factor) factor = &local.emplace(layers.minus, formulation.kernel);
  const Eigen::MatrixXd transfer = factor->right_solve(kp);  // K+ K-^{-1}
  sys.matrix = closure.phi_plus * transfer;
  sys.matrix += Eigen::MatrixXd(closure.phi_minus);
  if (closure.has_extrapolation()) {
    Eigen::MatrixXd ext = closure.r_plus * transfer;
    ext += Eigen::MatrixXd(closure.r_minus);
    sys.matrix -= closure.phi_prime_minus * ext;
  }
  return sys;
}

DenseSolution dense_solve(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& rhs) {
  if (matrix.rows() != matrix.cols() || matrix.rows() != rhs.size()) {
    throw Error(ErrorCode::assembly, "dense_solve needs a square system matching its right-hand side");
  }
  if (!matrix.allFinite() || !rhs.allFinite()) throw Error(ErrorCode::singular_system, "non-finite system entries");
  if (matrix.rows() == 0) return {};
  const double norm = matrix.cwiseAbs().rowwise().sum().maxCoeff();
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(matrix);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  const double rcond = lu.rcond();
  if (!(min_pivot > 1e-14 * norm) || !(rcond > singular_rcond)) {
    std::ostringstream os;
    os << "system is numerically singular (min pivot " << min_pivot << ", rcond " << rcond << ")";
    throw Error(ErrorCode::singular_system, os.str());
  }
  DenseSolution out;
  out.x = lu.solve(rhs);
  out.residual_norm = (matrix * out.x - rhs).cwiseAbs().maxCoeff();
  return out;
}

double condition_number(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) throw Error(ErrorCode::argument, "condition number needs a square matrix");
  if (matrix.rows() == 0) return 1.0;
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix);
  const auto& s = svd.singularValues();
  const double smax = s.maxCoeff();
  const double smin = s.minCoeff();
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

SolveResult recover(const DenseSolution& primary, const Formulation& formulation, const LayerPair& layers,
                    const ClosureMatrices& closure, const KernelFactor* factor) {
  SolveResult r;
  r.residual_norm = primary.residual_norm;
  r.density.support = closure.gamma_minus;
  if (formulation.form == SystemForm::direct_density) {
    r.density.values = primary.x;
    r.trace_minus = layers.minus.entries * primary.x;
  } else {
    std::optional<KernelFactor> local;
    if (!factor) factor = &local.emplace(layers.minus, formulation.kernel);
    r.trace_minus = primary.x;
    r.density.values = factor->solve(primary.x);
  }
  r.trace_plus_tilde = layers.plus.entries * r.density.values;
  r.trace_plus = r.trace_plus_tilde.head(static_cast<Eigen::Index>(closure.gamma_plus_count));
  return r;
}

SolveResult solve_bae(const Formulation& formulation, const ClosureMatrices& closure, const LayerPair& layers,
                      const Eigen::VectorXd* rhs, bool with_condition) {
  std::optional<KernelFactor> factor;
  if (formulation.kernel == LayerKind::double_layer || formulation.form == SystemForm::schur) {
    factor.emplace(layers.minus, formulation.kernel);
  }
  LinearSystem sys = assemble_system(formulation, closure, layers, factor ? &*factor : nullptr);
  if (rhs) sys.rhs = *rhs;
  const DenseSolution primary = dense_solve(sys.matrix, sys.rhs);
  SolveResult r = recover(primary, formulation, layers, closure, factor ? &*factor : nullptr);
  r.matrix_norm = sys.matrix.cwiseAbs().rowwise().sum().maxCoeff();
  if (with_condition) r.system_cond = condition_number(sys.matrix);
  return r;
}

}  // namespace ubae
