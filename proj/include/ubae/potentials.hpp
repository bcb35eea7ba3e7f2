#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ubae/geometry.hpp"
#include "ubae/lgf.hpp"

namespace ubae {

enum class LayerKind { single, double_layer };

const char* to_string(LayerKind kind) noexcept;

// Dense source/target block of a layer kernel.
struct LayerMatrix {
  std::vector<LatticeIndex> rows;  // targets
  std::vector<LatticeIndex> cols;  // sources (gamma_minus)
  Eigen::MatrixXd entries;
};

// Values on an ordered support (densities or traces).
struct DensityVector {
  std::vector<LatticeIndex> support;
  Eigen::VectorXd values;
};

// S(m,n) = G(m - n)
double single_kernel(LatticeIndex m, LatticeIndex n);

// D(m,n) = sum over k in conn of G(m - n) - G(m - k). conn must be nonempty.
double double_kernel(LatticeIndex m, LatticeIndex n, std::span<const LatticeIndex> conn);

// Exterior connections of every source, checked nonempty for the double layer.
std::vector<std::vector<LatticeIndex>> source_connections(std::span<const LatticeIndex> sources,
                                                          const PointSets& ps,
                                                          ConnectionPolicy policy = default_connection_policy);

LayerMatrix assemble_layer_matrix(std::span<const LatticeIndex> targets, std::span<const LatticeIndex> sources,
                                  LayerKind kind, const PointSets& ps,
                                  ConnectionPolicy policy = default_connection_policy);

// u(m) = sum_n K(m,n) q(n) by direct summation.
Eigen::VectorXd evaluate_potential(std::span<const LatticeIndex> points, const DensityVector& density,
                                   LayerKind kind, const PointSets& ps,
                                   ConnectionPolicy policy = default_connection_policy);

// [Au](m) of a field given pointwise.
template <class Field>
double apply_stencil(const Field& u, LatticeIndex m) {
  return 4.0 * u(m) - u(m + e1) - u(m - e1) - u(m + e2) - u(m - e2);
}

}  // namespace ubae
