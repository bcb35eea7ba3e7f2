#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ubae/lattice.hpp"

namespace ubae {

// Uniform node grid covering the computational box; node(j,k) = origin + h (j,k).
struct Grid {
  double h = 0.0;
  Vec2 origin;
  int nx = 0;  // node counts per axis
  int ny = 0;

  static Grid make(double h, Vec2 origin, int nx, int ny);
  // Square box [lo, hi]^2 split into `intervals` cells per axis.
  static Grid box(double lo, double hi, int intervals);

  Vec2 node(LatticeIndex m) const { return {origin.x + m.m1 * h, origin.y + m.m2 * h}; }
  bool contains(LatticeIndex m) const { return m.m1 >= 0 && m.m2 >= 0 && m.m1 < nx && m.m2 < ny; }
  bool on_edge(LatticeIndex m) const { return m.m1 == 0 || m.m2 == 0 || m.m1 == nx - 1 || m.m2 == ny - 1; }
  // Lattice distance to the nearest box edge.
  int edge_distance(LatticeIndex m) const;
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t flat(LatticeIndex m) const { return static_cast<std::size_t>(m.m2) * nx + m.m1; }
  LatticeIndex unflat(std::size_t i) const { return {static_cast<int>(i % nx), static_cast<int>(i / nx)}; }

  bool operator==(const Grid&) const = default;
};

enum class ShapeKind { ellipse, diamond, circle_exterior, custom };

// Level-set description of the domain: psi < 0 strictly inside, psi = 0 on
// the boundary. Exterior shapes describe unbounded domains.
class LevelSetShape {
 public:
  using Field = std::function<double(Vec2)>;
  using Gradient = std::function<Vec2(Vec2)>;

  // x^2 + aspect^2 y^2 < 1
  static LevelSetShape ellipse(double aspect);
  // |x/r1| + |y/r2| < 1
  static LevelSetShape diamond(double r1, double r2);
  // x^2 + y^2 > radius^2
  static LevelSetShape circle_exterior(double radius);
  // Without an explicit gradient one is taken by central differences.
  static LevelSetShape custom(Field psi, Gradient grad = {}, bool exterior = false,
                              double characteristic_length = 1.0, std::string tag = "custom");

  double operator()(Vec2 p) const { return psi_(p); }
  Vec2 gradient(Vec2 p) const;
  // grad(psi)/|grad(psi)|, pointing out of the domain.
  Vec2 outward_normal(Vec2 p) const;

  ShapeKind kind() const { return kind_; }
  bool exterior() const { return exterior_; }
  double characteristic_length() const { return length_; }
  const std::string& tag() const { return tag_; }

 private:
  ShapeKind kind_ = ShapeKind::custom;
  Field psi_;
  Gradient grad_;
  bool exterior_ = false;
  double length_ = 1.0;
  std::string tag_;
};

enum class NodeClass : std::uint8_t { interior, gamma_plus, gamma_minus, exterior };

// Node classification. m_plus holds psi <= 0 nodes (interior plus gamma_plus),
// m_minus the rest; gamma = n_plus ∩ n_minus split by membership in m_plus.
// All lists are in row-major lattice order over grid coordinates.
struct PointSets {
  Grid grid;
  bool unbounded = false;
  std::vector<NodeClass> classes;
  std::vector<LatticeIndex> m_plus, m_minus;
  std::vector<LatticeIndex> n_plus, n_minus;
  std::vector<LatticeIndex> gamma, gamma_plus, gamma_minus;

  // Nodes off the box are exterior for bounded domains and interior for
  // unbounded ones (the box is a window onto the infinite lattice).
  NodeClass class_of(LatticeIndex m) const {
    if (!grid.contains(m)) return unbounded ? NodeClass::interior : NodeClass::exterior;
    return classes[grid.flat(m)];
  }
  bool in_m_plus(LatticeIndex m) const {
    const auto c = class_of(m);
    return c == NodeClass::interior || c == NodeClass::gamma_plus;
  }
  bool in_m_minus(LatticeIndex m) const { return !in_m_plus(m); }
  bool in_gamma(LatticeIndex m) const {
    const auto c = class_of(m);
    return c == NodeClass::gamma_plus || c == NodeClass::gamma_minus;
  }
};

// Dense position lookup of a point list over the box; -1 for absent nodes.
class IndexMap {
 public:
  IndexMap() = default;
  IndexMap(const Grid& grid, std::span<const LatticeIndex> points);

  int find(LatticeIndex m) const {
    return grid_.contains(m) ? slots_[grid_.flat(m)] : -1;
  }
  bool contains(LatticeIndex m) const { return find(m) >= 0; }

 private:
  Grid grid_;
  std::vector<int> slots_;
};

// Boundary/mesh-line crossing assigned to one gamma_minus node.
struct IntersectionPoint {
  Vec2 location;
  LatticeIndex owner;  // gamma_minus endpoint
  LatticeIndex inner;  // gamma_plus endpoint
  // location = (1 - alpha) node(inner) + alpha node(owner)
  double alpha = 0.0;
  Vec2 normal;  // outward unit normal at location
};

// Which exterior neighbors may serve as double-layer connections.
enum class ConnectionPolicy {
  exclude_gamma_minus,  // {n ± e} ∩ (M- \ gamma-)
  include_gamma_minus,  // {n ± e} ∩ M-
};
inline constexpr ConnectionPolicy default_connection_policy = ConnectionPolicy::exclude_gamma_minus;

PointSets classify(const Grid& grid, const LevelSetShape& shape);

// One crossing per gamma_minus node, in gamma_minus order: the crossing on an
// incident segment to M+ closest to the gamma_minus node. Ties go to x
// segments, then to the positive step.
std::vector<IntersectionPoint> select_intersections(const PointSets& ps, const LevelSetShape& shape,
                                                    const Grid& grid);

std::vector<LatticeIndex> exterior_connections(const PointSets& ps, LatticeIndex n,
                                               ConnectionPolicy policy = default_connection_policy);

// CSV "x,y,class" over the box with class in {M+, M-, gamma+, gamma-}.
void write_classification_csv(std::ostream& os, const PointSets& ps);

}  // namespace ubae
