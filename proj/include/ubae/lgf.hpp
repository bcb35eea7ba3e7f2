#pragma once

// Lattice Green's function of the 5-point difference Laplacian
//   [Au](m) = 4u(m) - u(m+e1) - u(m-e1) - u(m+e2) - u(m-e2)
// on Z^2, normalized so that G(0,0) = 0. Small indices are evaluated by an
// adaptive Gauss-Kronrod rule on a one-dimensional integral representation,
// large indices by the angular asymptotic expansion.

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ubae/lattice.hpp"

namespace ubae {

inline constexpr double euler_gamma = 0.577215664901532860606512090082402431;

// |m| at and beyond which lgf() switches to the asymptotic expansion.
inline constexpr double lgf_switch_radius = 30.0;

// Tolerance lgf() requests from the quadrature.
inline constexpr double lgf_default_tolerance = 1e-14;

inline constexpr int lgf_recursion_cap = 30;

// Maps m onto the octant 0 <= m2 <= m1 using the lattice symmetry group.
LatticeIndex lgf_canonical(LatticeIndex m);

// G(m) = 1/(2 pi) int_0^pi (exp(-a s) cos(b y) - 1) / sinh(s) dy with
// cosh(s) = 2 - cos(y), a = max(|m1|,|m2|), b = min(|m1|,|m2|).
// tol must lie in (0, 1e-6]; throws evaluation_failure when the subdivision
// cap is hit before the error estimate falls below tol.
double lgf_quadrature(LatticeIndex m, double tol = lgf_default_tolerance);

// Far-field expansion with remainder O(|m|^-8). Rejects m = (0,0).
double lgf_asymptotic(LatticeIndex m);

// Tabulated G over the canonical octant 0 <= m2 <= m1 <= radius.
class LgfTable {
 public:
  LgfTable() = default;
  LgfTable(int radius, std::vector<double> values);

  // Fills every entry through the quadrature/asymptotic dispatch of lgf().
  static LgfTable compute(int radius);

  int radius() const noexcept { return radius_; }
  bool covers(LatticeIndex m) const noexcept;

  // Lookup with symmetry canonicalization; m must be covered.
  double operator()(LatticeIndex m) const noexcept {
    int a = m.m1 < 0 ? -m.m1 : m.m1;
    int b = m.m2 < 0 ? -m.m2 : m.m2;
    if (a < b) std::swap(a, b);
    return values_[slot(a, b)];
  }

  double& at_canonical(int m1, int m2) { return values_[slot(m1, m2)]; }
  double at_canonical(int m1, int m2) const { return values_[slot(m1, m2)]; }

  // Cache file: "lgf-cache v1 radius=<R>" then "m1,m2,<value>" lines.
  void save(std::ostream& os) const;
  static LgfTable load(std::istream& is);

  static std::size_t slot(int m1, int m2) noexcept {
    return static_cast<std::size_t>(m1) * (m1 + 1) / 2 + m2;
  }
  static std::size_t size_for(int radius) noexcept { return slot(radius, radius) + 1; }

 private:
  int radius_ = -1;
  std::vector<double> values_;
};

// Morita's recursion seeded from G(0,0), G(1,0), G(1,1). Numerically
// unstable for large indices, so jmax is capped at lgf_recursion_cap; used for
// cross-validation only.
LgfTable lgf_recursion_table(int jmax);

// G(m) through the process-wide memo table, falling back to direct
// evaluation outside its radius.
double lgf(LatticeIndex m);

// Grows the process-wide memo table to cover |m1|,|m2| <= radius. Safe to
// call concurrently; readers holding an older snapshot remain valid.
void lgf_warm(int radius);

// Immutable snapshot of the memo table for hot loops.
std::shared_ptr<const LgfTable> lgf_snapshot();

// Replaces the memo table, e.g. with one loaded from a cache file.
void lgf_install(std::shared_ptr<const LgfTable> table);

}  // namespace ubae
