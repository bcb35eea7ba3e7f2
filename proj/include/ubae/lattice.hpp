#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <functional>
#include <string>

#include "ubae/errors.hpp"

namespace ubae {

// Integer coordinate on Z^2. Arithmetic is overflow checked.
struct LatticeIndex {
  int m1 = 0;
  int m2 = 0;

  constexpr auto operator<=>(const LatticeIndex&) const = default;

  std::string str() const { return "(" + std::to_string(m1) + "," + std::to_string(m2) + ")"; }
};

inline constexpr LatticeIndex e1{1, 0};
inline constexpr LatticeIndex e2{0, 1};
inline constexpr std::array<LatticeIndex, 4> stencil_steps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

inline LatticeIndex operator+(LatticeIndex a, LatticeIndex b) {
  LatticeIndex r;
  if (__builtin_add_overflow(a.m1, b.m1, &r.m1) || __builtin_add_overflow(a.m2, b.m2, &r.m2)) {
    throw Error(ErrorCode::index_overflow, a.str() + " + " + b.str());
  }
  return r;
}

inline LatticeIndex operator-(LatticeIndex a, LatticeIndex b) {
  LatticeIndex r;
  if (__builtin_sub_overflow(a.m1, b.m1, &r.m1) || __builtin_sub_overflow(a.m2, b.m2, &r.m2)) {
    throw Error(ErrorCode::index_overflow, a.str() + " - " + b.str());
  }
  return r;
}

inline LatticeIndex operator*(int k, LatticeIndex a) {
  LatticeIndex r;
  if (__builtin_mul_overflow(k, a.m1, &r.m1) || __builtin_mul_overflow(k, a.m2, &r.m2)) {
    throw Error(ErrorCode::index_overflow, std::to_string(k) + " * " + a.str());
  }
  return r;
}

// Row-major lattice order (m2 outer, m1 inner); the canonical ordering of
// every point set and matrix block.
struct RowMajorLess {
  bool operator()(const LatticeIndex& a, const LatticeIndex& b) const noexcept {
    return a.m2 != b.m2 ? a.m2 < b.m2 : a.m1 < b.m1;
  }
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Vec2&) const = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

}  // namespace ubae

template <>
struct std::hash<ubae::LatticeIndex> {
  std::size_t operator()(const ubae::LatticeIndex& m) const noexcept {
    return std::hash<long long>{}((static_cast<long long>(m.m1) << 32) ^ static_cast<unsigned>(m.m2));
  }
};
