#include "ubae/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace ubae {

Grid Grid::make(double h, Vec2 origin, int nx, int ny) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::argument, "grid spacing must be positive");
  if (nx < 4 || ny < 4) throw Error(ErrorCode::argument, "grid needs at least 4 nodes per axis");
  return Grid{h, origin, nx, ny};
}

Grid Grid::box(double lo, double hi, int intervals) {
  if (!(hi > lo) || intervals < 3) throw Error(ErrorCode::argument, "invalid box");
  return make((hi - lo) / intervals, {lo, lo}, intervals + 1, intervals + 1);
}

int Grid::edge_distance(LatticeIndex m) const {
  return std::min({m.m1, m.m2, nx - 1 - m.m1, ny - 1 - m.m2});
}

LevelSetShape LevelSetShape::ellipse(double aspect) {
  if (!(aspect > 0.0)) throw Error(ErrorCode::argument, "ellipse aspect must be positive");
  LevelSetShape s;
  s.kind_ = ShapeKind::ellipse;
  const double a2 = aspect * aspect;
  s.psi_ = [a2](Vec2 p) { return p.x * p.x + a2 * p.y * p.y - 1.0; };
  s.grad_ = [a2](Vec2 p) { return Vec2{2.0 * p.x, 2.0 * a2 * p.y}; };
  s.length_ = 1.0;
  s.tag_ = "ellipse";
  return s;
}

LevelSetShape LevelSetShape::diamond(double r1, double r2) {
  if (!(r1 > 0.0 && r2 > 0.0)) throw Error(ErrorCode::argument, "diamond radii must be positive");
  LevelSetShape s;
  s.kind_ = ShapeKind::diamond;
  s.psi_ = [r1, r2](Vec2 p) { return std::abs(p.x / r1) + std::abs(p.y / r2) - 1.0; };
  // One-sided face normal on the axes.
  s.grad_ = [r1, r2](Vec2 p) {
    return Vec2{(p.x >= 0.0 ? 1.0 : -1.0) / r1, (p.y >= 0.0 ? 1.0 : -1.0) / r2};
  };
  s.length_ = std::max(r1, r2);
  s.tag_ = "diamond";
  return s;
}

LevelSetShape LevelSetShape::circle_exterior(double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::argument, "radius must be positive");
  LevelSetShape s;
  s.kind_ = ShapeKind::circle_exterior;
  const double r2 = radius * radius;
  s.psi_ = [r2](Vec2 p) { return r2 - p.x * p.x - p.y * p.y; };
  s.grad_ = [](Vec2 p) { return Vec2{-2.0 * p.x, -2.0 * p.y}; };
  s.exterior_ = true;
  s.length_ = radius;
  s.tag_ = "circle-exterior";
  return s;
}

LevelSetShape LevelSetShape::custom(Field psi, Gradient grad, bool exterior, double characteristic_length,
                                    std::string tag) {
  if (!psi) throw Error(ErrorCode::argument, "custom shape needs a level-set function");
  LevelSetShape s;
  s.kind_ = ShapeKind::custom;
  s.psi_ = std::move(psi);
  s.grad_ = std::move(grad);
  s.exterior_ = exterior;
  s.length_ = characteristic_length;
  s.tag_ = std::move(tag);
  return s;
}

Vec2 LevelSetShape::gradient(Vec2 p) const {
  if (grad_) return grad_(p);
  const double d = 1e-6 * length_;
  return {(psi_({p.x + d, p.y}) - psi_({p.x - d, p.y})) / (2.0 * d),
          (psi_({p.x, p.y + d}) - psi_({p.x, p.y - d})) / (2.0 * d)};
}

Vec2 LevelSetShape::outward_normal(Vec2 p) const {
  const Vec2 g = gradient(p);
  const double n = std::hypot(g.x, g.y);
  if (!(n > 0.0)) throw Error(ErrorCode::argument, "level-set gradient vanishes on the boundary");
  return {g.x / n, g.y / n};
}

IndexMap::IndexMap(const Grid& grid, std::span<const LatticeIndex> points)
    : grid_(grid), slots_(grid.size(), -1) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!grid.contains(points[i])) {
      throw Error(ErrorCode::argument, "index map point " + points[i].str() + " lies off the box");
    }
    slots_[grid.flat(points[i])] = static_cast<int>(i);
  }
}

PointSets classify(const Grid& grid, const LevelSetShape& shape) {
  PointSets ps;
  ps.grid = grid;
  ps.unbounded = shape.exterior();

  const std::size_t count = grid.size();
  std::vector<char> inside(count);
  for (std::size_t i = 0; i < count; ++i) inside[i] = shape(grid.node(grid.unflat(i))) <= 0.0;

  std::vector<char> near_plus(count, 0);
  std::vector<char> near_minus(count, 0);
  for (std::size_t i = 0; i < count; ++i) {
    const LatticeIndex m = grid.unflat(i);
    auto& mark = inside[i] ? near_plus : near_minus;
    mark[i] = 1;
    for (const auto step : stencil_steps) {
      const LatticeIndex nb = m + step;
      if (grid.contains(nb)) mark[grid.flat(nb)] = 1;
    }
  }

  ps.classes.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const LatticeIndex m = grid.unflat(i);
    const bool gamma = near_plus[i] && near_minus[i];
    NodeClass c;
    if (inside[i]) {
      c = gamma ? NodeClass::gamma_plus : NodeClass::interior;
      ps.m_plus.push_back(m);
    } else {
      c = gamma ? NodeClass::gamma_minus : NodeClass::exterior;
      ps.m_minus.push_back(m);
    }
    ps.classes[i] = c;
    if (near_plus[i]) ps.n_plus.push_back(m);
    if (near_minus[i]) ps.n_minus.push_back(m);
    if (gamma) {
      ps.gamma.push_back(m);
      (inside[i] ? ps.gamma_plus : ps.gamma_minus).push_back(m);
    }
  }

  if (ps.m_plus.empty()) throw Error(ErrorCode::degenerate_domain, "no grid node lies inside the domain");
  if (ps.gamma.empty() || ps.gamma_minus.empty()) {
    throw Error(ErrorCode::degenerate_domain, "the boundary does not cross the computational box");
  }
  constexpr int margin = 2;
  for (const auto& m : ps.gamma) {
    if (grid.edge_distance(m) < margin) {
      throw Error(ErrorCode::geometry_too_tight, "boundary node " + m.str() + " lies within 2h of the box edge");
    }
  }
  if (!ps.unbounded) {
    for (const auto& m : ps.m_plus) {
      if (grid.edge_distance(m) < margin) {
        throw Error(ErrorCode::geometry_too_tight, "domain node " + m.str() + " lies within 2h of the box edge");
      }
    }
  }
  return ps;
}

namespace {

constexpr int root_bisection_steps = 60;
constexpr double root_fraction_tolerance = 1e-14;
constexpr int multi_root_samples = 16;

// Fraction t in [0,1] with psi(a + t (b - a)) = 0, given psi(a) <= 0 < psi(b).
double segment_root(const LevelSetShape& shape, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  auto f = [&](double t) { return shape(a + t * d); };
  if (f(0.0) == 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < root_bisection_steps && hi - lo > root_fraction_tolerance; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) <= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool has_single_crossing(const LevelSetShape& shape, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  int changes = 0;
  bool previous = shape(a) <= 0.0;
  for (int i = 1; i <= multi_root_samples; ++i) {
    const bool now = shape(a + (static_cast<double>(i) / multi_root_samples) * d) <= 0.0;
    changes += now != previous;
    previous = now;
  }
  return changes <= 1;
}

}  // namespace

std::vector<IntersectionPoint> select_intersections(const PointSets& ps, const LevelSetShape& shape,
                                                    const Grid& grid) {
  std::vector<IntersectionPoint> out;
  out.reserve(ps.gamma_minus.size());
  for (const auto& owner : ps.gamma_minus) {
    bool found = false;
    IntersectionPoint best;
    for (const auto step : stencil_steps) {
      const LatticeIndex inner = owner + step;
      if (!ps.in_m_plus(inner)) continue;
      const Vec2 a = grid.node(inner);
      const Vec2 b = grid.node(owner);
      if (!has_single_crossing(shape, a, b)) {
        throw Error(ErrorCode::geometry_too_tight,
                    "segment " + inner.str() + "-" + owner.str() + " crosses the boundary more than once");
      }
      const double alpha = segment_root(shape, a, b);
      if (!found || alpha > best.alpha) {
        best.owner = owner;
        best.inner = inner;
        best.alpha = alpha;
        best.location = a + alpha * (b - a);
        found = true;
      }
    }
    if (!found) {
      throw Error(ErrorCode::inconsistent_classification,
                  "gamma- node " + owner.str() + " has no boundary crossing on its incident segments");
    }
    best.normal = shape.outward_normal(best.location);
    out.push_back(best);
  }
  return out;
}

std::vector<LatticeIndex> exterior_connections(const PointSets& ps, LatticeIndex n, ConnectionPolicy policy) {
  std::vector<LatticeIndex> out;
  for (const auto step : stencil_steps) {
    const LatticeIndex k = n + step;
    const auto c = ps.class_of(k);
    if (c == NodeClass::exterior || (policy == ConnectionPolicy::include_gamma_minus && c == NodeClass::gamma_minus)) {
      out.push_back(k);
    }
  }
  return out;
}

void write_classification_csv(std::ostream& os, const PointSets& ps) {
  os << "x,y,class\n";
  os.precision(17);
  for (std::size_t i = 0; i < ps.grid.size(); ++i) {
    const LatticeIndex m = ps.grid.unflat(i);
    const Vec2 p = ps.grid.node(m);
    const char* label = "M-";
    switch (ps.classes[i]) {
      case NodeClass::interior: label = "M+"; break;
      case NodeClass::gamma_plus: label = "gamma+"; break;
      case NodeClass::gamma_minus: label = "gamma-"; break;
      case NodeClass::exterior: label = "M-"; break;
    }
    os << p.x << ',' << p.y << ',' << label << '\n';
  }
}

}  // namespace ubae
