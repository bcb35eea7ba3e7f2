#include "ubae/closure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

namespace ubae {

BoundaryCondition BoundaryCondition::dirichlet(Data g) {
  if (!g) throw Error(ErrorCode::argument, "boundary data missing");
  return {BcKind::dirichlet, 0.0, 1.0, std::move(g)};
}

BoundaryCondition BoundaryCondition::robin(double alpha, double beta, Data g) {
  if (!g) throw Error(ErrorCode::argument, "boundary data missing");
  if (alpha == 0.0) throw Error(ErrorCode::argument, "robin condition with alpha = 0 is a Dirichlet condition");
  return {BcKind::robin, alpha, beta, std::move(g)};
}

namespace {

// Crossings sit on grid lines; rounding in the physical coordinates would
// otherwise leave O(eps) weights on nodes off the segment.
constexpr double snap_tolerance = 1e-10;

double snap(double t) {
  const double r = std::round(t);
  return std::abs(t - r) < snap_tolerance ? r : t;
}

double hat(double xi) {
  const double a = std::abs(xi);
  return a < 1.0 ? 1.0 - a : 0.0;
}

std::array<double, 2> lattice_coords(Vec2 p, const Grid& grid) {
  return {snap((p.x - grid.origin.x) / grid.h), snap((p.y - grid.origin.y) / grid.h)};
}

// Quadratic Lagrange basis on nodes t = 0, 1, 2 and its t-derivative.
std::array<double, 3> lagrange3(double t) {
  return {0.5 * (t - 1.0) * (t - 2.0), -t * (t - 2.0), 0.5 * t * (t - 1.0)};
}
std::array<double, 3> lagrange3_derivative(double t) {
  return {t - 1.5, 2.0 - 2.0 * t, t - 0.5};
}

SparseRows build(Eigen::Index rows, Eigen::Index cols, const std::vector<Eigen::Triplet<double>>& triplets) {
  SparseRows m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

struct Triplets {
  std::vector<Eigen::Triplet<double>> plus, minus, prime, rp, rm;
};

}  // namespace

double bilinear_eval(LatticeIndex node, Vec2 point, const Grid& grid) {
  const auto p = lattice_coords(point, grid);
  return hat(p[0] - node.m1) * hat(p[1] - node.m2);
}

double quadratic_eval(const SupportCell& cell, std::array<int, 2> local, Vec2 point, const Grid& grid) {
  const auto p = lattice_coords(point, grid);
  const auto lx = lagrange3(p[0] - cell.anchor.m1);
  const auto ly = lagrange3(p[1] - cell.anchor.m2);
  return lx[local[0]] * ly[local[1]];
}

Vec2 quadratic_grad(const SupportCell& cell, std::array<int, 2> local, Vec2 point, const Grid& grid) {
  const auto p = lattice_coords(point, grid);
  const double tx = p[0] - cell.anchor.m1;
  const double ty = p[1] - cell.anchor.m2;
  const auto lx = lagrange3(tx);
  const auto ly = lagrange3(ty);
  const auto dx = lagrange3_derivative(tx);
  const auto dy = lagrange3_derivative(ty);
  return {dx[local[0]] * ly[local[1]] / grid.h, lx[local[0]] * dy[local[1]] / grid.h};
}

ClosureMatrices assemble_dirichlet(const PointSets& ps, const std::vector<IntersectionPoint>& xs,
                                   const BoundaryCondition& bc, const Grid& grid) {
  if (bc.kind != BcKind::dirichlet) throw Error(ErrorCode::argument, "assemble_dirichlet needs a Dirichlet condition");
  if (xs.size() != ps.gamma_minus.size()) {
    throw Error(ErrorCode::assembly, "need exactly one intersection point per gamma- node");
  }
  const IndexMap plus_map(grid, ps.gamma_plus);
  const IndexMap minus_map(grid, ps.gamma_minus);
  const auto rows = static_cast<Eigen::Index>(xs.size());

  ClosureMatrices out;
  out.kind = BcKind::dirichlet;
  out.gamma_plus_tilde = ps.gamma_plus;
  out.gamma_plus_count = ps.gamma_plus.size();
  out.gamma_minus = ps.gamma_minus;
  out.rhs.resize(rows);
  Triplets t;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& x = xs[static_cast<std::size_t>(i)];
    const auto p = lattice_coords(x.location, grid);
    const LatticeIndex base{static_cast<int>(std::floor(p[0])), static_cast<int>(std::floor(p[1]))};
    bool any = false;
    for (int dy = 0; dy <= 1; ++dy) {
      for (int dx = 0; dx <= 1; ++dx) {
        const LatticeIndex node = base + LatticeIndex{dx, dy};
        if (!ps.in_gamma(node)) continue;
        const double v = bilinear_eval(node, x.location, grid);
        if (v == 0.0) continue;
        any = true;
        if (const int j = plus_map.find(node); j >= 0) {
          t.plus.emplace_back(i, j, v);
        } else {
          t.minus.emplace_back(i, minus_map.find(node), v);
        }
      }
    }
    if (!any) throw Error(ErrorCode::closure_degeneracy, "closure row for " + x.owner.str() + " is empty");
    out.rhs[i] = bc.data(x.location, x.normal);
  }
  out.phi_plus = build(rows, static_cast<Eigen::Index>(ps.gamma_plus.size()), t.plus);
  out.phi_minus = build(rows, rows, t.minus);
  out.phi_prime_minus = SparseRows(rows, 0);
  out.r_plus = SparseRows(0, static_cast<Eigen::Index>(ps.gamma_plus.size()));
  out.r_minus = SparseRows(0, rows);
  return out;
}

namespace {

constexpr double cell_tolerance = 1e-12;
constexpr int max_extrapolation_offset = 12;

SupportCell make_cell(LatticeIndex anchor, const PointSets& ps) {
  SupportCell c;
  c.anchor = anchor;
  c.interior_count = 0;
  for (int iy = 0; iy < 3; ++iy) {
    for (int ix = 0; ix < 3; ++ix) {
      const LatticeIndex node = anchor + LatticeIndex{ix, iy};
      c.nodes[3 * iy + ix] = node;
      c.interior_count += ps.in_m_plus(node);
    }
  }
  return c;
}

bool cell_on_box(const SupportCell& c, const PointSets& ps) {
  if (ps.unbounded) return true;
  return std::all_of(c.nodes.begin(), c.nodes.end(), [&](const auto& n) { return ps.grid.contains(n); });
}

}  // namespace

SupportCells build_support_cells(const std::vector<IntersectionPoint>& xs, const PointSets& ps, const Grid& grid) {
  SupportCells out;
  out.cells.reserve(xs.size());
  std::set<LatticeIndex, RowMajorLess> extra_plus;
  std::set<LatticeIndex, RowMajorLess> eta;
  for (const auto& x : xs) {
    const auto p = lattice_coords(x.location, grid);
    // Anchors whose 2h x 2h square contains the point.
    const int lo1 = static_cast<int>(std::ceil(p[0] - 2.0 - cell_tolerance));
    const int hi1 = static_cast<int>(std::floor(p[0] + cell_tolerance));
    const int lo2 = static_cast<int>(std::ceil(p[1] - 2.0 - cell_tolerance));
    const int hi2 = static_cast<int>(std::floor(p[1] + cell_tolerance));
    bool found = false;
    SupportCell best;
    for (int a1 = lo1; a1 <= hi1; ++a1) {
      for (int a2 = lo2; a2 <= hi2; ++a2) {
        const SupportCell c = make_cell({a1, a2}, ps);
        if (!cell_on_box(c, ps)) continue;
        // Maximal interior count, then the lexicographically smallest anchor.
        if (!found || c.interior_count > best.interior_count ||
            (c.interior_count == best.interior_count && c.anchor < best.anchor)) {
          best = c;
          found = true;
        }
      }
    }
    if (!found) {
      throw Error(ErrorCode::under_resolved_boundary, "no 3x3 support cell for the crossing owned by " + x.owner.str());
    }
    for (const auto& node : best.nodes) {
      const auto c = ps.class_of(node);
      if (c == NodeClass::interior) extra_plus.insert(node);
      if (c == NodeClass::exterior) eta.insert(node);
    }
    out.cells.push_back(best);
  }

  // Each eta node is extrapolated along an axis from three consecutive nodes in M+ ∪ gamma-,
  // at most max_extrapolation_offset away.
  auto known = [&](LatticeIndex m) {
    const auto c = ps.class_of(m);
    return c != NodeClass::exterior;
  };
  for (const auto& target : eta) {
    // Per axis/side: the smallest offset d with target + {d, d+1, d+2} known.
    std::array<int, 2> score{0, 0};
    std::array<std::array<int, 2>, 2> offset{};
    for (int axis = 0; axis < 2; ++axis) {
      const LatticeIndex e = axis == 0 ? e1 : e2;
      for (int side = 0; side < 2; ++side) {
        const LatticeIndex d = side == 0 ? e : LatticeIndex{-e.m1, -e.m2};
        for (int k = 1; k <= 3; ++k) score[axis] += known(target + k * d);
        offset[axis][side] = 0;
        for (int o = 1; o <= max_extrapolation_offset; ++o) {
          if (known(target + o * d) && known(target + (o + 1) * d) && known(target + (o + 2) * d)) {
            offset[axis][side] = o;
            break;
          }
        }
      }
    }
    int best_axis = -1, best_side = -1, best_offset = 0;
    // Smallest offset, then more known nodes next to the target, then x, then the + side.
    for (int axis : {score[1] > score[0] ? 1 : 0, score[1] > score[0] ? 0 : 1}) {
      for (int side = 0; side < 2; ++side) {
        const int o = offset[axis][side];
        if (o > 0 && (best_axis < 0 || o < best_offset)) {
          best_axis = axis;
          best_side = side;
          best_offset = o;
        }
      }
    }
    if (best_axis < 0) {
      throw Error(ErrorCode::extrapolation_stencil, "eta node " + target.str() + " has no 3-node extrapolation stencil");
    }
    const LatticeIndex e = best_axis == 0 ? e1 : e2;
    const LatticeIndex d = best_side == 0 ? e : LatticeIndex{-e.m1, -e.m2};
    const int o = best_offset;
    // Quadratic Lagrange weights from offsets o, o+1, o+2 to 0.
    ExtrapolationStencil s{target,
                           {target + o * d, target + (o + 1) * d, target + (o + 2) * d},
                           {(o + 1) * (o + 2) / 2.0, -static_cast<double>(o * (o + 2)), o * (o + 1) / 2.0}};
    for (const auto& node : s.from) {
      if (ps.class_of(node) == NodeClass::interior) extra_plus.insert(node);
    }
    out.stencils.push_back(s);
  }

  out.gamma_plus_tilde = ps.gamma_plus;
  out.gamma_plus_tilde.insert(out.gamma_plus_tilde.end(), extra_plus.begin(), extra_plus.end());
  out.eta.assign(eta.begin(), eta.end());
  return out;
}

ClosureMatrices assemble_robin(const PointSets& ps, const std::vector<IntersectionPoint>& xs,
                               const SupportCells& cells, const BoundaryCondition& bc, const Grid& grid) {
  if (bc.kind != BcKind::robin) throw Error(ErrorCode::argument, "assemble_robin needs a Robin condition");
  if (xs.size() != ps.gamma_minus.size() || cells.cells.size() != xs.size()) {
    throw Error(ErrorCode::assembly, "need exactly one intersection point and support cell per gamma- node");
  }
  const IndexMap plus_map(grid, cells.gamma_plus_tilde);
  const IndexMap minus_map(grid, ps.gamma_minus);
  const IndexMap eta_map(grid, cells.eta);
  const auto rows = static_cast<Eigen::Index>(xs.size());

  ClosureMatrices out;
  out.kind = BcKind::robin;
  out.gamma_plus_tilde = cells.gamma_plus_tilde;
  out.gamma_plus_count = ps.gamma_plus.size();
  out.gamma_minus = ps.gamma_minus;
  out.eta = cells.eta;
  out.rhs.resize(rows);

  Triplets t;
  auto scatter = [&](Eigen::Index row, LatticeIndex node, double v, bool extrapolation) {
    if (const int j = plus_map.find(node); j >= 0) {
      (extrapolation ? t.rp : t.plus).emplace_back(row, j, v);
    } else if (const int k = minus_map.find(node); k >= 0) {
      (extrapolation ? t.rm : t.minus).emplace_back(row, k, v);
    } else if (const int l = eta_map.find(node); l >= 0 && !extrapolation) {
      t.prime.emplace_back(row, l, v);
    } else {
      throw Error(ErrorCode::assembly, "closure node " + node.str() + " is not in any augmented set");
    }
  };

  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& x = xs[static_cast<std::size_t>(i)];
    const auto& cell = cells.cells[static_cast<std::size_t>(i)];
    bool any = false;
    for (int iy = 0; iy < 3; ++iy) {
      for (int ix = 0; ix < 3; ++ix) {
        const Vec2 g = quadratic_grad(cell, {ix, iy}, x.location, grid);
        const double phi = quadratic_eval(cell, {ix, iy}, x.location, grid);
        const double v = bc.alpha_coef * dot(g, x.normal) + bc.beta_coef * phi;
        if (v == 0.0) continue;
        any = true;
        scatter(i, cell.nodes[3 * iy + ix], v, false);
      }
    }
    if (!any) throw Error(ErrorCode::closure_degeneracy, "closure row for " + x.owner.str() + " is empty");
    out.rhs[i] = bc.data(x.location, x.normal);
  }
  for (std::size_t r = 0; r < cells.stencils.size(); ++r) {
    const auto& s = cells.stencils[r];
    if (eta_map.find(s.target) != static_cast<int>(r)) throw Error(ErrorCode::assembly, "stencils out of eta order");
    for (int k = 0; k < 3; ++k) scatter(static_cast<Eigen::Index>(r), s.from[k], -s.weights[k], true);
  }
  const auto np = static_cast<Eigen::Index>(cells.gamma_plus_tilde.size());
  const auto ne = static_cast<Eigen::Index>(cells.eta.size());
  out.phi_plus = build(rows, np, t.plus);
  out.phi_minus = build(rows, rows, t.minus);
  out.phi_prime_minus = build(rows, ne, t.prime);
  out.r_plus = build(ne, np, t.rp);
  out.r_minus = build(ne, rows, t.rm);
  return out;
}

void write_closure_csv(std::ostream& os, const ClosureMatrices& closure) {
  os << "row,col_index,value,block\n";
  os.precision(17);
  auto dump = [&](const SparseRows& m, const char* block) {
    for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
      for (SparseRows::InnerIterator it(m, r); it; ++it) {
        os << it.row() << ',' << it.col() << ',' << it.value() << ',' << block << '\n';
      }
    }
  };
  dump(closure.phi_plus, "phi_plus");
  dump(closure.phi_minus, "phi_minus");
  dump(closure.phi_prime_minus, "phi_prime_minus");
  dump(closure.r_plus, "r_plus");
  dump(closure.r_minus, "r_minus");
}

}  // namespace ubae
