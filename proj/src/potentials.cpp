#include "ubae/potentials.hpp"

#include <algorithm>
#include <cstdlib>

namespace ubae {

const char* to_string(LayerKind kind) noexcept {
  return kind == LayerKind::single ? "single" : "double";
}

double single_kernel(LatticeIndex m, LatticeIndex n) { return lgf(m - n); }

double double_kernel(LatticeIndex m, LatticeIndex n, std::span<const LatticeIndex> conn) {
  if (conn.empty()) throw Error(ErrorCode::kernel_undefined, "source " + n.str() + " has no exterior connection");
  const double base = lgf(m - n);
  double value = 0.0;
  for (const auto& k : conn) value += base - lgf(m - k);
  return value;
}

std::vector<std::vector<LatticeIndex>> source_connections(std::span<const LatticeIndex> sources,
                                                          const PointSets& ps, ConnectionPolicy policy) {
  std::vector<std::vector<LatticeIndex>> conns;
  conns.reserve(sources.size());
  for (const auto& n : sources) {
    conns.push_back(exterior_connections(ps, n, policy));
    if (conns.back().empty()) {
      throw Error(ErrorCode::double_layer_inapplicable,
                  "D- is undefined: gamma- node " + n.str() + " has no exterior connection");
    }
  }
  return conns;
}

namespace {

int span_radius(std::span<const LatticeIndex> a, std::span<const LatticeIndex> b, int pad) {
  if (a.empty() || b.empty()) return 0;
  auto extent = [](std::span<const LatticeIndex> s, auto proj) {
    auto [lo, hi] = std::minmax_element(s.begin(), s.end(), [&](auto& x, auto& y) { return proj(x) < proj(y); });
    return std::pair{proj(*lo), proj(*hi)};
  };
  auto p1 = [](const LatticeIndex& m) { return m.m1; };
  auto p2 = [](const LatticeIndex& m) { return m.m2; };
  const auto [a1lo, a1hi] = extent(a, p1);
  const auto [b1lo, b1hi] = extent(b, p1);
  const auto [a2lo, a2hi] = extent(a, p2);
  const auto [b2lo, b2hi] = extent(b, p2);
  const long long r = std::max({std::llabs(static_cast<long long>(a1hi) - b1lo), std::llabs(static_cast<long long>(b1hi) - a1lo),
                                std::llabs(static_cast<long long>(a2hi) - b2lo), std::llabs(static_cast<long long>(b2hi) - a2lo)});
  return static_cast<int>(r) + pad;
}

// Index differences of the kernels stay inside the warmed table, so the hot
// loops read it without locking.
template <class Sink>
void for_each_entry(std::span<const LatticeIndex> targets, std::span<const LatticeIndex> sources, LayerKind kind,
                    const PointSets& ps, ConnectionPolicy policy, Sink&& sink) {
  const int pad = kind == LayerKind::double_layer ? 1 : 0;
  lgf_warm(span_radius(targets, sources, pad));
  const auto table = lgf_snapshot();
  const LgfTable& g = *table;
  if (kind == LayerKind::single) {
    for (std::size_t j = 0; j < sources.size(); ++j) {
      const LatticeIndex n = sources[j];
      for (std::size_t i = 0; i < targets.size(); ++i) sink(i, j, g(targets[i] - n));
    }
    return;
  }
  const auto conns = source_connections(sources, ps, policy);
  for (std::size_t j = 0; j < sources.size(); ++j) {
    const LatticeIndex n = sources[j];
    const auto& conn = conns[j];
    const double count = static_cast<double>(conn.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const LatticeIndex m = targets[i];
      double value = count * g(m - n);
      for (const auto& k : conn) value -= g(m - k);
      sink(i, j, value);
    }
  }
}

}  // namespace

LayerMatrix assemble_layer_matrix(std::span<const LatticeIndex> targets, std::span<const LatticeIndex> sources,
                                  LayerKind kind, const PointSets& ps, ConnectionPolicy policy) {
  for (const auto& n : sources) {
    if (ps.class_of(n) != NodeClass::gamma_minus) {
      throw Error(ErrorCode::assembly, "layer source " + n.str() + " is not a gamma- node");
    }
  }
  LayerMatrix out;
  out.rows.assign(targets.begin(), targets.end());
  out.cols.assign(sources.begin(), sources.end());
  out.entries.resize(static_cast<Eigen::Index>(targets.size()), static_cast<Eigen::Index>(sources.size()));
  for_each_entry(targets, sources, kind, ps, policy, [&](std::size_t i, std::size_t j, double v) {
    out.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
  });
  return out;
}

Eigen::VectorXd evaluate_potential(std::span<const LatticeIndex> points, const DensityVector& density,
                                   LayerKind kind, const PointSets& ps, ConnectionPolicy policy) {
  if (density.values.size() != static_cast<Eigen::Index>(density.support.size())) {
    throw Error(ErrorCode::assembly, "density values and support differ in length");
  }
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(points.size()));
  for_each_entry(points, density.support, kind, ps, policy, [&](std::size_t i, std::size_t j, double v) {
    u[static_cast<Eigen::Index>(i)] += v * density.values[static_cast<Eigen::Index>(j)];
  });
  return u;
}

}  // namespace ubae
