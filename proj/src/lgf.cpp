#include "ubae/lgf.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <queue>
#include <sstream>

namespace ubae {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::argument: return "argument error";
    case ErrorCode::evaluation_failure: return "evaluation failure";
    case ErrorCode::index_overflow: return "index overflow";
    case ErrorCode::geometry_too_tight: return "geometry too tight";
    case ErrorCode::degenerate_domain: return "degenerate domain";
    case ErrorCode::inconsistent_classification: return "inconsistent classification";
    case ErrorCode::kernel_undefined: return "kernel undefined";
    case ErrorCode::double_layer_inapplicable: return "double layer inapplicable";
    case ErrorCode::closure_degeneracy: return "closure degeneracy";
    case ErrorCode::under_resolved_boundary: return "under-resolved boundary";
    case ErrorCode::extrapolation_stencil: return "extrapolation stencil";
    case ErrorCode::formulation_singular: return "formulation singular";
    case ErrorCode::singular_system: return "singular system";
    case ErrorCode::assembly: return "assembly error";
    case ErrorCode::box_too_small: return "box too small";
    case ErrorCode::coverage: return "coverage error";
    case ErrorCode::io: return "i/o error";
  }
  return "error";
}

namespace {

constexpr double pi = std::numbers::pi;

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
constexpr double kronrod_nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kronrod_weights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double gauss_weights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// Integrand of the 1D representation, written without cancellation near y=0:
// with t = 1 - cos y, sinh s = sqrt(t(t+2)) and s = log1p(t + sinh s).
struct LgfIntegrand {
  double a;
  double b;

  double operator()(double y) const {
    if (y == 0.0) return -a;
    const double half = std::sin(0.5 * y);
    const double t = 2.0 * half * half;
    const double sh = std::sqrt(t * (t + 2.0));
    const double s = std::log1p(t + sh);
    const double hb = std::sin(0.5 * b * y);
    return (std::expm1(-a * s) * std::cos(b * y) - 2.0 * hb * hb) / sh;
  }
};

struct Panel {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel kronrod_panel(const F& f, double lo, double hi) {
  const double c = 0.5 * (lo + hi);
  const double r = 0.5 * (hi - lo);
  const double fc = f(c);
  double kronrod = kronrod_weights[7] * fc;
  double gauss = gauss_weights[3] * fc;
  double abs_sum = std::abs(kronrod);
  for (int i = 0; i < 7; ++i) {
    const double fl = f(c - r * kronrod_nodes[i]);
    const double fr = f(c + r * kronrod_nodes[i]);
    kronrod += kronrod_weights[i] * (fl + fr);
    abs_sum += kronrod_weights[i] * (std::abs(fl) + std::abs(fr));
    if (i % 2 == 1) gauss += gauss_weights[i / 2] * (fl + fr);
  }
  const double err = std::abs((kronrod - gauss) * r);
  // Error estimates below the roundoff floor of the panel carry no information.
  const double floor = 50.0 * std::numeric_limits<double>::epsilon() * abs_sum * r;
  return {lo, hi, kronrod * r, err <= floor ? 0.0 : err};
}

constexpr int max_panels = 4000;

double lgf_direct(LatticeIndex canonical) {
  if (canonical.m1 == 0 && canonical.m2 == 0) return 0.0;
  const double r = std::hypot(static_cast<double>(canonical.m1), static_cast<double>(canonical.m2));
  return r < lgf_switch_radius ? lgf_quadrature(canonical, lgf_default_tolerance)
                               : lgf_asymptotic(canonical);
}

std::mutex cache_mutex;
std::shared_ptr<const LgfTable> cache;

constexpr int initial_cache_radius = 40;

}  // namespace

LatticeIndex lgf_canonical(LatticeIndex m) {
  if (m.m1 == std::numeric_limits<int>::min() || m.m2 == std::numeric_limits<int>::min()) {
    throw Error(ErrorCode::index_overflow, "cannot negate " + m.str());
  }
  int a = std::abs(m.m1);
  int b = std::abs(m.m2);
  if (a < b) std::swap(a, b);
  return {a, b};
}

double lgf_quadrature(LatticeIndex m, double tol) {
  if (!(tol > 0.0 && tol <= 1e-6)) {
    throw Error(ErrorCode::argument, "quadrature tolerance must lie in (0, 1e-6]");
  }
  const LatticeIndex c = lgf_canonical(m);
  if (c.m1 == 0) return 0.0;
  const LgfIntegrand f{static_cast<double>(c.m1), static_cast<double>(c.m2)};

  // Integrated quantity is G * 2 pi, so the absolute target scales with it.
  const double target = tol * 2.0 * pi;
  std::priority_queue<Panel> panels;
  double total = 0.0;
  double total_error = 0.0;
  {
    const int initial = 8 + 2 * c.m2;  // resolve the oscillation of cos(b y)
    for (int i = 0; i < initial; ++i) {
      const Panel p = kronrod_panel(f, pi * i / initial, pi * (i + 1) / initial);
      total += p.value;
      total_error += p.error;
      panels.push(p);
    }
  }
  while (total_error > target) {
    if (static_cast<int>(panels.size()) >= max_panels) {
      std::ostringstream os;
      os << "G" << c.str() << " did not converge; error estimate " << total_error / (2.0 * pi);
      throw Error(ErrorCode::evaluation_failure, os.str());
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Panel left = kronrod_panel(f, worst.lo, mid);
    const Panel right = kronrod_panel(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }
  // Re-sum to shed accumulated update rounding.
  double sum = 0.0;
  while (!panels.empty()) {
    sum += panels.top().value;
    panels.pop();
  }
  return sum / (2.0 * pi);
}

double lgf_asymptotic(LatticeIndex m) {
  if (m.m1 == 0 && m.m2 == 0) {
    throw Error(ErrorCode::argument, "asymptotic expansion is undefined at the origin");
  }
  const double x = m.m1;
  const double y = m.m2;
  const double r2 = x * x + y * y;
  const double theta = std::atan2(y, x);
  const double c4 = std::cos(4.0 * theta);
  const double c8 = std::cos(8.0 * theta);
  const double c12 = std::cos(12.0 * theta);
  const double r4 = r2 * r2;
  return -(0.5 * std::log(r2) + euler_gamma + 0.5 * std::log(8.0)) / (2.0 * pi) +
         c4 / (24.0 * pi * r2) + (25.0 * c8 + 18.0 * c4) / (480.0 * pi * r4) +
         (490.0 * c12 + 459.0 * c8) / (2016.0 * pi * r4 * r2);
}

LgfTable::LgfTable(int radius, std::vector<double> values) : radius_(radius), values_(std::move(values)) {
  if (radius < 0 || values_.size() != size_for(radius)) {
    throw Error(ErrorCode::argument, "table size does not match radius");
  }
}

LgfTable LgfTable::compute(int radius) {
  if (radius < 0) throw Error(ErrorCode::argument, "negative table radius");
  std::vector<double> values(size_for(radius));
  std::shared_ptr<const LgfTable> previous;
  {
    std::lock_guard lock(cache_mutex);
    previous = cache;
  }
  for (int a = 0; a <= radius; ++a) {
    for (int b = 0; b <= a; ++b) {
      values[slot(a, b)] = (previous && previous->covers({a, b})) ? previous->at_canonical(a, b)
                                                                  : lgf_direct({a, b});
    }
  }
  return LgfTable(radius, std::move(values));
}

bool LgfTable::covers(LatticeIndex m) const noexcept {
  const long long a = std::llabs(m.m1);
  const long long b = std::llabs(m.m2);
  return a <= radius_ && b <= radius_;
}

void LgfTable::save(std::ostream& os) const {
  os << "lgf-cache v1 radius=" << radius_ << '\n';
  os << std::setprecision(17);
  for (int a = 0; a <= radius_; ++a) {
    for (int b = 0; b <= a; ++b) os << a << ',' << b << ',' << at_canonical(a, b) << '\n';
  }
}

LgfTable LgfTable::load(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("lgf-cache v1 radius=", 0) != 0) {
    throw Error(ErrorCode::io, "missing lgf-cache v1 header");
  }
  int radius = -1;
  try {
    radius = std::stoi(line.substr(std::string("lgf-cache v1 radius=").size()));
  } catch (const std::exception&) {
    throw Error(ErrorCode::io, "malformed radius in header: " + line);
  }
  if (radius < 0) throw Error(ErrorCode::io, "negative radius in header");
  std::vector<double> values(size_for(radius), std::numeric_limits<double>::quiet_NaN());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    int a = 0;
    int b = 0;
    double v = 0.0;
    char c1 = 0;
    char c2 = 0;
    std::istringstream ls(line);
    if (!(ls >> a >> c1 >> b >> c2 >> v) || c1 != ',' || c2 != ',' || b < 0 || b > a || a > radius) {
      throw Error(ErrorCode::io, "malformed cache line: " + line);
    }
    values[slot(a, b)] = v;
  }
  for (double v : values) {
    if (std::isnan(v)) throw Error(ErrorCode::io, "cache file does not cover its radius");
  }
  return LgfTable(radius, std::move(values));
}

LgfTable lgf_recursion_table(int jmax) {
  if (jmax < 1 || jmax > lgf_recursion_cap) {
    throw Error(ErrorCode::argument, "recursion table radius must lie in [1, " +
                                         std::to_string(lgf_recursion_cap) + "]");
  }
  LgfTable t(jmax, std::vector<double>(LgfTable::size_for(jmax), 0.0));
  auto g = [&t](int a, int b) -> double& { return a >= b ? t.at_canonical(a, b) : t.at_canonical(b, a); };
  g(0, 0) = 0.0;
  g(1, 0) = -0.25;
  g(1, 1) = -1.0 / pi;
  for (int j = 1; j < jmax; ++j) {
    g(j + 1, 0) = 4.0 * g(j, 0) - g(j - 1, 0) - 2.0 * g(j, 1);
    for (int k = 1; k < j; ++k) {
      g(j + 1, k) = 4.0 * g(j, k) - g(j - 1, k) - g(j, k + 1) - g(j, k - 1);
    }
    g(j + 1, j) = 2.0 * g(j, j) - g(j, j - 1);
    g(j + 1, j + 1) = (4.0 * j * g(j, j) - (2.0 * j - 1.0) * g(j - 1, j - 1)) / (2.0 * j + 1.0);
  }
  return t;
}

std::shared_ptr<const LgfTable> lgf_snapshot() {
  {
    std::lock_guard lock(cache_mutex);
    if (cache) return cache;
  }
  lgf_warm(initial_cache_radius);
  std::lock_guard lock(cache_mutex);
  return cache;
}

void lgf_warm(int radius) {
  {
    std::lock_guard lock(cache_mutex);
    if (cache && cache->radius() >= radius) return;
  }
  // Compute outside the lock; a concurrent warmer may win, in which case the
  // larger table is kept.
  auto fresh = std::make_shared<const LgfTable>(LgfTable::compute(std::max(radius, initial_cache_radius)));
  std::lock_guard lock(cache_mutex);
  if (!cache || cache->radius() < fresh->radius()) cache = std::move(fresh);
}

void lgf_install(std::shared_ptr<const LgfTable> table) {
  std::lock_guard lock(cache_mutex);
  cache = std::move(table);
}

double lgf(LatticeIndex m) {
  const auto table = lgf_snapshot();
  if (table->covers(m)) return (*table)(m);
  return lgf_direct(lgf_canonical(m));
}

}  // namespace ubae
