#include "ubae/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ubae/potentials.hpp"

namespace ubae {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

bool power_of_two_in_range(int n) { return n >= 32 && n <= 1024 && (n & (n - 1)) == 0; }

struct Manufactured {
  double (*u)(Vec2);
  Vec2 (*grad)(Vec2);
  double (*f)(Vec2);  // -Laplacian of u
};

Manufactured manufactured(SolutionKind kind) {
  switch (kind) {
    case SolutionKind::sincos:
      return {[](Vec2 p) { return std::sin(p.x) * std::cos(p.y); },
              [](Vec2 p) { return Vec2{std::cos(p.x) * std::cos(p.y), -std::sin(p.x) * std::sin(p.y)}; },
              [](Vec2 p) { return 2.0 * std::sin(p.x) * std::cos(p.y); }};
    case SolutionKind::harmonic:
      return {[](Vec2 p) { return std::exp(p.x) * std::cos(p.y); },
              [](Vec2 p) { return Vec2{std::exp(p.x) * std::cos(p.y), -std::exp(p.x) * std::sin(p.y)}; },
              [](Vec2) { return 0.0; }};
    case SolutionKind::constant:
      return {[](Vec2) { return 1.0; }, [](Vec2) { return Vec2{}; }, [](Vec2) { return 0.0; }};
    case SolutionKind::flow:
      return {[](Vec2 p) { return p.x / (p.x * p.x + p.y * p.y); },
              [](Vec2 p) {
                const double r2 = p.x * p.x + p.y * p.y;
                return Vec2{(p.y * p.y - p.x * p.x) / (r2 * r2), -2.0 * p.x * p.y / (r2 * r2)};
              },
              [](Vec2) { return 0.0; }};
  }
  throw Error(ErrorCode::argument, "unknown solution kind");
}

ClosureMatrices build_closure(const PointSets& ps, const std::vector<IntersectionPoint>& xs,
                              const BoundaryCondition& bc, const Grid& grid) {
  if (bc.kind == BcKind::dirichlet) return assemble_dirichlet(ps, xs, bc, grid);
  return assemble_robin(ps, xs, build_support_cells(xs, ps, grid), bc, grid);
}

ResultRow base_row(const ExperimentConfig& cfg, int n, const Grid& grid) {
  ResultRow row;
  row.n = n;
  row.h = grid.h;
  row.geometry = cfg.geometry_tag();
  row.bc = to_string(cfg.bc);
  row.formulation = cfg.formulation.tag();
  return row;
}

void check_ladder(const std::vector<int>& ns) {
  if (ns.size() < 3) throw Error(ErrorCode::argument, "a ladder needs at least 3 values of N");
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (ns[i] <= ns[i - 1]) throw Error(ErrorCode::argument, "N ladder must be strictly ascending");
  }
}

}  // namespace

GeometryKind parse_geometry(const std::string& s) {
  if (s == "ellipse") return GeometryKind::ellipse;
  if (s == "diamond") return GeometryKind::diamond;
  if (s == "circle-exterior") return GeometryKind::circle_exterior;
  throw Error(ErrorCode::argument, "unknown geometry '" + s + "'");
}

BcSelector parse_bc(const std::string& s) {
  if (s == "dirichlet") return BcSelector::dirichlet;
  if (s == "robin") return BcSelector::robin;
  if (s == "neumann") return BcSelector::neumann;
  throw Error(ErrorCode::argument, "unknown boundary condition '" + s + "'");
}

SolutionKind parse_solution(const std::string& s) {
  if (s == "sincos") return SolutionKind::sincos;
  if (s == "harmonic") return SolutionKind::harmonic;
  if (s == "constant") return SolutionKind::constant;
  if (s == "flow") return SolutionKind::flow;
  throw Error(ErrorCode::argument, "unknown solution '" + s + "'");
}

EtaCorrection parse_eta_correction(const std::string& s) {
  if (s == "direct") return EtaCorrection::direct;
  if (s == "extrapolated") return EtaCorrection::extrapolated;
  throw Error(ErrorCode::argument, "unknown eta correction '" + s + "'");
}

const char* to_string(GeometryKind g) noexcept {
  switch (g) {
    case GeometryKind::ellipse: return "ellipse";
    case GeometryKind::diamond: return "diamond";
    case GeometryKind::circle_exterior: return "circle-exterior";
  }
  return "?";
}

const char* to_string(BcSelector b) noexcept {
  switch (b) {
    case BcSelector::dirichlet: return "dirichlet";
    case BcSelector::robin: return "robin";
    case BcSelector::neumann: return "neumann";
  }
  return "?";
}

const char* to_string(SolutionKind s) noexcept {
  switch (s) {
    case SolutionKind::sincos: return "sincos";
    case SolutionKind::harmonic: return "harmonic";
    case SolutionKind::constant: return "constant";
    case SolutionKind::flow: return "flow";
  }
  return "?";
}

SolutionKind ExperimentConfig::effective_solution() const {
  if (solution) return *solution;
  return unbounded() ? SolutionKind::flow : SolutionKind::sincos;
}

std::pair<double, double> ExperimentConfig::effective_box() const {
  if (box) return *box;
  if (unbounded()) return {-3.0, 3.0};
  return {-1.0 - ell, 1.0 + ell};
}

LevelSetShape ExperimentConfig::shape() const {
  switch (geometry) {
    case GeometryKind::ellipse: return LevelSetShape::ellipse(aspect);
    case GeometryKind::diamond: return LevelSetShape::diamond(r1, r2);
    case GeometryKind::circle_exterior: return LevelSetShape::circle_exterior(radius);
  }
  throw Error(ErrorCode::argument, "unknown geometry");
}

Grid ExperimentConfig::grid(int n_intervals) const {
  const auto [lo, hi] = effective_box();
  return Grid::box(lo, hi, n_intervals);
}

BoundaryCondition ExperimentConfig::boundary_condition() const {
  const Manufactured mf = manufactured(effective_solution());
  switch (bc) {
    case BcSelector::dirichlet:
      return BoundaryCondition::dirichlet([mf](Vec2 p, Vec2) { return mf.u(p); });
    case BcSelector::robin: {
      const double a = robin_alpha, b = robin_beta;
      return BoundaryCondition::robin(a, b, [mf, a, b](Vec2 p, Vec2 nrm) { return a * dot(mf.grad(p), nrm) + b * mf.u(p); });
    }
    case BcSelector::neumann:
      return BoundaryCondition::neumann([mf](Vec2 p, Vec2 nrm) { return dot(mf.grad(p), nrm); });
  }
  throw Error(ErrorCode::argument, "unknown boundary condition");
}

std::string ExperimentConfig::geometry_tag() const {
  switch (geometry) {
    case GeometryKind::ellipse: return "ellipse:aspect=" + fmt_short(aspect);
    case GeometryKind::diamond: return "diamond:r1=" + fmt_short(r1) + ":r2=" + fmt_short(r2);
    case GeometryKind::circle_exterior: return "circle-exterior:radius=" + fmt_short(radius);
  }
  return "?";
}

void ExperimentConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!power_of_two_in_range(n)) throw Error(ErrorCode::argument, "N must be a power of two in [32, 1024]");
  for (int v : n_list) {
    if (!power_of_two_in_range(v)) throw Error(ErrorCode::argument, "N must be a power of two in [32, 1024], got " + std::to_string(v));
  }
  if (!positive(ell)) throw Error(ErrorCode::argument, "ell must be positive");
  if (box && !(std::isfinite(box->first) && std::isfinite(box->second) && box->first < box->second)) {
    throw Error(ErrorCode::argument, "box bounds must satisfy lo < hi");
  }
  if (geometry == GeometryKind::ellipse && !positive(aspect)) throw Error(ErrorCode::argument, "aspect must be positive");
  if (geometry == GeometryKind::diamond && !(positive(r1) && positive(r2))) {
    throw Error(ErrorCode::argument, "r1 and r2 must be positive");
  }
  if (geometry == GeometryKind::circle_exterior && !positive(radius)) throw Error(ErrorCode::argument, "radius must be positive");
  if (bc == BcSelector::neumann && !unbounded()) {
    throw Error(ErrorCode::argument, "neumann data is only supported on exterior geometry");
  }
  if (bc == BcSelector::robin && !(std::isfinite(robin_alpha) && robin_alpha != 0.0 && std::isfinite(robin_beta))) {
    throw Error(ErrorCode::argument, "robin coefficients must be finite with alpha != 0");
  }
  const SolutionKind sol = effective_solution();
  if (unbounded() && sol != SolutionKind::flow) {
    throw Error(ErrorCode::argument, "exterior geometry supports only the flow solution (no forcing)");
  }
  if (!unbounded() && sol == SolutionKind::flow) {
    throw Error(ErrorCode::argument, "the flow solution is singular inside bounded geometry");
  }
}

SolveOutput run_solve_detailed(const ExperimentConfig& cfg, int n) {
  const auto t0 = Clock::now();
  const Grid grid = cfg.grid(n);
  const LevelSetShape shape = cfg.shape();
  SolveOutput out;
  out.row = base_row(cfg, n, grid);
  out.sets = classify(grid, shape);
  const PointSets& ps = out.sets;
  const auto xs = select_intersections(ps, shape, grid);
  const ClosureMatrices closure = build_closure(ps, xs, cfg.boundary_condition(), grid);
  const LayerKind kernel = cfg.formulation.kernel;
  const LayerPair layers = assemble_layers(kernel, ps, closure);

  const Manufactured mf = manufactured(cfg.effective_solution());
  const bool forced = cfg.effective_solution() == SolutionKind::sincos;
  const AuxiliaryBox box{grid};
  std::optional<GridFunction> up;
  Eigen::VectorXd rhs;
  if (forced) {
    up = particular_solution(mf.f, ps, box);
    rhs = correct_boundary_rhs(closure, *up, cfg.eta);
  }
  const SolveResult res = solve_bae(cfg.formulation, closure, layers, forced ? &rhs : nullptr, cfg.with_condition);
  out.row.cond = res.system_cond;

  out.computed.resize(ps.m_plus.size());
  if (!ps.unbounded) {
    const IndexMap plus(grid, ps.gamma_plus), minus(grid, ps.gamma_minus);
    std::vector<double> u_gamma(ps.gamma.size());
    for (std::size_t i = 0; i < ps.gamma.size(); ++i) {
      const int p = plus.find(ps.gamma[i]);
      u_gamma[i] = p >= 0 ? res.trace_plus[p] : res.trace_minus[minus.find(ps.gamma[i])];
    }
    GridFunction w = difference_potential(u_gamma, ps, box);
    if (up) w = superpose(w, *up);
    for (std::size_t i = 0; i < ps.m_plus.size(); ++i) out.computed[i] = w(ps.m_plus[i]);
  } else {
    const Eigen::VectorXd v = evaluate_potential(ps.m_plus, res.density, kernel, ps);
    for (std::size_t i = 0; i < ps.m_plus.size(); ++i) out.computed[i] = v[static_cast<Eigen::Index>(i)];
  }

  out.exact.resize(ps.m_plus.size());
  double err = -1.0;
  for (std::size_t i = 0; i < ps.m_plus.size(); ++i) {
    const Vec2 p = grid.node(ps.m_plus[i]);
    out.exact[i] = mf.u(p);
    out.row.exact_max = std::max(out.row.exact_max, std::abs(out.exact[i]));
    const double e = std::abs(out.computed[i] - out.exact[i]);
    if (!std::isfinite(e)) throw Error(ErrorCode::singular_system, "non-finite interior solution at " + ps.m_plus[i].str());
    if (e > err) {
      err = e;
      out.row.max_error_location = p;
      out.row.exact_at_max_error = out.exact[i];
    }
  }
  out.row.max_error = err;
  if (cfg.timing) out.row.wall_time = seconds_since(t0);
  return out;
}

ResultRow run_solve(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_solve_detailed(cfg, cfg.n).row;
}

double fitted_order(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::argument, "fit needs at least two matching points");
  const auto k = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw Error(ErrorCode::argument, "fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = k * sxx - sx * sx;
  if (den == 0.0) throw Error(ErrorCode::argument, "fit abscissae coincide");
  return (k * sxy - sx * sy) / den;
}

ConvergenceResult run_convergence(const ExperimentConfig& cfg) {
  cfg.validate();
  check_ladder(cfg.n_list);
  ConvergenceResult result;
  for (int n : cfg.n_list) {
    try {
      result.rows.push_back(run_solve_detailed(cfg, n).row);
    } catch (const Error& e) {
      result.failure = FailureNote{n, e.code(), e.what()};
      break;
    }
  }
  if (!result.failure) {
    std::vector<double> hs, errs;
    for (const auto& r : result.rows) {
      hs.push_back(r.h);
      errs.push_back(*r.max_error);
    }
    result.order = fitted_order(hs, errs);
  }
  return result;
}

std::vector<ResultRow> conditioning_rows(const ExperimentConfig& cfg, int n, std::vector<std::string>& notes) {
  const Grid grid = cfg.grid(n);
  const LevelSetShape shape = cfg.shape();
  const PointSets ps = classify(grid, shape);
  const auto xs = select_intersections(ps, shape, grid);
  const ClosureMatrices closure = build_closure(ps, xs, cfg.boundary_condition(), grid);

  std::vector<ResultRow> rows;
  auto add = [&](const char* name, const Eigen::MatrixXd* m) {
    ResultRow row = base_row(cfg, n, grid);
    row.formulation = name;
    const auto t0 = Clock::now();
    if (m) row.cond = condition_number(*m);
    if (cfg.timing && m) row.wall_time = seconds_since(t0);
    rows.push_back(std::move(row));
  };

  const LayerPair single = assemble_layers(LayerKind::single, ps, closure);
  const KernelFactor fs(single.minus, LayerKind::single);
  const Eigen::MatrixXd a_s = assemble_system({LayerKind::single, SystemForm::schur}, closure, single, &fs).matrix;
  const Eigen::MatrixXd m_s = assemble_system({LayerKind::single, SystemForm::direct_density}, closure, single).matrix;

  std::optional<LayerPair> dbl;
  Eigen::MatrixXd a_d, m_d;
  try {
    dbl = assemble_layers(LayerKind::double_layer, ps, closure);
    const KernelFactor fd(dbl->minus, LayerKind::double_layer);
    a_d = assemble_system({LayerKind::double_layer, SystemForm::schur}, closure, *dbl, &fd).matrix;
    m_d = assemble_system({LayerKind::double_layer, SystemForm::direct_density}, closure, *dbl).matrix;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::double_layer_inapplicable && e.code() != ErrorCode::formulation_singular) throw;
    dbl.reset();
    notes.push_back("N=" + std::to_string(n) + " double-layer family skipped: " + e.what());
  }

  add("S-", &single.minus.entries);
  add("D-", dbl ? &dbl->minus.entries : nullptr);
  add("A_s", &a_s);
  add("A_d", dbl ? &a_d : nullptr);
  add("M_s", &m_s);
  add("M_d", dbl ? &m_d : nullptr);
  return rows;
}

ConditioningResult run_conditioning(const ExperimentConfig& cfg) {
  cfg.validate();
  check_ladder(cfg.n_list);
  ConditioningResult result;
  for (int n : cfg.n_list) {
    try {
      auto rows = conditioning_rows(cfg, n, result.notes);
      result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    } catch (const Error& e) {
      result.failure = FailureNote{n, e.code(), e.what()};
      break;
    }
  }
  return result;
}

int exit_code(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::argument:
    case ErrorCode::geometry_too_tight:
    case ErrorCode::degenerate_domain:
    case ErrorCode::box_too_small:
    case ErrorCode::under_resolved_boundary:
    case ErrorCode::io:
      return 2;
    case ErrorCode::formulation_singular:
    case ErrorCode::double_layer_inapplicable:
    case ErrorCode::kernel_undefined:
      return 3;
    default:
      return 4;
  }
}

std::string metadata_line(const ExperimentConfig& cfg) {
  const auto [lo, hi] = cfg.effective_box();
  std::ostringstream os;
  os << "# ubae geometry=" << cfg.geometry_tag() << " bc=" << to_string(cfg.bc);
  if (cfg.bc == BcSelector::robin) os << " robin=" << fmt_short(cfg.robin_alpha) << ':' << fmt_short(cfg.robin_beta);
  os << " formulation=" << cfg.formulation.tag() << " solution=" << to_string(cfg.effective_solution())
     << " box=" << fmt_short(lo) << ':' << fmt_short(hi) << " ell=" << fmt_short(cfg.ell)
     << " eta=" << (cfg.eta == EtaCorrection::direct ? "direct" : "extrapolated") << " seed=" << cfg.seed
     << " error_nodes=" << (cfg.unbounded() ? "M+ within box" : "M+");
  return os.str();
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows, const ExperimentConfig& cfg,
               const std::vector<std::string>& notes) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); };
  os << metadata_line(cfg) << '\n';
  for (const auto& note : notes) os << "# note: " << note << '\n';
  os << "n,h,geometry,bc,formulation,max_error,cond,wall_time\n";
  for (const auto& r : rows) {
    os << r.n << ',' << fmt17(r.h) << ',' << r.geometry << ',' << r.bc << ',' << r.formulation << ','
       << opt(r.max_error) << ',' << opt(r.cond) << ',' << opt(r.wall_time) << '\n';
  }
}

void write_plot_script(std::ostream& os, const std::string& csv_relative_path, PlotKind kind) {
  const bool conv = kind == PlotKind::convergence;
  os << "#!/usr/bin/env python3\n"
        "import csv\n"
        "import pathlib\n"
        "\n"
        "import matplotlib\n"
        "matplotlib.use(\"Agg\")\n"
        "import matplotlib.pyplot as plt\n"
        "\n"
        "here = pathlib.Path(__file__).resolve().parent\n"
        "src = here / \""
     << csv_relative_path
     << "\"\n"
        "with open(src) as fh:\n"
        "    rows = list(csv.DictReader(line for line in fh if not line.startswith(\"#\")))\n"
        "series = {}\n"
        "for r in rows:\n"
        "    key = (r[\"geometry\"], r[\"bc\"], r[\"formulation\"])\n"
     << (conv ? "    if r[\"max_error\"]:\n"
                "        series.setdefault(key, []).append((float(r[\"h\"]), float(r[\"max_error\"])))\n"
              : "    if r[\"cond\"]:\n"
                "        series.setdefault(key, []).append((int(r[\"n\"]), float(r[\"cond\"])))\n")
     << "fig, ax = plt.subplots()\n"
        "for key, pts in sorted(series.items()):\n"
        "    pts.sort()\n"
        "    ax.loglog([p[0] for p in pts], [p[1] for p in pts], \"o-\", label=\" \".join(key))\n"
     << (conv ? "if series:\n"
                "    pts = sorted(next(iter(series.values())))\n"
                "    h0, e0 = pts[-1]\n"
                "    ax.loglog([p[0] for p in pts], [e0 * (p[0] / h0) ** 2 for p in pts], \"k--\", label=\"order 2\")\n"
                "ax.set_xlabel(\"h\")\n"
                "ax.set_ylabel(\"max error\")\n"
              : "ax.set_xlabel(\"N\")\n"
                "ax.set_ylabel(\"condition number\")\n")
     << "ax.legend(fontsize=\"small\")\n"
        "fig.savefig(src.with_suffix(\".png\"), dpi=150)\n";
}

void emit_outputs(const std::vector<ResultRow>& rows, const ExperimentConfig& cfg, const std::filesystem::path& out,
                  std::optional<PlotKind> plot, const std::vector<std::string>& notes) {
  if (rows.empty()) throw Error(ErrorCode::argument, "no rows to write");
  if (out.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(out.parent_path(), ec);
  }
  {
    std::ofstream os(out);
    if (!os) throw Error(ErrorCode::io, "cannot write '" + out.string() + "'");
    write_csv(os, rows, cfg, notes);
    if (!os) throw Error(ErrorCode::io, "write to '" + out.string() + "' failed");
  }
  if (plot) {
    const auto script = out.parent_path() / (out.stem().string() + "_plot.py");
    std::ofstream os(script);
    if (!os) throw Error(ErrorCode::io, "cannot write '" + script.string() + "'");
    write_plot_script(os, out.filename().string(), *plot);
  }
}

void write_error_surface(std::ostream& os, const SolveOutput& out) {
  os << "x,y,value\n";
  for (std::size_t i = 0; i < out.sets.m_plus.size(); ++i) {
    const Vec2 p = out.sets.grid.node(out.sets.m_plus[i]);
    os << fmt17(p.x) << ',' << fmt17(p.y) << ',' << fmt17(out.computed[i] - out.exact[i]) << '\n';
  }
}

}  // namespace ubae
