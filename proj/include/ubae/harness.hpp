#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ubae/closure.hpp"
#include "ubae/diffpot.hpp"
#include "ubae/errors.hpp"
#include "ubae/geometry.hpp"
#include "ubae/solver.hpp"

namespace ubae {

enum class GeometryKind { ellipse, diamond, circle_exterior };
enum class BcSelector { dirichlet, robin, neumann };

// Manufactured solutions. sincos carries f = 2 sin(x) cos(y); the others are harmonic.
enum class SolutionKind {
  sincos,    // sin(x) cos(y)
  harmonic,  // exp(x) cos(y)
  constant,  // 1
  flow,      // x / (x^2 + y^2)
};

GeometryKind parse_geometry(const std::string& s);
BcSelector parse_bc(const std::string& s);
SolutionKind parse_solution(const std::string& s);
EtaCorrection parse_eta_correction(const std::string& s);
const char* to_string(GeometryKind g) noexcept;
const char* to_string(BcSelector b) noexcept;
const char* to_string(SolutionKind s) noexcept;

struct ExperimentConfig {
  GeometryKind geometry = GeometryKind::ellipse;
  double aspect = 1.0;        // ellipse
  double r1 = 0.9, r2 = 0.5;  // diamond
  double radius = 1.0;        // circle-exterior
  BcSelector bc = BcSelector::dirichlet;
  double robin_alpha = 1.0, robin_beta = 1.0;
  Formulation formulation;
  int n = 64;
  std::vector<int> n_list;
  double ell = 0.15;
  // Box [lo, hi]^2; defaults to [-1-ell, 1+ell] or [-3, 3] for exterior geometry.
  std::optional<std::pair<double, double>> box;
  // Defaults to sincos for bounded geometry and flow for exterior geometry.
  std::optional<SolutionKind> solution;
  EtaCorrection eta = EtaCorrection::extrapolated;
  std::uint64_t seed = 0;
  bool timing = true;
  bool with_condition = false;  // cond column of solve rows

  bool unbounded() const { return geometry == GeometryKind::circle_exterior; }
  SolutionKind effective_solution() const;
  std::pair<double, double> effective_box() const;
  LevelSetShape shape() const;
  // grid for N intervals per axis
  Grid grid(int n_intervals) const;
  BoundaryCondition boundary_condition() const;
  std::string geometry_tag() const;

  // Raises ErrorCode::argument for invalid combinations; n_list is checked when nonempty.
  void validate() const;
};

struct ResultRow {
  int n = 0;
  double h = 0.0;
  std::string geometry, bc, formulation;
  std::optional<double> max_error;
  std::optional<double> cond;
  std::optional<double> wall_time;

  // Diagnostics, not written to CSV.
  Vec2 max_error_location;
  double exact_at_max_error = 0.0;
  double exact_max = 0.0;  // max |u| over the error node set
};

// Interior solution over the error node set.
struct SolveOutput {
  ResultRow row;
  PointSets sets;
  std::vector<double> computed;  // in sets.m_plus order
  std::vector<double> exact;
};

SolveOutput run_solve_detailed(const ExperimentConfig& cfg, int n);
ResultRow run_solve(const ExperimentConfig& cfg);

struct FailureNote {
  int n = 0;
  ErrorCode code = ErrorCode::argument;
  std::string message;
};

struct ConvergenceResult {
  std::vector<ResultRow> rows;
  std::optional<double> order;  // least-squares slope of log(error) vs log(h)
  std::optional<FailureNote> failure;
};

ConvergenceResult run_convergence(const ExperimentConfig& cfg);

// Slope of the least-squares line through (log x, log y).
double fitted_order(const std::vector<double>& x, const std::vector<double>& y);

struct ConditioningResult {
  std::vector<ResultRow> rows;  // formulation column holds S-, D-, A_s, A_d, M_s, M_d
  std::vector<std::string> notes;
  std::optional<FailureNote> failure;
};

ConditioningResult run_conditioning(const ExperimentConfig& cfg);

// Condition numbers of the six matrices at one N; D-family entries are empty
// when the double layer is inapplicable, with the reason appended to notes.
std::vector<ResultRow> conditioning_rows(const ExperimentConfig& cfg, int n, std::vector<std::string>& notes);

// Process exit code of an error: 2 invalid config, 3 expected formulation failure, 4 numerical failure.
int exit_code(ErrorCode code) noexcept;

// One "# ..." metadata line, the header, then the rows. Fields print with 17
// significant digits; missing values are empty.
void write_csv(std::ostream& os, const std::vector<ResultRow>& rows, const ExperimentConfig& cfg,
               const std::vector<std::string>& notes = {});
std::string metadata_line(const ExperimentConfig& cfg);

enum class PlotKind { convergence, conditioning };

// Matplotlib script reading the CSV by a path relative to the script.
void write_plot_script(std::ostream& os, const std::string& csv_relative_path, PlotKind kind);

// CSV and optional plot script (next to the CSV, named <stem>_plot.py).
void emit_outputs(const std::vector<ResultRow>& rows, const ExperimentConfig& cfg, const std::filesystem::path& out,
                  std::optional<PlotKind> plot = std::nullopt, const std::vector<std::string>& notes = {});

// CSV "x,y,value" of computed - exact over the error node set.
void write_error_surface(std::ostream& os, const SolveOutput& out);

}  // namespace ubae
