// Command-line driver: single solves, convergence and conditioning ladders, LGF values.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ubae/harness.hpp"
#include "ubae/lgf.hpp"

namespace {

struct Options {
  std::string geometry = "ellipse";
  std::string bc = "dirichlet";
  std::string formulation = "single-direct";
  std::string solution;
  std::string eta = "extrapolated";
  std::string n_list = "64,128,256,512";
  std::string out;
  std::string surface;
  double aspect = 1.0, r1 = 0.9, r2 = 0.5, radius = 1.0, ell = 0.15;
  double robin_alpha = 1.0, robin_beta = 1.0;
  int n = 64;
  std::uint64_t seed = 0;
  bool nonhomogeneous = false;
  bool no_timing = false;
  bool cond = false;
  bool plot = false;
};

void add_experiment_options(CLI::App* cmd, Options& o, bool ladder) {
  cmd->add_option("--geometry", o.geometry, "ellipse | diamond | circle-exterior")->capture_default_str();
  cmd->add_option("--aspect", o.aspect, "ellipse aspect ratio")->capture_default_str();
  cmd->add_option("--r1", o.r1, "diamond half-width along x")->capture_default_str();
  cmd->add_option("--r2", o.r2, "diamond half-width along y")->capture_default_str();
  cmd->add_option("--radius", o.radius, "exterior circle radius")->capture_default_str();
  cmd->add_option("--bc", o.bc, "dirichlet | robin | neumann")->capture_default_str();
  cmd->add_option("--robin-alpha", o.robin_alpha, "coefficient of du/dn")->capture_default_str();
  cmd->add_option("--robin-beta", o.robin_beta, "coefficient of u")->capture_default_str();
  cmd->add_option("--ell", o.ell, "box margin")->capture_default_str();
  cmd->add_option("--solution", o.solution, "sincos | harmonic | constant | flow");
  cmd->add_option("--eta-correction", o.eta, "direct | extrapolated")->capture_default_str();
  cmd->add_option("--seed", o.seed, "seed recorded in the CSV metadata")->capture_default_str();
  cmd->add_flag("--no-timing", o.no_timing, "leave wall_time empty (byte-identical output)");
  cmd->add_option("--out", o.out, "CSV output path")->required();
  if (ladder) {
    cmd->add_option("--n-list", o.n_list, "comma-separated N ladder")->capture_default_str();
    cmd->add_flag("--plot", o.plot, "also write <stem>_plot.py next to the CSV");
  } else {
    cmd->add_option("--n", o.n, "intervals per axis")->capture_default_str();
  }
}

std::vector<int> parse_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ubae::Error(ubae::ErrorCode::argument, "bad N list entry '" + item + "'");
    }
  }
  return out;
}

ubae::ExperimentConfig make_config(const Options& o, bool ladder) {
  ubae::ExperimentConfig cfg;
  cfg.geometry = ubae::parse_geometry(o.geometry);
  cfg.aspect = o.aspect;
  cfg.r1 = o.r1;
  cfg.r2 = o.r2;
  cfg.radius = o.radius;
  cfg.bc = ubae::parse_bc(o.bc);
  cfg.robin_alpha = o.robin_alpha;
  cfg.robin_beta = o.robin_beta;
  cfg.formulation = ubae::Formulation::parse(o.formulation);
  cfg.ell = o.ell;
  cfg.eta = ubae::parse_eta_correction(o.eta);
  cfg.seed = o.seed;
  cfg.timing = !o.no_timing;
  cfg.with_condition = o.cond;
  if (!o.solution.empty()) cfg.solution = ubae::parse_solution(o.solution);
  if (o.nonhomogeneous) {
    if (cfg.solution && *cfg.solution != ubae::SolutionKind::sincos) {
      throw ubae::Error(ubae::ErrorCode::argument, "--nonhomogeneous requires the sincos solution");
    }
    if (cfg.unbounded()) throw ubae::Error(ubae::ErrorCode::argument, "--nonhomogeneous needs bounded geometry");
    cfg.solution = ubae::SolutionKind::sincos;
  }
  if (ladder) {
    cfg.n_list = parse_list(o.n_list);
    if (!cfg.n_list.empty()) cfg.n = cfg.n_list.front();
  } else {
    cfg.n = o.n;
  }
  return cfg;
}

void report_failure(const ubae::FailureNote& f) {
  std::cerr << "ubae: N=" << f.n << ": " << f.message << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unfitted boundary algebraic equation solver for the 5-point Laplacian"};
  app.require_subcommand(1);
  Options o;

  auto* solve = app.add_subcommand("solve", "one manufactured-solution solve");
  add_experiment_options(solve, o, false);
  solve->add_option("--formulation", o.formulation, "single-direct | single-schur | double-direct | double-schur")
      ->capture_default_str();
  solve->add_flag("--nonhomogeneous", o.nonhomogeneous, "Poisson problem with f = 2 sin(x) cos(y)");
  solve->add_flag("--cond", o.cond, "fill the cond column with the system condition number");
  solve->add_option("--error-surface", o.surface, "CSV x,y,value of the pointwise error");

  auto* conv = app.add_subcommand("convergence", "error ladder with fitted order");
  add_experiment_options(conv, o, true);
  conv->add_option("--formulation", o.formulation, "single-direct | single-schur | double-direct | double-schur")
      ->capture_default_str();
  conv->add_flag("--nonhomogeneous", o.nonhomogeneous, "Poisson problem with f = 2 sin(x) cos(y)");

  auto* condn = app.add_subcommand("conditioning", "condition numbers of S-, D-, A_s, A_d, M_s, M_d");
  add_experiment_options(condn, o, true);

  int m1 = 0, m2 = 0;
  auto* lgf = app.add_subcommand("lgf", "print one lattice Green's function value");
  lgf->add_option("--m1", m1)->required();
  lgf->add_option("--m2", m2)->required();

  int cache_radius = 64;
  std::string cache_out;
  auto* cache = app.add_subcommand("lgf-cache", "write an LGF table file");
  cache->add_option("--radius", cache_radius)->capture_default_str();
  cache->add_option("--out", cache_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (lgf->parsed()) {
      std::printf("%.17g\n", ubae::lgf({m1, m2}));
      return 0;
    }
    if (cache->parsed()) {
      std::ofstream os(cache_out);
      if (!os) throw ubae::Error(ubae::ErrorCode::io, "cannot write '" + cache_out + "'");
      ubae::LgfTable::compute(cache_radius).save(os);
      return 0;
    }
    if (solve->parsed()) {
      const auto cfg = make_config(o, false);
      cfg.validate();
      const auto out = ubae::run_solve_detailed(cfg, cfg.n);
      ubae::emit_outputs({out.row}, cfg, o.out);
      if (!o.surface.empty()) {
        std::ofstream os(o.surface);
        if (!os) throw ubae::Error(ubae::ErrorCode::io, "cannot write '" + o.surface + "'");
        ubae::write_error_surface(os, out);
      }
      std::printf("N=%d h=%.6g max_error=%.6e\n", out.row.n, out.row.h, *out.row.max_error);
      return 0;
    }
    if (conv->parsed()) {
      const auto cfg = make_config(o, true);
      const auto res = ubae::run_convergence(cfg);
      std::vector<std::string> notes;
      if (res.failure) notes.push_back("failed at N=" + std::to_string(res.failure->n) + ": " + res.failure->message);
      if (!res.rows.empty()) {
        ubae::emit_outputs(res.rows, cfg, o.out, o.plot ? std::optional(ubae::PlotKind::convergence) : std::nullopt,
                           notes);
      }
      for (const auto& r : res.rows) std::printf("N=%d h=%.6g max_error=%.6e\n", r.n, r.h, *r.max_error);
      if (res.failure) {
        report_failure(*res.failure);
        return ubae::exit_code(res.failure->code);
      }
      std::printf("order=%.4f\n", *res.order);
      return 0;
    }
    if (condn->parsed()) {
      const auto cfg = make_config(o, true);
      const auto res = ubae::run_conditioning(cfg);
      auto notes = res.notes;
      if (res.failure) notes.push_back("failed at N=" + std::to_string(res.failure->n) + ": " + res.failure->message);
      if (!res.rows.empty()) {
        ubae::emit_outputs(res.rows, cfg, o.out, o.plot ? std::optional(ubae::PlotKind::conditioning) : std::nullopt,
                           notes);
      }
      for (const auto& r : res.rows) {
        std::printf("N=%d %-4s cond=%s\n", r.n, r.formulation.c_str(),
                    r.cond ? std::to_string(*r.cond).c_str() : "-");
      }
      for (const auto& note : res.notes) std::cerr << "ubae: " << note << '\n';
      if (res.failure) {
        report_failure(*res.failure);
        return ubae::exit_code(res.failure->code);
      }
      return 0;
    }
  } catch (const ubae::Error& e) {
    std::cerr << "ubae: " << e.what() << '\n';
    return ubae::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "ubae: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
