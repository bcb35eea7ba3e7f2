#include "ubae/diffpot.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <ostream>

#include <fftw3.h>

#include "ubae/potentials.hpp"

namespace ubae {

namespace {

// The FFTW planner is not reentrant.
std::mutex planner_mutex;

class SinePlan {
 public:
  SinePlan(int rows, int cols, double* data) {
    std::lock_guard lock(planner_mutex);
    plan_ = fftw_plan_r2r_2d(rows, cols, data, data, FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
  }
  ~SinePlan() {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(plan_);
  }
  SinePlan(const SinePlan&) = delete;
  SinePlan& operator=(const SinePlan&) = delete;

  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_ = nullptr;
};

void check_box(const PointSets& ps, const AuxiliaryBox& box) {
  if (!(ps.grid == box.grid)) throw Error(ErrorCode::argument, "auxiliary box does not match the classification grid");
  if (ps.unbounded) throw Error(ErrorCode::argument, "difference potentials need a bounded domain");
  for (const auto& m : ps.gamma) {
    if (box.grid.edge_distance(m) < 2) {
      throw Error(ErrorCode::box_too_small, "gamma node " + m.str() + " touches the auxiliary box edge");
    }
  }
}

}  // namespace

double sine_eigenvalue(int j, int k, int cells_x, int cells_y) {
  constexpr double pi = std::numbers::pi;
  return 4.0 - 2.0 * std::cos(j * pi / cells_x) - 2.0 * std::cos(k * pi / cells_y);
}

GridFunction fft_poisson_solve(const GridFunction& rhs) {
  const Grid& g = rhs.grid;
  const int nx = g.nx - 2;
  const int ny = g.ny - 2;
  GridFunction w(g);
  if (nx <= 0 || ny <= 0) return w;

  double* data = fftw_alloc_real(static_cast<std::size_t>(nx) * ny);
  for (int k = 0; k < ny; ++k) {
    for (int j = 0; j < nx; ++j) data[k * nx + j] = rhs.values[g.flat({j + 1, k + 1})];
  }
  {
    const SinePlan plan(ny, nx, data);
    plan.execute();
    const double scale = 1.0 / (4.0 * (nx + 1) * (ny + 1));
    for (int k = 0; k < ny; ++k) {
      for (int j = 0; j < nx; ++j) data[k * nx + j] *= scale / sine_eigenvalue(j + 1, k + 1, nx + 1, ny + 1);
    }
    plan.execute();
  }
  for (int k = 0; k < ny; ++k) {
    for (int j = 0; j < nx; ++j) w.values[g.flat({j + 1, k + 1})] = data[k * nx + j];
  }
  fftw_free(data);
  return w;
}

GridFunction difference_potential(std::span<const double> u_gamma, const PointSets& ps, const AuxiliaryBox& box) {
  check_box(ps, box);
  if (u_gamma.size() != ps.gamma.size()) throw Error(ErrorCode::coverage, "gamma data does not cover gamma");
  GridFunction u(box.grid);
  for (std::size_t i = 0; i < ps.gamma.size(); ++i) u.at(ps.gamma[i]) = u_gamma[i];

  // [Au] vanishes away from gamma and its neighbors, so only those M- nodes matter.
  GridFunction rhs(box.grid);
  for (const auto& m : ps.gamma) {
    for (const auto& step : std::array<LatticeIndex, 5>{{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}}}) {
      const LatticeIndex p = m + step;
      if (ps.in_m_minus(p) && !box.grid.on_edge(p)) rhs.at(p) = apply_stencil(u, p);
    }
  }
  return fft_poisson_solve(rhs);
}

GridFunction particular_solution(const std::function<double(Vec2)>& f, const PointSets& ps,
                                 const AuxiliaryBox& box) {
  check_box(ps, box);
  GridFunction rhs(box.grid);
  const double h2 = box.grid.h * box.grid.h;
  for (const auto& m : ps.m_plus) rhs.at(m) = h2 * f(box.grid.node(m));
  return fft_poisson_solve(rhs);
}

Eigen::VectorXd correct_boundary_rhs(const ClosureMatrices& closure, const GridFunction& up, EtaCorrection eta) {
  auto sample = [&](const std::vector<LatticeIndex>& nodes) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!up.grid.contains(nodes[i])) {
        throw Error(ErrorCode::coverage, "particular solution does not cover node " + nodes[i].str());
      }
      v[static_cast<Eigen::Index>(i)] = up(nodes[i]);
    }
    return v;
  };
  const Eigen::VectorXd plus = sample(closure.gamma_plus_tilde);
  const Eigen::VectorXd minus = sample(closure.gamma_minus);
  Eigen::VectorXd rhs = closure.rhs - closure.phi_plus * plus - closure.phi_minus * minus;
  if (closure.has_extrapolation()) {
    const Eigen::VectorXd at_eta = eta == EtaCorrection::direct
                                       ? sample(closure.eta)
                                       : Eigen::VectorXd(-(closure.r_plus * plus + closure.r_minus * minus));
    rhs -= closure.phi_prime_minus * at_eta;
  }
  return rhs;
}

GridFunction superpose(const GridFunction& uh, const GridFunction& up) {
  if (!(uh.grid == up.grid)) throw Error(ErrorCode::argument, "superposed grid functions live on different boxes");
  GridFunction u(uh.grid);
  for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] = uh.values[i] + up.values[i];
  return u;
}

void write_grid_function_csv(std::ostream& os, const GridFunction& u, const PointSets& ps) {
  os << "x,y,value\n";
  os.precision(17);
  for (const auto& m : ps.m_plus) {
    const Vec2 p = u.grid.node(m);
    os << p.x << ',' << p.y << ',' << u(m) << '\n';
  }
}

}  // namespace ubae
