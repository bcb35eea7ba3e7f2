#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "ubae/solver.hpp"

using namespace ubae;

namespace {

struct Problem {
  Grid grid;
  PointSets ps;
  std::vector<IntersectionPoint> xs;
  ClosureMatrices closure;
};

Problem dirichlet_problem(const Grid& g, const LevelSetShape& s, BoundaryCondition::Data data) {
  Problem p{g, classify(g, s), {}, {}};
  p.xs = select_intersections(p.ps, s, g);
  p.closure = assemble_dirichlet(p.ps, p.xs, BoundaryCondition::dirichlet(std::move(data)), g);
  return p;
}

Problem robin_problem(const Grid& g, const LevelSetShape& s, BoundaryCondition::Data data) {
  Problem p{g, classify(g, s), {}, {}};
  p.xs = select_intersections(p.ps, s, g);
  p.closure = assemble_robin(p.ps, p.xs, build_support_cells(p.xs, p.ps, g), BoundaryCondition::robin(1.0, 1.0, std::move(data)), g);
  return p;
}

const Formulation all_formulations[] = {{LayerKind::single, SystemForm::direct_density},
                                        {LayerKind::single, SystemForm::schur},
                                        {LayerKind::double_layer, SystemForm::direct_density},
                                        {LayerKind::double_layer, SystemForm::schur}};

double harmonic(Vec2 p) { return std::exp(p.x) * std::cos(p.y); }

}  // namespace

TEST_CASE("formulation tags") {
  for (const auto& f : all_formulations) {
    const Formulation back = Formulation::parse(f.tag());
    CHECK(back.kernel == f.kernel);
    CHECK(back.form == f.form);
  }
  CHECK(Formulation{LayerKind::double_layer, SystemForm::schur}.tag() == "double-schur");
  CHECK_THROWS_AS(Formulation::parse("triple-direct"), Error);
}

TEST_CASE("dense solve") {
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
  CHECK((dense_solve(Eigen::MatrixXd::Identity(5, 5), b).x - b).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd a(2, 2);
  a << 2, 0, 0, 4;
  const DenseSolution s = dense_solve(a, Eigen::Vector2d(2, 8));
  CHECK(s.x[0] == doctest::Approx(1.0));
  CHECK(s.x[1] == doctest::Approx(2.0));

  std::mt19937_64 rng(42);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd r(50, 50);
  for (auto& v : r.reshaped()) v = nd(rng);
  r += 20.0 * Eigen::MatrixXd::Identity(50, 50);
  Eigen::VectorXd rb(50);
  for (auto& v : rb) v = nd(rng);
  const DenseSolution rs = dense_solve(r, rb);
  CHECK((r * rs.x - rb).cwiseAbs().maxCoeff() / rb.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(rs.residual_norm == doctest::Approx((r * rs.x - rb).cwiseAbs().maxCoeff()));

  Eigen::MatrixXd sing(2, 2);
  sing << 1, 2, 2, 4;
  try {
    dense_solve(sing, Eigen::Vector2d(1, 1));
    FAIL("expected singular_system");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singular_system);
  }
}

TEST_CASE("condition numbers") {
  CHECK(condition_number(Eigen::MatrixXd::Identity(4, 4)) == doctest::Approx(1.0));
  CHECK(condition_number(Eigen::Vector2d(1, 2).asDiagonal().toDenseMatrix()) == doctest::Approx(2.0));
  CHECK(condition_number(Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix()) == std::numeric_limits<double>::infinity());
}

TEST_CASE("kernel factor reports a singular D-") {
  LayerMatrix m;
  m.entries = Eigen::MatrixXd::Ones(3, 3);
  try {
    KernelFactor f(m, LayerKind::double_layer);
    FAIL("expected formulation_singular");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::formulation_singular);
    CHECK(std::string(e.what()).find("D- is singular") != std::string::npos);
  }
  LayerMatrix ok;
  ok.entries = Eigen::MatrixXd::Random(6, 6) + 6.0 * Eigen::MatrixXd::Identity(6, 6);
  const KernelFactor f(ok, LayerKind::single);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Random(4, 6);
  CHECK((f.right_solve(b) * ok.entries - b).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK((ok.entries * f.solve(b.transpose()) - b.transpose()).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("system matrices follow the block formulas") {
  const auto d = dirichlet_problem(Grid::box(-1.15, 1.15, 32), LevelSetShape::ellipse(2.0), [](Vec2, Vec2) { return 1.0; });
  const auto r = robin_problem(Grid::box(-1.15, 1.15, 32), LevelSetShape::ellipse(8.0), [](Vec2, Vec2) { return 1.0; });
  REQUIRE(r.closure.has_extrapolation());
  for (const auto* p : {&d, &r}) {
    const auto& c = p->closure;
    for (auto kind : {LayerKind::single, LayerKind::double_layer}) {
      const LayerPair layers = assemble_layers(kind, p->ps, c);
      const KernelFactor f(layers.minus, kind);
      const Eigen::MatrixXd& km = layers.minus.entries;
      const Eigen::MatrixXd& kp = layers.plus.entries;
      const Eigen::MatrixXd pp = c.phi_plus, pm = c.phi_minus, pe = c.phi_prime_minus, rp = c.r_plus, rm = c.r_minus;
      const Eigen::MatrixXd m_form = pp * kp + pm * km - pe * (rp * kp + rm * km);
      const Eigen::MatrixXd t = kp * km.inverse();
      const Eigen::MatrixXd a_form = pp * t + pm - pe * (rp * t + rm);
      const auto ms = assemble_system({kind, SystemForm::direct_density}, c, layers);
      const auto as = assemble_system({kind, SystemForm::schur}, c, layers, &f);
      CHECK((ms.matrix - m_form).cwiseAbs().maxCoeff() <= 1e-11 * m_form.cwiseAbs().maxCoeff());
      CHECK((as.matrix - a_form).cwiseAbs().maxCoeff() <= 1e-9 * a_form.cwiseAbs().maxCoeff());
      CHECK(ms.rhs == c.rhs);
    }
  }
  const LayerPair layers = assemble_layers(LayerKind::single, d.ps, d.closure);
  const KernelFactor f(layers.minus, LayerKind::single);
  CHECK((assemble_system({LayerKind::single, SystemForm::schur}, d.closure, layers).matrix -
         assemble_system({LayerKind::single, SystemForm::schur}, d.closure, layers, &f).matrix)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  LayerPair bad = layers;
  bad.plus.entries.conservativeResize(bad.plus.entries.rows() - 1, Eigen::NoChange);
  CHECK_THROWS_AS(assemble_system({LayerKind::single, SystemForm::direct_density}, d.closure, bad), Error);
}

TEST_CASE("constant Dirichlet data is reproduced") {
  for (const auto& [grid, shape] : {std::pair{Grid::box(-1.15, 1.15, 32), LevelSetShape::ellipse(1.0)},
                                    std::pair{Grid::box(-1.15, 1.15, 32), LevelSetShape::diamond(0.9, 0.5)}}) {
    const auto p = dirichlet_problem(grid, shape, [](Vec2, Vec2) { return 1.0; });
    for (const auto& f : all_formulations) {
      CAPTURE(f.tag());
      const LayerPair layers = assemble_layers(f.kernel, p.ps, p.closure);
      const SolveResult r = solve_bae(f, p.closure, layers);
      const Eigen::VectorXd u = evaluate_potential(p.ps.m_plus, r.density, f.kernel, p.ps);
      CHECK((u.array() - 1.0).abs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("recovery, closure satisfaction and formulation equivalence") {
  const auto p = dirichlet_problem(Grid::box(-1.15, 1.15, 32), LevelSetShape::ellipse(1.0),
                                   [](Vec2 x, Vec2) { return harmonic(x); });
  for (auto kind : {LayerKind::single, LayerKind::double_layer}) {
    const LayerPair layers = assemble_layers(kind, p.ps, p.closure);
    const SolveResult m = solve_bae({kind, SystemForm::direct_density}, p.closure, layers);
    const SolveResult a = solve_bae({kind, SystemForm::schur}, p.closure, layers);
    CHECK((a.trace_minus - layers.minus.entries * m.density.values).cwiseAbs().maxCoeff() <= 1e-8);
    for (const auto* r : {&m, &a}) {
      const Eigen::VectorXd rows = p.closure.phi_plus * r->trace_plus + p.closure.phi_minus * r->trace_minus;
      CHECK((rows - p.closure.rhs).cwiseAbs().maxCoeff() <= 1e-9);
      const Eigen::VectorXd tp = layers.plus.entries * layers.minus.entries.partialPivLu().solve(r->trace_minus);
      CHECK((tp - r->trace_plus).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(r->density.support == p.ps.gamma_minus);
    }
    CHECK(m.residual_norm <= 1e-10 * (m.matrix_norm * m.density.values.cwiseAbs().maxCoeff() + p.closure.rhs.cwiseAbs().maxCoeff()));
    const Eigen::VectorXd um = evaluate_potential(p.ps.m_plus, m.density, kind, p.ps);
    const Eigen::VectorXd ua = evaluate_potential(p.ps.m_plus, a.density, kind, p.ps);
    CHECK((um - ua).cwiseAbs().maxCoeff() <= 1e-8);
  }
  // Zero data: zero density and traces.
  const auto z = dirichlet_problem(Grid::box(-1.15, 1.15, 32), LevelSetShape::ellipse(1.0), [](Vec2, Vec2) { return 0.0; });
  const LayerPair layers = assemble_layers(LayerKind::single, z.ps, z.closure);
  const SolveResult r = solve_bae({LayerKind::single, SystemForm::direct_density}, z.closure, layers);
  CHECK(r.density.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.trace_plus.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.trace_minus.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Robin solution satisfies its closure rows") {
  const auto p = robin_problem(Grid::box(-1.15, 1.15, 32), LevelSetShape::ellipse(8.0), [](Vec2 x, Vec2) { return harmonic(x); });
  for (const auto& f : all_formulations) {
    const LayerPair layers = assemble_layers(f.kernel, p.ps, p.closure);
    const SolveResult r = solve_bae(f, p.closure, layers);
    const Eigen::VectorXd eta = -(p.closure.r_plus * r.trace_plus_tilde + p.closure.r_minus * r.trace_minus);
    const Eigen::VectorXd rows = p.closure.phi_plus * r.trace_plus_tilde + p.closure.phi_minus * r.trace_minus +
                                 p.closure.phi_prime_minus * eta;
    CHECK((rows - p.closure.rhs).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + p.closure.rhs.cwiseAbs().maxCoeff()));
    CHECK(r.trace_plus.size() == static_cast<Eigen::Index>(p.ps.gamma_plus.size()));
    CHECK((r.trace_plus - r.trace_plus_tilde.head(r.trace_plus.size())).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("preconditioned forms share their condition number") {
  const auto p = dirichlet_problem(Grid::box(-1.15, 1.15, 128), LevelSetShape::ellipse(2.0), [](Vec2, Vec2) { return 1.0; });
  double cond[2];
  int i = 0;
  for (auto kind : {LayerKind::single, LayerKind::double_layer}) {
    const LayerPair layers = assemble_layers(kind, p.ps, p.closure);
    const KernelFactor f(layers.minus, kind);
    cond[i++] = condition_number(assemble_system({kind, SystemForm::schur}, p.closure, layers, &f).matrix);
  }
  CHECK(std::abs(cond[0] - cond[1]) <= 0.05 * cond[1]);
}

TEST_CASE("double layer on the exterior circle is singular") {
  const auto p = dirichlet_problem(Grid::box(-3.0, 3.0, 32), LevelSetShape::circle_exterior(1.0),
                                   [](Vec2 x, Vec2) { return x.x / (x.x * x.x + x.y * x.y); });
  const LayerPair layers = assemble_layers(LayerKind::double_layer, p.ps, p.closure);
  // D- annihilates constants exactly.
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(layers.minus.entries.cols());
  CHECK((layers.minus.entries * ones).cwiseAbs().maxCoeff() <= 1e-12);
  for (auto form : {SystemForm::direct_density, SystemForm::schur}) {
    try {
      solve_bae({LayerKind::double_layer, form}, p.closure, layers);
      FAIL("expected formulation_singular");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::formulation_singular);
    }
  }
  const LayerPair single = assemble_layers(LayerKind::single, p.ps, p.closure);
  CHECK_NOTHROW(solve_bae({LayerKind::single, SystemForm::schur}, p.closure, single));
}
