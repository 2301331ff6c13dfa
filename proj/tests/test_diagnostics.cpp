#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "degel/diagnostics.hpp"
#include "degel/runner.hpp"

using namespace degel;

namespace {

RunConfig degenerate_config(int m, int levels) {
  RunConfig cfg = parse_config("", {});
  cfg.shape = {m, m, m};
  cfg.a_kind = ATensorKind::scale_g;
  cfg.a_scale = Expression::parse("1", 3);
  cfg.psi = Expression::parse("0", 3);
  cfg.phi = Expression::parse("0.005*sin(2*pi*x1)*sin(2*pi*x2)", 3);
  cfg.f = SpectralFunction::sigma_root(3, 3);
  cfg.solve.continuation.levels = levels;
  return cfg;
}

}  // namespace

TEST_CASE("C_quad equals n for the identity tensor") {
  ProductGrid grid = ProductGrid::slab({6, 6, 7});
  ChristoffelField chris = christoffels(grid);
  const BoundaryPatch patch = boundary_geometry(grid, chris);
  SymTensorField ident(3, grid.node_count());
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    for (int a = 0; a < 3; ++a) ident.set(p, a, a, grid.metric_diag(p, a));
  CHECK(boundary_quadratic_monitor(grid, patch, ident) == doctest::Approx(3.0));
}

TEST_CASE("C_mixed vanishes for u = x3 on the flat slab") {
  ProductGrid grid = ProductGrid::slab({6, 6, 7});
  ChristoffelField chris = christoffels(grid);
  const BoundaryPatch patch = boundary_geometry(grid, chris);
  ScalarField u(grid.node_count());
  for (std::size_t p = 0; p < grid.node_count(); ++p) u[p] = grid.position(p)(2);
  const MixedGlobalMonitors mons = mixed_and_global_monitors(grid, chris, patch, u);
  CHECK(mons.C_mixed == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("calibration on the identity subsolution tensor") {
  ProductGrid grid = ProductGrid::slab({6, 6, 7});
  ChristoffelField chris = christoffels(grid);
  const BoundaryPatch patch = boundary_geometry(grid, chris);

  SymTensorField ident(3, grid.node_count());
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    for (int a = 0; a < 3; ++a) ident.set(p, a, a, 1.0);
  ScalarField psi(grid.node_count(), 0.1);

  const SpectralFunction f = SpectralFunction::sigma_root(3, 3);
  const Calibration cal = calibrate_and_Rc(grid, patch, ident, ident, f, psi);
  // hand-checked doubling/halving landing spots for this data
  CHECK(cal.R0 == doctest::Approx(2.0));
  CHECK(cal.eps0 == doctest::Approx(0.5));
  // off-diagonal terms vanish, so R_c reduces to the diagonal formula
  const double expect_Rc = 2.0 * (1.0 + 1.0 + 1.0 + 1.0) + 2.0 + 2.0 + 0.5;
  for (double v : cal.Rc) CHECK(v == doctest::Approx(expect_Rc));
  CHECK(cal.trace_bound_ok);  // tr_g = 3 < 12.5
  CHECK(cal.min_slack == doctest::Approx(expect_Rc - 3.0));
}

TEST_CASE("degenerate sweep: boundary mechanism and monitor stability") {
  RunConfig cfg = degenerate_config(9, 4);
  const SweepOutcome out = run_sweep(cfg);
  REQUIRE(out.continuation.report.all_converged());
  const Problem& prob = out.problem;

  // sandwich between the computed sub/supersolutions
  const ScalarField& u = out.continuation.solutions.back();
  const OrderingReport ord = ordering_check(out.recipe.u_lower, u, out.w);
  CHECK(ord.ok(1e-6));

  const SymTensorField g_solved = assemble_g(prob.grid, prob.chris, u, prob.data);
  const SymTensorField g_lower =
      assemble_g(prob.grid, prob.chris, out.recipe.u_lower, prob.data);

  // section-2.3 inequality: sum_a g_aa >= sum_a g_lower_aa on the boundary
  for (std::size_t b = 0; b < out.patch.count(); ++b) {
    const std::size_t p = out.patch.nodes[b];
    double s = 0.0, sl = 0.0;
    for (int a = 0; a < 2; ++a) {
      s += g_solved.at(p, a, a) / prob.grid.metric_diag(p, a);
      sl += g_lower.at(p, a, a) / prob.grid.metric_diag(p, a);
    }
    CHECK(s >= sl - 1e-8);
  }

  // calibration against the sweep's own target psi + eps0
  ScalarField psi_target = prob.data.psi;
  for (double& v : psi_target) v += cfg.solve.continuation.eps0;
  const Calibration cal = calibrate_and_Rc(prob.grid, out.patch, g_lower, g_solved,
                                           prob.f, psi_target);
  CHECK(cal.trace_bound_ok);

  // boundary identities (formular3), discretely exact for the slab:
  // tangential derivatives of u - ubar vanish on the faces, and
  // hess(u - ubar)(e_a, e_b) = -grad_nu(u - ubar) II(e_a, e_b)
  ScalarField v(prob.grid.node_count());
  for (std::size_t p = 0; p < prob.grid.node_count(); ++p)
    v[p] = u[p] - out.recipe.u_lower[p];
  const SymTensorField hv = covariant_hessian(prob.grid, prob.chris, v);
  for (std::size_t b = 0; b < out.patch.count(); ++b) {
    const std::size_t p = out.patch.nodes[b];
    const double s2 = out.patch.frame_scale[b] * out.patch.frame_scale[b];
    for (int a = 0; a < 2; ++a)
      CHECK(std::abs(out.patch.frame_scale[b] * prob.grid.d1(v, a, p)) < 1e-12);
    const double dnu = out.patch.nu_sign[b] * prob.grid.d1(v, 2, p);
    CHECK(dnu >= -1e-10);  // u dominates the subsolution, nu is inner
    for (int a = 0; a < 2; ++a) {
      for (int c = a; c < 2; ++c) {
        const double lhs = s2 * hv.at(p, a, c);
        const double rhs = -dnu * out.patch.second_fundamental.at(b, a, c);
        CHECK(lhs == doctest::Approx(rhs).scale(1.0).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("barrier: face values, search, and the parameter guard") {
  RunConfig cfg = degenerate_config(9, 2);
  const SweepOutcome out = run_sweep(cfg);
  REQUIRE(out.continuation.report.all_converged());
  const Problem& prob = out.problem;
  const ScalarField& u = out.continuation.solutions.back();

  std::vector<int> c = {4, 4, 0};
  const std::size_t x0 = prob.grid.index(c);
  const ScalarField rho = geodesic_distance(prob.grid, x0);
  const ScalarField sigma = boundary_distance(prob.grid);
  const double delta = 5.0 * prob.grid.spacing(2);

  const BarrierParams params = search_barrier_constants(
      prob.grid, u, out.recipe.u_lower, prob.data.phi, rho, sigma, delta);
  CHECK(params.A1 > params.A2);
  CHECK(params.A2 > params.A3);
  CHECK(params.A3 > 1.0);
  CHECK(params.N * params.delta - params.t <= 0.0);

  for (int alpha = 0; alpha < 2; ++alpha)
    for (int sign : {+1, -1}) {
      const BarrierReport rep = barrier_check(prob.grid, u, out.recipe.u_lower,
                                              prob.data.phi, rho, sigma, params,
                                              alpha, sign);
      CHECK(rep.max_overall <= 1e-8);
      // on the boundary face the positive terms vanish identically
      CHECK(rep.max_on_face <= 1e-12);
      CHECK(rep.collar_nodes > 0);
    }

  BarrierParams bad = params;
  bad.t = 0.5 * bad.N * bad.delta;
  CHECK_THROWS_AS(barrier_check(prob.grid, u, out.recipe.u_lower, prob.data.phi, rho,
                                sigma, bad, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("monitors are stable under refinement on the manufactured problem") {
  RunConfig cfg = parse_config("", {});
  cfg.a_kind = ATensorKind::scale_g;
  cfg.a_scale = Expression::parse("1", 3);
  cfg.f = SpectralFunction::sigma_root(3, 3);
  cfg.u_star = Expression::parse(
      "(x1^2 + x2^2 + x3^2)/2 + 0.1*sin(2*pi*x1)*sin(2*pi*x2)*x3*(1-x3)", 3);

  auto monitors_at = [&](int m) {
    const SingleSolveOutcome out = run_single_solve(
        cfg, std::vector<int>{m, m, m}, Topology::box, cfg.u_star);
    REQUIRE(out.newton.record.converged);
    return std::pair<double, double>(out.newton.record.C_quad,
                                     out.newton.record.C_mixed);
  };
  const auto [q9, m9] = monitors_at(9);
  const auto [q17, m17] = monitors_at(17);
  CHECK(q9 > 0.0);
  CHECK(std::abs(q17 - q9) <= 0.2 * std::abs(q9));
  CHECK(std::abs(m17 - m9) <= 0.2 * std::max(std::abs(m9), 0.05));
}
