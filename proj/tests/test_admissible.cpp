#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "degel/admissible.hpp"
#include "degel/rng.hpp"

using namespace degel;

namespace {

ProblemData make_data(const ProductGrid& grid, double a_scale, double psi_const,
                      const Expression* phi = nullptr) {
  ProblemData data;
  const int n = grid.dim();
  data.A = SymTensorField(n, grid.node_count());
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    for (int a = 0; a < n; ++a)
      data.A.set(p, a, a, a_scale * grid.metric_diag(p, a));
  data.psi.assign(grid.node_count(), psi_const);
  data.phi = phi ? grid.sample(*phi) : ScalarField(grid.node_count(), 0.0);
  return data;
}

}  // namespace

TEST_CASE("supersolution: zero data gives w = 0, linear data is stencil-exact") {
  ProductGrid grid = ProductGrid::slab({7, 7, 8});
  ChristoffelField chris = christoffels(grid);

  ProblemData data = make_data(grid, 0.0, 0.0);
  SupersolutionResult res = solve_supersolution_w(grid, chris, data);
  for (double v : res.w) CHECK(std::abs(v) < 1e-11);

  const Expression phi = Expression::parse("x3", 3);
  ProblemData data2 = make_data(grid, 0.0, 0.0, &phi);
  res = solve_supersolution_w(grid, chris, data2);
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    CHECK(res.w[p] == doctest::Approx(grid.position(p)(2)).epsilon(1e-10).scale(1.0));
}

TEST_CASE("supersolution residual stays below 1e-10 with rough chi and eta") {
  ProductGrid grid = ProductGrid::slab({8, 8, 9});
  grid.set_warp(Expression::parse("0.2*x3*(1-x3)", 3));
  ChristoffelField chris = christoffels(grid);

  ProblemData data;
  data.A = SymTensorField(3, grid.node_count());
  std::vector<double> zeta(grid.node_count() * 3);
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    const Eigen::VectorXd x = grid.position(p);
    data.A.set(p, 0, 0, 0.4 * std::sin(2 * M_PI * x(0)) + 0.5);
    data.A.set(p, 1, 1, 0.3 * std::cos(2 * M_PI * x(1)));
    data.A.set(p, 2, 2, 0.2 * x(2));
    zeta[p * 3 + 0] = 0.1 * std::cos(2 * M_PI * x(1));
    zeta[p * 3 + 2] = 0.05;
  }
  data.eta = EtaTensor::zeta_form(zeta);
  data.psi.assign(grid.node_count(), 0.0);
  data.phi.assign(grid.node_count(), 0.0);

  SupersolutionResult res = solve_supersolution_w(grid, chris, data);
  CHECK(res.relative_residual < 1e-10);
}

TEST_CASE("case I subsolution on the shifted sigma_n problem") {
  // A = g makes the flat slab admissible for sigma_3^{1/3}; with A = 0 the
  // construction is refused (the limit condition fails, matching the theory)
  ProductGrid grid = ProductGrid::slab({7, 7, 8});
  ChristoffelField chris = christoffels(grid);
  const SpectralFunction f = SpectralFunction::sigma_root(3, 3);

  ProblemData data = make_data(grid, 1.0, 0.5);
  CaseIOptions opt;
  opt.delta0 = 0.1;
  const ScalarField base(grid.node_count(), 0.0);
  const SubsolutionRecipe recipe =
      construct_subsolution_caseI(grid, chris, data, f, base, opt);
  CHECK(recipe.check.ok);
  CHECK(recipe.check.min_margin > 0.0);
  CHECK(recipe.check.min_gap >= 0.0);
  CHECK(recipe.A <= recipe.A_pow2);

  // boundary faces keep the base values exactly
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    if (grid.is_boundary(p)) CHECK(recipe.u_lower[p] == base[p]);

  // monotonicity: doubling the accepted coefficient still passes
  ScalarField doubled(grid.node_count());
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    const double xn = grid.position(p)(2);
    doubled[p] = base[p] + 2.0 * recipe.A * (xn * xn - xn);
  }
  CHECK(verify_subsolution(grid, chris, data, f, doubled, opt.delta0).ok);
}

TEST_CASE("case I refusals: A = 0 flat sigma_n, and psi above the cap") {
  ProductGrid grid = ProductGrid::slab({6, 6, 7});
  ChristoffelField chris = christoffels(grid);
  const SpectralFunction f = SpectralFunction::sigma_root(3, 3);
  const ScalarField base(grid.node_count(), 0.0);

  ProblemData flat = make_data(grid, 0.0, 0.5);
  CaseIOptions opt;
  opt.delta0 = 0.1;
  CHECK_THROWS_AS(construct_subsolution_caseI(grid, chris, flat, f, base, opt),
                  SubsolutionRefused);

  ProblemData high = make_data(grid, 1.0, 1e12);
  CHECK_THROWS_AS(construct_subsolution_caseI(grid, chris, high, f, base, opt),
                  SubsolutionRefused);
}

TEST_CASE("a solution is a subsolution with zero margin") {
  ProductGrid grid = ProductGrid::box({6, 6, 6});
  ChristoffelField chris = christoffels(grid);
  const SpectralFunction f = SpectralFunction::sigma_root(3, 3);
  ProblemData data = make_data(grid, 1.0, 0.0);

  ScalarField ustar(grid.node_count());
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    ustar[p] = 0.5 * grid.position(p).squaredNorm();

  // psi := f(lambda(U[u*])) through the same discrete operators
  const SymTensorField U = assemble_U(grid, chris, ustar, data);
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    data.psi[p] = eval_f(f, eigenvalues_wrt_g_node(U.matrix(p), grid.metric(p)));

  const SubsolutionCheck check =
      verify_subsolution(grid, chris, data, f, ustar, 0.0);
  CHECK(check.ok);
  CHECK(check.min_gap == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("case II: gate, boundary value and the pointwise sweep") {
  CHECK(gamma_infinity_contains(2.0 - 1.0, ConeSpec(3, 3)));  // ball in R^2, H = k-1

  CaseIIProblem prob;
  prob.n = 3;
  prob.k = 2;
  prob.wbar = Expression::parse("0", 3);
  prob.psi = Expression::parse("1", 3);
  prob.varrho = Expression::parse("0", 3);
  prob.f = SpectralFunction::sigma_root(3, 3);
  prob.form = EquationForm::U_form;
  prob.delta0 = 0.0;

  // h vanishes on the boundary sphere
  const double h_at_boundary = 0.5 * (1.0 * 1.0 - 1.0);
  CHECK(h_at_boundary == 0.0);

  const std::optional<double> A = find_caseII_A(prob, 2000, 99);
  REQUIRE(A.has_value());
  // the search lands on A = 1: U[Ah] = diag(2A, A, A) so f = A 2^{1/3} >= 1
  CHECK(*A == doctest::Approx(1.0));
  const PointwiseReport rep = verify_subsolution_caseII_pointwise(prob, *A, 10000, 7);
  CHECK(rep.ok());
  CHECK(rep.samples == 10000);

  // the spec's illustrative A = 4 also passes (monotone in A)
  CHECK(verify_subsolution_caseII_pointwise(prob, 4.0, 10000, 7).ok());

  // a warped variant still verifies
  CaseIIProblem warped = prob;
  warped.varrho = Expression::parse("0.1*sin(2*pi*x1)", 3);
  warped.psi = Expression::parse("0.2", 3);
  const std::optional<double> Aw = find_caseII_A(warped, 2000, 5);
  REQUIRE(Aw.has_value());
  CHECK(verify_subsolution_caseII_pointwise(warped, *Aw, 5000, 11).ok());
}

TEST_CASE("appendix-B supersolution check on w") {
  ProductGrid grid = ProductGrid::slab({7, 7, 8});
  ChristoffelField chris = christoffels(grid);
  const SpectralFunction f = SpectralFunction::sigma_root(3, 3);
  const Expression phi = Expression::parse("0.01*sin(2*pi*x1)", 3);
  ProblemData data = make_data(grid, 1.0, 0.3, &phi);

  const ScalarField w = solve_supersolution_w(grid, chris, data).w;
  const SupersolutionCheckReport rep = verify_supersolution(grid, chris, data, f, w);
  // tr_g U[w] = 0, so lambda(U[w]) sits on the boundary of Gamma_1: F is
  // undefined there and no admissible violations can appear
  CHECK(rep.violations == 0);
  CHECK(rep.admissible_nodes + rep.inadmissible_nodes ==
        static_cast<int>(grid.node_count()));
}

TEST_CASE("ordering check localizes violations") {
  ScalarField lower = {0.0, 0.0, 0.0}, u = {0.0, 0.1, 0.2}, upper = {0.3, 0.3, 0.3};
  OrderingReport rep = ordering_check(lower, u, upper);
  CHECK(rep.ok(1e-12));
  CHECK(rep.max_below == doctest::Approx(0.0));

  u[1] = -0.05;
  rep = ordering_check(lower, u, upper);
  CHECK(!rep.ok(1e-6));
  CHECK(rep.argmax_below == 1);
  CHECK(rep.max_below == doctest::Approx(0.05));
}
