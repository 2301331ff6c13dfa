#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "degel/operators.hpp"
#include "degel/rng.hpp"

using namespace degel;

namespace {

ScalarField random_smooth_field(const ProductGrid& grid, std::mt19937_64& rng) {
  // random low-frequency trig mix, periodic on the torus axes
  const double a1 = normal01(rng), a2 = normal01(rng), a3 = normal01(rng);
  const double b1 = normal01(rng), b2 = normal01(rng);
  ScalarField u(grid.node_count());
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    const Eigen::VectorXd x = grid.position(p);
    u[p] = 0.3 * a1 * std::sin(2 * M_PI * x(0)) * std::cos(2 * M_PI * x(1)) +
           0.2 * a2 * std::cos(2 * M_PI * x(0)) * x(2) * (1 - x(2)) +
           0.5 * a3 * x(2) * x(2) + 0.4 * b1 * x(2) +
           0.1 * b2 * std::sin(2 * M_PI * x(1));
  }
  return u;
}

ProblemData zero_data(const ProductGrid& grid) {
  ProblemData data;
  data.A = SymTensorField(grid.dim(), grid.node_count());
  data.psi.assign(grid.node_count(), 0.0);
  data.phi.assign(grid.node_count(), 0.0);
  return data;
}

}  // namespace

TEST_CASE("flat quadratic: g-tensor is the identity, U = (n-1) identity") {
  ProductGrid grid = ProductGrid::box({6, 6, 6});
  ChristoffelField chris = christoffels(grid);
  ProblemData data = zero_data(grid);
  ScalarField u(grid.node_count());
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    u[p] = 0.5 * grid.position(p).squaredNorm();

  const SymTensorField gf = assemble_g(grid, chris, u, data);
  const SymTensorField U = assemble_U(grid, chris, u, data);
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        CHECK(gf.at(p, i, j) ==
              doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-11));
        CHECK(U.at(p, i, j) ==
              doctest::Approx(i == j ? 2.0 : 0.0).scale(1.0).epsilon(1e-11));
      }
    const Vec lam = eigenvalues_wrt_g_node(U.matrix(p), grid.metric(p));
    CHECK(lam.minCoeff() == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(lam.maxCoeff() == doctest::Approx(2.0).epsilon(1e-10));
  }
}

TEST_CASE("zeta-form W(du) for u = x1 is 2 e1 (x) e1") {
  ProductGrid grid = ProductGrid::box({6, 6, 6});
  ChristoffelField chris = christoffels(grid);
  ProblemData data = zero_data(grid);
  ScalarField u(grid.node_count());
  std::vector<double> zeta(grid.node_count() * 3, 0.0);
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    u[p] = grid.position(p)(0);
    zeta[p * 3 + 0] = 1.0;  // zeta = du = dx1
  }
  data.eta = EtaTensor::zeta_form(zeta);
  const SymTensorField gf = assemble_g(grid, chris, u, data);
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    CHECK(gf.at(p, 0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(gf.at(p, 0, 1) == doctest::Approx(0.0).scale(1.0));
    CHECK(gf.at(p, 1, 1) == doctest::Approx(0.0).scale(1.0));
    CHECK(gf.at(p, 2, 2) == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("assembly matches a straight-line reimplementation") {
  std::mt19937_64 rng(21);
  ProductGrid grid = ProductGrid::slab({7, 7, 8});
  grid.set_warp(Expression::parse("0.2*x3*(1-x3)", 3));
  ChristoffelField chris = christoffels(grid);

  ProblemData data = zero_data(grid);
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    const Eigen::VectorXd x = grid.position(p);
    data.A.set(p, 0, 0, 0.3 * std::sin(2 * M_PI * x(0)));
    data.A.set(p, 1, 1, 0.2 * x(2));
    data.A.set(p, 2, 2, 0.1);
  }
  std::vector<double> zeta(grid.node_count() * 3);
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    zeta[p * 3 + 0] = 0.1;
    zeta[p * 3 + 1] = 0.05;
    zeta[p * 3 + 2] = -0.07;
  }
  data.eta = EtaTensor::zeta_form(zeta);
  const ScalarField u = random_smooth_field(grid, rng);

  const SymTensorField gf = assemble_g(grid, chris, u, data);

  // independent nodewise reimplementation
  for (std::size_t p = 0; p < grid.node_count(); p += 3) {
    const int n = 3;
    Eigen::Matrix3d gmat = grid.metric(p);
    double trA = 0.0;
    for (int a = 0; a < n; ++a) trA += data.A.at(p, a, a) / gmat(a, a);
    Eigen::Matrix3d chi = (trA / (n - 1)) * gmat - data.A.matrix(p);
    Eigen::Vector3d du;
    for (int a = 0; a < n; ++a) du(a) = grid.d1(u, a, p);
    Eigen::Matrix3d hess;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = i == j ? grid.d2(u, i, p) : grid.dmixed(u, i, j, p);
        for (int l = 0; l < n; ++l) v -= chris.gamma(p, l, i, j) * du(l);
        hess(i, j) = v;
      }
    Eigen::Vector3d zv(0.1, 0.05, -0.07);
    Eigen::Matrix3d W = du * zv.transpose() + zv * du.transpose();
    Eigen::Matrix3d expect = chi + hess + W;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        CHECK(gf.at(p, i, j) ==
              doctest::Approx(expect(i, j)).epsilon(1e-12).scale(1.0));
  }

  // tr_g U = (n-1) tr_g g and the mu-transform of the spectra
  const SymTensorField U = assemble_U(grid, chris, u, data);
  for (std::size_t p = 0; p < grid.node_count(); p += 3) {
    double trU = 0.0, trg = 0.0;
    for (int a = 0; a < 3; ++a) {
      trU += U.at(p, a, a) / grid.metric_diag(p, a);
      trg += gf.at(p, a, a) / grid.metric_diag(p, a);
    }
    CHECK(trU == doctest::Approx(2.0 * trg).epsilon(1e-10).scale(1.0 + std::abs(trg)));

    const Vec lamU = eigenvalues_wrt_g_node(U.matrix(p), grid.metric(p));
    Vec mu = mu_from_lambda(eigenvalues_wrt_g_node(gf.matrix(p), grid.metric(p)));
    std::sort(mu.data(), mu.data() + mu.size());
    CHECK((lamU - mu).cwiseAbs().maxCoeff() < 1e-8 * (1.0 + mu.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("generalized eigenvalues: pinned cases and the cubic-root oracle") {
  Eigen::Matrix3d I3 = Eigen::Matrix3d::Identity();
  Eigen::Vector3d d(1.0, 2.0, 3.0);
  Vec lam = eigenvalues_wrt_g_node(d.asDiagonal(), I3);
  CHECK(lam(0) == doctest::Approx(1.0));
  CHECK(lam(1) == doctest::Approx(2.0));
  CHECK(lam(2) == doctest::Approx(3.0));

  lam = eigenvalues_wrt_g_node(I3, 2.0 * I3);
  for (int i = 0; i < 3; ++i) CHECK(lam(i) == doctest::Approx(0.5));

  // random pairs against roots of det(T - lambda g) via the companion matrix
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Matrix3d R;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) R(i, j) = normal01(rng);
    Eigen::Matrix3d T = 0.5 * (R + R.transpose());
    Eigen::Vector3d gd(0.5 + uniform01(rng), 0.5 + uniform01(rng), 1.0);
    Eigen::Matrix3d g = gd.asDiagonal();

    // cubic coefficients by Vandermonde fit of det(T - s g) at s = 0,1,2,3
    Eigen::Matrix4d V;
    Eigen::Vector4d rhs;
    for (int s = 0; s < 4; ++s) {
      rhs(s) = (T - static_cast<double>(s) * g).determinant();
      for (int j = 0; j < 4; ++j) V(s, j) = std::pow(static_cast<double>(s), j);
    }
    const Eigen::Vector4d c = V.fullPivLu().solve(rhs);
    Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    companion(0, 2) = -c(0) / c(3);
    companion(1, 2) = -c(1) / c(3);
    companion(2, 2) = -c(2) / c(3);
    Eigen::EigenSolver<Eigen::Matrix3d> es(companion);
    Vec roots = es.eigenvalues().real();
    std::sort(roots.data(), roots.data() + 3);

    lam = eigenvalues_wrt_g_node(T, g);
    CHECK((lam - roots).cwiseAbs().maxCoeff() <
          1e-9 * (1.0 + roots.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("eta hypothesis in the boundary frame") {
  ProductGrid grid = ProductGrid::slab({6, 6, 7});
  grid.set_warp(Expression::parse("0.1*x3*(1-x3)", 3));
  ChristoffelField chris = christoffels(grid);
  const BoundaryPatch patch = boundary_geometry(grid, chris);

  ProblemData data = zero_data(grid);
  CHECK(check_eta_hypothesis(data, grid, patch).max_abs == 0.0);

  std::vector<double> zeta(grid.node_count() * 3);
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    const Eigen::VectorXd x = grid.position(p);
    zeta[p * 3 + 0] = std::sin(2 * M_PI * x(0));
    zeta[p * 3 + 1] = 0.3;
    zeta[p * 3 + 2] = x(2);
  }
  data.eta = EtaTensor::zeta_form(zeta);
  CHECK(check_eta_hypothesis(data, grid, patch).max_abs < 1e-12);

  // violating constant tensor eta^1_{22} = 1 as a negative control
  const EtaHypothesisReport bad = check_eta_hypothesis(
      [](std::size_t, int k, int i, int j) {
        return (k == 0 && i == 1 && j == 1) ? 1.0 : 0.0;
      },
      grid, patch);
  CHECK(bad.max_abs > 0.5);
}

TEST_CASE("admissibility propagates through the cone transform") {
  std::mt19937_64 rng(41);
  ProductGrid grid = ProductGrid::slab({6, 6, 7});
  ChristoffelField chris = christoffels(grid);
  ProblemData data = zero_data(grid);
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    for (int a = 0; a < 3; ++a) data.A.set(p, a, a, 2.0);

  const ConeSpec gamma(3, 3);
  for (int trial = 0; trial < 5; ++trial) {
    ScalarField u = random_smooth_field(grid, rng);
    const SymTensorField gf = assemble_g(grid, chris, u, data);
    const SymTensorField U = assemble_U(grid, chris, u, data);
    for (std::size_t p = 0; p < grid.node_count(); p += 11) {
      const Vec lam_g = eigenvalues_wrt_g_node(gf.matrix(p), grid.metric(p));
      const Vec lam_U = eigenvalues_wrt_g_node(U.matrix(p), grid.metric(p));
      const bool in_tilde = cone_contains(mu_from_lambda(lam_g), gamma).inside;
      const bool in_gamma = cone_contains(lam_U, gamma).inside;
      if (in_tilde) CHECK(in_gamma);
    }
  }
}
