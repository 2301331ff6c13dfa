#pragma once

#include "degel/geometry.hpp"
#include "degel/operators.hpp"

namespace degel {

/// C_quad = max over boundary nodes of tr_g(g[u]) / (1 + sum_a |g[u](e_a,nu)|^2).
double boundary_quadratic_monitor(const ProductGrid& grid, const BoundaryPatch& patch,
                                  const SymTensorField& gfield);

struct MixedGlobalMonitors {
  double C_mixed = 0.0;   // sup_b max_{|X|=1} |hess u(X,nu)| / (1 + sup|grad u|)
  double C_global = 0.0;  // sup_M Lap u / (1 + sup|grad u|^2 + sup_dM |Lap u|)
  double C_main = 0.0;    // sup_dM Lap u / (1 + sup|grad u|^2)
};

MixedGlobalMonitors mixed_and_global_monitors(const ProductGrid& grid,
                                              const ChristoffelField& chris,
                                              const BoundaryPatch& patch,
                                              const ScalarField& u);

struct Calibration {
  double eps0 = 0.0;
  double R0 = 0.0;
  ScalarField Rc;  // per boundary-patch node
  bool trace_bound_ok = false;  // tr_g(g[u]) < Rc at every boundary node
  double min_slack = 0.0;       // min (Rc - tr_g g)
};

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Searches (R0, eps0) so that
///   f(R0 - lam'_1 - eps0, ..., R0 - lam'_{n-1} - eps0, sum_a g_lower(e_a,e_a) - eps0) >= psi_target
/// holds with cone membership at every boundary node, then evaluates R_c from
/// the solved tensor and asserts tr_g(g[u]) < R_c.
Calibration calibrate_and_Rc(const ProductGrid& grid, const BoundaryPatch& patch,
                             const SymTensorField& g_lower, const SymTensorField& g_solved,
                             const SpectralFunction& f, const ScalarField& psi_target);

struct BarrierParams {
  double A1 = 0.0, A2 = 0.0, A3 = 0.0;
  double N = 0.0, t = 0.0, delta = 0.0;
  double b1 = 0.0;
};

struct BarrierReport {
  BarrierParams params;
  double max_interior = -std::numeric_limits<double>::infinity();
  double max_on_face = -std::numeric_limits<double>::infinity();
  double max_overall = -std::numeric_limits<double>::infinity();
  int collar_nodes = 0;
  int tangential_direction = 0;  // alpha of T = +-d/dx_alpha
  int tangential_sign = +1;
};

/// Evaluates Psi~ = A1 sqrt(b1)(ubar - u) - A2 sqrt(b1) rho^2
///                + A3 sqrt(b1)(N sigma^2 - t sigma)
///                + (1/sqrt(b1)) sum_{tau<n} |d_tau(u - phi)|^2 + T(u - phi)
/// over the collar {rho < delta} for one choice of T.
BarrierReport barrier_check(const ProductGrid& grid, const ScalarField& u,
                            const ScalarField& u_lower, const ScalarField& phi_ext,
                            const ScalarField& rho, const ScalarField& sigma,
                            const BarrierParams& params, int alpha, int sign);

/// Doubles (N, A2) jointly with A1 = 8 A2, A3 = 2, t = N delta until
/// max Psi~ <= tol for every tangential direction; throws past the cap.
BarrierParams search_barrier_constants(const ProductGrid& grid, const ScalarField& u,
                                       const ScalarField& u_lower,
                                       const ScalarField& phi_ext, const ScalarField& rho,
                                       const ScalarField& sigma, double delta,
                                       double tol = 1e-8);

}  // namespace degel
