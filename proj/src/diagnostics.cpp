#include "degel/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace degel {

namespace {

double trace_g(const ProductGrid& grid, const SymTensorField& T, std::size_t p) {
  double tr = 0.0;
  for (int a = 0; a < grid.dim(); ++a) tr += T.at(p, a, a) / grid.metric_diag(p, a);
  return tr;
}

// frame components at a boundary node: tangential block and mixed column
void frame_components(const ProductGrid& grid, const BoundaryPatch& patch, std::size_t b,
                      const SymTensorField& T, Eigen::MatrixXd& tangential,
                      Eigen::VectorXd& mixed) {
  const int n = grid.dim();
  const std::size_t p = patch.nodes[b];
  const double s = patch.frame_scale[b];
  const double sgn = patch.nu_sign[b];
  tangential.resize(n - 1, n - 1);
  mixed.resize(n - 1);
  for (int a = 0; a + 1 < n; ++a) {
    for (int c = a; c + 1 < n; ++c) {
      tangential(a, c) = tangential(c, a) = s * s * T.at(p, a, c);
    }
    mixed(a) = s * sgn * T.at(p, a, n - 1);
  }
}

}  // namespace

double boundary_quadratic_monitor(const ProductGrid& grid, const BoundaryPatch& patch,
                                  const SymTensorField& gfield) {
  double worst = 0.0;
  Eigen::MatrixXd tang;
  Eigen::VectorXd mixed;
  for (std::size_t b = 0; b < patch.count(); ++b) {
    frame_components(grid, patch, b, gfield, tang, mixed);
    const double tr = trace_g(grid, gfield, patch.nodes[b]);
    worst = std::max(worst, tr / (1.0 + mixed.squaredNorm()));
  }
  return worst;
}

MixedGlobalMonitors mixed_and_global_monitors(const ProductGrid& grid,
                                              const ChristoffelField& chris,
                                              const BoundaryPatch& patch,
                                              const ScalarField& u) {
  const int n = grid.dim();
  MixedGlobalMonitors mons;
  const SymTensorField hess = covariant_hessian(grid, chris, u);
  const ScalarField lap = laplacian(grid, chris, u);
  const double supgrad = sup_gradient_norm(grid, u);

  double mixed_max = 0.0;
  double lap_bdry_max = -std::numeric_limits<double>::infinity();
  double lap_bdry_abs = 0.0;
  for (std::size_t b = 0; b < patch.count(); ++b) {
    const std::size_t p = patch.nodes[b];
    const double s = patch.frame_scale[b];
    double norm2 = 0.0;
    for (int a = 0; a + 1 < n; ++a) {
      const double v = s * patch.nu_sign[b] * hess.at(p, a, n - 1);
      norm2 += v * v;
    }
    mixed_max = std::max(mixed_max, std::sqrt(norm2));
    lap_bdry_max = std::max(lap_bdry_max, lap[p]);
    lap_bdry_abs = std::max(lap_bdry_abs, std::abs(lap[p]));
  }
  const double lap_sup = *std::max_element(lap.begin(), lap.end());

  mons.C_mixed = mixed_max / (1.0 + supgrad);
  mons.C_global = lap_sup / (1.0 + supgrad * supgrad + lap_bdry_abs);
  mons.C_main = lap_bdry_max / (1.0 + supgrad * supgrad);
  return mons;
}

Calibration calibrate_and_Rc(const ProductGrid& grid, const BoundaryPatch& patch,
                             const SymTensorField& g_lower, const SymTensorField& g_solved,
                             const SpectralFunction& f, const ScalarField& psi_target) {
  const int n = grid.dim();
  const std::size_t bn = patch.count();

  // per-node data of the subsolution tensor in the boundary frame
  std::vector<Eigen::VectorXd> lam_lower(bn);
  std::vector<double> tang_trace_lower(bn);
  std::vector<Eigen::MatrixXd> tang_lower(bn);
  Eigen::MatrixXd tangential;
  Eigen::VectorXd mixed;
  for (std::size_t b = 0; b < bn; ++b) {
    frame_components(grid, patch, b, g_lower, tangential, mixed);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tangential);
    lam_lower[b] = es.eigenvalues();
    tang_trace_lower[b] = tangential.trace();
    tang_lower[b] = tangential;
  }

  auto valid = [&](double R0, double eps0) {
    Vec probe(n);
    for (std::size_t b = 0; b < bn; ++b) {
      for (int a = 0; a + 1 < n; ++a) probe(a) = R0 - lam_lower[b](a) - eps0;
      probe(n - 1) = tang_trace_lower[b] - eps0;
      if (!cone_contains(probe, f.cone).inside) return false;
      if (eval_f(f, probe) < psi_target[patch.nodes[b]]) return false;
    }
    return true;
  };

  Calibration cal;
  bool found = false;
  for (double R0 = 1.0; R0 <= std::ldexp(1.0, 40); R0 *= 2.0) {
    if (valid(R0, 0.0)) {
      cal.R0 = R0;
      found = true;
      break;
    }
  }
  if (!found) throw CalibrationError("calibration failed: no R0 within cap (subsolution too weak)");
  found = false;
  for (double e = 1.0; e >= std::ldexp(1.0, -40); e *= 0.5) {
    if (valid(cal.R0, e)) {
      cal.eps0 = e;
      found = true;
      break;
    }
  }
  if (!found) throw CalibrationError("calibration failed: no eps0 within cap");

  // R_c from the solved tensor, in the frame diagonalizing its tangential block
  cal.Rc.assign(bn, 0.0);
  cal.min_slack = std::numeric_limits<double>::infinity();
  cal.trace_bound_ok = true;
  for (std::size_t b = 0; b < bn; ++b) {
    frame_components(grid, patch, b, g_solved, tangential, mixed);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tangential);
    const Eigen::VectorXd lam_solved = es.eigenvalues();
    const Eigen::VectorXd mixed_rot = es.eigenvectors().transpose() * mixed;
    const Eigen::MatrixXd lower_rot =
        es.eigenvectors().transpose() * tang_lower[b] * es.eigenvectors();

    double quad = 0.0, diag = 0.0, lower_abs = 0.0;
    for (int a = 0; a + 1 < n; ++a) {
      quad += mixed_rot(a) * mixed_rot(a);
      diag += std::abs(lam_solved(a)) + std::abs(lower_rot(a, a));
      lower_abs += std::abs(lam_lower[b](a));
    }
    const double Rc = 2.0 * (n - 1.0) * (2.0 * n - 3.0) / cal.eps0 * quad +
                      (n - 1.0) * diag + lower_abs + cal.R0 + cal.eps0;
    cal.Rc[b] = Rc;
    const double slack = Rc - trace_g(grid, g_solved, patch.nodes[b]);
    cal.min_slack = std::min(cal.min_slack, slack);
    if (slack <= 0.0) cal.trace_bound_ok = false;
  }
  return cal;
}

BarrierReport barrier_check(const ProductGrid& grid, const ScalarField& u,
                            const ScalarField& u_lower, const ScalarField& phi_ext,
                            const ScalarField& rho, const ScalarField& sigma,
                            const BarrierParams& params, int alpha, int sign) {
  const int n = grid.dim();
  if (params.N * params.delta - params.t > 0.0)
    throw std::invalid_argument("barrier: N delta - t <= 0 violated");
  BarrierReport rep;
  rep.params = params;
  rep.tangential_direction = alpha;
  rep.tangential_sign = sign;

  ScalarField diff(u.size());
  for (std::size_t p = 0; p < u.size(); ++p) diff[p] = u[p] - phi_ext[p];

  const double sb = std::sqrt(params.b1);
  for (std::size_t p = 0; p < u.size(); ++p) {
    if (!(rho[p] < params.delta)) continue;
    ++rep.collar_nodes;
    double tangsq = 0.0;
    for (int tau = 0; tau + 1 < n; ++tau) {
      const double d = grid.d1(diff, tau, p);
      tangsq += d * d;
    }
    const double value = params.A1 * sb * (u_lower[p] - u[p]) -
                         params.A2 * sb * rho[p] * rho[p] +
                         params.A3 * sb *
                             (params.N * sigma[p] * sigma[p] - params.t * sigma[p]) +
                         tangsq / sb + sign * grid.d1(diff, alpha, p);
    rep.max_overall = std::max(rep.max_overall, value);
    if (grid.is_boundary(p))
      rep.max_on_face = std::max(rep.max_on_face, value);
    else
      rep.max_interior = std::max(rep.max_interior, value);
  }
  return rep;
}

BarrierParams search_barrier_constants(const ProductGrid& grid, const ScalarField& u,
                                       const ScalarField& u_lower,
                                       const ScalarField& phi_ext, const ScalarField& rho,
                                       const ScalarField& sigma, double delta,
                                       double tol) {
  const int n = grid.dim();
  ScalarField diff(u.size());
  for (std::size_t p = 0; p < u.size(); ++p) diff[p] = u[p] - phi_ext[p];
  double b1 = 1.0;
  for (std::size_t p = 0; p < u.size(); ++p) {
    const double g = gradient_norm(grid, diff, p);
    b1 = std::max(b1, 1.0 + g * g);
  }

  for (int j = 0; j <= 30; ++j) {
    BarrierParams params;
    params.A3 = 2.0;
    params.N = std::ldexp(1.0, j);
    params.t = params.N * delta;
    params.A2 = 4.0 * std::ldexp(1.0, j);
    params.A1 = 8.0 * params.A2;
    params.delta = delta;
    params.b1 = b1;

    double worst = -std::numeric_limits<double>::infinity();
    for (int alpha = 0; alpha + 1 < n; ++alpha)
      for (int sign : {+1, -1}) {
        const BarrierReport rep =
            barrier_check(grid, u, u_lower, phi_ext, rho, sigma, params, alpha, sign);
        worst = std::max(worst, rep.max_overall);
      }
    if (worst <= tol) return params;
  }
  throw std::runtime_error("barrier constant search exceeded the doubling cap");
}

}  // namespace degel
