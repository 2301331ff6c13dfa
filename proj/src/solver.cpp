#include "degel/solver.hpp"

#include <algorithm>
#include <cmath>

namespace degel {

namespace {

// Evaluates U[u], its g-eigenvalues, cone margins and (optionally) the
// gradient matrices dF/dU needed by the Jacobian.
OperatorState evaluate_state(const ProductGrid& grid, const ChristoffelField& chris,
                             const ScalarField& u, const ProblemData& data,
                             const SpectralFunction& f, double eps, double margin_floor,
                             bool with_gradients, bool throw_on_loss = true) {
  const std::size_t count = grid.node_count();
  const SymTensorField U = assemble_U(grid, chris, u, data);

  OperatorState st;
  st.lambda.resize(count);
  if (with_gradients) st.grad_matrix.resize(count);
  st.residual.assign(count, 0.0);
  st.residual_norm = 0.0;
  st.min_margin = std::numeric_limits<double>::infinity();

  for (std::size_t p = 0; p < count; ++p) {
    if (grid.is_boundary(p)) continue;
    const Eigen::MatrixXd g = grid.metric(p);
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    const Eigen::MatrixXd L = llt.matrixL();
    const Eigen::MatrixXd B = L.triangularView<Eigen::Lower>().solve(
        L.triangularView<Eigen::Lower>().solve(U.matrix(p)).transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    const Vec lam = es.eigenvalues();
    st.lambda[p] = lam;

    const ConeMembership mem = cone_contains(lam, f.cone);
    const double floor_p = margin_floor * (1.0 + lam.cwiseAbs().maxCoeff());
    st.min_margin = std::min(st.min_margin, mem.margin - floor_p);
    if (mem.margin < floor_p) {
      if (throw_on_loss)
        throw AdmissibilityError(p, "admissibility lost at node " + std::to_string(p) +
                                        " (margin " + std::to_string(mem.margin) + ")");
      continue;
    }

    st.residual[p] = eval_f(f, lam, 0.0) - data.psi[p] - eps;
    st.residual_norm = std::max(st.residual_norm, std::abs(st.residual[p]));

    if (with_gradients) {
      const Vec fi = grad_f(f, lam, 0.0);
      const Eigen::MatrixXd P = es.eigenvectors();
      const Eigen::MatrixXd Fbar = P * fi.asDiagonal() * P.transpose();
      // back to coordinate indices: dF/dU = L^{-T} Fbar L^{-1}
      const Eigen::MatrixXd tmp =
          L.triangularView<Eigen::Lower>().transpose().solve(Fbar);
      st.grad_matrix[p] =
          L.triangularView<Eigen::Lower>().transpose().solve(tmp.transpose());
    }
  }
  return st;
}

// Second-order coefficient matrix of the linearized operator at a node:
//   C2 = tr(G_U g) g^{-1} - G_U   acting as  L v = C2 : (d2 v + (eta - Gamma) d v)
Eigen::MatrixXd linearization_C2(const ProductGrid& grid, const OperatorState& st,
                                 std::size_t p) {
  const int n = grid.dim();
  const Eigen::MatrixXd& G = st.grad_matrix[p];
  const Eigen::MatrixXd g = grid.metric(p);
  double c0 = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) c0 += G(a, b) * g(a, b);
  Eigen::VectorXd ginv(n);
  for (int a = 0; a < n; ++a) ginv(a) = 1.0 / grid.metric_diag(p, a);
  return c0 * Eigen::MatrixXd(ginv.asDiagonal()) - G;
}

}  // namespace

ScalarField residual_field(const ProductGrid& grid, const ChristoffelField& chris,
                           const ScalarField& u, const ProblemData& data,
                           const SpectralFunction& f, double eps, double margin_floor) {
  return evaluate_state(grid, chris, u, data, f, eps, margin_floor, false).residual;
}

ScalarField jacobian_apply(const ProductGrid& grid, const ChristoffelField& chris,
                           const ScalarField& u, const ProblemData& data,
                           const SpectralFunction& f, const ScalarField& v) {
  OperatorState st = evaluate_state(grid, chris, u, data, f, 0.0, 0.0, true);
  const SparseMat J = assemble_linear_operator(
      grid, chris, data.eta,
      [&](std::size_t p) { return linearization_C2(grid, st, p); });
  Eigen::Map<const Eigen::VectorXd> vv(v.data(), v.size());
  Eigen::VectorXd out = J * vv;
  // Dirichlet rows carry the identity; the linearization there is zero.
  ScalarField r(out.data(), out.data() + out.size());
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    if (grid.is_boundary(p)) r[p] = 0.0;
  return r;
}

NewtonResult newton_solve(const ProductGrid& grid, const ChristoffelField& chris,
                          const ScalarField& u0, const ProblemData& data,
                          const SpectralFunction& f, const SolveConfig& config,
                          double eps, double margin_scale) {
  const std::size_t count = grid.node_count();
  const double floor = config.cone_margin_floor * margin_scale;

  NewtonResult res;
  res.u = u0;
  for (std::size_t p = 0; p < count; ++p)
    if (grid.is_boundary(p)) res.u[p] = data.phi[p];

  LevelRecord& rec = res.record;
  rec.epsilon = eps;

  OperatorState st =
      evaluate_state(grid, chris, res.u, data, f, eps, floor, true);
  rec.residual_history.push_back(st.residual_norm);

  for (int it = 0; it < config.max_newton; ++it) {
    if (st.residual_norm < config.tol_residual) {
      rec.converged = true;
      break;
    }
    rec.iters = it + 1;

    const SparseMat J = assemble_linear_operator(
        grid, chris, data.eta,
        [&](std::size_t p) { return linearization_C2(grid, st, p); });
    Eigen::VectorXd rhs(count);
    for (std::size_t p = 0; p < count; ++p) rhs(p) = -st.residual[p];
    // inexact Newton: linear tolerance slaved to the outer residual
    const double lin_tol =
        std::max(1e-14, 1e-2 * std::min(1.0, st.residual_norm));
    const Eigen::VectorXd delta = solve_sparse(J, rhs, lin_tol).x;

    double s = 1.0;
    bool accepted = false;
    while (s >= config.line_search.min_step) {
      ScalarField trial(count);
      for (std::size_t p = 0; p < count; ++p) trial[p] = res.u[p] + s * delta(p);
      try {
        OperatorState ts =
            evaluate_state(grid, chris, trial, data, f, eps, floor, true);
        if (ts.residual_norm <= st.residual_norm * (1.0 - 1e-4 * s) + 1e-16) {
          res.u = std::move(trial);
          st = std::move(ts);
          accepted = true;
          break;
        }
      } catch (const AdmissibilityError&) {
        // fraction-to-boundary: step crossed the cone, shrink
      }
      s *= config.line_search.backtrack;
    }
    rec.residual_history.push_back(st.residual_norm);
    if (!accepted) {
      rec.message = "line search stalled below min step at iteration " +
                    std::to_string(it + 1);
      break;
    }
  }
  if (!rec.converged && rec.message.empty() && st.residual_norm >= config.tol_residual)
    rec.message = "newton iteration cap reached";
  if (st.residual_norm < config.tol_residual) rec.converged = true;

  rec.residual = st.residual_norm;
  const ScalarField lap = laplacian(grid, chris, res.u);
  rec.sup_lap = *std::max_element(lap.begin(), lap.end());
  rec.sup_grad = sup_gradient_norm(grid, res.u);
  return res;
}

ContinuationResult degeneracy_continuation(
    const ProductGrid& grid, const ChristoffelField& chris, const ProblemData& data,
    const SpectralFunction& f, const SolveConfig& config, const ScalarField& u_lower,
    const std::function<void(int, const ScalarField&, LevelRecord&)>& monitor_hook) {
  if (!f.finite_boundary_sup())
    throw std::invalid_argument(
        "degeneracy continuation requires a family with finite sup_{dGamma} f");

  ContinuationResult out;
  ScalarField u = u_lower;
  for (int k = 0; k <= config.continuation.levels; ++k) {
    const double eps =
        config.continuation.eps0 * std::pow(config.continuation.ratio, k);
    const double scale = eps / config.continuation.eps0;
    NewtonResult nr = newton_solve(grid, chris, u, data, f, config, eps, scale);
    nr.record.epsilon = eps;
    if (monitor_hook) monitor_hook(k, nr.u, nr.record);
    out.report.levels.push_back(nr.record);
    if (!nr.record.converged) break;
    u = nr.u;
    out.solutions.push_back(std::move(nr.u));
  }
  return out;
}

}  // namespace degel
