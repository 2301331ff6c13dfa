#pragma once

#include <functional>
#include <string>
#include <vector>

#include "degel/admissible.hpp"
#include "degel/linear.hpp"
#include "degel/operators.hpp"

namespace degel {

struct ContinuationSpec {
  double eps0 = 0.5;
  double ratio = 0.5;
  int levels = 8;  // k = 0..levels
};

struct LineSearchSpec {
  double backtrack = 0.5;
  double min_step = 1e-10;
};

struct SolveConfig {
  double tol_residual = 1e-10;
  int max_newton = 60;
  double cone_margin_floor = 1e-10;
  ContinuationSpec continuation;
  LineSearchSpec line_search;
};

struct AdmissibilityError : std::runtime_error {
  std::size_t node;
  AdmissibilityError(std::size_t p, const std::string& msg)
      : std::runtime_error(msg), node(p) {}
};

struct LevelRecord {
  double epsilon = 0.0;
  int iters = 0;
  double residual = 0.0;
  double sup_lap = 0.0;
  double sup_grad = 0.0;
  double C_quad = 0.0;
  double C_mixed = 0.0;
  double C_global = 0.0;
  double C_main = 0.0;
  bool converged = false;
  std::string message;
  std::vector<double> residual_history;
};

struct SolveReport {
  std::vector<LevelRecord> levels;
  bool all_converged() const {
    for (const auto& l : levels)
      if (!l.converged) return false;
    return !levels.empty();
  }
};

/// Per-iterate spectral state of U[u]: eigenvalues, cone margins and the
/// gradient matrices of f at lambda, reused by the Jacobian assembly.
struct OperatorState {
  std::vector<Vec> lambda;
  std::vector<Eigen::MatrixXd> grad_matrix;  // dF/dU_ij (coordinate indices)
  ScalarField residual;                      // f(lambda) - psi - eps (0 on Dirichlet rows)
  double residual_norm = 0.0;                // max over interior nodes
  double min_margin = 0.0;
};

/// r = f(lambda(U[u])) - (psi + eps) on interior nodes.  Throws
/// AdmissibilityError when the cone margin drops below the floor.
ScalarField residual_field(const ProductGrid& grid, const ChristoffelField& chris,
                           const ScalarField& u, const ProblemData& data,
                           const SpectralFunction& f, double eps, double margin_floor);

/// Applies the linearization of the residual at u to the direction v.
ScalarField jacobian_apply(const ProductGrid& grid, const ChristoffelField& chris,
                           const ScalarField& u, const ProblemData& data,
                           const SpectralFunction& f, const ScalarField& v);

struct NewtonResult {
  ScalarField u;
  LevelRecord record;
};

/// Damped Newton with a fraction-to-boundary line search that keeps
/// lambda(U[u]) inside Gamma with margin above the (scaled) floor.
NewtonResult newton_solve(const ProductGrid& grid, const ChristoffelField& chris,
                          const ScalarField& u0, const ProblemData& data,
                          const SpectralFunction& f, const SolveConfig& config,
                          double eps, double margin_scale = 1.0);

struct ContinuationResult {
  SolveReport report;
  std::vector<ScalarField> solutions;
};

/// Solves f(lambda(U[u])) = psi + eps_k for eps_k = eps0 ratio^k, k = 0..levels,
/// warm-starting each level.  The monitor hook (if any) fills the estimate
/// constants of each level record from the solved fields.
ContinuationResult degeneracy_continuation(
    const ProductGrid& grid, const ChristoffelField& chris, const ProblemData& data,
    const SpectralFunction& f, const SolveConfig& config, const ScalarField& u_lower,
    const std::function<void(int level, const ScalarField& u, LevelRecord& rec)>&
        monitor_hook = {});

}  // namespace degel
