#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "degel/arrowhead.hpp"
#include "degel/config.hpp"
#include "degel/diagnostics.hpp"
#include "degel/solver.hpp"

namespace degel {

/// Data-dependent failure (non-convergence, infeasible psi, ...): exit code 1.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Problem {
  ProductGrid grid;
  ChristoffelField chris;
  ProblemData data;
  SpectralFunction f;
  double delta0 = 0.0;
};

/// Builds grid + fields from the config; `shape` overrides the configured grid
/// (used by the convergence study) and `force_box` selects the all-bounded
/// topology.  When `mms_u_star` is set, psi is manufactured analytically from
/// it and phi is replaced by its trace.
Problem build_problem(const RunConfig& cfg, std::optional<std::vector<int>> shape = {},
                      std::optional<Topology> topology = {},
                      const std::optional<Expression>& mms_u_star = {});

struct SweepOutcome {
  Problem problem;
  SubsolutionRecipe recipe;
  ScalarField w;
  ContinuationResult continuation;
  BoundaryPatch patch;
};

/// Full continuation pipeline: case-I subsolution, supersolution, eps sweep
/// with per-level estimate monitors.
SweepOutcome run_sweep(const RunConfig& cfg);

struct SingleSolveOutcome {
  Problem problem;
  SubsolutionRecipe recipe;
  ScalarField w;
  NewtonResult newton;
  BoundaryPatch patch;
};

/// One solve of f(lambda(U[u])) = psi (no lift; requires inf psi > sup_dG f).
SingleSolveOutcome run_single_solve(const RunConfig& cfg,
                                    std::optional<std::vector<int>> shape = {},
                                    std::optional<Topology> topology = {},
                                    const std::optional<Expression>& mms_u_star = {});

struct ConvergenceRow {
  int nodes_per_axis = 0;
  double h = 0.0;
  double err_inf = 0.0;
  double ratio = 0.0;  // error of the previous grid over this one
  double seconds = 0.0;
};

std::vector<ConvergenceRow> run_convergence(const RunConfig& cfg);

struct LemmaRow {
  int n;
  double epsilon, a, max_cluster_gap, tail_gap;
  bool ok;
};

std::vector<LemmaRow> run_verify_lemma(const RunConfig& cfg);

struct DiagnoseOutcome {
  SingleSolveOutcome solve;
  MixedGlobalMonitors monitors;
  double C_quad = 0.0;
  Calibration calibration;
  BarrierParams barrier;
  double barrier_max = 0.0;
};

DiagnoseOutcome run_diagnose(const RunConfig& cfg);

/// CLI entry: executes a subcommand and writes its CSV artifacts.  Returns the
/// process exit code (0 ok, 1 numerical failure; ConfigError is raised before).
int run_command(const std::string& command, const RunConfig& cfg, std::ostream& log);

}  // namespace degel
