#include "degel/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include "degel/csv.hpp"
#include "degel/rng.hpp"

namespace degel {

namespace {

// Analytic slab-metric data at a point: metric diagonal and Christoffels from
// the warp expression (AD derivatives), used for manufactured right-hand sides.
struct AnalyticMetric {
  int n;
  Eigen::VectorXd gdiag;
  Eigen::VectorXd dphi;
  double ephi;

  AnalyticMetric(const Expression& warp, const Eigen::VectorXd& x)
      : n(static_cast<int>(x.size())) {
    const Taylor2 t = warp.eval2(x);
    ephi = std::exp(t.v);
    dphi = t.g;
    gdiag = Eigen::VectorXd::Ones(n);
    for (int a = 0; a + 1 < n; ++a) gdiag(a) = ephi;
  }

  double gamma(int k, int i, int j) const {
    const int nn = n - 1;
    const bool iw = i < nn, jw = j < nn, kw = k < nn;
    if (iw && jw && kw) {
      double r = 0.0;
      if (j == k) r += dphi(i);
      if (i == k) r += dphi(j);
      if (i == j) r -= dphi(k);
      return 0.5 * r;
    }
    if (iw && jw && !kw) return i == j ? -0.5 * ephi * dphi(nn) : 0.0;
    if (iw && !jw && kw) return i == k ? 0.5 * dphi(nn) : 0.0;
    if (!iw && jw && kw) return j == k ? 0.5 * dphi(nn) : 0.0;
    return 0.0;
  }
};

Eigen::MatrixXd analytic_A(const RunConfig& cfg, const Eigen::VectorXd& x,
                           const AnalyticMetric& gm) {
  const int n = gm.n;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  if (cfg.a_kind == ATensorKind::scale_g) {
    const double c = cfg.a_scale.eval(x);
    for (int a = 0; a < n; ++a) A(a, a) = c * gm.gdiag(a);
  } else if (cfg.a_kind == ATensorKind::diag) {
    for (int a = 0; a < n; ++a) A(a, a) = cfg.a_diag[a].eval(x);
  }
  return A;
}

// U[u*](x) from exact derivatives of the manufactured solution.
Eigen::MatrixXd analytic_U(const RunConfig& cfg, const Expression& u_star,
                           const Eigen::VectorXd& x, const AnalyticMetric& gm) {
  const int n = gm.n;
  const Taylor2 tu = u_star.eval2(x);

  Eigen::MatrixXd cov(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = tu.h(i, j);
      for (int l = 0; l < n; ++l) v -= gm.gamma(l, i, j) * tu.g(l);
      cov(i, j) = v;
    }
  cov = 0.5 * (cov + cov.transpose()).eval();

  double lap = 0.0;
  for (int a = 0; a < n; ++a) lap += cov(a, a) / gm.gdiag(a);

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  if (cfg.eta_kind == EtaKind::zeta) {
    Eigen::VectorXd zeta(n);
    for (int a = 0; a < n; ++a) zeta(a) = cfg.eta_zeta[a].eval(x);
    W = tu.g * zeta.transpose() + zeta * tu.g.transpose();
  }
  double trW = 0.0;
  for (int a = 0; a < n; ++a) trW += W(a, a) / gm.gdiag(a);

  Eigen::MatrixXd U = analytic_A(cfg, x, gm);
  for (int a = 0; a < n; ++a) U(a, a) += lap * gm.gdiag(a);
  U -= cov;
  for (int a = 0; a < n; ++a) U(a, a) += trW * gm.gdiag(a);
  U -= W;
  return U;
}

}  // namespace

Problem build_problem(const RunConfig& cfg, std::optional<std::vector<int>> shape,
                      std::optional<Topology> topology,
                      const std::optional<Expression>& mms_u_star) {
  Problem prob;
  const int n = cfg.dimension;
  const std::vector<int>& sh = shape ? *shape : cfg.shape;
  const Topology topo = topology ? *topology : cfg.topology;
  prob.grid = topo == Topology::slab ? ProductGrid::slab(sh) : ProductGrid::box(sh);
  prob.grid.set_warp(cfg.warp);
  prob.chris = christoffels(prob.grid);
  prob.f = cfg.f;

  const std::size_t count = prob.grid.node_count();
  prob.data.A = SymTensorField(n, count);
  if (cfg.a_kind != ATensorKind::zero) {
    for (std::size_t p = 0; p < count; ++p) {
      const Eigen::VectorXd x = prob.grid.position(p);
      if (cfg.a_kind == ATensorKind::scale_g) {
        const double c = cfg.a_scale.eval(x);
        for (int a = 0; a < n; ++a)
          prob.data.A.set(p, a, a, c * prob.grid.metric_diag(p, a));
      } else {
        for (int a = 0; a < n; ++a) prob.data.A.set(p, a, a, cfg.a_diag[a].eval(x));
      }
    }
  }

  if (cfg.eta_kind == EtaKind::zeta) {
    std::vector<double> z(count * n);
    for (std::size_t p = 0; p < count; ++p) {
      const Eigen::VectorXd x = prob.grid.position(p);
      for (int a = 0; a < n; ++a) z[p * n + a] = cfg.eta_zeta[a].eval(x);
    }
    prob.data.eta = EtaTensor::zeta_form(std::move(z));
  }

  if (mms_u_star) {
    prob.data.phi = prob.grid.sample(*mms_u_star);
    prob.data.psi.assign(count, 0.0);
    for (std::size_t p = 0; p < count; ++p) {
      const Eigen::VectorXd x = prob.grid.position(p);
      const AnalyticMetric gm(cfg.warp, x);
      const Eigen::MatrixXd U = analytic_U(cfg, *mms_u_star, x, gm);
      const Vec lam = eigenvalues_wrt_g_node(U, gm.gdiag.asDiagonal());
      if (!cone_contains(lam, cfg.f.cone).inside)
        throw NumericalFailure("manufactured u_star is not admissible at node " +
                               std::to_string(p));
      prob.data.psi[p] = eval_f(cfg.f, lam);
    }
  } else {
    prob.data.psi = prob.grid.sample(cfg.psi);
    prob.data.phi = prob.grid.sample(cfg.phi);
  }
  return prob;
}

namespace {

double resolve_delta0(const RunConfig& cfg, const Problem& prob, bool continuation) {
  double d0 = cfg.delta0 ? *cfg.delta0 : default_delta0(prob.data.psi);
  // the subsolution margin must dominate every additive lift of the sweep
  if (continuation) d0 = std::max(d0, 1.05 * cfg.solve.continuation.eps0);
  return d0;
}

ScalarField subsolution_base(const RunConfig& cfg, const Problem& prob,
                             const std::optional<Expression>& mms_u_star) {
  if (cfg.base_expr) return prob.grid.sample(*cfg.base_expr);
  if (mms_u_star) return prob.grid.sample(*mms_u_star);
  return prob.grid.sample(cfg.phi);
}

void fill_monitors(const Problem& prob, const BoundaryPatch& patch, const ScalarField& u,
                   LevelRecord& rec) {
  const SymTensorField gfield = assemble_g(prob.grid, prob.chris, u, prob.data);
  rec.C_quad = boundary_quadratic_monitor(prob.grid, patch, gfield);
  const MixedGlobalMonitors mons =
      mixed_and_global_monitors(prob.grid, prob.chris, patch, u);
  rec.C_mixed = mons.C_mixed;
  rec.C_global = mons.C_global;
  rec.C_main = mons.C_main;
}

}  // namespace

SweepOutcome run_sweep(const RunConfig& cfg) {
  SweepOutcome out;
  out.problem = build_problem(cfg);
  Problem& prob = out.problem;
  prob.delta0 = resolve_delta0(cfg, prob, true);

  const ScalarField base = subsolution_base(cfg, prob, {});
  CaseIOptions opt;
  opt.delta0 = prob.delta0;
  opt.A_cap = cfg.A_cap;
  out.recipe = construct_subsolution_caseI(prob.grid, prob.chris, prob.data, prob.f,
                                           base, opt);
  out.w = solve_supersolution_w(prob.grid, prob.chris, prob.data).w;
  out.patch = boundary_geometry(prob.grid, prob.chris);

  out.continuation = degeneracy_continuation(
      prob.grid, prob.chris, prob.data, prob.f, cfg.solve, out.recipe.u_lower,
      [&](int, const ScalarField& u, LevelRecord& rec) {
        fill_monitors(prob, out.patch, u, rec);
      });
  return out;
}

SingleSolveOutcome run_single_solve(const RunConfig& cfg,
                                    std::optional<std::vector<int>> shape,
                                    std::optional<Topology> topology,
                                    const std::optional<Expression>& mms_u_star) {
  SingleSolveOutcome out;
  out.problem = build_problem(cfg, std::move(shape), topology, mms_u_star);
  Problem& prob = out.problem;
  prob.delta0 = resolve_delta0(cfg, prob, false);

  const double inf_psi =
      *std::min_element(prob.data.psi.begin(), prob.data.psi.end());
  if (!(inf_psi - prob.f.boundary_sup() > 0.0))
    throw NumericalFailure(
        "degenerate right-hand side (inf psi <= sup_dGamma f); use sweep");

  const ScalarField base = subsolution_base(cfg, prob, mms_u_star);
  CaseIOptions opt;
  opt.delta0 = prob.delta0;
  opt.A_cap = cfg.A_cap;
  out.recipe = construct_subsolution_caseI(prob.grid, prob.chris, prob.data, prob.f,
                                           base, opt);
  out.w = solve_supersolution_w(prob.grid, prob.chris, prob.data).w;
  out.patch = boundary_geometry(prob.grid, prob.chris);

  out.newton = newton_solve(prob.grid, prob.chris, out.recipe.u_lower, prob.data,
                            prob.f, cfg.solve, 0.0, 1.0);
  if (!out.newton.record.converged)
    throw NumericalFailure("newton did not converge: " + out.newton.record.message);
  fill_monitors(prob, out.patch, out.newton.u, out.newton.record);
  return out;
}

std::vector<ConvergenceRow> run_convergence(const RunConfig& cfg) {
  if (!cfg.u_star)
    throw ConfigError(3, 0, "convergence requires manufactured.u_star");
  std::vector<ConvergenceRow> rows;
  const int n = cfg.dimension;
  double prev_err = 0.0;
  for (int m : cfg.conv_grids) {
    const auto start = std::chrono::steady_clock::now();
    SingleSolveOutcome res = run_single_solve(cfg, std::vector<int>(n, m),
                                              Topology::box, cfg.u_star);
    const ScalarField exact = res.problem.grid.sample(*cfg.u_star);
    double err = 0.0;
    for (std::size_t p = 0; p < exact.size(); ++p)
      err = std::max(err, std::abs(exact[p] - res.newton.u[p]));
    ConvergenceRow row;
    row.nodes_per_axis = m;
    row.h = res.problem.grid.spacing(n - 1);
    row.err_inf = err;
    row.ratio = rows.empty() ? 0.0 : prev_err / err;
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                      .count();
    rows.push_back(row);
    prev_err = err;
  }
  return rows;
}

std::vector<LemmaRow> run_verify_lemma(const RunConfig& cfg) {
  std::mt19937_64 rng(cfg.lemma_seed);
  std::vector<LemmaRow> rows;
  rows.reserve(cfg.lemma_count);
  for (int i = 0; i < cfg.lemma_count; ++i) {
    const int n = uniform_int(rng, cfg.lemma_n_min, cfg.lemma_n_max);
    ArrowheadMatrix H;
    H.d = Vec(n);
    H.off = Vec(n - 1);
    for (int j = 0; j < n; ++j) H.d(j) = normal01(rng);
    for (int j = 0; j + 1 < n; ++j) H.off(j) = normal01(rng);
    const double eps = std::pow(2.0, -4.0 + 5.0 * uniform01(rng));  // [2^-4, 2)
    H.a = 1.01 * growth_threshold(eps, H.off, H.d);
    const LocalizationReport rep = localize_eigenvalues(H, eps);
    rows.push_back({n, eps, H.a, rep.max_cluster_gap(), rep.tail_gap, rep.ok()});
  }
  return rows;
}

DiagnoseOutcome run_diagnose(const RunConfig& cfg) {
  DiagnoseOutcome out;
  out.solve = run_single_solve(cfg);
  Problem& prob = out.solve.problem;
  const ScalarField& u = out.solve.newton.u;

  const SymTensorField g_solved = assemble_g(prob.grid, prob.chris, u, prob.data);
  const SymTensorField g_lower =
      assemble_g(prob.grid, prob.chris, out.solve.recipe.u_lower, prob.data);
  out.C_quad = boundary_quadratic_monitor(prob.grid, out.solve.patch, g_solved);
  out.monitors = mixed_and_global_monitors(prob.grid, prob.chris, out.solve.patch, u);

  ScalarField psi_target = prob.data.psi;  // the equation actually solved
  out.calibration = calibrate_and_Rc(prob.grid, out.solve.patch, g_lower, g_solved,
                                     prob.f, psi_target);

  // collar around the middle of the x_n = 0 face
  const int n = prob.grid.dim();
  std::vector<int> c(n);
  for (int a = 0; a < n; ++a) c[a] = prob.grid.extent(a) / 2;
  c[n - 1] = 0;
  const std::size_t x0 = prob.grid.index(c);
  const DistanceFields dist = distance_fields(prob.grid, x0);
  const ScalarField& rho = dist.rho;
  const ScalarField& sigma = dist.sigma;
  const double delta = cfg.collar_widths * prob.grid.spacing(n - 1);
  out.barrier = search_barrier_constants(prob.grid, u, out.solve.recipe.u_lower,
                                         prob.data.phi, rho, sigma, delta);
  double worst = -std::numeric_limits<double>::infinity();
  for (int alpha = 0; alpha + 1 < n; ++alpha)
    for (int sign : {+1, -1}) {
      const BarrierReport rep =
          barrier_check(prob.grid, u, out.solve.recipe.u_lower, prob.data.phi, rho,
                        sigma, out.barrier, alpha, sign);
      worst = std::max(worst, rep.max_overall);
    }
  out.barrier_max = worst;
  return out;
}

namespace {

void write_level_rows(CsvWriter& csv, const std::vector<LevelRecord>& levels) {
  csv.header({"epsilon", "iters", "residual", "sup_lap", "sup_grad", "C_quad",
              "C_mixed", "converged"});
  for (const LevelRecord& r : levels) {
    csv.field(r.epsilon);
    csv.field(r.iters);
    csv.field(r.residual);
    csv.field(r.sup_lap);
    csv.field(r.sup_grad);
    csv.field(r.C_quad);
    csv.field(r.C_mixed);
    csv.field(r.converged);
    csv.end_row();
  }
}

// node index, coordinates, value
void write_field_csv(const std::string& path, const ProductGrid& grid,
                     const ScalarField& u) {
  CsvWriter csv(path);
  std::vector<std::string> cols = {"node"};
  for (int a = 0; a < grid.dim(); ++a) cols.push_back("x" + std::to_string(a + 1));
  cols.push_back("value");
  csv.header(cols);
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    csv.field(static_cast<int>(p));
    const Eigen::VectorXd x = grid.position(p);
    for (int a = 0; a < grid.dim(); ++a) csv.field(x(a));
    csv.field(u[p]);
    csv.end_row();
  }
}

void write_node_list(const std::string& path, const ProductGrid& grid,
                     const std::vector<std::size_t>& nodes) {
  CsvWriter csv(path);
  std::vector<std::string> cols = {"node"};
  for (int a = 0; a < grid.dim(); ++a) cols.push_back("x" + std::to_string(a + 1));
  csv.header(cols);
  for (std::size_t p : nodes) {
    csv.field(static_cast<int>(p));
    const Eigen::VectorXd x = grid.position(p);
    for (int a = 0; a < grid.dim(); ++a) csv.field(x(a));
    csv.end_row();
  }
}

}  // namespace

int run_command(const std::string& command, const RunConfig& cfg, std::ostream& log) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const std::string dir = cfg.out_dir + "/";
  try {
    if (command == "solve") {
      SingleSolveOutcome out = run_single_solve(cfg);
      CsvWriter csv(dir + "solve.csv");
      write_level_rows(csv, {out.newton.record});
      write_field_csv(dir + "solution.csv", out.problem.grid, out.newton.u);
      const OrderingReport ord =
          ordering_check(out.recipe.u_lower, out.newton.u, out.w);
      log << "solve: converged in " << out.newton.record.iters
          << " iterations, residual " << out.newton.record.residual
          << ", sandwich slack (" << ord.max_below << ", " << ord.max_above << ")\n";
      return 0;
    }
    if (command == "sweep") {
      SweepOutcome out = run_sweep(cfg);
      CsvWriter csv(dir + "sweep.csv");
      write_level_rows(csv, out.continuation.report.levels);
      if (!out.continuation.solutions.empty())
        write_field_csv(dir + "solution.csv", out.problem.grid,
                        out.continuation.solutions.back());
      if (!out.continuation.report.all_converged()) {
        log << "sweep: level " << out.continuation.report.levels.size() - 1
            << " failed: " << out.continuation.report.levels.back().message << "\n";
        return 1;
      }
      log << "sweep: " << out.continuation.report.levels.size()
          << " levels converged\n";
      return 0;
    }
    if (command == "verify-lemma") {
      const std::vector<LemmaRow> rows = run_verify_lemma(cfg);
      CsvWriter csv(dir + "lemma.csv");
      csv.header({"instance", "n", "epsilon", "a", "max_cluster_gap", "tail_gap",
                  "cluster_bound", "tail_bound", "ok"});
      int failures = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const LemmaRow& r = rows[i];
        csv.field(static_cast<int>(i));
        csv.field(r.n);
        csv.field(r.epsilon);
        csv.field(r.a);
        csv.field(r.max_cluster_gap);
        csv.field(r.tail_gap);
        csv.field(r.epsilon);
        csv.field((r.n - 1) * r.epsilon);
        csv.field(r.ok);
        csv.end_row();
        if (!r.ok) ++failures;
      }
      log << "verify-lemma: " << rows.size() - failures << "/" << rows.size()
          << " instances within bounds\n";
      return failures == 0 ? 0 : 1;
    }
    if (command == "subsolution") {
      Problem prob = build_problem(cfg);
      prob.delta0 = resolve_delta0(cfg, prob, cfg.degenerate_continuation);
      const ScalarField base = subsolution_base(cfg, prob, {});
      CaseIOptions opt;
      opt.delta0 = prob.delta0;
      opt.A_cap = cfg.A_cap;
      SubsolutionRecipe recipe;
      try {
        recipe = construct_subsolution_caseI(prob.grid, prob.chris, prob.data, prob.f,
                                             base, opt);
      } catch (const SubsolutionRefused& e) {
        write_node_list(dir + "subsolution_violations.csv", prob.grid, e.nodes);
        log << "subsolution refused: " << e.what() << " (" << e.nodes.size()
            << " nodes listed)\n";
        return 1;
      }
      CsvWriter csv(dir + "subsolution.csv");
      csv.header({"A", "A_pow2", "delta0", "min_margin", "min_gap", "violations"});
      csv.field(recipe.A);
      csv.field(recipe.A_pow2);
      csv.field(recipe.delta0);
      csv.field(recipe.check.min_margin);
      csv.field(recipe.check.min_gap);
      csv.field(static_cast<int>(recipe.check.violating_nodes.size()));
      csv.end_row();
      write_node_list(dir + "subsolution_violations.csv", prob.grid,
                      recipe.check.violating_nodes);
      log << "subsolution: accepted A = " << recipe.A << " (pow2 " << recipe.A_pow2
          << "), margin " << recipe.check.min_margin << "\n";
      return 0;
    }
    if (command == "diagnose") {
      DiagnoseOutcome out = run_diagnose(cfg);
      CsvWriter csv(dir + "diagnose.csv");
      csv.header({"monitor", "value"});
      auto row = [&](const std::string& name, double v) {
        csv.field(name);
        csv.field(v);
        csv.end_row();
      };
      row("C_quad", out.C_quad);
      row("C_mixed", out.monitors.C_mixed);
      row("C_global", out.monitors.C_global);
      row("C_main", out.monitors.C_main);
      row("R0", out.calibration.R0);
      row("eps0", out.calibration.eps0);
      row("Rc_min_slack", out.calibration.min_slack);
      row("barrier_A1", out.barrier.A1);
      row("barrier_A2", out.barrier.A2);
      row("barrier_A3", out.barrier.A3);
      row("barrier_N", out.barrier.N);
      row("barrier_t", out.barrier.t);
      row("barrier_delta", out.barrier.delta);
      row("barrier_max", out.barrier_max);
      log << "diagnose: C_quad " << out.C_quad << ", barrier max " << out.barrier_max
          << ", trace bound " << (out.calibration.trace_bound_ok ? "ok" : "VIOLATED")
          << "\n";
      return out.calibration.trace_bound_ok ? 0 : 1;
    }
    if (command == "convergence") {
      const std::vector<ConvergenceRow> rows = run_convergence(cfg);
      CsvWriter csv(dir + "convergence.csv");
      csv.header({"nodes", "h", "err_inf", "ratio", "seconds"});
      for (const ConvergenceRow& r : rows) {
        csv.field(r.nodes_per_axis);
        csv.field(r.h);
        csv.field(r.err_inf);
        csv.field(r.ratio);
        csv.field(r.seconds);
        csv.end_row();
        log << "convergence: " << r.nodes_per_axis << "^d err " << r.err_inf
            << " ratio " << r.ratio << " (" << r.seconds << " s)\n";
      }
      return 0;
    }
    throw ConfigError(3, 0, "unknown command '" + command + "'");
  } catch (const NumericalFailure& e) {
    log << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const SubsolutionRefused& e) {
    log << "subsolution refused: " << e.what() << " (" << e.nodes.size()
        << " nodes listed)\n";
    return 1;
  } catch (const CalibrationError& e) {
    log << "calibration failure: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace degel
