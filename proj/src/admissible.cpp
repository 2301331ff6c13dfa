#include "degel/admissible.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace degel {

SupersolutionResult solve_supersolution_w(const ProductGrid& grid,
                                          const ChristoffelField& chris,
                                          const ProblemData& data) {
  const int n = grid.dim();
  const std::size_t count = grid.node_count();
  const SymTensorField chi = data.chi(grid);

  auto ginv = [&](std::size_t p) {
    Eigen::VectorXd d(n);
    for (int a = 0; a < n; ++a) d(a) = 1.0 / grid.metric_diag(p, a);
    return Eigen::MatrixXd(d.asDiagonal());
  };
  const SparseMat A = assemble_linear_operator(grid, chris, data.eta, ginv);

  Eigen::VectorXd rhs(count);
  for (std::size_t p = 0; p < count; ++p) {
    if (grid.is_boundary(p)) {
      rhs(p) = data.phi[p];
    } else {
      double trchi = 0.0;
      for (int a = 0; a < n; ++a) trchi += chi.at(p, a, a) / grid.metric_diag(p, a);
      rhs(p) = -trchi;
    }
  }

  LinearSolveResult sol = solve_sparse(A, rhs, 1e-12);
  const double denom = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  SupersolutionResult res;
  res.relative_residual = (A * sol.x - rhs).cwiseAbs().maxCoeff() / denom;
  res.w.assign(sol.x.data(), sol.x.data() + count);
  if (res.relative_residual > 1e-10)
    throw std::runtime_error("supersolution solve: residual " +
                             std::to_string(res.relative_residual) + " above 1e-10");
  return res;
}

SubsolutionCheck verify_subsolution(const ProductGrid& grid, const ChristoffelField& chris,
                                    const ProblemData& data, const SpectralFunction& f,
                                    const ScalarField& u, double delta0,
                                    EquationForm form) {
  const SymTensorField op = form == EquationForm::U_form
                                ? assemble_U(grid, chris, u, data)
                                : assemble_g(grid, chris, u, data);
  SubsolutionCheck check;
  check.min_margin = std::numeric_limits<double>::infinity();
  check.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    const Vec lam = eigenvalues_wrt_g_node(op.matrix(p), grid.metric(p));
    const ConeMembership m = cone_contains(lam, f.cone);
    check.min_margin = std::min(check.min_margin, m.margin);
    if (!m.inside) {
      if (check.violating_nodes.size() < 32) check.violating_nodes.push_back(p);
      check.min_gap = std::min(check.min_gap, -std::numeric_limits<double>::infinity());
      continue;
    }
    const double gap = eval_f(f, lam) - data.psi[p] - delta0;
    check.min_gap = std::min(check.min_gap, gap);
    if (gap < 0.0 && check.violating_nodes.size() < 32) check.violating_nodes.push_back(p);
  }
  check.ok = check.min_margin > 0.0 && check.min_gap >= 0.0;
  return check;
}

double default_delta0(const ScalarField& psi) {
  const auto [lo, hi] = std::minmax_element(psi.begin(), psi.end());
  return 1e-2 * (*hi - *lo);
}

namespace {

ScalarField caseI_profile(const ProductGrid& grid) {
  const int n = grid.dim();
  ScalarField q(grid.node_count());
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    const double xn = grid.position(p)(n - 1);
    q[p] = xn * xn - xn;
  }
  return q;
}

ScalarField add_scaled(const ScalarField& a, double c, const ScalarField& b) {
  ScalarField r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + c * b[i];
  return r;
}

}  // namespace

SubsolutionRecipe construct_subsolution_caseI(const ProductGrid& grid,
                                              const ChristoffelField& chris,
                                              const ProblemData& data,
                                              const SpectralFunction& f,
                                              const ScalarField& base,
                                              const CaseIOptions& opt) {
  const int n = grid.dim();
  const std::size_t count = grid.node_count();

  // base admissibility for the relevant operator form
  {
    const SymTensorField op = opt.form == EquationForm::U_form
                                  ? assemble_U(grid, chris, base, data)
                                  : assemble_g(grid, chris, base, data);
    std::vector<std::size_t> bad;
    for (std::size_t p = 0; p < count; ++p) {
      const Vec lam = eigenvalues_wrt_g_node(op.matrix(p), grid.metric(p));
      if (!cone_contains(lam, f.cone).inside && bad.size() < 32) bad.push_back(p);
    }
    if (!bad.empty())
      throw SubsolutionRefused("case I base is not admissible", std::move(bad));
  }

  // limit condition probed nodewise along the correction direction:
  // t dx^n (x) dx^n on g[base] for the g-form, t(g - dx^n (x) dx^n) on U[base]
  // for the U-form (the paper's g_X direction up to the positive factor e^phi).
  {
    const SymTensorField op = opt.form == EquationForm::U_form
                                  ? assemble_U(grid, chris, base, data)
                                  : assemble_g(grid, chris, base, data);
    std::vector<std::size_t> bad;
    for (std::size_t p = 0; p < count; ++p) {
      Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
      if (opt.form == EquationForm::U_form) {
        D = grid.metric(p);
        D(n - 1, n - 1) = 0.0;
      } else {
        D(n - 1, n - 1) = 1.0;
      }
      const Eigen::MatrixXd T0 = op.matrix(p);
      const Eigen::MatrixXd g = grid.metric(p);
      // f is monotone along the nonnegative direction D, so the cap decides
      const double t = std::ldexp(1.0, 40);
      const Vec lam = eigenvalues_wrt_g_node(T0 + t * D, g);
      const bool passed = cone_contains(lam, f.cone).inside &&
                          eval_f(f, lam) > data.psi[p] + opt.delta0;
      if (!passed && bad.size() < 32) bad.push_back(p);
    }
    if (!bad.empty())
      throw SubsolutionRefused("case I limit condition fails", std::move(bad));
  }

  const ScalarField q = caseI_profile(grid);
  SubsolutionRecipe recipe;
  recipe.base = base;
  recipe.delta0 = opt.delta0;

  double A = 1.0;
  SubsolutionCheck last;
  bool found = false;
  for (; A <= opt.A_cap; A *= 2.0) {
    last = verify_subsolution(grid, chris, data, f, add_scaled(base, A, q), opt.delta0,
                              opt.form);
    if (last.ok) {
      found = true;
      break;
    }
  }
  if (!found)
    throw SubsolutionRefused("case I search exceeded the A cap",
                             std::move(last.violating_nodes));
  recipe.A_pow2 = A;

  // refine to the least admissible coefficient within 1%
  double lo = A / 2.0, hi = A;
  SubsolutionCheck hi_check = last;
  while ((hi - lo) / hi > 1e-2) {
    const double mid = 0.5 * (lo + hi);
    SubsolutionCheck c =
        verify_subsolution(grid, chris, data, f, add_scaled(base, mid, q), opt.delta0,
                           opt.form);
    if (c.ok) {
      hi = mid;
      hi_check = c;
    } else {
      lo = mid;
    }
  }
  recipe.A = hi;
  recipe.check = hi_check;
  recipe.u_lower = add_scaled(base, hi, q);
  return recipe;
}

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

PointwiseReport verify_subsolution_caseII_pointwise(const CaseIIProblem& prob, double A,
                                                    int sample_count, std::uint64_t seed) {
  const int n = prob.n;
  const int k = prob.k;
  const int m = n - k;  // warped closed-factor axes
  if (k < 2 || k > n) throw std::invalid_argument("case II requires 2 <= k <= n");

  PointwiseReport rep;
  rep.gate_ok = gamma_infinity_contains(static_cast<double>(k - 1), prob.f.cone);
  rep.min_margin = std::numeric_limits<double>::infinity();
  rep.min_gap = std::numeric_limits<double>::infinity();
  if (!rep.gate_ok) return rep;

  std::mt19937_64 rng(seed);
  Eigen::VectorXd x(n);
  for (int s = 0; s < sample_count; ++s) {
    for (int a = 0; a < m; ++a) x(a) = uniform01(rng);
    // uniform in the unit ball: gaussian direction, radius U^{1/k}
    double norm2 = 0.0;
    Eigen::VectorXd y(k);
    for (int a = 0; a < k; ++a) {
      const double u1 = std::max(uniform01(rng), 1e-300);
      const double u2 = uniform01(rng);
      y(a) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
      norm2 += y(a) * y(a);
    }
    const double r = std::pow(uniform01(rng), 1.0 / k) / std::sqrt(std::max(norm2, 1e-300));
    for (int a = 0; a < k; ++a) x(m + a) = y(a) * r;

    const Taylor2 tw = prob.wbar.eval2(x);
    const Taylor2 trho = prob.varrho.eval2(x);
    const double psi = prob.psi.eval(x);

    // ubar = wbar + A h,  h = (|y|^2 - 1)/2 on the Omega factor
    Eigen::VectorXd du = tw.g;
    Eigen::MatrixXd hess = tw.h;
    for (int a = m; a < n; ++a) {
      du(a) += A * x(a);
      hess(a, a) += A;
    }

    // metric and Christoffels of e^varrho g_X + g_Omega at the sample
    Eigen::VectorXd gd = Eigen::VectorXd::Ones(n);
    for (int a = 0; a < m; ++a) gd(a) = std::exp(trho.v);
    auto gamma = [&](int c, int a, int b) -> double {
      const bool aw = a < m, bw = b < m, cw = c < m;
      if (aw && bw && cw) {
        double r2 = 0.0;
        if (b == c) r2 += trho.g(a);
        if (a == c) r2 += trho.g(b);
        if (a == b) r2 -= trho.g(c);
        return 0.5 * r2;
      }
      if (aw && bw && !cw) return a == b ? -0.5 * std::exp(trho.v) * trho.g(c) : 0.0;
      if (aw && !bw && cw) return a == c ? 0.5 * trho.g(b) : 0.0;
      if (!aw && bw && cw) return b == c ? 0.5 * trho.g(a) : 0.0;
      return 0.0;
    };

    Eigen::MatrixXd cov(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = hess(i, j);
        for (int l = 0; l < n; ++l) v -= gamma(l, i, j) * du(l);
        cov(i, j) = v;
      }
    cov = 0.5 * (cov + cov.transpose()).eval();

    Eigen::MatrixXd gfrak = cov;  // chi = 0, eta = 0 in the appendix setting
    Eigen::MatrixXd op;
    if (prob.form == EquationForm::U_form) {
      double trg = 0.0;
      for (int a = 0; a < n; ++a) trg += gfrak(a, a) / gd(a);
      op = trg * Eigen::MatrixXd(gd.asDiagonal()) - gfrak;
    } else {
      op = gfrak;
    }

    ++rep.samples;
    const Vec lam = eigenvalues_wrt_g_node(op, gd.asDiagonal());
    const ConeMembership mem = cone_contains(lam, prob.f.cone);
    rep.min_margin = std::min(rep.min_margin, mem.margin);
    if (!mem.inside) {
      ++rep.cone_violations;
      continue;
    }
    const double gap = eval_f(prob.f, lam) - psi - prob.delta0;
    rep.min_gap = std::min(rep.min_gap, gap);
    if (gap < 0.0) ++rep.gap_violations;
  }
  return rep;
}

std::optional<double> find_caseII_A(const CaseIIProblem& prob, int sample_count,
                                    std::uint64_t seed, double cap) {
  for (double A = 1.0; A <= cap; A *= 2.0) {
    if (verify_subsolution_caseII_pointwise(prob, A, sample_count, seed).ok()) return A;
  }
  return std::nullopt;
}

SupersolutionCheckReport verify_supersolution(const ProductGrid& grid,
                                              const ChristoffelField& chris,
                                              const ProblemData& data,
                                              const SpectralFunction& f,
                                              const ScalarField& u_breve, double tol) {
  const SymTensorField gfield = assemble_g(grid, chris, u_breve, data);
  const SymTensorField U = assemble_U(grid, chris, u_breve, data);
  SupersolutionCheckReport rep;
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    const Vec lam_g = eigenvalues_wrt_g_node(gfield.matrix(p), grid.metric(p));
    if (cone_contains(lam_g, f.cone).inside)
      ++rep.admissible_nodes;
    else
      ++rep.inadmissible_nodes;
    const Vec lam_U = eigenvalues_wrt_g_node(U.matrix(p), grid.metric(p));
    if (cone_contains(lam_U, f.cone).inside) {
      const double excess = eval_f(f, lam_U) - data.psi[p];
      rep.max_excess = std::max(rep.max_excess, excess);
      if (excess > tol) ++rep.violations;
    }
  }
  return rep;
}

OrderingReport ordering_check(const ScalarField& lower, const ScalarField& u,
                              const ScalarField& upper) {
  OrderingReport rep;
  rep.max_below = -std::numeric_limits<double>::infinity();
  rep.max_above = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < u.size(); ++p) {
    const double below = lower[p] - u[p];
    const double above = u[p] - upper[p];
    if (below > rep.max_below) {
      rep.max_below = below;
      rep.argmax_below = p;
    }
    if (above > rep.max_above) {
      rep.max_above = above;
      rep.argmax_above = p;
    }
  }
  return rep;
}

}  // namespace degel
