#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "degel/linear.hpp"
#include "degel/operators.hpp"

namespace degel {

enum class EquationForm {
  U_form,  // f(lambda(U[u])) = psi
  g_form   // f(lambda(g[u])) = psi
};

struct SupersolutionResult {
  ScalarField w;
  double relative_residual = 0.0;
};

/// Solves tr_g(g[w]) = 0 in M with w = phi on the Dirichlet nodes, i.e.
/// Lap w + tr_g W(dw) = -tr_g chi.
SupersolutionResult solve_supersolution_w(const ProductGrid& grid,
                                          const ChristoffelField& chris,
                                          const ProblemData& data);

struct SubsolutionCheck {
  bool ok = false;
  double min_margin = 0.0;   // cone margin of lambda(op[u]) over nodes
  double min_gap = 0.0;      // min (f - psi - delta0)
  std::vector<std::size_t> violating_nodes;
};

/// Pointwise check f(lambda(op[u])) >= psi + delta0 with positive cone margin.
SubsolutionCheck verify_subsolution(const ProductGrid& grid, const ChristoffelField& chris,
                                    const ProblemData& data, const SpectralFunction& f,
                                    const ScalarField& u, double delta0,
                                    EquationForm form = EquationForm::U_form);

struct SubsolutionRecipe {
  ScalarField base;     // admissible base wbar
  ScalarField u_lower;  // wbar + A (x_n^2 - x_n)
  double A = 0.0;       // accepted coefficient (bisection-refined)
  double A_pow2 = 0.0;  // least passing power of two from the doubling scan
  double delta0 = 0.0;
  SubsolutionCheck check;
};

struct SubsolutionRefused : std::runtime_error {
  std::vector<std::size_t> nodes;
  SubsolutionRefused(const std::string& msg, std::vector<std::size_t> n)
      : std::runtime_error(msg), nodes(std::move(n)) {}
};

struct CaseIOptions {
  double delta0 = 0.0;
  double A_cap = 1e12;
  EquationForm form = EquationForm::U_form;
};

/// Appendix-A Case I: ubar = wbar + A (x_n^2 - x_n).  The limit condition is
/// probed nodewise along t dx^n (x) dx^n for the g-form and along t g_X for
/// the U-form; A is found by doubling and then bisection.
SubsolutionRecipe construct_subsolution_caseI(const ProductGrid& grid,
                                              const ChristoffelField& chris,
                                              const ProblemData& data,
                                              const SpectralFunction& f,
                                              const ScalarField& base,
                                              const CaseIOptions& opt);

/// delta0 default when the caller passes none: 1e-2 * range(psi).
double default_delta0(const ScalarField& psi);

struct CaseIIProblem {
  int n = 3;      // total dimension
  int k = 2;      // Omega = unit ball in R^k, 2 <= k <= n
  Expression wbar;    // over all n coordinates
  Expression psi;
  Expression varrho;  // warp of e^varrho g_X on the closed factor
  SpectralFunction f;
  EquationForm form = EquationForm::U_form;
  double delta0 = 0.0;
};

struct PointwiseReport {
  int samples = 0;
  int cone_violations = 0;
  int gap_violations = 0;
  double min_margin = 0.0;
  double min_gap = 0.0;
  bool gate_ok = false;  // H_{dOmega} in Gamma^inf
  bool ok() const { return gate_ok && cone_violations == 0 && gap_violations == 0; }
};

/// Appendix-A Case II on X x Omega with ubar = wbar + A h, h = (|y|^2 - 1)/2,
/// verified by analytic sampling (no grid on Omega).
PointwiseReport verify_subsolution_caseII_pointwise(const CaseIIProblem& prob, double A,
                                                    int sample_count, std::uint64_t seed);

/// Doubling search for the least power-of-two A accepted by the Case II check.
std::optional<double> find_caseII_A(const CaseIIProblem& prob, int sample_count,
                                    std::uint64_t seed, double cap = 1e12);

struct SupersolutionCheckReport {
  int admissible_nodes = 0;    // lambda(g[u]) in Gamma
  int inadmissible_nodes = 0;  // reported separately; F undefined there
  int violations = 0;          // F(U[u]) > psi + tol among admissible nodes
  double max_excess = 0.0;
};

/// Appendix-B check F(U[u_breve]) <= psi where lambda(g[u_breve]) in Gamma.
SupersolutionCheckReport verify_supersolution(const ProductGrid& grid,
                                              const ChristoffelField& chris,
                                              const ProblemData& data,
                                              const SpectralFunction& f,
                                              const ScalarField& u_breve,
                                              double tol = 1e-8);

struct OrderingReport {
  double max_below = 0.0;  // max (lower - u)
  double max_above = 0.0;  // max (u - upper)
  std::size_t argmax_below = 0, argmax_above = 0;
  bool ok(double tol) const { return max_below <= tol && max_above <= tol; }
};

OrderingReport ordering_check(const ScalarField& lower, const ScalarField& u,
                              const ScalarField& upper);

}  // namespace degel
