#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace degel {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Gamma_k cone in dimension n: the component of {sigma_k > 0} containing the
/// positive orthant, cut out by sigma_1 > 0, ..., sigma_k > 0.
struct ConeSpec {
  int n = 3;
  int k = 1;

  ConeSpec() = default;
  ConeSpec(int n_, int k_);
  std::string name() const;
};

struct ConeMembership {
  bool inside = false;
  /// min_j sigma_j(lambda)/binom(n,j) over the defining inequalities.
  double margin = -std::numeric_limits<double>::infinity();
};

double elementary_symmetric(const Vec& lambda, int j);
/// sigma_0..sigma_upto as a vector of length upto+1.
Vec elementary_symmetric_all(const Vec& lambda, int upto);
/// sigma_j of lambda with entry `skip` removed.
double elementary_symmetric_excluding(const Vec& lambda, int j, int skip);
double binomial(int n, int j);

ConeMembership cone_contains(const Vec& lambda, const ConeSpec& cone);

enum class SpectralFamily { sigma_k_root, log_sigma_n, quotient_root };

/// Concave symmetric operator f on its Gårding cone.  Three families:
///   sigma_k_root : f = sigma_k^{1/k}            on Gamma_k
///   log_sigma_n  : f = sum log lambda_i          on Gamma_n
///   quotient_root: f = (sigma_k/sigma_l)^{1/(k-l)} on Gamma_k, 1 <= l < k
struct SpectralFunction {
  SpectralFamily family = SpectralFamily::sigma_k_root;
  ConeSpec cone;
  int k = 1;
  int l = 0;

  static SpectralFunction sigma_root(int n, int k);
  static SpectralFunction log_sigma(int n);
  static SpectralFunction quotient(int n, int k, int l);

  int dim() const { return cone.n; }
  /// sup over the cone boundary of f: 0 for the root families, -inf for log.
  double boundary_sup() const;
  /// Degenerate continuation needs a finite boundary sup.
  bool finite_boundary_sup() const { return family != SpectralFamily::log_sigma_n; }
  std::string name() const;
};

double eval_f(const SpectralFunction& f, const Vec& lambda, double margin_tol = 0.0);
Vec grad_f(const SpectralFunction& f, const Vec& lambda, double margin_tol = 0.0);

struct StructureReport {
  int samples = 0;
  int pairs = 0;
  int gradient_violations = 0;
  int concavity_violations = 0;
  int pairing_violations = 0;  // sum f_i(lambda) mu_i > 0 failures
  double min_gradient_entry = std::numeric_limits<double>::infinity();
  double worst_concavity_defect = 0.0;  // positive means violated
  double min_pairing_value = std::numeric_limits<double>::infinity();
  bool ok() const {
    return gradient_violations == 0 && concavity_violations == 0 &&
           pairing_violations == 0;
  }
};

/// Checks ellipticity (grad positivity), midpoint concavity along sample
/// segments, and the pairing inequality sum f_i(lambda) mu_i > 0 on all
/// ordered sample pairs.
StructureReport check_structure(const SpectralFunction& f,
                                const std::vector<Vec>& samples,
                                double tol = 1e-9);

Vec mu_from_lambda(const Vec& lambda);
Vec lambda_from_mu(const Vec& mu);

/// f~(lambda) = f(mu(lambda)); the induced operator of the cone transform.
double tilde_f_eval(const SpectralFunction& f, const Vec& lambda);

/// Membership of c in Gamma^inf_{R^1} = {c : (t,...,t,c) in Gamma for t >> 1}.
bool gamma_infinity_contains(double c, const ConeSpec& cone);

enum class LimitVerdict { satisfied, violated, inconclusive };

struct LimitProbe {
  LimitVerdict verdict = LimitVerdict::inconclusive;
  double last_value = 0.0;
  double last_increment = 0.0;
};

struct UnboundedReport {
  std::vector<LimitProbe> unbound;         // f(lambda + t e_n)
  std::vector<LimitProbe> unbound_strong;  // f(lambda + t (1,..,1,0))
  LimitVerdict aggregate(const std::vector<LimitProbe>& p) const;
  LimitVerdict unbound_verdict() const { return aggregate(unbound); }
  LimitVerdict unbound_strong_verdict() const { return aggregate(unbound_strong); }
};

/// Probes both limit conditions on a doubling t-schedule capped at 2^40.
UnboundedReport check_unbounded_conditions(const SpectralFunction& f,
                                           const std::vector<Vec>& samples);

}  // namespace degel
