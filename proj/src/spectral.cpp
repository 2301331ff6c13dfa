#include "degel/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace degel {

ConeSpec::ConeSpec(int n_, int k_) : n(n_), k(k_) {
  if (n < 2) throw std::invalid_argument("cone dimension must be >= 2");
  if (k < 1 || k > n) throw std::invalid_argument("Gamma_k requires 1 <= k <= n");
}

std::string ConeSpec::name() const {
  return "Gamma_" + std::to_string(k) + " (n=" + std::to_string(n) + ")";
}

double binomial(int n, int j) {
  double r = 1.0;
  for (int i = 1; i <= j; ++i) r *= static_cast<double>(n - j + i) / i;
  return r;
}

Vec elementary_symmetric_all(const Vec& lambda, int upto) {
  Vec e = Vec::Zero(upto + 1);
  e(0) = 1.0;
  for (int i = 0; i < lambda.size(); ++i) {
    for (int j = std::min<int>(upto, i + 1); j >= 1; --j)
      e(j) += lambda(i) * e(j - 1);
  }
  return e;
}

double elementary_symmetric(const Vec& lambda, int j) {
  if (j < 0 || j > lambda.size()) return 0.0;
  return elementary_symmetric_all(lambda, j)(j);
}

double elementary_symmetric_excluding(const Vec& lambda, int j, int skip) {
  if (j < 0 || j > lambda.size() - 1) return 0.0;
  Vec e = Vec::Zero(j + 1);
  e(0) = 1.0;
  for (int i = 0; i < lambda.size(); ++i) {
    if (i == skip) continue;
    for (int m = j; m >= 1; --m) e(m) += lambda(i) * e(m - 1);
  }
  return e(j);
}

ConeMembership cone_contains(const Vec& lambda, const ConeSpec& cone) {
  if (lambda.size() != cone.n)
    throw std::invalid_argument("cone_contains: vector has length " +
                                std::to_string(lambda.size()) + ", cone expects " +
                                std::to_string(cone.n));
  const Vec e = elementary_symmetric_all(lambda, cone.k);
  ConeMembership m;
  m.margin = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= cone.k; ++j)
    m.margin = std::min(m.margin, e(j) / binomial(cone.n, j));
  m.inside = m.margin > 0.0;
  return m;
}

SpectralFunction SpectralFunction::sigma_root(int n, int k) {
  SpectralFunction f;
  f.family = SpectralFamily::sigma_k_root;
  f.cone = ConeSpec(n, k);
  f.k = k;
  return f;
}

SpectralFunction SpectralFunction::log_sigma(int n) {
  SpectralFunction f;
  f.family = SpectralFamily::log_sigma_n;
  f.cone = ConeSpec(n, n);
  f.k = n;
  return f;
}

SpectralFunction SpectralFunction::quotient(int n, int k, int l) {
  if (!(1 <= l && l < k && k <= n))
    throw std::invalid_argument("quotient_root requires 1 <= l < k <= n");
  SpectralFunction f;
  f.family = SpectralFamily::quotient_root;
  f.cone = ConeSpec(n, k);
  f.k = k;
  f.l = l;
  return f;
}

double SpectralFunction::boundary_sup() const {
  return family == SpectralFamily::log_sigma_n
             ? -std::numeric_limits<double>::infinity()
             : 0.0;
}

std::string SpectralFunction::name() const {
  switch (family) {
    case SpectralFamily::sigma_k_root:
      return "sigma_" + std::to_string(k) + "^(1/" + std::to_string(k) + ")";
    case SpectralFamily::log_sigma_n:
      return "log sigma_" + std::to_string(cone.n);
    case SpectralFamily::quotient_root:
      return "(sigma_" + std::to_string(k) + "/sigma_" + std::to_string(l) +
             ")^(1/" + std::to_string(k - l) + ")";
  }
  return "?";
}

namespace {

void require_inside(const SpectralFunction& f, const Vec& lambda, double tol) {
  const ConeMembership m = cone_contains(lambda, f.cone);
  if (!(m.margin > tol))
    throw std::domain_error("spectral function evaluated outside " + f.cone.name() +
                            " (margin " + std::to_string(m.margin) + ")");
}

}  // namespace

double eval_f(const SpectralFunction& f, const Vec& lambda, double margin_tol) {
  require_inside(f, lambda, margin_tol);
  switch (f.family) {
    case SpectralFamily::sigma_k_root:
      return std::pow(elementary_symmetric(lambda, f.k), 1.0 / f.k);
    case SpectralFamily::log_sigma_n: {
      double s = 0.0;
      for (int i = 0; i < lambda.size(); ++i) s += std::log(lambda(i));
      return s;
    }
    case SpectralFamily::quotient_root: {
      const double sk = elementary_symmetric(lambda, f.k);
      const double sl = elementary_symmetric(lambda, f.l);
      return std::pow(sk / sl, 1.0 / (f.k - f.l));
    }
  }
  return 0.0;
}

Vec grad_f(const SpectralFunction& f, const Vec& lambda, double margin_tol) {
  require_inside(f, lambda, margin_tol);
  const int n = static_cast<int>(lambda.size());
  Vec g(n);
  switch (f.family) {
    case SpectralFamily::sigma_k_root: {
      const double sk = elementary_symmetric(lambda, f.k);
      const double fv = std::pow(sk, 1.0 / f.k);
      for (int i = 0; i < n; ++i)
        g(i) = fv / (f.k * sk) * elementary_symmetric_excluding(lambda, f.k - 1, i);
      break;
    }
    case SpectralFamily::log_sigma_n:
      for (int i = 0; i < n; ++i) g(i) = 1.0 / lambda(i);
      break;
    case SpectralFamily::quotient_root: {
      const double sk = elementary_symmetric(lambda, f.k);
      const double sl = elementary_symmetric(lambda, f.l);
      const double fv = std::pow(sk / sl, 1.0 / (f.k - f.l));
      for (int i = 0; i < n; ++i) {
        const double dk = elementary_symmetric_excluding(lambda, f.k - 1, i);
        const double dl = elementary_symmetric_excluding(lambda, f.l - 1, i);
        g(i) = fv / (f.k - f.l) * (dk / sk - dl / sl);
      }
      break;
    }
  }
  return g;
}

StructureReport check_structure(const SpectralFunction& f,
                                const std::vector<Vec>& samples, double tol) {
  StructureReport rep;
  rep.samples = static_cast<int>(samples.size());
  std::vector<Vec> grads;
  std::vector<double> values;
  grads.reserve(samples.size());
  for (const Vec& s : samples) {
    Vec g = grad_f(f, s);
    const double mn = g.minCoeff();
    rep.min_gradient_entry = std::min(rep.min_gradient_entry, mn);
    if (!(mn > 0.0)) ++rep.gradient_violations;
    grads.push_back(std::move(g));
    values.push_back(eval_f(f, s));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = 0; j < samples.size(); ++j) {
      if (i == j) continue;
      ++rep.pairs;
      const double pairing = grads[i].dot(samples[j]);
      rep.min_pairing_value = std::min(rep.min_pairing_value, pairing);
      if (!(pairing > 0.0)) ++rep.pairing_violations;
      const Vec mid = 0.5 * (samples[i] + samples[j]);
      const double fm = eval_f(f, mid);
      const double defect = 0.5 * (values[i] + values[j]) - fm;  // >0 violates
      rep.worst_concavity_defect = std::max(rep.worst_concavity_defect, defect);
      if (defect > tol * (1.0 + std::abs(fm))) ++rep.concavity_violations;
    }
  }
  return rep;
}

Vec mu_from_lambda(const Vec& lambda) {
  if (lambda.size() < 2)
    throw std::invalid_argument("mu_from_lambda requires n >= 2");
  const double s = lambda.sum();
  return Vec::Constant(lambda.size(), s) - lambda;
}

Vec lambda_from_mu(const Vec& mu) {
  if (mu.size() < 2) throw std::invalid_argument("lambda_from_mu requires n >= 2");
  const double s = mu.sum() / (static_cast<double>(mu.size()) - 1.0);
  return Vec::Constant(mu.size(), s) - mu;
}

double tilde_f_eval(const SpectralFunction& f, const Vec& lambda) {
  return eval_f(f, mu_from_lambda(lambda));
}

bool gamma_infinity_contains(double c, const ConeSpec& cone) {
  if (c > 0.0) return true;  // R^+ is always contained
  Vec probe = Vec::Zero(cone.n);
  probe(cone.n - 1) = c;
  bool in_prev = false, in_last = false;
  for (int j = 0; j <= 40; ++j) {
    const double t = std::ldexp(1.0, j);
    for (int i = 0; i + 1 < cone.n; ++i) probe(i) = t;
    in_prev = in_last;
    in_last = cone_contains(probe, cone).inside;
  }
  return in_prev && in_last;
}

LimitVerdict UnboundedReport::aggregate(const std::vector<LimitProbe>& p) const {
  bool any_inconclusive = false;
  for (const LimitProbe& q : p) {
    if (q.verdict == LimitVerdict::violated) return LimitVerdict::violated;
    if (q.verdict == LimitVerdict::inconclusive) any_inconclusive = true;
  }
  return any_inconclusive ? LimitVerdict::inconclusive : LimitVerdict::satisfied;
}

namespace {

// f is nondecreasing along nonnegative directions, so the probe values are
// monotone; classify the tail increments.
LimitProbe probe_direction(const SpectralFunction& f, const Vec& lambda,
                           const Vec& dir) {
  LimitProbe probe;
  std::vector<double> vals;
  vals.reserve(41);
  for (int j = 0; j <= 40; ++j) {
    const double t = std::ldexp(1.0, j);
    vals.push_back(eval_f(f, lambda + t * dir));
  }
  probe.last_value = vals.back();
  probe.last_increment = vals[vals.size() - 1] - vals[vals.size() - 2];
  const double scale = 1.0 + std::abs(vals.front());
  if (vals.back() > 1e9) {
    probe.verdict = LimitVerdict::satisfied;
    return probe;
  }
  bool steady_growth = true, stalled = true;
  for (std::size_t j = vals.size() - 4; j + 1 < vals.size(); ++j) {
    const double inc = vals[j + 1] - vals[j];
    if (inc < 1e-6 * scale) steady_growth = false;
    if (inc > 1e-9 * scale) stalled = false;
  }
  if (steady_growth)
    probe.verdict = LimitVerdict::satisfied;  // divergence (possibly slow, e.g. log)
  else if (stalled)
    probe.verdict = LimitVerdict::violated;  // finite limit below sup_Gamma f
  else
    probe.verdict = LimitVerdict::inconclusive;
  return probe;
}

}  // namespace

UnboundedReport check_unbounded_conditions(const SpectralFunction& f,
                                           const std::vector<Vec>& samples) {
  UnboundedReport rep;
  const int n = f.dim();
  Vec e_n = Vec::Zero(n);
  e_n(n - 1) = 1.0;
  Vec strong = Vec::Ones(n);
  strong(n - 1) = 0.0;
  for (const Vec& s : samples) {
    rep.unbound.push_back(probe_direction(f, s, e_n));
    rep.unbound_strong.push_back(probe_direction(f, s, strong));
  }
  return rep;
}

}  // namespace degel
