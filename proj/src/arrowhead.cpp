#include "degel/arrowhead.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace degel {

Mat ArrowheadMatrix::assemble() const {
  const int m = n();
  if (off.size() != m - 1)
    throw std::invalid_argument("arrowhead: off must have n-1 entries");
  Mat H = Mat::Zero(m, m);
  for (int i = 0; i + 1 < m; ++i) {
    H(i, i) = a + d(i);
    H(i, m - 1) = off(i);
    H(m - 1, i) = off(i);
  }
  H(m - 1, m - 1) = d(m - 1);
  return H;
}

double growth_threshold(double epsilon, const Vec& off, const Vec& d) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("growth_threshold: eps <= 0");
  const int n = static_cast<int>(d.size());
  if (n < 3) throw std::invalid_argument("growth_threshold: n >= 3 required");
  if (off.size() != n - 1)
    throw std::invalid_argument("growth_threshold: off must have n-1 entries");
  const double quad = off.squaredNorm();
  const double dsum = d.cwiseAbs().sum();
  return (2.0 * n - 3.0) / epsilon * quad + (n - 1.0) * dsum +
         (n - 2.0) * epsilon / (2.0 * n - 3.0);
}

LocalizationReport localize_eigenvalues(const ArrowheadMatrix& H, double epsilon) {
  const int n = H.n();
  const double threshold = growth_threshold(epsilon, H.off, H.d);
  if (H.a < threshold)
    throw std::domain_error("localize_eigenvalues: growth condition violated (a = " +
                            std::to_string(H.a) + " < " + std::to_string(threshold) +
                            ")");

  Eigen::SelfAdjointEigenSolver<Mat> es(H.assemble());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("localize_eigenvalues: eigensolver failed");

  LocalizationReport rep;
  rep.epsilon = epsilon;
  rep.eigenvalues = es.eigenvalues();  // ascending

  // Cauchy interlacing puts the d_n eigenvalue below the cluster, so the
  // smallest eigenvalue is matched to d_n and the remaining n-1 (sorted) to
  // the sorted cluster values a + d_alpha.
  Vec cluster(n - 1);
  for (int i = 0; i + 1 < n; ++i) cluster(i) = H.a + H.d(i);
  std::sort(cluster.data(), cluster.data() + n - 1);

  rep.cluster_gaps.resize(n - 1);
  for (int i = 0; i + 1 < n; ++i)
    rep.cluster_gaps(i) = std::abs(cluster(i) - rep.eigenvalues(i + 1));
  rep.tail_gap = std::abs(H.d(n - 1) - rep.eigenvalues(0));

  // strict "<" tested with a hair of slack against boundary flakiness
  const double strict = 1.0 - 1e-12;
  rep.cluster_ok = rep.max_cluster_gap() <= epsilon * strict;
  rep.tail_ok = rep.tail_gap <= (n - 1.0) * epsilon * strict;
  return rep;
}

}  // namespace degel
