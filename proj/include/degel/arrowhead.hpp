#pragma once

#include <Eigen/Dense>

#include "degel/spectral.hpp"

namespace degel {

/// Symmetric arrowhead matrix: diagonal (a+d_1, ..., a+d_{n-1}, d_n) with the
/// last row/column carrying the off entries a_1..a_{n-1}.
struct ArrowheadMatrix {
  double a = 0.0;
  Vec d;    // n entries
  Vec off;  // n-1 entries

  int n() const { return static_cast<int>(d.size()); }
  Mat assemble() const;
};

/// Right-hand side of the quadratic growth condition:
///   (2n-3)/eps * sum|a_i|^2 + (n-1) * sum|d_i| + (n-2) eps/(2n-3).
double growth_threshold(double epsilon, const Vec& off, const Vec& d);

struct LocalizationReport {
  Vec eigenvalues;   // ascending
  Vec cluster_gaps;  // |a + d_(alpha) - lambda_(alpha)| under sorted matching
  double tail_gap = 0.0;  // |d_n - lambda| for the remaining eigenvalue
  double epsilon = 0.0;
  bool cluster_ok = false;  // all cluster gaps < eps
  bool tail_ok = false;     // tail gap < (n-1) eps
  bool ok() const { return cluster_ok && tail_ok; }
  double max_cluster_gap() const {
    return cluster_gaps.size() ? cluster_gaps.maxCoeff() : 0.0;
  }
};

/// Dense symmetric eigensolve plus sorted matching of the spectrum against the
/// predicted clusters {a + d_alpha} and {d_n}.  Requires the growth condition.
LocalizationReport localize_eigenvalues(const ArrowheadMatrix& H, double epsilon);

}  // namespace degel
