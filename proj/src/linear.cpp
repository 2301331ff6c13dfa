#include "degel/linear.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unordered_map>
#include <vector>

namespace degel {

SparseMat assemble_linear_operator(const ProductGrid& grid, const ChristoffelField& chris,
                                   const EtaTensor& eta,
                                   const std::function<Eigen::MatrixXd(std::size_t)>& C2) {
  const int n = grid.dim();
  const std::size_t count = grid.node_count();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(count * (2 * n + 4 * n * (n - 1) / 2 + 1));

  std::unordered_map<std::size_t, double> row;
  StencilEntry s1[3], s2[4], sb[3];
  for (std::size_t p = 0; p < count; ++p) {
    if (grid.is_boundary(p)) {
      trips.emplace_back(static_cast<int>(p), static_cast<int>(p), 1.0);
      continue;
    }
    row.clear();
    const Eigen::MatrixXd c2 = C2(p);

    // second-order part
    for (int a = 0; a < n; ++a) {
      const int m = grid.d2_stencil(a, p, s2);
      for (int q = 0; q < m; ++q) row[s2[q].node] += c2(a, a) * s2[q].w;
    }
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        const double w2 = 2.0 * c2(a, b);
        if (w2 == 0.0) continue;
        const int ma = grid.d1_stencil(a, p, s1);
        for (int qa = 0; qa < ma; ++qa) {
          const int mb = grid.d1_stencil(b, s1[qa].node, sb);
          for (int qb = 0; qb < mb; ++qb)
            row[sb[qb].node] += w2 * s1[qa].w * sb[qb].w;
        }
      }
    }

    // first-order covariant completion
    for (int l = 0; l < n; ++l) {
      double cl = 0.0;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          double t = -chris.gamma(p, l, a, b);
          if (!eta.is_zero()) t += eta.component(p, n, l, a, b);
          cl += c2(a, b) * t;
        }
      }
      if (cl == 0.0) continue;
      const int m = grid.d1_stencil(l, p, s1);
      for (int q = 0; q < m; ++q) row[s1[q].node] += cl * s1[q].w;
    }

    for (const auto& [col, w] : row)
      trips.emplace_back(static_cast<int>(p), static_cast<int>(col), w);
  }

  SparseMat A(static_cast<int>(count), static_cast<int>(count));
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

LinearSolveResult solve_sparse(const SparseMat& A, const Eigen::VectorXd& b,
                               double rel_tol) {
  LinearSolveResult res;
  Eigen::BiCGSTAB<SparseMat, Eigen::IncompleteLUT<double>> iter;
  iter.preconditioner().setDroptol(1e-4);
  iter.preconditioner().setFillfactor(12);
  iter.setTolerance(rel_tol);
  iter.setMaxIterations(600);
  iter.compute(A);
  if (iter.info() == Eigen::Success) {
    res.x = iter.solve(b);
    if (iter.info() == Eigen::Success && iter.error() <= rel_tol) {
      res.relative_residual = iter.error();
      return res;
    }
  }
  Eigen::SparseLU<SparseMat> lu(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("linear solver breakdown (factorization failed)");
  res.x = lu.solve(b);
  res.used_direct = true;
  const double bn = b.norm();
  res.relative_residual = bn > 0.0 ? (A * res.x - b).norm() / bn : 0.0;
  return res;
}

}  // namespace degel
