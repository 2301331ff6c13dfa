#pragma once

#include <Eigen/Sparse>
#include <functional>

#include "degel/grid.hpp"
#include "degel/operators.hpp"

namespace degel {

using SparseMat = Eigen::SparseMatrix<double>;

/// Assembles the sparse matrix of
///   L v = sum_ab C2_ab(p) [ d2_ab v + (eta^l_ab - Gamma^l_ab) d_l v ]
/// over interior nodes, with identity rows at Dirichlet nodes.  C2 is the
/// per-node coefficient matrix (upper indices); the first-order part is the
/// covariant completion of the second-order one.
SparseMat assemble_linear_operator(const ProductGrid& grid, const ChristoffelField& chris,
                                   const EtaTensor& eta,
                                   const std::function<Eigen::MatrixXd(std::size_t)>& C2);

struct LinearSolveResult {
  Eigen::VectorXd x;
  double relative_residual = 0.0;
  bool used_direct = false;
};

/// BiCGSTAB with incomplete-LU preconditioning; falls back to SparseLU when
/// the iteration does not reach the requested relative tolerance.
LinearSolveResult solve_sparse(const SparseMat& A, const Eigen::VectorXd& b,
                               double rel_tol);

}  // namespace degel
