#pragma once

#include <functional>
#include <vector>

#include "degel/geometry.hpp"
#include "degel/grid.hpp"
#include "degel/spectral.hpp"

namespace degel {

/// eta^k_ij = 0, or delta_ik zeta_j + delta_jk zeta_i for a covector field zeta.
struct EtaTensor {
  enum class Kind { zero, zeta_form };
  Kind kind = Kind::zero;
  std::vector<double> zeta;  // node-major, n components per node

  static EtaTensor zero_tensor() { return {}; }
  static EtaTensor zeta_form(std::vector<double> z) {
    EtaTensor e;
    e.kind = Kind::zeta_form;
    e.zeta = std::move(z);
    return e;
  }
  bool is_zero() const { return kind == Kind::zero; }
  double component(std::size_t node, int n, int k, int i, int j) const {
    if (kind == Kind::zero) return 0.0;
    double r = 0.0;
    if (i == k) r += zeta[node * n + j];
    if (j == k) r += zeta[node * n + i];
    return r;
  }
};

struct ProblemData {
  SymTensorField A;
  EtaTensor eta;
  ScalarField psi;
  ScalarField phi;  // Dirichlet data, extended over all nodes

  /// chi = (tr_g A) g/(n-1) - A, recomputed so the identity holds by definition.
  SymTensorField chi(const ProductGrid& grid) const;
};

/// g[u] = chi + nabla^2 u + W(du), W(du)_ij = u_k eta^k_ij.
SymTensorField assemble_g(const ProductGrid& grid, const ChristoffelField& chris,
                          const ScalarField& u, const ProblemData& data);

/// U[u] = A + (Lap u) g - nabla^2 u + Z(du), asserted against (tr_g g[u]) g - g[u].
SymTensorField assemble_U(const ProductGrid& grid, const ChristoffelField& chris,
                          const ScalarField& u, const ProblemData& data,
                          double identity_tol = 1e-10);

/// Per-node eigenvalues of T v = lambda g v via the reduction L^{-1} T L^{-T},
/// sorted ascending.
std::vector<Vec> eigenvalues_wrt_g(const SymTensorField& T, const ProductGrid& grid);
Vec eigenvalues_wrt_g_node(const Eigen::MatrixXd& T, const Eigen::MatrixXd& g);

struct EtaHypothesisReport {
  double max_abs = 0.0;  // max_k |sum_{i != k} eta^k_ii| in the boundary frame
};

EtaHypothesisReport check_eta_hypothesis(const ProblemData& data, const ProductGrid& grid,
                                         const BoundaryPatch& patch);
/// Same check against an arbitrary component callback (k,i,j) -> value.
EtaHypothesisReport check_eta_hypothesis(
    const std::function<double(std::size_t node, int k, int i, int j)>& eta,
    const ProductGrid& grid, const BoundaryPatch& patch);

}  // namespace degel
