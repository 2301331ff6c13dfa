#include "degel/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace degel {

SymTensorField ProblemData::chi(const ProductGrid& grid) const {
  const int n = grid.dim();
  SymTensorField chi(n, grid.node_count());
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    double tr = 0.0;
    for (int a = 0; a < n; ++a) tr += A.at(p, a, a) / grid.metric_diag(p, a);
    const double c = tr / (n - 1.0);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double gij = i == j ? grid.metric_diag(p, i) : 0.0;
        chi.set(p, i, j, c * gij - A.at(p, i, j));
      }
    }
  }
  return chi;
}

SymTensorField assemble_g(const ProductGrid& grid, const ChristoffelField& chris,
                          const ScalarField& u, const ProblemData& data) {
  const int n = grid.dim();
  const SymTensorField chi = data.chi(grid);
  const SymTensorField hess = covariant_hessian(grid, chris, u);
  SymTensorField gfield(n, grid.node_count());
  std::vector<double> du(n);
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    for (int a = 0; a < n; ++a) du[a] = grid.d1(u, a, p);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double w = 0.0;
        if (!data.eta.is_zero())
          for (int k = 0; k < n; ++k)
            w += du[k] * data.eta.component(p, n, k, i, j);
        gfield.set(p, i, j, chi.at(p, i, j) + hess.at(p, i, j) + w);
      }
    }
  }
  return gfield;
}

SymTensorField assemble_U(const ProductGrid& grid, const ChristoffelField& chris,
                          const ScalarField& u, const ProblemData& data,
                          double identity_tol) {
  const int n = grid.dim();
  const SymTensorField hess = covariant_hessian(grid, chris, u);
  const SymTensorField gfield = assemble_g(grid, chris, u, data);
  SymTensorField U(n, grid.node_count());
  std::vector<double> du(n);
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    double lap = 0.0;
    for (int a = 0; a < n; ++a) lap += hess.at(p, a, a) / grid.metric_diag(p, a);
    for (int a = 0; a < n; ++a) du[a] = grid.d1(u, a, p);

    double trW = 0.0;
    if (!data.eta.is_zero())
      for (int a = 0; a < n; ++a) {
        double w = 0.0;
        for (int k = 0; k < n; ++k) w += du[k] * data.eta.component(p, n, k, a, a);
        trW += w / grid.metric_diag(p, a);
      }

    double scale = 1.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double gij = i == j ? grid.metric_diag(p, i) : 0.0;
        double w = 0.0;
        if (!data.eta.is_zero())
          for (int k = 0; k < n; ++k) w += du[k] * data.eta.component(p, n, k, i, j);
        const double z = trW * gij - w;
        const double v = data.A.at(p, i, j) + lap * gij - hess.at(p, i, j) + z;
        U.set(p, i, j, v);
        scale = std::max(scale, std::abs(v));
      }
    }

    // the section-2.1 bridge identity U = (tr_g g)g - g, enforced nodewise
    double trg = 0.0;
    for (int a = 0; a < n; ++a) trg += gfield.at(p, a, a) / grid.metric_diag(p, a);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double gij = i == j ? grid.metric_diag(p, i) : 0.0;
        const double other = trg * gij - gfield.at(p, i, j);
        if (std::abs(other - U.at(p, i, j)) > identity_tol * scale)
          throw std::runtime_error(
              "assemble_U: bridge identity violated at node " + std::to_string(p) +
              " (|diff| = " + std::to_string(std::abs(other - U.at(p, i, j))) + ")");
      }
    }
  }
  return U;
}

Vec eigenvalues_wrt_g_node(const Eigen::MatrixXd& T, const Eigen::MatrixXd& g) {
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("eigenvalues_wrt_g: metric not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::MatrixXd B =
      L.triangularView<Eigen::Lower>().solve(
          L.triangularView<Eigen::Lower>().solve(T).transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  return es.eigenvalues();
}

std::vector<Vec> eigenvalues_wrt_g(const SymTensorField& T, const ProductGrid& grid) {
  std::vector<Vec> out(grid.node_count());
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    out[p] = eigenvalues_wrt_g_node(T.matrix(p), grid.metric(p));
  return out;
}

EtaHypothesisReport check_eta_hypothesis(
    const std::function<double(std::size_t, int, int, int)>& eta,
    const ProductGrid& grid, const BoundaryPatch& patch) {
  const int n = grid.dim();
  EtaHypothesisReport rep;
  for (std::size_t b = 0; b < patch.count(); ++b) {
    const std::size_t p = patch.nodes[b];
    // frame scales: s_alpha = e^{-phi/2} tangential, s_n = +-1 normal
    std::vector<double> s(n, patch.frame_scale[b]);
    s[n - 1] = patch.nu_sign[b];
    for (int k = 0; k < n; ++k) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        if (i == k) continue;
        sum += s[i] * s[i] / s[k] * eta(p, k, i, i);
      }
      rep.max_abs = std::max(rep.max_abs, std::abs(sum));
    }
  }
  return rep;
}

EtaHypothesisReport check_eta_hypothesis(const ProblemData& data, const ProductGrid& grid,
                                         const BoundaryPatch& patch) {
  const int n = grid.dim();
  return check_eta_hypothesis(
      [&](std::size_t p, int k, int i, int j) {
        return data.eta.component(p, n, k, i, j);
      },
      grid, patch);
}

}  // namespace degel
