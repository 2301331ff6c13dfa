#include "degel/geometry.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace degel {

BoundaryPatch boundary_geometry(const ProductGrid& grid, const ChristoffelField& chris) {
  const int n = grid.dim();
  std::vector<std::size_t> nodes;
  std::vector<int> side;
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    if (grid.on_normal_face(p, 0)) {
      nodes.push_back(p);
      side.push_back(0);
    } else if (grid.on_normal_face(p, 1)) {
      nodes.push_back(p);
      side.push_back(1);
    }
  }

  BoundaryPatch patch;
  patch.nodes = std::move(nodes);
  patch.side = std::move(side);
  patch.frame_scale.resize(patch.count());
  patch.nu_sign.resize(patch.count());
  patch.normal_dwarp.resize(patch.count());
  patch.second_fundamental = SymTensorField(n - 1, patch.count());
  patch.mean_curvature.assign(patch.count(), 0.0);

  for (std::size_t b = 0; b < patch.count(); ++b) {
    const std::size_t p = patch.nodes[b];
    const double sgn = patch.side[b] == 0 ? 1.0 : -1.0;
    patch.nu_sign[b] = sgn;
    patch.frame_scale[b] = std::exp(-0.5 * grid.warp(p));
    patch.normal_dwarp[b] = sgn * chris.dphi(p, n - 1);

    // II(e_a, e_b) = -g(nabla_{e_a} nu, e_b) with nu = sgn * d/dx_n
    const double s2 = patch.frame_scale[b] * patch.frame_scale[b];  // e^{-phi}
    double trace = 0.0;
    for (int a = 0; a + 1 < n; ++a) {
      for (int c = a; c + 1 < n; ++c) {
        double v = 0.0;
        for (int k = 0; k + 1 < n; ++k)
          v += chris.gamma(p, k, a, n - 1) * (k == c ? grid.metric_diag(p, c) : 0.0);
        const double II = -sgn * s2 * v;
        patch.second_fundamental.set(b, a, c, II);
        if (a == c) trace += II;
      }
    }
    patch.mean_curvature[b] = trace;
  }
  return patch;
}

MeanConcaveReport check_mean_concave(const BoundaryPatch& patch, double tol) {
  MeanConcaveReport rep;
  rep.mean_concave = true;
  rep.concave = true;
  rep.max_mean_curvature = -std::numeric_limits<double>::infinity();
  rep.max_II_eigenvalue = -std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < patch.count(); ++b) {
    const double H = patch.mean_curvature[b];
    rep.max_mean_curvature = std::max(rep.max_mean_curvature, H);
    if (H > tol) {
      rep.mean_concave = false;
      rep.mean_violations.push_back(b);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(patch.second_fundamental.matrix(b));
    const double top = es.eigenvalues().maxCoeff();
    rep.max_II_eigenvalue = std::max(rep.max_II_eigenvalue, top);
    if (top > tol) rep.concave = false;
  }
  return rep;
}

ScalarField boundary_distance(const ProductGrid& grid) {
  const int n = grid.dim();
  ScalarField sigma(grid.node_count());
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    const double xn = grid.position(p)(n - 1);
    sigma[p] = std::min(xn, 1.0 - xn);
  }
  return sigma;
}

namespace {

struct HeapItem {
  double value;
  std::size_t node;
  bool operator>(const HeapItem& o) const { return value > o.value; }
};

}  // namespace

ScalarField geodesic_distance(const ProductGrid& grid, std::size_t x0) {
  const int n = grid.dim();
  const std::size_t count = grid.node_count();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  ScalarField T(count, kInf);
  std::vector<char> accepted(count, 0);
  std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<HeapItem>> heap;

  std::vector<int> c(n);

  auto axis_neighbors = [&](std::size_t p, int axis, std::size_t out[2]) -> int {
    grid.coords_of(p, c.data());
    const int i = c[axis];
    const int N = grid.extent(axis);
    int m = 0;
    if (grid.periodic(axis)) {
      out[m++] = p + (static_cast<std::size_t>((i + N - 1) % N) - i) * grid.stride(axis);
      out[m++] = p + (static_cast<std::size_t>((i + 1) % N) - i) * grid.stride(axis);
    } else {
      if (i > 0) out[m++] = p - grid.stride(axis);
      if (i + 1 < N) out[m++] = p + grid.stride(axis);
    }
    return m;
  };

  // Upwind update: solve sum_a ((T - m_a)_+)^2 / s_a = 1 with s_a = g_aa h_a^2.
  auto solve_local = [&](std::size_t p) -> double {
    std::vector<std::pair<double, double>> terms;  // (m_a, s_a)
    for (int a = 0; a < n; ++a) {
      std::size_t nb[2];
      const int m = axis_neighbors(p, a, nb);
      double best = kInf;
      for (int q = 0; q < m; ++q)
        if (accepted[nb[q]]) best = std::min(best, T[nb[q]]);
      if (best < kInf) {
        const double h = grid.spacing(a);
        terms.emplace_back(best, grid.metric_diag(p, a) * h * h);
      }
    }
    if (terms.empty()) return kInf;
    std::sort(terms.begin(), terms.end());
    double value = kInf;
    // Use the smallest set of upwind directions consistent with the solution.
    for (std::size_t used = 1; used <= terms.size(); ++used) {
      double A = 0.0, B = 0.0, C = -1.0;
      for (std::size_t q = 0; q < used; ++q) {
        const double inv = 1.0 / terms[q].second;
        A += inv;
        B += -2.0 * terms[q].first * inv;
        C += terms[q].first * terms[q].first * inv;
      }
      const double disc = B * B - 4.0 * A * C;
      if (disc < 0.0) break;
      const double cand = (-B + std::sqrt(disc)) / (2.0 * A);
      if (used < terms.size() && cand > terms[used].first) continue;
      value = cand;
      break;
    }
    if (value == kInf) {
      // fall back to the one-directional update
      value = terms[0].first + std::sqrt(terms[0].second);
    }
    return value;
  };

  T[x0] = 0.0;
  heap.push({0.0, x0});
  while (!heap.empty()) {
    const HeapItem top = heap.top();
    heap.pop();
    if (accepted[top.node]) continue;
    accepted[top.node] = 1;
    for (int a = 0; a < n; ++a) {
      std::size_t nb[2];
      const int m = axis_neighbors(top.node, a, nb);
      for (int q = 0; q < m; ++q) {
        const std::size_t w = nb[q];
        if (accepted[w]) continue;
        const double cand = solve_local(w);
        if (cand < T[w]) {
          T[w] = cand;
          heap.push({cand, w});
        }
      }
    }
  }
  return T;
}

DistanceFields distance_fields(const ProductGrid& grid, std::size_t x0) {
  if (!grid.on_normal_face(x0, 0) && !grid.on_normal_face(x0, 1))
    throw std::invalid_argument("distance_fields: anchor node " + std::to_string(x0) +
                                " is not on the boundary");
  return {boundary_distance(grid), geodesic_distance(grid, x0)};
}

double frame_orthonormality_residual(const ProductGrid& grid, const BoundaryPatch& patch,
                                     std::size_t b) {
  const int n = grid.dim();
  const std::size_t p = patch.nodes[b];
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);  // columns: frame vectors
  for (int a = 0; a + 1 < n; ++a) E(a, a) = patch.frame_scale[b];
  E(n - 1, n - 1) = patch.nu_sign[b];
  const Eigen::MatrixXd G = E.transpose() * grid.metric(p) * E;
  return (G - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
}

}  // namespace degel
