#include "degel/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace degel {

SymTensorField::SymTensorField(int n, std::size_t nodes)
    : n_(n), stride_(n * (n + 1) / 2), nodes_(nodes), a_(stride_ * nodes, 0.0) {}

Eigen::MatrixXd SymTensorField::matrix(std::size_t node) const {
  Eigen::MatrixXd m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = i; j < n_; ++j) m(i, j) = m(j, i) = at(node, i, j);
  return m;
}

void SymTensorField::set_matrix(std::size_t node, const Eigen::MatrixXd& m) {
  for (int i = 0; i < n_; ++i)
    for (int j = i; j < n_; ++j) set(node, i, j, 0.5 * (m(i, j) + m(j, i)));
}

ProductGrid::ProductGrid(const std::vector<int>& shape, std::vector<bool> periodic)
    : n_(static_cast<int>(shape.size())), shape_(shape), periodic_(std::move(periodic)) {
  if (n_ < 2) throw std::invalid_argument("grid needs dimension >= 2");
  h_.resize(n_);
  divisor_.resize(n_);
  stride_.resize(n_);
  count_ = 1;
  for (int a = 0; a < n_; ++a) {
    const int minimum = periodic_[a] ? 4 : 5;
    if (shape_[a] < minimum)
      throw std::invalid_argument("axis " + std::to_string(a + 1) + " needs >= " +
                                  std::to_string(minimum) + " nodes for the stencils");
    divisor_[a] = periodic_[a] ? shape_[a] : shape_[a] - 1;
    h_[a] = 1.0 / divisor_[a];
    stride_[a] = count_;
    count_ *= static_cast<std::size_t>(shape_[a]);
  }
  warp_.assign(count_, 0.0);
}

ProductGrid ProductGrid::slab(const std::vector<int>& shape) {
  std::vector<bool> p(shape.size(), true);
  p.back() = false;
  return ProductGrid(shape, std::move(p));
}

ProductGrid ProductGrid::box(const std::vector<int>& shape) {
  return ProductGrid(shape, std::vector<bool>(shape.size(), false));
}

void ProductGrid::set_warp(const ScalarField& phi) {
  if (phi.size() != count_) throw std::invalid_argument("warp field size mismatch");
  warp_ = phi;
}

void ProductGrid::set_warp(const Expression& phi_expr) {
  warp_ = sample(phi_expr);
}

std::size_t ProductGrid::index(const std::vector<int>& c) const {
  std::size_t idx = 0;
  for (int a = 0; a < n_; ++a) idx += static_cast<std::size_t>(c[a]) * stride_[a];
  return idx;
}

void ProductGrid::coords_of(std::size_t node, int* out) const {
  for (int a = 0; a < n_; ++a) out[a] = axis_index(a, node);
}

Eigen::VectorXd ProductGrid::position(std::size_t node) const {
  Eigen::VectorXd x(n_);
  for (int a = 0; a < n_; ++a) x(a) = coordinate(a, axis_index(a, node));
  return x;
}

bool ProductGrid::is_boundary(std::size_t node) const {
  for (int a = 0; a < n_; ++a) {
    if (periodic_[a]) continue;
    const int i = axis_index(a, node);
    if (i == 0 || i == shape_[a] - 1) return true;
  }
  return false;
}

bool ProductGrid::on_normal_face(std::size_t node, int side) const {
  const int i = axis_index(n_ - 1, node);
  return side == 0 ? i == 0 : i == shape_[n_ - 1] - 1;
}

double ProductGrid::metric_diag(std::size_t node, int axis) const {
  return axis == n_ - 1 ? 1.0 : std::exp(warp_[node]);
}

Eigen::MatrixXd ProductGrid::metric(std::size_t node) const {
  Eigen::VectorXd d(n_);
  for (int a = 0; a < n_; ++a) d(a) = metric_diag(node, a);
  return d.asDiagonal();
}

int ProductGrid::d1_stencil(int axis, std::size_t node, StencilEntry out[3]) const {
  const int i = axis_index(axis, node);
  const int N = shape_[axis];
  const double h = h_[axis];
  if (periodic_[axis]) {
    const int im = (i + N - 1) % N, ip = (i + 1) % N;
    out[0] = {shifted(node, axis, i, im), -0.5 / h};
    out[1] = {shifted(node, axis, i, ip), 0.5 / h};
    return 2;
  }
  if (i == 0) {
    out[0] = {node, -1.5 / h};
    out[1] = {shifted(node, axis, i, 1), 2.0 / h};
    out[2] = {shifted(node, axis, i, 2), -0.5 / h};
    return 3;
  }
  if (i == N - 1) {
    out[0] = {node, 1.5 / h};
    out[1] = {shifted(node, axis, i, N - 2), -2.0 / h};
    out[2] = {shifted(node, axis, i, N - 3), 0.5 / h};
    return 3;
  }
  out[0] = {shifted(node, axis, i, i - 1), -0.5 / h};
  out[1] = {shifted(node, axis, i, i + 1), 0.5 / h};
  return 2;
}

int ProductGrid::d2_stencil(int axis, std::size_t node, StencilEntry out[4]) const {
  const int i = axis_index(axis, node);
  const int N = shape_[axis];
  const double h2 = h_[axis] * h_[axis];
  if (periodic_[axis]) {
    const int im = (i + N - 1) % N, ip = (i + 1) % N;
    out[0] = {shifted(node, axis, i, im), 1.0 / h2};
    out[1] = {node, -2.0 / h2};
    out[2] = {shifted(node, axis, i, ip), 1.0 / h2};
    return 3;
  }
  if (i == 0) {
    out[0] = {node, 2.0 / h2};
    out[1] = {shifted(node, axis, i, 1), -5.0 / h2};
    out[2] = {shifted(node, axis, i, 2), 4.0 / h2};
    out[3] = {shifted(node, axis, i, 3), -1.0 / h2};
    return 4;
  }
  if (i == N - 1) {
    out[0] = {node, 2.0 / h2};
    out[1] = {shifted(node, axis, i, N - 2), -5.0 / h2};
    out[2] = {shifted(node, axis, i, N - 3), 4.0 / h2};
    out[3] = {shifted(node, axis, i, N - 4), -1.0 / h2};
    return 4;
  }
  out[0] = {shifted(node, axis, i, i - 1), 1.0 / h2};
  out[1] = {node, -2.0 / h2};
  out[2] = {shifted(node, axis, i, i + 1), 1.0 / h2};
  return 3;
}

double ProductGrid::d1(const ScalarField& u, int axis, std::size_t node) const {
  StencilEntry st[3];
  const int m = d1_stencil(axis, node, st);
  double r = 0.0;
  for (int q = 0; q < m; ++q) r += st[q].w * u[st[q].node];
  return r;
}

double ProductGrid::d2(const ScalarField& u, int axis, std::size_t node) const {
  StencilEntry st[4];
  const int m = d2_stencil(axis, node, st);
  double r = 0.0;
  for (int q = 0; q < m; ++q) r += st[q].w * u[st[q].node];
  return r;
}

double ProductGrid::dmixed(const ScalarField& u, int a, int b, std::size_t node) const {
  StencilEntry sa[3];
  const int ma = d1_stencil(a, node, sa);
  double r = 0.0;
  for (int q = 0; q < ma; ++q) r += sa[q].w * d1(u, b, sa[q].node);
  return r;
}

ScalarField ProductGrid::sample(const Expression& e) const {
  ScalarField f(count_);
  for (std::size_t p = 0; p < count_; ++p) f[p] = e.eval(position(p));
  return f;
}

ChristoffelField::ChristoffelField(const ProductGrid& grid)
    : n_(grid.dim()),
      dphi_(grid.node_count() * grid.dim()),
      ephi_(grid.node_count()) {
  const ScalarField& phi = grid.warp_field();
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    for (int a = 0; a < n_; ++a) dphi_[p * n_ + a] = grid.d1(phi, a, p);
    ephi_[p] = std::exp(phi[p]);
  }
}

double ChristoffelField::gamma(std::size_t node, int k, int i, int j) const {
  const int nn = n_ - 1;  // index of the bounded axis
  const bool iw = i < nn, jw = j < nn, kw = k < nn;
  if (iw && jw && kw) {
    double r = 0.0;
    if (j == k) r += dphi(node, i);
    if (i == k) r += dphi(node, j);
    if (i == j) r -= dphi(node, k);
    return 0.5 * r;
  }
  if (iw && jw && !kw) return i == j ? -0.5 * ephi_[node] * dphi(node, nn) : 0.0;
  if (iw && !jw && kw) return i == k ? 0.5 * dphi(node, nn) : 0.0;
  if (!iw && jw && kw) return j == k ? 0.5 * dphi(node, nn) : 0.0;
  return 0.0;  // Gamma^n_{in}, Gamma^*_{nn}
}

ChristoffelField christoffels(const ProductGrid& grid) { return ChristoffelField(grid); }

SymTensorField covariant_hessian(const ProductGrid& grid, const ChristoffelField& chris,
                                 const ScalarField& u) {
  const int n = grid.dim();
  SymTensorField hess(n, grid.node_count());
  std::vector<double> du(n);
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    for (int a = 0; a < n; ++a) du[a] = grid.d1(u, a, p);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double v = (i == j) ? grid.d2(u, i, p) : grid.dmixed(u, i, j, p);
        for (int l = 0; l < n; ++l) v -= chris.gamma(p, l, i, j) * du[l];
        hess.set(p, i, j, v);
      }
    }
  }
  return hess;
}

ScalarField laplacian(const ProductGrid& grid, const ChristoffelField& chris,
                      const ScalarField& u) {
  const int n = grid.dim();
  const SymTensorField hess = covariant_hessian(grid, chris, u);
  ScalarField lap(grid.node_count());
  for (std::size_t p = 0; p < grid.node_count(); ++p) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += hess.at(p, a, a) / grid.metric_diag(p, a);
    lap[p] = s;
  }
  return lap;
}

double gradient_norm(const ProductGrid& grid, const ScalarField& u, std::size_t node) {
  double s = 0.0;
  for (int a = 0; a < grid.dim(); ++a) {
    const double da = grid.d1(u, a, node);
    s += da * da / grid.metric_diag(node, a);
  }
  return std::sqrt(s);
}

double sup_gradient_norm(const ProductGrid& grid, const ScalarField& u) {
  double s = 0.0;
  for (std::size_t p = 0; p < grid.node_count(); ++p)
    s = std::max(s, gradient_norm(grid, u, p));
  return s;
}

}  // namespace degel
