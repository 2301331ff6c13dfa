#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "degel/expr.hpp"

namespace degel {

using ScalarField = std::vector<double>;

/// Node-indexed symmetric n x n tensors, packed upper triangle.
class SymTensorField {
 public:
  SymTensorField() = default;
  SymTensorField(int n, std::size_t nodes);

  int dim() const { return n_; }
  std::size_t nodes() const { return nodes_; }

  double at(std::size_t node, int i, int j) const { return a_[node * stride_ + pack(i, j)]; }
  void set(std::size_t node, int i, int j, double v) { a_[node * stride_ + pack(i, j)] = v; }
  void add(std::size_t node, int i, int j, double v) { a_[node * stride_ + pack(i, j)] += v; }

  Eigen::MatrixXd matrix(std::size_t node) const;
  void set_matrix(std::size_t node, const Eigen::MatrixXd& m);

 private:
  int pack(int i, int j) const {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i - 1) / 2 + (j - i);
  }
  int n_ = 0;
  int stride_ = 0;
  std::size_t nodes_ = 0;
  std::vector<double> a_;
};

struct StencilEntry {
  std::size_t node;
  double w;
};

/// Structured grid on the product of (n-1) unit torus axes with [0,1] on the
/// last axis, carrying the warp phi of the metric g = e^phi g_X + dx^n (x) dx^n.
/// The all-bounded variant (box) is used for manufactured-solution studies and
/// keeps the same metric; only the stencil wrapping changes.
class ProductGrid {
 public:
  ProductGrid() = default;

  static ProductGrid slab(const std::vector<int>& shape);
  static ProductGrid box(const std::vector<int>& shape);

  void set_warp(const ScalarField& phi);
  void set_warp(const Expression& phi_expr);

  int dim() const { return n_; }
  std::size_t node_count() const { return count_; }
  int extent(int axis) const { return shape_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  bool periodic(int axis) const { return periodic_[axis]; }

  std::size_t index(const std::vector<int>& c) const;
  void coords_of(std::size_t node, int* out) const;
  /// Endpoint-exact: i/(N-1) on bounded axes hits 0 and 1 without roundoff.
  double coordinate(int axis, int i) const { return i / divisor_[axis]; }
  Eigen::VectorXd position(std::size_t node) const;

  /// Dirichlet nodes: on a face of any bounded axis.
  bool is_boundary(std::size_t node) const;
  /// On the geometric boundary x_n = 0 (side 0) or x_n = 1 (side 1).
  bool on_normal_face(std::size_t node, int side) const;

  double warp(std::size_t node) const { return warp_[node]; }
  const ScalarField& warp_field() const { return warp_; }
  /// g_aa at a node (the metric is diagonal: e^phi on torus axes, 1 on axis n).
  double metric_diag(std::size_t node, int axis) const;
  Eigen::MatrixXd metric(std::size_t node) const;

  // Second-order stencils: central in the interior, one-sided on bounded faces.
  int d1_stencil(int axis, std::size_t node, StencilEntry out[3]) const;
  int d2_stencil(int axis, std::size_t node, StencilEntry out[4]) const;

  double d1(const ScalarField& u, int axis, std::size_t node) const;
  double d2(const ScalarField& u, int axis, std::size_t node) const;
  double dmixed(const ScalarField& u, int a, int b, std::size_t node) const;

  /// Evaluates an expression at every node.
  ScalarField sample(const Expression& e) const;

  std::size_t stride(int axis) const { return stride_[axis]; }

 private:
  ProductGrid(const std::vector<int>& shape, std::vector<bool> periodic);
  int axis_index(int axis, std::size_t node) const {
    return static_cast<int>((node / stride_[axis]) % shape_[axis]);
  }
  std::size_t shifted(std::size_t node, int axis, int from, int to) const {
    return node + (static_cast<std::ptrdiff_t>(to) - from) * static_cast<std::ptrdiff_t>(stride_[axis]);
  }

  int n_ = 0;
  std::vector<int> shape_;
  std::vector<double> h_;
  std::vector<double> divisor_;
  std::vector<bool> periodic_;
  std::vector<std::size_t> stride_;
  std::size_t count_ = 0;
  ScalarField warp_;
};

/// Christoffel symbols of the warped product metric, semi-analytic in the
/// nodal derivatives of phi (central differences; one-sided at the faces).
class ChristoffelField {
 public:
  ChristoffelField() = default;
  explicit ChristoffelField(const ProductGrid& grid);

  double dphi(std::size_t node, int axis) const { return dphi_[node * n_ + axis]; }
  /// Gamma^k_{ij}
  double gamma(std::size_t node, int k, int i, int j) const;
  int dim() const { return n_; }

 private:
  int n_ = 0;
  std::vector<double> dphi_;
  std::vector<double> ephi_;
};

ChristoffelField christoffels(const ProductGrid& grid);

/// (nabla^2 u)_ij = d2_ij u - Gamma^l_ij d_l u, symmetric by construction.
SymTensorField covariant_hessian(const ProductGrid& grid, const ChristoffelField& chris,
                                 const ScalarField& u);
ScalarField laplacian(const ProductGrid& grid, const ChristoffelField& chris,
                      const ScalarField& u);

/// |grad u|_g at a node.
double gradient_norm(const ProductGrid& grid, const ScalarField& u, std::size_t node);
double sup_gradient_norm(const ProductGrid& grid, const ScalarField& u);

}  // namespace degel
