#pragma once

#include <cstddef>
#include <vector>

#include "degel/grid.hpp"

namespace degel {

/// Geometry of the two faces x_n = 0 and x_n = 1.  The orthonormal tangent
/// frame is e_alpha = e^{-phi/2} d/dx_alpha and nu is the unit inner normal
/// (+d/dx_n on side 0, -d/dx_n on side 1).  The second fundamental form is
/// taken with respect to -nu, so mean concavity reads H <= 0.
struct BoundaryPatch {
  std::vector<std::size_t> nodes;
  std::vector<int> side;           // 0 or 1
  std::vector<double> frame_scale; // e^{-phi/2}
  std::vector<double> nu_sign;     // +1 / -1 (component along d/dx_n)
  std::vector<double> normal_dwarp;  // grad_nu phi
  SymTensorField second_fundamental;  // (n-1)x(n-1) frame components
  ScalarField mean_curvature;

  std::size_t count() const { return nodes.size(); }
};

BoundaryPatch boundary_geometry(const ProductGrid& grid, const ChristoffelField& chris);

struct MeanConcaveReport {
  bool mean_concave = false;  // H <= tol at every boundary node
  bool concave = false;       // II negative semidefinite at every boundary node
  double max_mean_curvature = 0.0;
  double max_II_eigenvalue = 0.0;
  std::vector<std::size_t> mean_violations;  // patch positions
};

MeanConcaveReport check_mean_concave(const BoundaryPatch& patch, double tol = 1e-10);

/// sigma: geodesic distance to the boundary faces.  For the warped slab metric
/// this is min(x_n, 1-x_n) exactly (g_nn = 1 and no cross terms).
ScalarField boundary_distance(const ProductGrid& grid);

/// rho: geodesic distance to the node x0, first-order fast marching for the
/// diagonal metric, with torus wrap on the periodic axes.
ScalarField geodesic_distance(const ProductGrid& grid, std::size_t x0);

struct DistanceFields {
  ScalarField sigma;
  ScalarField rho;
};

/// Both distance fields anchored at a boundary node; throws when x0 is not on
/// the geometric boundary.
DistanceFields distance_fields(const ProductGrid& grid, std::size_t x0);

/// Frame orthonormality residual max |g(e_a, e_b) - delta_ab| over one node.
double frame_orthonormality_residual(const ProductGrid& grid, const BoundaryPatch& patch,
                                     std::size_t patch_pos);

}  // namespace degel
