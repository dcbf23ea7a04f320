#pragma once

#include <vector>

#include "gdm/field.hpp"

namespace gdm {

// Uniform tensor-product grid on [0,1]^dim with n cells per axis.
//
// Nodes are numbered lexicographically (x fastest): in 2D the node (i,j)
// has id j*(n+1)+i. Every node carries a dual (control) cell: the cube of
// side h centered at the node, clipped to the domain. Dual cells tile the
// domain exactly.
struct Grid {
  int dim = 1;    // 1 or 2
  int n = 0;      // cells per axis, even, >= 4
  double h = 0;   // 1.0 / n

  int nodes_per_axis() const { return n + 1; }
  long node_count() const;
  long interior_count() const;   // nodes off the boundary

  void node_ij(long node, int& i, int& j) const;
  long node_id(int i, int j) const;
  Point node_coord(long node) const;
  bool is_boundary(long node) const;

  // Volume of the node's dual cell (h^dim in the interior, clipped at the
  // boundary).
  double dual_volume(long node) const;
};

// Validates dim in {1,2} and n even with n >= 4.
Grid build_grid(int dim, int n);

// Tensor-product Gauss-Legendre rule over the primal cells of a grid.
// Exact for polynomials of degree <= 2*order-1 per axis. Points are stored
// cell-major (x-fastest within each cell); weights are positive and the
// weights of one cell sum to the cell volume.
struct QuadratureRule {
  int order = 3;               // points per axis per cell; 3 or 5
  std::vector<Point> points;
  std::vector<double> weights;
};

QuadratureRule gauss_rule(const Grid& grid, int order);

double integrate(const QuadratureRule& rule, const ScalarField& f);

// Gauss-Legendre points/weights on the segment [a,b]; order in {3,5}.
void gauss_segment(int order, double a, double b, std::vector<double>& pts,
                   std::vector<double>& wts);

}  // namespace gdm
