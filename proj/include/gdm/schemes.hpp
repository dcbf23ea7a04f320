#pragma once

#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "gdm/mesh.hpp"

namespace gdm {

// A reconstruction operator together with the quadrature that realizes its
// L2 codomain. Row (c*n_samples + q) of `op` maps a coefficient vector to
// component c of the reconstruction at sample point q (component-major
// layout); `weights[q] > 0` is the quadrature weight of sample q, so
//   ||R w||^2 = sum_q weights[q] * sum_c (op*w)[c*n_samples+q]^2
// evaluates the squared L2 norm of the reconstructed field exactly within
// the scheme's piecewise-polynomial space.
struct SampledOperator {
  Eigen::SparseMatrix<double> op;
  std::vector<double> weights;
  std::vector<Point> coords;
  int components = 1;

  long n_samples() const { return static_cast<long>(weights.size()); }
};

// A degree of freedom whose coefficient value is pinned to the obstacle:
// the discrete constraint reads w[dof] <= psi(x).
struct ConstraintPoint {
  int dof;
  Point x;
};

enum class Recon { pi, grad, lap };

// Discrete space plus its three reconstructions: function (pi), gradient
// (grad, `dim` components) and Laplacian (lap). Coefficients live on
// interior nodes; the homogeneous clamped boundary is built into the
// operators.
//
// Sample layouts:
//  * finite differences: one dual cell per grid node, node-major with
//    order^dim Gauss points per dual cell (x-fastest). `pi` reconstructs
//    on interior dual cells only (in dof order); grad/lap cover every dual
//    cell, with value 0 taken on boundary nodes.
//  * Hermite: order Gauss points per primal cell, cell-major; all three
//    operators share the same samples.
struct GradientDiscretisation {
  std::string scheme_id;
  Grid grid;
  int n_dofs = 0;
  SampledOperator pi;
  SampledOperator grad;
  SampledOperator lap;
  std::vector<ConstraintPoint> constraint_points;

  const SampledOperator& recon(Recon which) const;
  // op^T diag(weights) op for the requested reconstruction; for `lap` this
  // is the stiffness matrix of the discrete bilinear form.
  Eigen::SparseMatrix<double> gram(Recon which) const;
  Eigen::SparseMatrix<double> stiffness() const { return gram(Recon::lap); }
};

// Cell-centered finite differences on the nodes of `grid` (1D or 2D):
// centered second differences per axis with mirror ghost values at the
// boundary (encodes both clamped conditions), centered first differences
// for the gradient, piecewise-constant reconstructions on dual cells.
GradientDiscretisation assemble_fd(const Grid& grid, int quad_order = 3);

// Cubic Hermite elements on a 1D grid: C^1 piecewise cubics with value and
// slope unknowns per interior node; pi/grad/lap are the exact derivatives
// of the reconstruction, so the scheme is conforming.
GradientDiscretisation assemble_hermite(const Grid& grid, int quad_order = 3);

// Dispatch by scheme id: "fd1d", "fd2d", "hermite1d".
GradientDiscretisation assemble_scheme(const std::string& id, int n,
                                       int quad_order = 3);
int scheme_dim(const std::string& id);

// Stacked reconstruction values (component-major) of the coefficient
// vector w; length components * n_samples.
Eigen::VectorXd apply_operator(const GradientDiscretisation& gd, Recon which,
                               const Eigen::VectorXd& w);

// Weighted L2 norm of a stacked sample field in the codomain of `which`.
double l2_norm(const GradientDiscretisation& gd, Recon which,
               const Eigen::VectorXd& field);

// || R w - exact || in the weighted sample norm (pi or lap).
double l2_error(const GradientDiscretisation& gd, Recon which,
                const Eigen::VectorXd& w, const ScalarField& exact);

// || grad_D w - exact || for vector-valued exact gradients.
double l2_error_grad(const GradientDiscretisation& gd,
                     const Eigen::VectorXd& w, const VectorField& exact);

}  // namespace gdm
