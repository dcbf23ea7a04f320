#include "gdm/schemes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace gdm {

namespace {

using Triplet = Eigen::Triplet<double>;

void finalize(SampledOperator& s, long n_samples, int n_dofs,
              std::vector<Triplet>& trips) {
  s.op.resize(s.components * n_samples, n_dofs);
  s.op.setFromTriplets(trips.begin(), trips.end());
  s.op.makeCompressed();
}

// Gauss points and weights of the dual cell of `node` (tensor product,
// x-fastest), appended to the operator's sample list.
void append_dual_samples(const Grid& grid, long node, int order,
                         SampledOperator& s) {
  int i, j;
  grid.node_ij(node, i, j);
  const double h = grid.h;
  std::vector<double> px, wx, py, wy;
  const double x = i * h;
  gauss_segment(order, std::max(0.0, x - 0.5 * h), std::min(1.0, x + 0.5 * h),
                px, wx);
  if (grid.dim == 1) {
    for (std::size_t q = 0; q < px.size(); ++q) {
      s.coords.push_back({px[q], 0.0});
      s.weights.push_back(wx[q]);
    }
  } else {
    const double y = j * h;
    gauss_segment(order, std::max(0.0, y - 0.5 * h),
                  std::min(1.0, y + 0.5 * h), py, wy);
    for (std::size_t qy = 0; qy < py.size(); ++qy)
      for (std::size_t qx = 0; qx < px.size(); ++qx) {
        s.coords.push_back({px[qx], py[qy]});
        s.weights.push_back(wx[qx] * wy[qy]);
      }
  }
}

struct StencilEntry {
  int dof;
  double coef;
};

}  // namespace

const SampledOperator& GradientDiscretisation::recon(Recon which) const {
  switch (which) {
    case Recon::pi: return pi;
    case Recon::grad: return grad;
    default: return lap;
  }
}

Eigen::SparseMatrix<double> GradientDiscretisation::gram(Recon which) const {
  const SampledOperator& s = recon(which);
  const long S = s.n_samples();
  Eigen::VectorXd w(s.components * S);
  for (int c = 0; c < s.components; ++c)
    for (long q = 0; q < S; ++q) w[c * S + q] = s.weights[q];
  Eigen::SparseMatrix<double> G = s.op.transpose() * w.asDiagonal() * s.op;
  G.makeCompressed();
  return G;
}

GradientDiscretisation assemble_fd(const Grid& grid, int quad_order) {
  const int n = grid.n;
  const int d = grid.dim;
  const double h = grid.h;
  const double ih2 = 1.0 / (h * h);

  GradientDiscretisation gd;
  gd.scheme_id = d == 1 ? "fd1d" : "fd2d";
  gd.grid = grid;
  gd.n_dofs = static_cast<int>(grid.interior_count());
  gd.grad.components = d;

  const auto is_int = [&](int i, int j) {
    return i >= 1 && i <= n - 1 && (d == 1 || (j >= 1 && j <= n - 1));
  };
  const auto dof_of = [&](int i, int j) {
    return d == 1 ? i - 1 : (j - 1) * (n - 1) + (i - 1);
  };

  // Sum of per-axis second differences; values at boundary nodes are zero
  // and the ghost value across the boundary mirrors the first interior
  // neighbour, which turns the stencil at a boundary node into 2*w(1)/h^2.
  const auto lap_stencil = [&](int i, int j) {
    std::vector<StencilEntry> es;
    const auto add = [&](int ii, int jj, double c) {
      if (is_int(ii, jj)) es.push_back({dof_of(ii, jj), c});
    };
    if (i == 0)
      add(1, j, 2.0 * ih2);
    else if (i == n)
      add(n - 1, j, 2.0 * ih2);
    else {
      add(i - 1, j, ih2);
      add(i, j, -2.0 * ih2);
      add(i + 1, j, ih2);
    }
    if (d == 2) {
      if (j == 0)
        add(i, 1, 2.0 * ih2);
      else if (j == n)
        add(i, n - 1, 2.0 * ih2);
      else {
        add(i, j - 1, ih2);
        add(i, j, -2.0 * ih2);
        add(i, j + 1, ih2);
      }
    }
    return es;
  };

  // Centered first difference along `axis`; identically zero at boundary
  // nodes (clamped trace).
  const auto grad_stencil = [&](int i, int j, int axis) {
    std::vector<StencilEntry> es;
    if (i == 0 || i == n || (d == 2 && (j == 0 || j == n))) return es;
    const double c = 1.0 / (2.0 * h);
    const auto add = [&](int ii, int jj, double v) {
      if (is_int(ii, jj)) es.push_back({dof_of(ii, jj), v});
    };
    if (axis == 0) {
      add(i - 1, j, -c);
      add(i + 1, j, c);
    } else {
      add(i, j - 1, -c);
      add(i, j + 1, c);
    }
    return es;
  };

  const long G = d == 1 ? quad_order : quad_order * quad_order;
  const long n_nodes = grid.node_count();

  // lap and grad sample every dual cell, node-major.
  std::vector<Triplet> lap_trips, grad_trips, pi_trips;
  for (long node = 0; node < n_nodes; ++node) {
    append_dual_samples(grid, node, quad_order, gd.lap);
    int i, j;
    grid.node_ij(node, i, j);
    const auto les = lap_stencil(i, j);
    for (long k = 0; k < G; ++k)
      for (const auto& e : les) lap_trips.emplace_back(node * G + k, e.dof, e.coef);
    for (int axis = 0; axis < d; ++axis) {
      const auto ges = grad_stencil(i, j, axis);
      for (long k = 0; k < G; ++k)
        for (const auto& e : ges)
          grad_trips.emplace_back(axis * (n_nodes * G) + node * G + k, e.dof,
                                  e.coef);
    }
  }
  gd.grad.weights = gd.lap.weights;
  gd.grad.coords = gd.lap.coords;

  // pi samples interior dual cells only, in dof order.
  for (long node = 0; node < n_nodes; ++node) {
    if (grid.is_boundary(node)) continue;
    int i, j;
    grid.node_ij(node, i, j);
    const long base = static_cast<long>(gd.pi.weights.size());
    append_dual_samples(grid, node, quad_order, gd.pi);
    for (long k = 0; k < G; ++k)
      pi_trips.emplace_back(base + k, dof_of(i, j), 1.0);
    gd.constraint_points.push_back({dof_of(i, j), grid.node_coord(node)});
  }

  finalize(gd.lap, n_nodes * G, gd.n_dofs, lap_trips);
  finalize(gd.grad, n_nodes * G, gd.n_dofs, grad_trips);
  finalize(gd.pi, grid.interior_count() * G, gd.n_dofs, pi_trips);
  return gd;
}

GradientDiscretisation assemble_hermite(const Grid& grid, int quad_order) {
  if (grid.dim != 1)
    throw std::invalid_argument("assemble_hermite: grid must be 1-dimensional");
  const int n = grid.n;
  const double h = grid.h;

  GradientDiscretisation gd;
  gd.scheme_id = "hermite1d";
  gd.grid = grid;
  gd.n_dofs = 2 * (n - 1);

  // Cubic Hermite basis on the reference cell t in [0,1], ordered
  // (value left, slope left, value right, slope right); slope shapes carry
  // a factor h so the slope dof is the physical derivative.
  const auto basis = [](double t) {
    return std::array<double, 4>{1 - 3 * t * t + 2 * t * t * t,
                                 t - 2 * t * t + t * t * t,
                                 3 * t * t - 2 * t * t * t,
                                 -t * t + t * t * t};
  };
  const auto dbasis = [](double t) {
    return std::array<double, 4>{-6 * t + 6 * t * t, 1 - 4 * t + 3 * t * t,
                                 6 * t - 6 * t * t, -2 * t + 3 * t * t};
  };
  const auto d2basis = [](double t) {
    return std::array<double, 4>{-6 + 12 * t, -4 + 6 * t, 6 - 12 * t,
                                 -2 + 6 * t};
  };

  // Global dof of (node, kind): -1 for clamped boundary nodes.
  const auto dof_of = [&](int node, int kind) {
    if (node < 1 || node > n - 1) return -1;
    return 2 * (node - 1) + kind;
  };

  std::vector<Triplet> pi_trips, grad_trips, lap_trips;
  std::vector<double> px, wx;
  for (int cell = 0; cell < n; ++cell) {
    gauss_segment(quad_order, cell * h, (cell + 1) * h, px, wx);
    const int local_dofs[4] = {dof_of(cell, 0), dof_of(cell, 1),
                               dof_of(cell + 1, 0), dof_of(cell + 1, 1)};
    // Slope shapes are scaled by h, derivatives divide by h per order.
    const double scale[4] = {1.0, h, 1.0, h};
    for (int q = 0; q < quad_order; ++q) {
      const long row = static_cast<long>(cell) * quad_order + q;
      const double t = (px[q] - cell * h) / h;
      gd.pi.coords.push_back({px[q], 0.0});
      gd.pi.weights.push_back(wx[q]);
      const auto b0 = basis(t);
      const auto b1 = dbasis(t);
      const auto b2 = d2basis(t);
      for (int l = 0; l < 4; ++l) {
        if (local_dofs[l] < 0) continue;
        pi_trips.emplace_back(row, local_dofs[l], scale[l] * b0[l]);
        grad_trips.emplace_back(row, local_dofs[l], scale[l] * b1[l] / h);
        lap_trips.emplace_back(row, local_dofs[l], scale[l] * b2[l] / (h * h));
      }
    }
  }
  gd.grad.weights = gd.pi.weights;
  gd.grad.coords = gd.pi.coords;
  gd.lap.weights = gd.pi.weights;
  gd.lap.coords = gd.pi.coords;

  const long S = static_cast<long>(n) * quad_order;
  finalize(gd.pi, S, gd.n_dofs, pi_trips);
  finalize(gd.grad, S, gd.n_dofs, grad_trips);
  finalize(gd.lap, S, gd.n_dofs, lap_trips);

  // The obstacle binds the value unknowns at the interior nodes.
  for (int node = 1; node <= n - 1; ++node)
    gd.constraint_points.push_back({dof_of(node, 0), {node * h, 0.0}});
  return gd;
}

int scheme_dim(const std::string& id) {
  if (id == "fd1d" || id == "hermite1d") return 1;
  if (id == "fd2d") return 2;
  throw std::invalid_argument("unknown scheme '" + id + "'");
}

GradientDiscretisation assemble_scheme(const std::string& id, int n,
                                       int quad_order) {
  const int d = scheme_dim(id);
  const Grid grid = build_grid(d, n);
  if (id == "hermite1d") return assemble_hermite(grid, quad_order);
  return assemble_fd(grid, quad_order);
}

Eigen::VectorXd apply_operator(const GradientDiscretisation& gd, Recon which,
                               const Eigen::VectorXd& w) {
  const SampledOperator& s = gd.recon(which);
  if (w.size() != s.op.cols())
    throw std::invalid_argument("apply_operator: coefficient size mismatch");
  return s.op * w;
}

double l2_norm(const GradientDiscretisation& gd, Recon which,
               const Eigen::VectorXd& field) {
  const SampledOperator& s = gd.recon(which);
  const long S = s.n_samples();
  if (field.size() != s.components * S)
    throw std::invalid_argument("l2_norm: field size mismatch");
  double acc = 0.0;
  for (long q = 0; q < S; ++q) {
    double sq = 0.0;
    for (int c = 0; c < s.components; ++c) sq += field[c * S + q] * field[c * S + q];
    acc += s.weights[q] * sq;
  }
  return std::sqrt(acc);
}

double l2_error(const GradientDiscretisation& gd, Recon which,
                const Eigen::VectorXd& w, const ScalarField& exact) {
  const SampledOperator& s = gd.recon(which);
  if (s.components != 1)
    throw std::invalid_argument("l2_error: scalar reconstruction expected");
  Eigen::VectorXd field = apply_operator(gd, which, w);
  const long S = s.n_samples();
  double acc = 0.0;
  for (long q = 0; q < S; ++q) {
    const double e = field[q] - exact(s.coords[q]);
    acc += s.weights[q] * e * e;
  }
  return std::sqrt(acc);
}

double l2_error_grad(const GradientDiscretisation& gd, const Eigen::VectorXd& w,
                     const VectorField& exact) {
  const SampledOperator& s = gd.grad;
  Eigen::VectorXd field = apply_operator(gd, Recon::grad, w);
  const long S = s.n_samples();
  double acc = 0.0;
  for (long q = 0; q < S; ++q) {
    const Vec2 g = exact(s.coords[q]);
    double sq = 0.0;
    for (int c = 0; c < s.components; ++c) {
      const double e = field[c * S + q] - g[c];
      sq += e * e;
    }
    acc += s.weights[q] * sq;
  }
  return std::sqrt(acc);
}

}  // namespace gdm
