#include "gdm/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace gdm {

long Grid::node_count() const {
  const long per = nodes_per_axis();
  return dim == 1 ? per : per * per;
}

long Grid::interior_count() const {
  const long per = n - 1;
  return dim == 1 ? per : per * per;
}

void Grid::node_ij(long node, int& i, int& j) const {
  if (dim == 1) {
    i = static_cast<int>(node);
    j = 0;
  } else {
    i = static_cast<int>(node % nodes_per_axis());
    j = static_cast<int>(node / nodes_per_axis());
  }
}

long Grid::node_id(int i, int j) const {
  return dim == 1 ? i : static_cast<long>(j) * nodes_per_axis() + i;
}

Point Grid::node_coord(long node) const {
  int i, j;
  node_ij(node, i, j);
  return {i * h, dim == 2 ? j * h : 0.0};
}

bool Grid::is_boundary(long node) const {
  int i, j;
  node_ij(node, i, j);
  if (i == 0 || i == n) return true;
  return dim == 2 && (j == 0 || j == n);
}

double Grid::dual_volume(long node) const {
  int i, j;
  node_ij(node, i, j);
  const double vx = (i == 0 || i == n) ? 0.5 * h : h;
  if (dim == 1) return vx;
  const double vy = (j == 0 || j == n) ? 0.5 * h : h;
  return vx * vy;
}

Grid build_grid(int dim, int n) {
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("build_grid: dim must be 1 or 2");
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("build_grid: n must be >= 4 and even");
  return Grid{dim, n, 1.0 / n};
}

namespace {

// Gauss-Legendre nodes and weights on [-1,1].
void reference_gauss(int order, std::vector<double>& x, std::vector<double>& w) {
  switch (order) {
    case 3: {
      const double a = std::sqrt(3.0 / 5.0);
      x = {-a, 0.0, a};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    }
    case 5: {
      const double c = 2.0 * std::sqrt(10.0 / 7.0);
      const double x1 = std::sqrt(5.0 - c) / 3.0;
      const double x2 = std::sqrt(5.0 + c) / 3.0;
      const double s = 13.0 * std::sqrt(70.0);
      const double w1 = (322.0 + s) / 900.0;
      const double w2 = (322.0 - s) / 900.0;
      x = {-x2, -x1, 0.0, x1, x2};
      w = {w2, w1, 128.0 / 225.0, w1, w2};
      break;
    }
    default:
      throw std::invalid_argument("gauss rule: order must be 3 or 5");
  }
}

}  // namespace

void gauss_segment(int order, double a, double b, std::vector<double>& pts,
                   std::vector<double>& wts) {
  std::vector<double> x, w;
  reference_gauss(order, x, w);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  pts.resize(x.size());
  wts.resize(w.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    pts[k] = mid + half * x[k];
    wts[k] = half * w[k];
  }
}

QuadratureRule gauss_rule(const Grid& grid, int order) {
  {
    // Validate the order up front.
    std::vector<double> x, w;
    reference_gauss(order, x, w);
  }
  QuadratureRule rule;
  rule.order = order;
  const int n = grid.n;
  const double h = grid.h;
  std::vector<double> px, wx, py, wy;
  if (grid.dim == 1) {
    for (int k = 0; k < n; ++k) {
      gauss_segment(order, k * h, (k + 1) * h, px, wx);
      for (std::size_t q = 0; q < px.size(); ++q) {
        rule.points.push_back({px[q], 0.0});
        rule.weights.push_back(wx[q]);
      }
    }
  } else {
    for (int ky = 0; ky < n; ++ky) {
      gauss_segment(order, ky * h, (ky + 1) * h, py, wy);
      for (int kx = 0; kx < n; ++kx) {
        gauss_segment(order, kx * h, (kx + 1) * h, px, wx);
        for (std::size_t qy = 0; qy < py.size(); ++qy)
          for (std::size_t qx = 0; qx < px.size(); ++qx) {
            rule.points.push_back({px[qx], py[qy]});
            rule.weights.push_back(wx[qx] * wy[qy]);
          }
      }
    }
  }
  return rule;
}

double integrate(const QuadratureRule& rule, const ScalarField& f) {
  double s = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    s += rule.weights[q] * f(rule.points[q]);
  return s;
}

}  // namespace gdm
