#include "gdm/problems.hpp"

#include <stdexcept>

namespace gdm {

namespace {

// g(t) = t^2 (1-t)^2 and derivatives; the smooth bump behind the
// no-contact benchmarks. g'''' = 24.
double g0(double t) { return t * t * (1 - t) * (1 - t); }
double g1(double t) { return 2 * t - 6 * t * t + 4 * t * t * t; }
double g2(double t) { return 2 - 12 * t + 12 * t * t; }

ObstacleProblem make_zero() {
  ObstacleProblem p;
  p.id = "zero";
  p.dim = 0;
  p.load = [](const Point&) { return 0.0; };
  p.obstacle = [](const Point&) { return 0.1; };
  ExactBundle e;
  e.value = [](const Point&) { return 0.0; };
  e.gradient = [](const Point&) { return Vec2{0.0, 0.0}; };
  e.laplacian = [](const Point&) { return 0.0; };
  e.bilaplacian = [](const Point&) { return 0.0; };
  p.exact = e;
  return p;
}

ObstacleProblem make_no_contact_1d() {
  ObstacleProblem p;
  p.id = "no-contact-1d";
  p.dim = 1;
  p.load = [](const Point&) { return 24.0; };
  p.obstacle = [](const Point&) { return 1.0; };
  ExactBundle e;
  e.value = [](const Point& x) { return g0(x[0]); };
  e.gradient = [](const Point& x) { return Vec2{g1(x[0]), 0.0}; };
  e.laplacian = [](const Point& x) { return g2(x[0]); };
  e.bilaplacian = [](const Point&) { return 24.0; };
  p.exact = e;
  return p;
}

ObstacleProblem make_no_contact_2d() {
  ObstacleProblem p;
  p.id = "no-contact-2d";
  p.dim = 2;
  // Delta^2 (g(x) g(y)) = 24 g(y) + 2 g''(x) g''(y) + 24 g(x).
  const auto bilap = [](const Point& x) {
    return 24.0 * g0(x[1]) + 2.0 * g2(x[0]) * g2(x[1]) + 24.0 * g0(x[0]);
  };
  p.load = [bilap](const Point& x) { return bilap(x); };
  p.obstacle = [](const Point&) { return 1.0; };
  ExactBundle e;
  e.value = [](const Point& x) { return g0(x[0]) * g0(x[1]); };
  e.gradient = [](const Point& x) {
    return Vec2{g1(x[0]) * g0(x[1]), g0(x[0]) * g1(x[1])};
  };
  e.laplacian = [](const Point& x) {
    return g2(x[0]) * g0(x[1]) + g0(x[0]) * g2(x[1]);
  };
  e.bilaplacian = bilap;
  p.exact = e;
  return p;
}

ObstacleProblem make_contact(const std::string& id, int dim, double load,
                             double psi) {
  ObstacleProblem p;
  p.id = id;
  p.dim = dim;
  p.load = [load](const Point&) { return load; };
  p.obstacle = [psi](const Point&) { return psi; };
  return p;
}

}  // namespace

ObstacleProblem catalog(const std::string& id) {
  if (id == "zero") return make_zero();
  if (id == "no-contact-1d") return make_no_contact_1d();
  if (id == "no-contact-2d") return make_no_contact_2d();
  if (id == "contact-1d") return make_contact(id, 1, 200.0, 0.005);
  if (id == "contact-2d") return make_contact(id, 2, 500.0, 0.002);
  throw std::invalid_argument("unknown problem '" + id + "'");
}

std::vector<std::string> catalog_ids() {
  return {"zero", "no-contact-1d", "no-contact-2d", "contact-1d", "contact-2d"};
}

ScalarField multiplier_field(const ObstacleProblem& p) {
  if (!p.exact)
    throw std::invalid_argument("multiplier_field: problem '" + p.id +
                                "' has no exact solution bundle");
  const ScalarField f = p.load;
  const ScalarField bilap = p.exact->bilaplacian;
  return [f, bilap](const Point& x) { return f(x) - bilap(x); };
}

}  // namespace gdm
