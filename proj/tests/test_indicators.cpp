#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "gdm/indicators.hpp"

using namespace gdm;

namespace {

// Exact problem whose obstacle coincides with the solution everywhere, so
// the contact force is a genuine positive constant: psi = x^2(1-x)^2,
// f = 24 + 50, lambda = 50.
ObstacleProblem touching_problem() {
  ObstacleProblem p = catalog("no-contact-1d");
  p.id = "touching";
  p.load = [](const Point&) { return 74.0; };
  p.obstacle = p.exact->value;
  return p;
}

}  // namespace

TEST_SUITE("indicators") {

TEST_CASE("theorem_rhs: frozen coefficient audit") {
  const BoundTriple t = theorem_rhs(2.0, 1.0, 1.0, 1.0);
  const double s2 = std::sqrt(2.0);
  CHECK(std::abs(t.rhs_pi - (2.0 * s2 + 5.0)) <= 1e-12);
  CHECK(t.rhs_grad == t.rhs_pi);
  CHECK(std::abs(t.rhs_lap - (2.0 + s2)) <= 1e-12);
}

TEST_CASE("theorem_rhs: homogeneity and residual clamp") {
  const BoundTriple z = theorem_rhs(3.7, 0.0, 0.0, 0.0);
  CHECK(z.rhs_pi == 0.0);
  CHECK(z.rhs_lap == 0.0);
  const BoundTriple neg = theorem_rhs(2.0, 0.0, 0.0, -5.0);
  CHECK(neg.rhs_pi == 0.0);
  CHECK(neg.rhs_lap == 0.0);
  // linear in W and S
  const BoundTriple a = theorem_rhs(2.0, 1.0, 0.0, 0.0);
  const BoundTriple b = theorem_rhs(2.0, 3.0, 0.0, 0.0);
  CHECK(std::abs(b.rhs_pi - 3.0 * a.rhs_pi) <= 1e-12);
}

TEST_CASE("coercivity certifies the discrete Poincare inequalities") {
  std::mt19937 rng(51);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const char* id : {"fd1d", "fd2d", "hermite1d"}) {
    const GradientDiscretisation gd = assemble_scheme(id, 16);
    const double C = compute_coercivity(gd);
    CAPTURE(id);
    CHECK(C > 0.0);
    for (int rep = 0; rep < 20; ++rep) {
      Eigen::VectorXd w(gd.n_dofs);
      for (int i = 0; i < gd.n_dofs; ++i) w[i] = u(rng);
      const double nl = l2_norm(gd, Recon::lap, apply_operator(gd, Recon::lap, w));
      const double np = l2_norm(gd, Recon::pi, apply_operator(gd, Recon::pi, w));
      const double ng =
          l2_norm(gd, Recon::grad, apply_operator(gd, Recon::grad, w));
      CHECK(np <= C * nl * (1.0 + 1e-8));
      CHECK(ng <= C * nl * (1.0 + 1e-8));
    }
  }
}

TEST_CASE("coercivity is tolerance- and grid-stable") {
  const GradientDiscretisation g32 = assemble_fd(build_grid(1, 32));
  const double c8 = compute_coercivity(g32, 1e-8);
  const double c10 = compute_coercivity(g32, 1e-10);
  CHECK(std::abs(c8 - c10) <= 1e-6 * c10);
  const double c64 = compute_coercivity(assemble_fd(build_grid(1, 64)));
  CHECK(std::abs(c64 - c10) <= 0.1 * c10);
}

TEST_CASE("limit-conformity: zero field gives zero defect") {
  const GradientDiscretisation gd = assemble_fd(build_grid(1, 16));
  const ScalarField zero = [](const Point&) { return 0.0; };
  CHECK(compute_limit_conformity(gd, zero, zero) <= 1e-14);
}

TEST_CASE("limit-conformity: conforming scheme sits at quadrature level") {
  // Hermite reconstructions are honest derivatives, so the defect against
  // the catalog pair (polynomials integrated exactly) is machine zero.
  const GradientDiscretisation gd = assemble_hermite(build_grid(1, 32));
  const ObstacleProblem p = catalog("no-contact-1d");
  const double w = compute_limit_conformity(gd, p.exact->laplacian,
                                            p.exact->bilaplacian);
  CHECK(w <= 1e-10);
}

TEST_CASE("limit-conformity: fd defect decreases monotonically") {
  const ObstacleProblem p = catalog("no-contact-1d");
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {16, 32, 64, 128}) {
    const GradientDiscretisation gd = assemble_fd(build_grid(1, n));
    const double w =
        compute_limit_conformity(gd, p.exact->laplacian, p.exact->bilaplacian);
    CAPTURE(n);
    CHECK(w > 0.0);
    CHECK(w < prev);
    prev = w;
  }
}

TEST_CASE("limit-conformity: quadrature order drives the conforming defect") {
  // With a non-polynomial pair the order-3 defect is pure quadrature error
  // and must drop by far more than 10x at order 5.
  const ScalarField v = [](const Point& x) {
    return std::sin(3.0 * std::numbers::pi * x[0]);
  };
  const ScalarField lap_v = [](const Point& x) {
    return -9.0 * std::numbers::pi * std::numbers::pi *
           std::sin(3.0 * std::numbers::pi * x[0]);
  };
  const Grid g = build_grid(1, 16);
  const double w3 = compute_limit_conformity(assemble_hermite(g, 3), v, lap_v);
  const double w5 = compute_limit_conformity(assemble_hermite(g, 5), v, lap_v);
  CHECK(w3 > 1e-9);  // meaningfully above the roundoff floor
  CHECK(w5 <= w3 / 10.0);
}

TEST_CASE("interpolate: zero problem lands on the origin") {
  const GradientDiscretisation gd = assemble_fd(build_grid(1, 16));
  const Interpolant ip = interpolate(gd, catalog("zero"));
  CHECK(ip.coeffs.lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK(ip.s_tilde <= 1e-12);
}

TEST_CASE("interpolate: respects the obstacle and shrinks with refinement") {
  const ObstacleProblem p = catalog("no-contact-1d");
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {8, 16, 32}) {
    const GradientDiscretisation gd = assemble_hermite(build_grid(1, n));
    const Interpolant ip = interpolate(gd, p);
    for (const auto& cp : gd.constraint_points)
      CHECK(ip.coeffs[cp.dof] <= p.obstacle(cp.x) + 1e-10);
    CAPTURE(n);
    CHECK(ip.s_tilde < prev);
    prev = ip.s_tilde;
  }
}

TEST_CASE("interpolate rejects problems without exact data") {
  const GradientDiscretisation gd = assemble_fd(build_grid(1, 8));
  CHECK_THROWS_AS(interpolate(gd, catalog("contact-1d")),
                  std::invalid_argument);
}

TEST_CASE("consistency decay rates (hermite fast, fd first order)") {
  const ObstacleProblem p = catalog("no-contact-1d");
  const double h8 =
      interpolate(assemble_hermite(build_grid(1, 8)), p).s_tilde;
  const double h16 =
      interpolate(assemble_hermite(build_grid(1, 16)), p).s_tilde;
  CHECK(h8 / h16 >= std::pow(2.0, 1.5));
  const double f16 = interpolate(assemble_fd(build_grid(1, 16)), p).s_tilde;
  const double f32 = interpolate(assemble_fd(build_grid(1, 32)), p).s_tilde;
  CHECK(f16 / f32 >= std::pow(2.0, 0.7));
}

TEST_CASE("unconstrained bracket: dropping the obstacle cannot increase "
          "the distance") {
  const ObstacleProblem p = touching_problem();
  ObstacleProblem free_p = p;
  free_p.obstacle = [](const Point&) {
    return std::numeric_limits<double>::infinity();
  };
  const GradientDiscretisation gd = assemble_fd(build_grid(1, 16));
  const double s_con = interpolate(gd, p).s_tilde;
  const double s_unc = interpolate(gd, free_p).s_tilde;
  CHECK(s_unc <= s_con + 1e-12);
}

TEST_CASE("residual term: zero for snug loads, bounded for touching") {
  const GradientDiscretisation gd = assemble_fd(build_grid(1, 16));
  const ObstacleProblem snug = catalog("no-contact-1d");
  const Interpolant ip0 = interpolate(gd, snug);
  CHECK(std::abs(compute_residual_term(gd, snug, ip0.coeffs)) <= 1e-15);

  const ObstacleProblem touch = touching_problem();
  const Interpolant ip = interpolate(gd, touch);
  const double R = compute_residual_term(gd, touch, ip.coeffs);
  // lambda = 50 everywhere and psi = cbar, so Cauchy-Schwarz in the sample
  // inner product gives |R| <= 50 ||cbar - Pi w*|| ||1|| <= 50 s_tilde.
  CHECK(std::abs(R) <= 50.0 * ip.s_tilde * (1.0 + 1e-12) + 1e-12);
}

TEST_CASE("verify_error_bounds: nonnegative margins on exact problems") {
  for (const char* id : {"fd1d", "hermite1d"}) {
    const GradientDiscretisation gd = assemble_scheme(id, 16);
    const ObstacleProblem p = catalog("no-contact-1d");
    const QpInstance qp = build_qp(gd, p);
    const DiscreteSolution sol = solve_active_set(qp);
    const IndicatorReport rep = verify_error_bounds(gd, p, sol);
    CAPTURE(id);
    CHECK(rep.C_D > 0.0);
    CHECK(rep.S_tilde >= 0.0);
    CHECK(rep.W_D >= 0.0);
    CHECK(rep.margin_pi >= 0.0);
    CHECK(rep.margin_grad >= 0.0);
    CHECK(rep.margin_lap >= 0.0);
    CHECK(rep.rhs_pi == rep.rhs_grad);
    CHECK(rep.interpolant_coeffs.size() == gd.n_dofs);
  }
}

TEST_CASE("verify_error_bounds: touching problem keeps positive margins") {
  const GradientDiscretisation gd = assemble_fd(build_grid(1, 16));
  const ObstacleProblem p = touching_problem();
  const QpInstance qp = build_qp(gd, p);
  const DiscreteSolution sol = solve_active_set(qp);
  const IndicatorReport rep = verify_error_bounds(gd, p, sol);
  CHECK(std::abs(rep.R_D) <= 50.0 * rep.S_tilde * (1.0 + 1e-12) + 1e-12);
  CHECK(rep.margin_pi >= 0.0);
  CHECK(rep.margin_grad >= 0.0);
  CHECK(rep.margin_lap >= 0.0);
}

TEST_CASE("verify_error_bounds rejects problems without exact data") {
  const GradientDiscretisation gd = assemble_fd(build_grid(1, 8));
  const QpInstance qp = build_qp(gd, catalog("contact-1d"));
  const DiscreteSolution sol = solve_active_set(qp);
  CHECK_THROWS_AS(verify_error_bounds(gd, catalog("contact-1d"), sol),
                  std::invalid_argument);
}

}  // TEST_SUITE
