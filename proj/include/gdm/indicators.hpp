#pragma once

#include "gdm/qp.hpp"

namespace gdm {

// Coercivity constant: the smallest C with ||Pi w|| <= C ||Lap w|| and
// ||Grad w|| <= C ||Lap w|| over the discrete space. Computed as the
// square root of the largest generalized eigenvalue of the pi/grad Gram
// matrices against the stiffness matrix, by power iteration with sparse
// Cholesky solves; `tol` is the relative change between Rayleigh
// quotients at which the iteration stops.
double compute_coercivity(const GradientDiscretisation& gd, double tol = 1e-10);

// Limit-conformity defect against the smooth pair (v, lap_v): the dual
// norm (in the stiffness inner product) of
//   ell_i = int lap_v * (Pi e_i) - int v * (Lap e_i),
// both integrals taken in the operators' own quadrature. Measures how far
// the discrete operators are from satisfying integration by parts; zero
// up to quadrature error for conforming schemes.
double compute_limit_conformity(const GradientDiscretisation& gd,
                                const ScalarField& v, const ScalarField& lap_v);

// Obstacle-respecting quasi-interpolant: the closest element of the
// constraint set to the exact solution in the combined (pi, grad, lap)
// metric. `s_tilde` is the attained distance
//   sqrt(||Pi w - c||^2 + ||Grad w - grad c||^2 + ||Lap w - lap c||^2).
struct Interpolant {
  Eigen::VectorXd coeffs;
  double s_tilde;
};
Interpolant interpolate(const GradientDiscretisation& gd,
                        const ObstacleProblem& p,
                        SolverKind solver = SolverKind::active_set);

// Obstacle residual of the interpolant:
//   R_D = sum_q w_q lambda(x_q) (psi(x_q) - (Pi w)(x_q))
// over the pi samples, with lambda the exact contact force. Vanishes when
// the load is snug (lambda = 0) and is nonnegative up to interpolation
// slack otherwise.
double compute_residual_term(const GradientDiscretisation& gd,
                             const ObstacleProblem& p,
                             const Eigen::VectorXd& interpolant);

// Right-hand sides of the a priori error bounds as functions of the four
// indicators; the negative part of R_D is clamped to zero before the
// square root.
struct BoundTriple {
  double rhs_pi;
  double rhs_grad;
  double rhs_lap;
};
BoundTriple theorem_rhs(double C_D, double W_D, double S_D, double R_D);

struct IndicatorReport {
  double C_D = 0.0;
  double S_tilde = 0.0;
  double W_D = 0.0;
  double R_D = 0.0;
  double e_pi = 0.0, e_grad = 0.0, e_lap = 0.0;
  double rhs_pi = 0.0, rhs_grad = 0.0, rhs_lap = 0.0;
  double margin_pi = 0.0, margin_grad = 0.0, margin_lap = 0.0;
  Eigen::VectorXd interpolant_coeffs;
};

// Full indicator evaluation for a computed solution of an exact-solution
// benchmark: the four indicators, the three measured errors, the three
// bound right-hand sides (S_D entering as sqrt(3) * S_tilde) and the
// margins rhs - error. Nonnegative margins certify the bounds on this
// instance.
IndicatorReport verify_error_bounds(const GradientDiscretisation& gd,
                                    const ObstacleProblem& p,
                                    const DiscreteSolution& sol,
                                    SolverKind interp_solver = SolverKind::active_set,
                                    double power_tol = 1e-10);

}  // namespace gdm
