#include "gdm/indicators.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gdm {

namespace {

// Largest eigenvalue of M x = lambda A x (both SPD/PSD, A definite) by
// power iteration on A^{-1} M, normalized in the A inner product.
double generalized_lambda_max(
    const Eigen::SparseMatrix<double>& M, const Eigen::SparseMatrix<double>& A,
    const Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>& llt, double tol) {
  const long n = A.rows();
  const long cap = 10000;

  Eigen::VectorXd y = Eigen::VectorXd::Ones(n);
  const auto a_normalize = [&](Eigen::VectorXd& v) {
    const double na = std::sqrt(std::max(0.0, v.dot(A * v)));
    if (!(na > 1e-300)) return false;
    v /= na;
    return true;
  };
  if (!a_normalize(y))
    throw SolveError("power iteration: start vector A-degenerate", 0.0, 0);

  double lam_prev = -1.0;
  int restarts = 0;
  for (long it = 1; it <= cap; ++it) {
    const Eigen::VectorXd z = M * y;
    const double lam = y.dot(z);  // Rayleigh quotient (||y||_A = 1)
    if (it > 2 && std::abs(lam - lam_prev) <= tol * std::max(std::abs(lam), 1e-30))
      return lam;
    lam_prev = lam;
    Eigen::VectorXd ynext = llt.solve(z);
    const double na = std::sqrt(std::max(0.0, ynext.dot(z)));  // ||ynext||_A
    if (!(na > 1e-300)) {
      // The iterate fell into the nullspace of M; restart from a different
      // deterministic direction.
      if (++restarts > 2)
        throw SolveError("power iteration stalled in the nullspace of M", lam,
                         it);
      for (long i = 0; i < n; ++i) y[i] = std::sin(1.0 + 0.7 * i);
      if (!a_normalize(y))
        throw SolveError("power iteration: restart vector A-degenerate", lam,
                         it);
      lam_prev = -1.0;
      continue;
    }
    y = ynext / na;
  }
  throw SolveError("power iteration did not converge", lam_prev, cap);
}

// Factors into a caller-owned object (Eigen solvers are not movable).
void factor_spd(Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>& llt,
                const Eigen::SparseMatrix<double>& A, const char* who) {
  llt.compute(A);
  if (llt.info() != Eigen::Success)
    throw SolveError(std::string(who) +
                         ": Cholesky factorization failed (matrix not SPD?)",
                     0.0, 0);
}

}  // namespace

double compute_coercivity(const GradientDiscretisation& gd, double tol) {
  if (!(tol > 0.0))
    throw std::invalid_argument("compute_coercivity: tol must be positive");
  const Eigen::SparseMatrix<double> A = gd.stiffness();
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  factor_spd(llt, A, "compute_coercivity");
  const double lam_pi =
      generalized_lambda_max(gd.gram(Recon::pi), A, llt, tol);
  const double lam_grad =
      generalized_lambda_max(gd.gram(Recon::grad), A, llt, tol);
  return std::sqrt(std::max(lam_pi, lam_grad));
}

double compute_limit_conformity(const GradientDiscretisation& gd,
                                const ScalarField& v,
                                const ScalarField& lap_v) {
  const SampledOperator& pi = gd.pi;
  const SampledOperator& lap = gd.lap;
  Eigen::VectorXd sp(pi.n_samples());
  for (long q = 0; q < pi.n_samples(); ++q)
    sp[q] = pi.weights[q] * lap_v(pi.coords[q]);
  Eigen::VectorXd sl(lap.n_samples());
  for (long q = 0; q < lap.n_samples(); ++q)
    sl[q] = lap.weights[q] * v(lap.coords[q]);
  const Eigen::VectorXd ell =
      pi.op.transpose() * sp - lap.op.transpose() * sl;

  const Eigen::SparseMatrix<double> A = gd.stiffness();
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  factor_spd(llt, A, "compute_limit_conformity");
  const Eigen::VectorXd x = llt.solve(ell);
  return std::sqrt(std::max(0.0, ell.dot(x)));
}

Interpolant interpolate(const GradientDiscretisation& gd,
                        const ObstacleProblem& p, SolverKind solver) {
  if (!p.exact)
    throw std::invalid_argument("interpolate: problem '" + p.id +
                                "' has no exact solution bundle");
  const ExactBundle& e = *p.exact;

  QpInstance qp;
  qp.A = gd.gram(Recon::pi) + gd.gram(Recon::grad) + gd.stiffness();
  qp.A.makeCompressed();

  // Right-hand side pairs the exact fields with each reconstruction in its
  // own quadrature, so the QP minimizes the squared combined distance.
  const SampledOperator& pi = gd.pi;
  const SampledOperator& gr = gd.grad;
  const SampledOperator& la = gd.lap;
  Eigen::VectorXd sp(pi.n_samples());
  for (long q = 0; q < pi.n_samples(); ++q)
    sp[q] = pi.weights[q] * e.value(pi.coords[q]);
  Eigen::VectorXd sg(gr.components * gr.n_samples());
  for (long q = 0; q < gr.n_samples(); ++q) {
    const Vec2 g = e.gradient(gr.coords[q]);
    for (int c = 0; c < gr.components; ++c)
      sg[c * gr.n_samples() + q] = gr.weights[q] * g[c];
  }
  Eigen::VectorXd sl(la.n_samples());
  for (long q = 0; q < la.n_samples(); ++q)
    sl[q] = la.weights[q] * e.laplacian(la.coords[q]);
  qp.b = pi.op.transpose() * sp + gr.op.transpose() * sg +
         la.op.transpose() * sl;

  qp.upper_bounds.resize(static_cast<long>(gd.constraint_points.size()));
  for (std::size_t j = 0; j < gd.constraint_points.size(); ++j) {
    qp.constrained.push_back(gd.constraint_points[j].dof);
    qp.upper_bounds[static_cast<long>(j)] =
        p.obstacle(gd.constraint_points[j].x);
  }

  const DiscreteSolution sol = solve(qp, solver, {});

  // Recompute the attained distance from the error sums rather than the
  // objective value, which suffers cancellation when the distance is tiny.
  const double d_pi = l2_error(gd, Recon::pi, sol.w, e.value);
  const double d_grad = l2_error_grad(gd, sol.w, e.gradient);
  const double d_lap = l2_error(gd, Recon::lap, sol.w, e.laplacian);
  return Interpolant{sol.w,
                     std::sqrt(d_pi * d_pi + d_grad * d_grad + d_lap * d_lap)};
}

double compute_residual_term(const GradientDiscretisation& gd,
                             const ObstacleProblem& p,
                             const Eigen::VectorXd& interpolant) {
  const ScalarField lambda = multiplier_field(p);
  const SampledOperator& pi = gd.pi;
  const Eigen::VectorXd piv = pi.op * interpolant;
  double acc = 0.0;
  for (long q = 0; q < pi.n_samples(); ++q)
    acc += pi.weights[q] * lambda(pi.coords[q]) *
           (p.obstacle(pi.coords[q]) - piv[q]);
  return acc;
}

BoundTriple theorem_rhs(double C_D, double W_D, double S_D, double R_D) {
  const double s2 = std::sqrt(2.0);
  const double root = std::sqrt(std::max(R_D, 0.0));
  BoundTriple t;
  t.rhs_pi = C_D * (s2 / 2.0) * W_D + (C_D * (s2 + 2.0) / 2.0 + 1.0) * S_D +
             C_D * root;
  t.rhs_grad = t.rhs_pi;
  t.rhs_lap = (s2 / 2.0) * W_D + ((s2 + 2.0) / 2.0) * S_D + root;
  return t;
}

IndicatorReport verify_error_bounds(const GradientDiscretisation& gd,
                                    const ObstacleProblem& p,
                                    const DiscreteSolution& sol,
                                    SolverKind interp_solver,
                                    double power_tol) {
  if (!p.exact)
    throw std::invalid_argument("verify_error_bounds: problem '" + p.id +
                                "' has no exact solution bundle");
  const ExactBundle& e = *p.exact;

  IndicatorReport rep;
  rep.C_D = compute_coercivity(gd, power_tol);
  rep.W_D = compute_limit_conformity(gd, e.laplacian, e.bilaplacian);
  const Interpolant ip = interpolate(gd, p, interp_solver);
  rep.S_tilde = ip.s_tilde;
  rep.R_D = compute_residual_term(gd, p, ip.coeffs);
  rep.interpolant_coeffs = ip.coeffs;

  const double S_D = std::sqrt(3.0) * rep.S_tilde;
  const BoundTriple rhs = theorem_rhs(rep.C_D, rep.W_D, S_D, rep.R_D);
  rep.rhs_pi = rhs.rhs_pi;
  rep.rhs_grad = rhs.rhs_grad;
  rep.rhs_lap = rhs.rhs_lap;

  rep.e_pi = l2_error(gd, Recon::pi, sol.w, e.value);
  rep.e_grad = l2_error_grad(gd, sol.w, e.gradient);
  rep.e_lap = l2_error(gd, Recon::lap, sol.w, e.laplacian);

  rep.margin_pi = rep.rhs_pi - rep.e_pi;
  rep.margin_grad = rep.rhs_grad - rep.e_grad;
  rep.margin_lap = rep.rhs_lap - rep.e_lap;
  return rep;
}

}  // namespace gdm
