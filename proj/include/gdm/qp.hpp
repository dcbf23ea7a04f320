#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdm/problems.hpp"
#include "gdm/schemes.hpp"

namespace gdm {

// Bound-constrained quadratic program
//   min 1/2 w^T A w - b^T w   s.t.   w[constrained[j]] <= upper_bounds[j]
// with A symmetric positive definite. `constrained` is sorted and
// duplicate-free; bounds may be +infinity (never active).
struct QpInstance {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  std::vector<int> constrained;
  Eigen::VectorXd upper_bounds;
};

struct DiscreteSolution {
  Eigen::VectorXd w;
  std::vector<int> active_set;  // constrained dofs at their bound, sorted
  long iterations = 0;
  double residual = 0.0;        // complementarity residual at return
  std::string solver_id;
};

// Thrown when a solver fails to converge or a factorization breaks down
// (the latter signals a violated SPD invariant upstream).
struct SolveError : std::runtime_error {
  double last_residual;
  long iterations;
  SolveError(const std::string& msg, double r, long it)
      : std::runtime_error(msg), last_residual(r), iterations(it) {}
};

// Assembles the QP of the discrete obstacle problem: A the stiffness
// matrix, b_i = sum_q w_q f(x_q) (Pi e_i)(x_q), bounds psi at the scheme's
// constraint points. Rejects obstacles that are negative somewhere on the
// boundary (the clamped trace could not stay under them).
QpInstance build_qp(const GradientDiscretisation& gd,
                    const ObstacleProblem& p);

double objective(const QpInstance& qp, const Eigen::VectorXd& w);

// Max-norm of the projected-gradient map: per dof the distance between w
// and the bound-projection of w - (Aw - b). Zero exactly at the solution.
double complementarity_residual(const QpInstance& qp, const Eigen::VectorXd& w);

// Projected SOR sweeps in natural dof order; deterministic. max_iter < 0
// selects the default 200 * n_dofs. Throws SolveError if the tolerance is
// not reached.
DiscreteSolution solve_psor(const QpInstance& qp, double omega = 1.5,
                            double tol = 1e-10, long max_iter = -1);

// Primal active-set method: starts from the feasible projection of 0,
// solves the free-dof equality system by sparse Cholesky, adds the first
// blocking bound along each step, drops the most negative multiplier.
// Finite termination is enforced by an iteration cap (cycle guard).
DiscreteSolution solve_active_set(const QpInstance& qp, double tol = 1e-10);

// Exhaustive KKT oracle: enumerates active subsets (at most 15 constrained
// dofs), solves each equality system densely and checks primal/dual
// feasibility; ties resolved toward the smallest active set. Reference
// implementation for cross-checking the iterative solvers.
DiscreteSolution solve_oracle(const QpInstance& qp);

struct OracleCandidate {
  std::uint32_t mask;      // bit j <=> constrained[j] active
  Eigen::VectorXd w;
  Eigen::VectorXd mu;      // multipliers of the active bounds, mask order
};
// All subsets passing the KKT check (the oracle's search space).
std::vector<OracleCandidate> oracle_enumerate(const QpInstance& qp);

enum class SolverKind { psor, active_set, oracle };

struct SolveOptions {
  double omega = 1.5;
  double tol = 1e-10;
  long max_iter = -1;
};

SolverKind parse_solver(const std::string& name);
DiscreteSolution solve(const QpInstance& qp, SolverKind kind,
                       const SolveOptions& opt = {});

// KKT measures of a reported solution, for invariant checks: worst bound
// violation, worst stationarity defect off the active set, most negative
// multiplier on it.
struct SolutionCheck {
  double max_bound_violation = 0.0;
  double max_inactive_gradient = 0.0;
  double min_active_multiplier = 0.0;
  bool ok(double tol) const {
    return max_bound_violation <= tol && max_inactive_gradient <= tol &&
           min_active_multiplier >= -tol;
  }
};
SolutionCheck check_solution(const QpInstance& qp, const DiscreteSolution& sol);

// Random dense-ish SPD instance (A = M^T M + 0.5 I) with all dofs
// constrained by bounds straddling the unconstrained solution; used by the
// solver cross-checks.
QpInstance random_qp(int n_dofs, std::mt19937& rng);

}  // namespace gdm
