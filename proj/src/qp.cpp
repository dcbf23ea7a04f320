#include "gdm/qp.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace gdm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bounds spread to a full-length vector; +inf on unconstrained dofs.
Eigen::VectorXd full_bounds(const QpInstance& qp) {
  Eigen::VectorXd u = Eigen::VectorXd::Constant(qp.A.rows(), kInf);
  for (std::size_t j = 0; j < qp.constrained.size(); ++j)
    u[qp.constrained[j]] = qp.upper_bounds[j];
  return u;
}

bool at_bound(double w, double u) {
  if (!std::isfinite(u)) return false;
  return std::abs(w - u) <= 1e-11 * std::max(1.0, std::abs(u));
}

std::vector<int> detect_active(const QpInstance& qp, const Eigen::VectorXd& w) {
  std::vector<int> act;
  for (std::size_t j = 0; j < qp.constrained.size(); ++j)
    if (at_bound(w[qp.constrained[j]], qp.upper_bounds[j]))
      act.push_back(qp.constrained[j]);
  return act;
}

double inf_norm_rows(const Eigen::SparseMatrix<double>& A) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(A.rows());
  for (int c = 0; c < A.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it)
      acc[it.row()] += std::abs(it.value());
  return acc.size() ? acc.maxCoeff() : 0.0;
}

}  // namespace

QpInstance build_qp(const GradientDiscretisation& gd,
                    const ObstacleProblem& p) {
  if (p.dim != 0 && p.dim != gd.grid.dim)
    throw std::invalid_argument("build_qp: problem '" + p.id + "' is " +
                                std::to_string(p.dim) +
                                "-dimensional, scheme '" + gd.scheme_id +
                                "' is not");
  // The clamped trace is zero, so the obstacle must be nonnegative on the
  // boundary for the constraint set to be nonempty.
  for (long node = 0; node < gd.grid.node_count(); ++node)
    if (gd.grid.is_boundary(node) &&
        p.obstacle(gd.grid.node_coord(node)) < 0.0)
      throw std::invalid_argument(
          "build_qp: obstacle is negative on the boundary");

  QpInstance qp;
  qp.A = gd.stiffness();
  const SampledOperator& pi = gd.pi;
  Eigen::VectorXd fs(pi.n_samples());
  for (long q = 0; q < pi.n_samples(); ++q)
    fs[q] = pi.weights[q] * p.load(pi.coords[q]);
  qp.b = pi.op.transpose() * fs;

  qp.constrained.reserve(gd.constraint_points.size());
  qp.upper_bounds.resize(static_cast<long>(gd.constraint_points.size()));
  for (std::size_t j = 0; j < gd.constraint_points.size(); ++j) {
    qp.constrained.push_back(gd.constraint_points[j].dof);
    qp.upper_bounds[static_cast<long>(j)] =
        p.obstacle(gd.constraint_points[j].x);
  }
  return qp;
}

double objective(const QpInstance& qp, const Eigen::VectorXd& w) {
  return 0.5 * w.dot(qp.A * w) - qp.b.dot(w);
}

double complementarity_residual(const QpInstance& qp,
                                const Eigen::VectorXd& w) {
  const Eigen::VectorXd g = qp.A * w - qp.b;
  const Eigen::VectorXd u = full_bounds(qp);
  double r = 0.0;
  for (long i = 0; i < w.size(); ++i) {
    const double target = std::min(w[i] - g[i], u[i]);
    r = std::max(r, std::abs(w[i] - target));
  }
  return r;
}

DiscreteSolution solve_psor(const QpInstance& qp, double omega, double tol,
                            long max_iter) {
  const long n = qp.A.rows();
  if (!(omega > 0.0 && omega < 2.0))
    throw std::invalid_argument("solve_psor: omega must lie in (0,2)");
  if (!(tol > 0.0))
    throw std::invalid_argument("solve_psor: tol must be positive");
  if (max_iter < 0) max_iter = 200 * n;

  const Eigen::SparseMatrix<double, Eigen::RowMajor> A(qp.A);
  Eigen::VectorXd diag(n);
  for (long i = 0; i < n; ++i) {
    diag[i] = qp.A.coeff(i, i);
    if (!(diag[i] > 0.0))
      throw SolveError("solve_psor: nonpositive diagonal entry", kInf, 0);
  }
  const Eigen::VectorXd u = full_bounds(qp);
  Eigen::VectorXd w(n);
  for (long i = 0; i < n; ++i)
    w[i] = std::isfinite(u[i]) ? std::min(0.0, u[i]) : 0.0;

  double res = kInf;
  for (long it = 1; it <= max_iter; ++it) {
    for (long i = 0; i < n; ++i) {
      double dot = 0.0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator a(A, i);
           a; ++a)
        dot += a.value() * w[a.col()];
      const double cand = w[i] + omega * (qp.b[i] - dot) / diag[i];
      w[i] = std::min(cand, u[i]);
    }
    res = complementarity_residual(qp, w);
    if (res <= tol) {
      DiscreteSolution sol;
      sol.w = std::move(w);
      sol.active_set = detect_active(qp, sol.w);
      sol.iterations = it;
      sol.residual = res;
      sol.solver_id = "psor";
      return sol;
    }
  }
  throw SolveError("solve_psor: tolerance not reached within max_iter", res,
                   max_iter);
}

DiscreteSolution solve_active_set(const QpInstance& qp, double tol) {
  const long n = qp.A.rows();
  if (!(tol > 0.0))
    throw std::invalid_argument("solve_active_set: tol must be positive");
  const Eigen::VectorXd u = full_bounds(qp);

  Eigen::VectorXd w(n);
  for (long i = 0; i < n; ++i)
    w[i] = std::isfinite(u[i]) ? std::min(0.0, u[i]) : 0.0;
  std::vector<char> in_ws(n, 0);
  for (int dof : qp.constrained)
    if (std::isfinite(u[dof]) && u[dof] <= 0.0) in_ws[dof] = 1;

  // Multipliers below -thr are trusted as genuinely negative; thr absorbs
  // the roundoff of forming b - A w at the problem's scale.
  const double anorm = inf_norm_rows(qp.A);
  const long cap = 2 * n + 100;

  bool optimal = false;
  long iters = 0;
  while (iters < cap) {
    ++iters;
    std::vector<long> F;
    std::vector<long> loc(n, -1);
    for (long i = 0; i < n; ++i)
      if (!in_ws[i]) {
        loc[i] = static_cast<long>(F.size());
        F.push_back(i);
      }

    Eigen::VectorXd wfix = Eigen::VectorXd::Zero(n);
    for (long i = 0; i < n; ++i)
      if (in_ws[i]) wfix[i] = u[i];
    const Eigen::VectorXd r = qp.b - qp.A * wfix;

    Eigen::VectorXd target = wfix;
    if (!F.empty()) {
      std::vector<Eigen::Triplet<double>> trips;
      for (int c = 0; c < qp.A.outerSize(); ++c) {
        if (loc[c] < 0) continue;
        for (Eigen::SparseMatrix<double>::InnerIterator it(qp.A, c); it; ++it)
          if (loc[it.row()] >= 0)
            trips.emplace_back(loc[it.row()], loc[c], it.value());
      }
      Eigen::SparseMatrix<double> Aff(static_cast<long>(F.size()),
                                      static_cast<long>(F.size()));
      Aff.setFromTriplets(trips.begin(), trips.end());
      Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(Aff);
      if (llt.info() != Eigen::Success)
        throw SolveError(
            "solve_active_set: Cholesky factorization failed (matrix not "
            "SPD?)",
            complementarity_residual(qp, w), iters);
      Eigen::VectorXd rf(static_cast<long>(F.size()));
      for (std::size_t k = 0; k < F.size(); ++k) rf[static_cast<long>(k)] = r[F[k]];
      const Eigen::VectorXd xf = llt.solve(rf);
      for (std::size_t k = 0; k < F.size(); ++k) target[F[k]] = xf[static_cast<long>(k)];
    }

    const Eigen::VectorXd d = target - w;
    const double dinf = d.lpNorm<Eigen::Infinity>();
    const double wscale =
        1.0 + w.lpNorm<Eigen::Infinity>() + target.lpNorm<Eigen::Infinity>();

    if (dinf <= 1e-13 * wscale) {
      const Eigen::VectorXd mu = qp.b - qp.A * w;
      const double noise =
          64.0 * std::numeric_limits<double>::epsilon() *
          (anorm * wscale + qp.b.lpNorm<Eigen::Infinity>());
      const double thr = std::max(tol, noise);
      int drop = -1;
      double worst = -thr;
      for (int dof : qp.constrained)
        if (in_ws[dof] && mu[dof] < worst) {
          worst = mu[dof];
          drop = dof;
        }
      if (drop < 0) {
        optimal = true;
        break;
      }
      in_ws[drop] = 0;
      continue;
    }

    double alpha = 1.0;
    int blocker = -1;
    for (std::size_t j = 0; j < qp.constrained.size(); ++j) {
      const int dof = qp.constrained[j];
      if (in_ws[dof] || !std::isfinite(u[dof]) || d[dof] <= 0.0) continue;
      const double a = (u[dof] - w[dof]) / d[dof];
      if (a < alpha) {
        alpha = a;
        blocker = dof;
      }
    }
    if (alpha < 0.0) alpha = 0.0;
    w += alpha * d;
    if (blocker >= 0) {
      in_ws[blocker] = 1;
      w[blocker] = u[blocker];
    }
    // Keep feasibility exact against 1-ulp overshoots.
    for (int dof : qp.constrained)
      if (std::isfinite(u[dof]) && w[dof] > u[dof]) w[dof] = u[dof];
  }

  if (!optimal)
    throw SolveError("solve_active_set: iteration cap reached (cycle guard)",
                     complementarity_residual(qp, w), iters);

  DiscreteSolution sol;
  sol.w = std::move(w);
  sol.active_set = detect_active(qp, sol.w);
  sol.iterations = iters;
  sol.residual = complementarity_residual(qp, sol.w);
  sol.solver_id = "active-set";
  return sol;
}

std::vector<OracleCandidate> oracle_enumerate(const QpInstance& qp) {
  const long n = qp.A.rows();
  const int k = static_cast<int>(qp.constrained.size());
  if (k > 15)
    throw std::invalid_argument(
        "oracle: at most 15 constrained dofs are supported");
  const Eigen::MatrixXd A(qp.A);
  const double bscale = 1.0 + qp.b.lpNorm<Eigen::Infinity>();

  std::vector<OracleCandidate> out;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    bool skip = false;
    for (int j = 0; j < k; ++j)
      if (((mask >> j) & 1u) && !std::isfinite(qp.upper_bounds[j])) {
        skip = true;
        break;
      }
    if (skip) continue;

    std::vector<long> F;
    std::vector<long> loc(n, -1);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    std::vector<char> fixed(n, 0);
    for (int j = 0; j < k; ++j)
      if ((mask >> j) & 1u) {
        fixed[qp.constrained[j]] = 1;
        w[qp.constrained[j]] = qp.upper_bounds[j];
      }
    for (long i = 0; i < n; ++i)
      if (!fixed[i]) {
        loc[i] = static_cast<long>(F.size());
        F.push_back(i);
      }

    if (!F.empty()) {
      const Eigen::VectorXd r = qp.b - A * w;
      Eigen::MatrixXd Aff(F.size(), F.size());
      Eigen::VectorXd rf(static_cast<long>(F.size()));
      for (std::size_t a = 0; a < F.size(); ++a) {
        rf[static_cast<long>(a)] = r[F[a]];
        for (std::size_t c = 0; c < F.size(); ++c)
          Aff(static_cast<long>(a), static_cast<long>(c)) = A(F[a], F[c]);
      }
      Eigen::LLT<Eigen::MatrixXd> llt(Aff);
      if (llt.info() != Eigen::Success) continue;
      const Eigen::VectorXd xf = llt.solve(rf);
      for (std::size_t a = 0; a < F.size(); ++a) w[F[a]] = xf[static_cast<long>(a)];
    }

    bool feasible = true;
    for (int j = 0; j < k && feasible; ++j) {
      const double ub = qp.upper_bounds[j];
      if (std::isfinite(ub) &&
          w[qp.constrained[j]] > ub + 1e-9 * (1.0 + std::abs(ub)))
        feasible = false;
    }
    if (!feasible) continue;

    const Eigen::VectorXd g = qp.b - A * w;
    Eigen::VectorXd mu(std::popcount(mask));
    bool dual_ok = true;
    long m = 0;
    for (int j = 0; j < k; ++j)
      if ((mask >> j) & 1u) {
        mu[m] = g[qp.constrained[j]];
        if (mu[m] < -1e-9 * bscale) dual_ok = false;
        ++m;
      }
    if (!dual_ok) continue;

    out.push_back({mask, std::move(w), std::move(mu)});
  }
  return out;
}

DiscreteSolution solve_oracle(const QpInstance& qp) {
  const int k = static_cast<int>(qp.constrained.size());
  auto cands = oracle_enumerate(qp);
  if (cands.empty())
    throw SolveError("solve_oracle: no active subset passes the KKT check",
                     kInf, 1L << k);
  // Ties at zero multipliers: prefer the smallest active set.
  const auto* best = &cands.front();
  for (const auto& c : cands) {
    const int pb = std::popcount(best->mask), pc = std::popcount(c.mask);
    if (pc < pb || (pc == pb && c.mask < best->mask)) best = &c;
  }
  DiscreteSolution sol;
  sol.w = best->w;
  for (int j = 0; j < k; ++j)
    if ((best->mask >> j) & 1u) sol.active_set.push_back(qp.constrained[j]);
  sol.iterations = 1L << k;
  sol.residual = complementarity_residual(qp, sol.w);
  sol.solver_id = "oracle";
  return sol;
}

SolverKind parse_solver(const std::string& name) {
  if (name == "psor") return SolverKind::psor;
  if (name == "active-set") return SolverKind::active_set;
  if (name == "oracle") return SolverKind::oracle;
  throw std::invalid_argument("unknown solver '" + name + "'");
}

DiscreteSolution solve(const QpInstance& qp, SolverKind kind,
                       const SolveOptions& opt) {
  switch (kind) {
    case SolverKind::psor:
      return solve_psor(qp, opt.omega, opt.tol, opt.max_iter);
    case SolverKind::active_set:
      return solve_active_set(qp, opt.tol);
    default:
      return solve_oracle(qp);
  }
}

SolutionCheck check_solution(const QpInstance& qp,
                             const DiscreteSolution& sol) {
  const long n = qp.A.rows();
  std::vector<char> active(n, 0);
  for (int dof : sol.active_set) active[dof] = 1;
  const Eigen::VectorXd g = qp.A * sol.w - qp.b;

  SolutionCheck c;
  for (std::size_t j = 0; j < qp.constrained.size(); ++j) {
    const double ub = qp.upper_bounds[j];
    if (std::isfinite(ub))
      c.max_bound_violation =
          std::max(c.max_bound_violation, sol.w[qp.constrained[j]] - ub);
  }
  for (long i = 0; i < n; ++i) {
    if (active[i])
      c.min_active_multiplier = std::min(c.min_active_multiplier, -g[i]);
    else
      c.max_inactive_gradient = std::max(c.max_inactive_gradient, std::abs(g[i]));
  }
  return c;
}

QpInstance random_qp(int n_dofs, std::mt19937& rng) {
  std::uniform_real_distribution<double> u11(-1.0, 1.0);
  Eigen::MatrixXd M(n_dofs, n_dofs);
  for (int i = 0; i < n_dofs; ++i)
    for (int j = 0; j < n_dofs; ++j) M(i, j) = u11(rng);
  const Eigen::MatrixXd Ad =
      M.transpose() * M + 0.5 * Eigen::MatrixXd::Identity(n_dofs, n_dofs);
  QpInstance qp;
  qp.A = Ad.sparseView();
  qp.A.makeCompressed();
  qp.b.resize(n_dofs);
  for (int i = 0; i < n_dofs; ++i) qp.b[i] = 2.0 * u11(rng);
  qp.upper_bounds.resize(n_dofs);
  for (int i = 0; i < n_dofs; ++i) {
    qp.constrained.push_back(i);
    qp.upper_bounds[i] = u11(rng);
  }
  return qp;
}

}  // namespace gdm
