#include <doctest.h>

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gdm/qp.hpp"

using namespace gdm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

QpInstance one_dof_instance(double bound) {
  QpInstance qp;
  qp.A.resize(1, 1);
  qp.A.insert(0, 0) = 2.0;
  qp.A.makeCompressed();
  qp.b.resize(1);
  qp.b[0] = 4.0;
  qp.constrained = {0};
  qp.upper_bounds.resize(1);
  qp.upper_bounds[0] = bound;
  return qp;
}

double winf(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).lpNorm<Eigen::Infinity>();
}

}  // namespace

TEST_SUITE("qp") {

TEST_CASE("build_qp: frozen load vector and bounds (fd1d, n=8)") {
  const GradientDiscretisation gd = assemble_fd(build_grid(1, 8));
  const QpInstance qp = build_qp(gd, catalog("no-contact-1d"));
  CHECK(qp.A.rows() == 7);
  CHECK(qp.constrained.size() == 7);
  for (long i = 0; i < 7; ++i) {
    CHECK(std::abs(qp.b[i] - 24.0 * 0.125) <= 1e-12);
    CHECK(std::abs(qp.upper_bounds[i] - 1.0) <= 1e-15);
  }
}

TEST_CASE("build_qp rejects dimension mismatch and bad boundary obstacle") {
  const GradientDiscretisation gd = assemble_fd(build_grid(1, 8));
  CHECK_THROWS_AS(build_qp(gd, catalog("no-contact-2d")),
                  std::invalid_argument);
  ObstacleProblem bad = catalog("no-contact-1d");
  bad.obstacle = [](const Point& x) { return x[0] - 0.5; };
  CHECK_THROWS_WITH_AS(build_qp(gd, bad),
                       doctest::Contains("negative on the boundary"),
                       std::invalid_argument);
}

TEST_CASE("one-dof instance: all solvers, active and inactive bound") {
  // min w^2 - 4w: unconstrained minimum at w = 2.
  for (const SolverKind kind :
       {SolverKind::psor, SolverKind::active_set, SolverKind::oracle}) {
    const DiscreteSolution at1 = solve(one_dof_instance(1.0), kind);
    CHECK(std::abs(at1.w[0] - 1.0) <= 1e-10);
    REQUIRE(at1.active_set.size() == 1);
    CHECK(at1.active_set[0] == 0);

    const DiscreteSolution at3 = solve(one_dof_instance(3.0), kind);
    CHECK(std::abs(at3.w[0] - 2.0) <= 1e-10);
    CHECK(at3.active_set.empty());
  }
  // oracle multiplier at the active bound: mu = b - A w = 2
  const auto cands = oracle_enumerate(one_dof_instance(1.0));
  REQUIRE(cands.size() == 1);
  CHECK(cands[0].mask == 1u);
  CHECK(std::abs(cands[0].mu[0] - 2.0) <= 1e-12);
}

TEST_CASE("unbounded dofs: +inf bounds never activate") {
  QpInstance qp = one_dof_instance(kInf);
  for (const SolverKind kind :
       {SolverKind::psor, SolverKind::active_set, SolverKind::oracle}) {
    const DiscreteSolution s = solve(qp, kind);
    CHECK(std::abs(s.w[0] - 2.0) <= 1e-10);
    CHECK(s.active_set.empty());
  }
}

TEST_CASE("cross-solver agreement on catalog problems") {
  for (const char* prob : {"zero", "no-contact-1d", "contact-1d"}) {
    for (int n : {8, 12}) {
      const GradientDiscretisation gd = assemble_fd(build_grid(1, n));
      const QpInstance qp = build_qp(gd, catalog(prob));
      const DiscreteSolution o = solve_oracle(qp);
      const DiscreteSolution a = solve_active_set(qp);
      const DiscreteSolution p = solve_psor(qp);
      CAPTURE(prob);
      CAPTURE(n);
      CHECK(winf(a.w, o.w) <= 1e-8);
      CHECK(winf(p.w, o.w) <= 1e-8);
      CHECK(a.active_set == o.active_set);
      CHECK(p.active_set == o.active_set);
    }
  }
}

TEST_CASE("random instances: oracle has a unique optimum, solvers agree") {
  std::mt19937 rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const QpInstance qp = random_qp(12, rng);
    const auto cands = oracle_enumerate(qp);
    CAPTURE(trial);
    REQUIRE(!cands.empty());
    // All passing subsets agree on w (duplicates are degenerate ties).
    for (const auto& c : cands) CHECK(winf(c.w, cands.front().w) <= 1e-7);

    const DiscreteSolution o = solve_oracle(qp);
    const DiscreteSolution a = solve_active_set(qp);
    const DiscreteSolution p = solve_psor(qp);
    CHECK(winf(a.w, o.w) <= 1e-8);
    CHECK(winf(p.w, o.w) <= 1e-8);
  }
}

TEST_CASE("solution is energy-optimal among feasible perturbations") {
  const GradientDiscretisation gd = assemble_fd(build_grid(1, 16));
  const QpInstance qp = build_qp(gd, catalog("contact-1d"));
  const DiscreteSolution sol = solve_active_set(qp);
  const double J = objective(qp, sol.w);
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd v = sol.w;
    for (long i = 0; i < v.size(); ++i) v[i] += 0.01 * u(rng);
    for (std::size_t j = 0; j < qp.constrained.size(); ++j)
      v[qp.constrained[j]] = std::min(v[qp.constrained[j]], qp.upper_bounds[j]);
    CHECK(objective(qp, v) >= J - 1e-12 * (1.0 + std::abs(J)));
  }
}

TEST_CASE("solution satisfies the variational inequality") {
  const GradientDiscretisation gd = assemble_fd(build_grid(1, 16));
  const QpInstance qp = build_qp(gd, catalog("contact-1d"));
  const DiscreteSolution sol = solve_active_set(qp);
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double scale = qp.b.lpNorm<Eigen::Infinity>() + 1.0;
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::VectorXd v(sol.w.size());
    for (long i = 0; i < v.size(); ++i) v[i] = 0.01 * u(rng);
    for (std::size_t j = 0; j < qp.constrained.size(); ++j)
      v[qp.constrained[j]] = std::min(v[qp.constrained[j]], qp.upper_bounds[j]);
    // w^T A (w - v) <= b^T (w - v) for every feasible v
    const double lhs = sol.w.dot(qp.A * (sol.w - v));
    const double rhs = qp.b.dot(sol.w - v);
    CHECK(lhs <= rhs + 1e-9 * scale);
  }
}

TEST_CASE("check_solution certifies the KKT invariants") {
  for (const char* prob : {"zero", "no-contact-1d", "contact-1d"}) {
    const GradientDiscretisation gd = assemble_fd(build_grid(1, 16));
    const QpInstance qp = build_qp(gd, catalog(prob));
    SolveOptions opt;
    opt.max_iter = 200000;  // psor needs more than its default cap at n=16
    for (const SolverKind kind : {SolverKind::psor, SolverKind::active_set}) {
      const DiscreteSolution sol = solve(qp, kind, opt);
      const SolutionCheck c = check_solution(qp, sol);
      CAPTURE(prob);
      CHECK(c.ok(1e-8));
    }
  }
}

TEST_CASE("complementarity residual: zero at the solution, positive off it") {
  const GradientDiscretisation gd = assemble_fd(build_grid(1, 12));
  const QpInstance qp = build_qp(gd, catalog("contact-1d"));
  const DiscreteSolution sol = solve_active_set(qp);
  CHECK(complementarity_residual(qp, sol.w) <= 1e-8);
  Eigen::VectorXd off = sol.w;
  off[3] -= 0.01;
  CHECK(complementarity_residual(qp, off) > 1e-4);
}

TEST_CASE("psor: parameter validation and failure reporting") {
  const QpInstance qp = one_dof_instance(1.0);
  CHECK_THROWS_AS(solve_psor(qp, 2.5), std::invalid_argument);
  CHECK_THROWS_AS(solve_psor(qp, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_psor(qp, 1.5, -1.0), std::invalid_argument);

  const GradientDiscretisation gd = assemble_fd(build_grid(1, 16));
  const QpInstance hard = build_qp(gd, catalog("contact-1d"));
  try {
    solve_psor(hard, 1.5, 1e-10, 1);
    FAIL("expected SolveError");
  } catch (const SolveError& e) {
    CHECK(e.iterations == 1);
    CHECK(e.last_residual > 0.0);
  }
}

TEST_CASE("psor matches a direct solve when no bound is active") {
  const GradientDiscretisation gd = assemble_fd(build_grid(1, 16));
  const QpInstance qp = build_qp(gd, catalog("no-contact-1d"));
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(qp.A);
  REQUIRE(llt.info() == Eigen::Success);
  const Eigen::VectorXd direct = llt.solve(qp.b);
  const DiscreteSolution ps = solve_psor(qp, 1.5, 1e-10, 200000);
  CHECK(winf(ps.w, direct) <= 1e-8);
  CHECK(ps.active_set.empty());
}

TEST_CASE("active-set solver handles an unconstrained instance") {
  const GradientDiscretisation gd = assemble_fd(build_grid(1, 16));
  QpInstance qp = build_qp(gd, catalog("no-contact-1d"));
  qp.constrained.clear();
  qp.upper_bounds.resize(0);
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(qp.A);
  const Eigen::VectorXd direct = llt.solve(qp.b);
  const DiscreteSolution s = solve_active_set(qp);
  CHECK(winf(s.w, direct) <= 1e-9 * (1.0 + direct.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("oracle refuses more than 15 constrained dofs") {
  std::mt19937 rng(5);
  const QpInstance qp = random_qp(16, rng);
  CHECK_THROWS_AS(solve_oracle(qp), std::invalid_argument);
}

TEST_CASE("contact-1d: active set nonempty and symmetric about 1/2") {
  const int n = 64;
  const GradientDiscretisation gd = assemble_fd(build_grid(1, n));
  const QpInstance qp = build_qp(gd, catalog("contact-1d"));
  const DiscreteSolution sol = solve_active_set(qp);
  REQUIRE(!sol.active_set.empty());
  // dof d sits at node d+1; mirror node n-(d+1) is dof n-2-d
  for (int d : sol.active_set) {
    const int mirror = n - 2 - d;
    CHECK(std::find(sol.active_set.begin(), sol.active_set.end(), mirror) !=
          sol.active_set.end());
  }
  // contact in the middle, not at the edge of the interior
  CHECK(sol.active_set.front() > 0);
  CHECK(sol.active_set.back() < gd.n_dofs - 1);
}

TEST_CASE("solver ids and iteration counts are reported") {
  const QpInstance qp = one_dof_instance(1.0);
  CHECK(solve_psor(qp).solver_id == "psor");
  CHECK(solve_active_set(qp).solver_id == "active-set");
  CHECK(solve_oracle(qp).solver_id == "oracle");
  CHECK(solve_oracle(qp).iterations == 2);  // 2^1 subsets examined
  CHECK(solve_psor(qp).iterations >= 1);
}

}  // TEST_SUITE
