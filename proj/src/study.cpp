#include "gdm/study.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "gdm/indicators.hpp"

namespace gdm {

double observed_rate(double e_coarse, double e_fine) {
  if (!std::isfinite(e_coarse) || !std::isfinite(e_fine) || !(e_coarse > 0.0) ||
      !(e_fine > 0.0))
    return StudyRow::nan;
  return std::log2(e_coarse / e_fine);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

const char* solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::psor: return "psor";
    case SolverKind::active_set: return "active-set";
    default: return "oracle";
  }
}

namespace {

// Node-wise injection of a solution on a nested finer grid into the
// coarse dof vector (grids share the coarse nodes when r = nf/nc is an
// integer).
Eigen::VectorXd restrict_to_coarse(const GradientDiscretisation& coarse,
                                   const GradientDiscretisation& fine,
                                   const Eigen::VectorXd& wf) {
  const int nc = coarse.grid.n;
  const int nf = fine.grid.n;
  const int r = nf / nc;
  Eigen::VectorXd wc(coarse.n_dofs);
  if (coarse.scheme_id == "hermite1d") {
    for (int node = 1; node <= nc - 1; ++node) {
      wc[2 * (node - 1)] = wf[2 * (node * r - 1)];
      wc[2 * (node - 1) + 1] = wf[2 * (node * r - 1) + 1];
    }
  } else if (coarse.grid.dim == 1) {
    for (int i = 1; i <= nc - 1; ++i) wc[i - 1] = wf[i * r - 1];
  } else {
    for (int j = 1; j <= nc - 1; ++j)
      for (int i = 1; i <= nc - 1; ++i)
        wc[(j - 1) * (nc - 1) + (i - 1)] =
            wf[(static_cast<long>(j) * r - 1) * (nf - 1) + (i * r - 1)];
  }
  return wc;
}

}  // namespace

StudyResult run_study(const std::string& scheme, const std::string& problem,
                      const std::vector<int>& levels, SolverKind solver,
                      int quad_order, bool with_timing,
                      const SolveOptions& opt) {
  if (levels.size() < 2)
    throw std::invalid_argument(
        "run_study: at least two levels are required to report rates");
  for (std::size_t k = 1; k < levels.size(); ++k)
    if (levels[k] <= levels[k - 1])
      throw std::invalid_argument(
          "run_study: levels must be strictly increasing");

  const ObstacleProblem p = catalog(problem);
  const int d = scheme_dim(scheme);
  if (p.dim != 0 && p.dim != d)
    throw std::invalid_argument("run_study: problem '" + problem +
                                "' does not fit scheme '" + scheme + "'");

  StudyResult res;
  res.scheme = scheme;
  res.problem = problem;
  res.solver = solver_name(solver);
  res.quad_order = quad_order;
  res.levels = levels;

  const bool have_exact = p.exact.has_value();
  GradientDiscretisation ref_gd;
  Eigen::VectorXd ref_w;
  if (!have_exact) {
    const int ref_n = 2 * levels.back();
    for (int n : levels)
      if (ref_n % n != 0)
        throw std::invalid_argument("run_study: level n=" + std::to_string(n) +
                                    " does not divide the reference grid n=" +
                                    std::to_string(ref_n));
    ref_gd = assemble_scheme(scheme, ref_n, quad_order);
    ref_w = solve(build_qp(ref_gd, p), solver, opt).w;
    res.note = "errors measured against a reference solve on n=" +
               std::to_string(ref_n) + ", injected node-wise";
  }

  for (int n : levels) {
    const GradientDiscretisation gd = assemble_scheme(scheme, n, quad_order);
    const QpInstance qp = build_qp(gd, p);
    StudyRow row;
    row.n = n;
    row.h = gd.grid.h;
    row.n_dofs = gd.n_dofs;

    const auto t0 = std::chrono::steady_clock::now();
    DiscreteSolution sol;
    try {
      sol = solve(qp, solver, opt);
    } catch (const SolveError& err) {
      res.partial = true;
      if (!res.note.empty()) res.note += "; ";
      res.note += "solver failed at n=" + std::to_string(n) + ": " + err.what();
      break;
    }
    const auto t1 = std::chrono::steady_clock::now();
    row.iterations = sol.iterations;
    row.wall_time =
        with_timing ? std::chrono::duration<double>(t1 - t0).count() : 0.0;

    if (have_exact) {
      const IndicatorReport rep = verify_error_bounds(gd, p, sol);
      row.e_pi = rep.e_pi;
      row.e_grad = rep.e_grad;
      row.e_lap = rep.e_lap;
      row.S_tilde = rep.S_tilde;
      row.W_D = rep.W_D;
      row.C_D = rep.C_D;
      row.R_D = rep.R_D;
      row.margin_pi = rep.margin_pi;
      row.margin_grad = rep.margin_grad;
      row.margin_lap = rep.margin_lap;
    } else {
      const Eigen::VectorXd diff = sol.w - restrict_to_coarse(gd, ref_gd, ref_w);
      row.e_pi = l2_norm(gd, Recon::pi, apply_operator(gd, Recon::pi, diff));
      row.e_grad =
          l2_norm(gd, Recon::grad, apply_operator(gd, Recon::grad, diff));
      row.e_lap = l2_norm(gd, Recon::lap, apply_operator(gd, Recon::lap, diff));
      row.C_D = compute_coercivity(gd);
    }
    res.rows.push_back(row);
  }

  for (std::size_t k = 1; k < res.rows.size(); ++k) {
    StudyRow& cur = res.rows[k];
    const StudyRow& prev = res.rows[k - 1];
    const double span = std::log2(static_cast<double>(cur.n) / prev.n);
    cur.rate_pi = observed_rate(prev.e_pi, cur.e_pi) / span;
    cur.rate_grad = observed_rate(prev.e_grad, cur.e_grad) / span;
    cur.rate_lap = observed_rate(prev.e_lap, cur.e_lap) / span;
  }
  return res;
}

void write_csv(const StudyResult& res, std::ostream& os) {
  os << "n,h,n_dofs,e_pi,e_grad,e_lap,rate_pi,rate_grad,rate_lap,"
        "S_tilde,W_D,C_D,R_D,margin_pi,margin_grad,margin_lap,"
        "iterations,wall_time\n";
  for (const StudyRow& r : res.rows) {
    os << r.n << ',' << format_double(r.h) << ',' << r.n_dofs << ','
       << format_double(r.e_pi) << ',' << format_double(r.e_grad) << ','
       << format_double(r.e_lap) << ',' << format_double(r.rate_pi) << ','
       << format_double(r.rate_grad) << ',' << format_double(r.rate_lap) << ','
       << format_double(r.S_tilde) << ',' << format_double(r.W_D) << ','
       << format_double(r.C_D) << ',' << format_double(r.R_D) << ','
       << format_double(r.margin_pi) << ',' << format_double(r.margin_grad)
       << ',' << format_double(r.margin_lap) << ',' << r.iterations << ','
       << format_double(r.wall_time) << '\n';
  }
}

void write_metadata(const StudyResult& res, std::ostream& os) {
  nlohmann::ordered_json j;
  j["scheme"] = res.scheme;
  j["problem"] = res.problem;
  j["solver"] = res.solver;
  j["quadrature"] = res.quad_order;
  j["levels"] = res.levels;
  j["rows"] = res.rows.size();
  j["partial"] = res.partial;
  j["note"] = res.note;
  j["columns"] = {"n", "h", "n_dofs", "e_pi", "e_grad", "e_lap", "rate_pi",
                  "rate_grad", "rate_lap", "S_tilde", "W_D", "C_D", "R_D",
                  "margin_pi", "margin_grad", "margin_lap", "iterations",
                  "wall_time"};
  os << j.dump(2) << '\n';
}

}  // namespace gdm
