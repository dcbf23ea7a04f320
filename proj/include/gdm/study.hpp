#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "gdm/qp.hpp"

namespace gdm {

// One refinement level of a study. Indicator and rate columns default to
// NaN: rates are undefined on the first row and whenever an error is zero
// or not finite; indicators other than C_D require an exact solution.
struct StudyRow {
  static constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  int n = 0;
  double h = 0.0;
  int n_dofs = 0;
  double e_pi = nan, e_grad = nan, e_lap = nan;
  double rate_pi = nan, rate_grad = nan, rate_lap = nan;
  double S_tilde = nan, W_D = nan, C_D = nan, R_D = nan;
  double margin_pi = nan, margin_grad = nan, margin_lap = nan;
  long iterations = 0;
  double wall_time = 0.0;
};

struct StudyResult {
  std::string scheme;
  std::string problem;
  std::string solver;
  int quad_order = 3;
  std::vector<int> levels;
  bool partial = false;  // a solve failed; rows end at the last good level
  std::string note;
  std::vector<StudyRow> rows;
};

// log2(e_coarse / e_fine); NaN unless both are finite and positive.
double observed_rate(double e_coarse, double e_fine);

// Runs the refinement study: assemble, solve and measure per level.
// Problems with exact solutions get errors and the full indicator set per
// level; problems without get errors against a reference solve on a grid
// twice finer than the finest level (injected node-wise, which requires
// each level to divide 2*levels.back()) and C_D only. Rates compare
// consecutive rows, scaled by log2 of the refinement ratio. A solver
// failure marks the result partial and stops at the failing level.
StudyResult run_study(const std::string& scheme, const std::string& problem,
                      const std::vector<int>& levels, SolverKind solver,
                      int quad_order = 3, bool with_timing = true,
                      const SolveOptions& opt = {});

// CSV with a fixed header; floats in shortest round-trip form, NaN as
// "nan". Byte-stable for identical inputs when timing is disabled.
void write_csv(const StudyResult& res, std::ostream& os);

// JSON sidecar describing the run (scheme, problem, solver, levels,
// partial flag, note, column names).
void write_metadata(const StudyResult& res, std::ostream& os);

// Shortest decimal form that round-trips to the same double; "nan" for
// NaN, "inf"/"-inf" for infinities.
std::string format_double(double x);

const char* solver_name(SolverKind kind);

}  // namespace gdm
