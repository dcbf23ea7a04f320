#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdm {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fully resolved invocation: command plus every option after defaults,
// config file and command line flags have been merged (flags win).
struct RunConfig {
  std::string command;
  std::string scheme = "fd1d";
  std::string problem;
  int n = 0;  // grid cells; dofs per instance for oracle-check (default 8)
  std::vector<int> levels;
  std::string solver = "active-set";
  double omega = 1.5;
  double tol = 1e-10;
  long max_iter = -1;  // < 0: solver default (200 * n_dofs for psor)
  int quadrature = 3;
  std::string out;
  unsigned long seed = 42;
  bool no_timing = false;
};

// Parses the argument vector (program name removed): the first token is
// the command (solve, indicators, verify-bounds, study, oracle-check),
// the rest `--key value` pairs; `--no-timing` takes no value; `--config
// FILE` reads key=value lines applied before the explicit flags. Performs
// all validation (unknown keys, malformed numbers, missing required
// options, scheme/problem dimension mismatch). Throws UsageError.
RunConfig parse_config(const std::vector<std::string>& args);

std::string usage_text();

// Executes a parsed command, writing artifacts to cfg.out (study: CSV plus
// `<out>.meta.json`; other commands: JSON to the file, or to `out` when no
// path is given). Exit code: 0 success, 1 usage error, 2 numerical
// failure, 3 invariant violation.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace gdm
