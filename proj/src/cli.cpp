#include "gdm/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "gdm/indicators.hpp"
#include "gdm/study.hpp"

namespace gdm {

namespace {

using nlohmann::ordered_json;

const std::vector<std::string> kCommands = {"solve", "indicators",
                                            "verify-bounds", "study",
                                            "oracle-check"};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid integer for --" + key + ": '" + value + "'");
  }
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid integer for --" + key + ": '" + value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid number for --" + key + ": '" + value + "'");
  }
}

std::vector<int> parse_levels(const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_int("levels", trim(item)));
  if (out.empty()) throw UsageError("empty --levels list");
  return out;
}

// Applies one key=value setting; shared by the config file and the flag
// loop so both accept the same keys.
void apply_setting(RunConfig& cfg, const std::string& key,
                   const std::string& value) {
  if (key == "scheme")
    cfg.scheme = value;
  else if (key == "problem")
    cfg.problem = value;
  else if (key == "n") {
    cfg.n = parse_int(key, value);
    if (cfg.n < 1) throw UsageError("--n must be positive");
  }
  else if (key == "levels")
    cfg.levels = parse_levels(value);
  else if (key == "solver")
    cfg.solver = value;
  else if (key == "omega")
    cfg.omega = parse_real(key, value);
  else if (key == "tol")
    cfg.tol = parse_real(key, value);
  else if (key == "max-iter")
    cfg.max_iter = parse_long(key, value);
  else if (key == "quadrature")
    cfg.quadrature = parse_int(key, value);
  else if (key == "out")
    cfg.out = value;
  else if (key == "seed")
    cfg.seed = static_cast<unsigned long>(parse_long(key, value));
  else if (key == "no-timing") {
    if (value == "true" || value == "1")
      cfg.no_timing = true;
    else if (value == "false" || value == "0")
      cfg.no_timing = false;
    else
      throw UsageError("invalid boolean for no-timing: '" + value + "'");
  } else
    throw UsageError("unknown option '--" + key + "'");
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError("config file " + path + ":" + std::to_string(lineno) +
                       ": expected key=value");
    apply_setting(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

bool problem_needs_exact(const std::string& command) {
  return command == "indicators" || command == "verify-bounds";
}

void validate(RunConfig& cfg) {
  if (cfg.command == "oracle-check") {
    if (cfg.n == 0) cfg.n = 8;
    if (cfg.n < 1 || cfg.n > 15)
      throw UsageError("oracle-check: --n must lie in [1,15]");
    return;
  }

  int sdim = 0;
  try {
    sdim = scheme_dim(cfg.scheme);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (cfg.problem.empty()) throw UsageError("--problem is required");
  ObstacleProblem p;
  try {
    p = catalog(cfg.problem);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (p.dim != 0 && p.dim != sdim)
    throw UsageError("problem '" + cfg.problem + "' is " +
                     std::to_string(p.dim) + "-dimensional; scheme '" +
                     cfg.scheme + "' is not");
  if (problem_needs_exact(cfg.command) && !p.exact)
    throw UsageError("problem '" + cfg.problem +
                     "' has no exact solution data; required by '" +
                     cfg.command + "'");
  try {
    parse_solver(cfg.solver);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (cfg.quadrature != 3 && cfg.quadrature != 5)
    throw UsageError("--quadrature must be 3 or 5");
  if (!(cfg.omega > 0.0 && cfg.omega < 2.0))
    throw UsageError("--omega must lie in (0,2)");
  if (!(cfg.tol > 0.0)) throw UsageError("--tol must be positive");

  if (cfg.command == "study") {
    if (cfg.levels.size() < 2)
      throw UsageError("study: --levels needs at least two entries "
                       "(rates compare consecutive levels)");
    if (cfg.out.empty()) throw UsageError("study: --out is required");
  } else {
    if (cfg.n <= 0) throw UsageError("--n is required and must be positive");
  }
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args) {
  if (args.empty())
    throw UsageError("missing command (expected one of: solve, indicators, "
                     "verify-bounds, study, oracle-check)");
  RunConfig cfg;
  cfg.command = args[0];
  bool known = false;
  for (const auto& c : kCommands) known = known || c == cfg.command;
  if (!known) throw UsageError("unknown command '" + cfg.command + "'");

  // Collect flag/value pairs first so the config file (wherever it appears
  // on the line) is applied before any explicit flag.
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0)
      throw UsageError("expected an option, got '" + a + "'");
    const std::string key = a.substr(2);
    if (key == "no-timing") {
      pairs.emplace_back(key, "true");
      continue;
    }
    if (i + 1 >= args.size())
      throw UsageError("option '--" + key + "' expects a value");
    const std::string value = args[++i];
    if (key == "config")
      config_path = value;
    else
      pairs.emplace_back(key, value);
  }
  if (!config_path.empty()) load_config_file(cfg, config_path);
  for (const auto& [key, value] : pairs) apply_setting(cfg, key, value);

  validate(cfg);
  return cfg;
}

std::string usage_text() {
  return
      "usage: gdmobs COMMAND [options]\n"
      "\n"
      "commands:\n"
      "  solve          solve one discrete obstacle problem, report the\n"
      "                 solution as JSON\n"
      "  indicators     solve and evaluate the error/indicator report\n"
      "  verify-bounds  like indicators; exits 3 if a bound margin is\n"
      "                 negative\n"
      "  study          refinement study over --levels; writes CSV and a\n"
      "                 JSON sidecar to --out\n"
      "  oracle-check   cross-check psor/active-set against the exhaustive\n"
      "                 KKT oracle on random instances\n"
      "\n"
      "options:\n"
      "  --scheme ID      fd1d | fd2d | hermite1d        [fd1d]\n"
      "  --problem ID     zero | no-contact-1d | no-contact-2d |\n"
      "                   contact-1d | contact-2d\n"
      "  --n N            grid cells per axis (even, >= 4); for\n"
      "                   oracle-check: dofs per instance [8]\n"
      "  --levels LIST    comma-separated grid sizes for study\n"
      "  --solver ID      psor | active-set | oracle     [active-set]\n"
      "  --omega X        psor relaxation in (0,2)       [1.5]\n"
      "  --tol X          solver tolerance               [1e-10]\n"
      "  --max-iter N     psor sweep cap                 [200*n_dofs]\n"
      "  --quadrature Q   Gauss points per axis, 3 or 5  [3]\n"
      "  --out PATH       output file (required for study)\n"
      "  --seed N         oracle-check RNG seed          [42]\n"
      "  --config PATH    key=value defaults, overridden by flags\n"
      "  --no-timing      write 0 for wall_time columns\n"
      "\n"
      "exit codes: 0 ok, 1 usage error, 2 numerical failure,\n"
      "            3 invariant violation\n";
}

namespace {

void emit_json(const ordered_json& j, const RunConfig& cfg, std::ostream& out) {
  if (cfg.out.empty()) {
    out << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) throw UsageError("cannot open output file '" + cfg.out + "'");
  f << j.dump(2) << '\n';
}

SolveOptions options_of(const RunConfig& cfg) {
  SolveOptions opt;
  opt.omega = cfg.omega;
  opt.tol = cfg.tol;
  opt.max_iter = cfg.max_iter;
  return opt;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const GradientDiscretisation gd =
      assemble_scheme(cfg.scheme, cfg.n, cfg.quadrature);
  const ObstacleProblem p = catalog(cfg.problem);
  const QpInstance qp = build_qp(gd, p);
  const DiscreteSolution sol =
      solve(qp, parse_solver(cfg.solver), options_of(cfg));

  ordered_json j;
  j["command"] = "solve";
  j["scheme"] = cfg.scheme;
  j["problem"] = cfg.problem;
  j["n"] = cfg.n;
  j["n_dofs"] = gd.n_dofs;
  j["quadrature"] = cfg.quadrature;
  j["solver"] = sol.solver_id;
  j["iterations"] = sol.iterations;
  j["residual"] = sol.residual;
  j["objective"] = objective(qp, sol.w);
  j["active_set"] = sol.active_set;
  j["coefficients"] =
      std::vector<double>(sol.w.data(), sol.w.data() + sol.w.size());
  emit_json(j, cfg, out);
  return 0;
}

int cmd_indicators(const RunConfig& cfg, std::ostream& out, std::ostream& err,
                   bool enforce) {
  const GradientDiscretisation gd =
      assemble_scheme(cfg.scheme, cfg.n, cfg.quadrature);
  const ObstacleProblem p = catalog(cfg.problem);
  const QpInstance qp = build_qp(gd, p);
  const DiscreteSolution sol =
      solve(qp, parse_solver(cfg.solver), options_of(cfg));
  const IndicatorReport rep = verify_error_bounds(gd, p, sol);

  ordered_json j;
  j["command"] = cfg.command;
  j["scheme"] = cfg.scheme;
  j["problem"] = cfg.problem;
  j["n"] = cfg.n;
  j["quadrature"] = cfg.quadrature;
  j["solver"] = sol.solver_id;
  j["C_D"] = rep.C_D;
  j["S_tilde"] = rep.S_tilde;
  j["W_D"] = rep.W_D;
  j["R_D"] = rep.R_D;
  j["e_pi"] = rep.e_pi;
  j["e_grad"] = rep.e_grad;
  j["e_lap"] = rep.e_lap;
  j["rhs_pi"] = rep.rhs_pi;
  j["rhs_grad"] = rep.rhs_grad;
  j["rhs_lap"] = rep.rhs_lap;
  j["margin_pi"] = rep.margin_pi;
  j["margin_grad"] = rep.margin_grad;
  j["margin_lap"] = rep.margin_lap;
  const bool hold = rep.margin_pi >= 0.0 && rep.margin_grad >= 0.0 &&
                    rep.margin_lap >= 0.0;
  j["bounds_hold"] = hold;
  j["interpolant_coeffs"] = std::vector<double>(
      rep.interpolant_coeffs.data(),
      rep.interpolant_coeffs.data() + rep.interpolant_coeffs.size());
  emit_json(j, cfg, out);

  if (enforce && !hold) {
    err << "invariant violation: an error bound margin is negative (pi "
        << format_double(rep.margin_pi) << ", grad "
        << format_double(rep.margin_grad) << ", lap "
        << format_double(rep.margin_lap) << ")\n";
    return 3;
  }
  return 0;
}

int cmd_study(const RunConfig& cfg, std::ostream& err) {
  const StudyResult res =
      run_study(cfg.scheme, cfg.problem, cfg.levels, parse_solver(cfg.solver),
                cfg.quadrature, !cfg.no_timing, options_of(cfg));
  std::ofstream csv(cfg.out);
  if (!csv) throw UsageError("cannot open output file '" + cfg.out + "'");
  write_csv(res, csv);
  std::ofstream meta(cfg.out + ".meta.json");
  if (!meta)
    throw UsageError("cannot open output file '" + cfg.out + ".meta.json'");
  write_metadata(res, meta);
  if (res.partial) {
    err << "numerical failure: " << res.note << "\n";
    return 2;
  }
  return 0;
}

int cmd_oracle_check(const RunConfig& cfg, std::ostream& out,
                     std::ostream& err) {
  const int trials = 20;
  std::mt19937 rng(static_cast<std::mt19937::result_type>(cfg.seed));
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const QpInstance qp = random_qp(cfg.n, rng);
    const DiscreteSolution ref = solve_oracle(qp);
    const DiscreteSolution as = solve_active_set(qp);
    const DiscreteSolution ps = solve_psor(qp);
    const double da = (as.w - ref.w).lpNorm<Eigen::Infinity>();
    const double dp = (ps.w - ref.w).lpNorm<Eigen::Infinity>();
    worst = std::max({worst, da, dp});
    if (da > 1e-8 || dp > 1e-8) {
      err << "invariant violation: solver disagreement on instance " << t
          << " (active-set " << format_double(da) << ", psor "
          << format_double(dp) << ")\n";
      return 3;
    }
  }
  out << "oracle-check: " << trials << " instances with " << cfg.n
      << " dofs, max deviation " << format_double(worst) << "\n";
  return 0;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.command == "solve") return cmd_solve(cfg, out);
    if (cfg.command == "indicators")
      return cmd_indicators(cfg, out, err, false);
    if (cfg.command == "verify-bounds")
      return cmd_indicators(cfg, out, err, true);
    if (cfg.command == "study") return cmd_study(cfg, err);
    if (cfg.command == "oracle-check") return cmd_oracle_check(cfg, out, err);
    throw UsageError("unknown command '" + cfg.command + "'");
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const SolveError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << usage_text();
    return 1;
  }
  return run(cfg, std::cout, std::cerr);
}

}  // namespace gdm
