#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "lpvstab/lpvstab.hpp"

namespace lpvstab::cli {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct SystemSource {
  std::string system_path;
  std::string example;
  double theta = 0.7;

  void add(CLI::App* app) {
    app->add_option("--system", system_path, "System JSON file (polytopic or norm-bounded form)");
    app->add_option("--example", example, "Built-in fixture: example1 or example2");
    app->add_option("--theta", theta, "Parameter of the example2 family");
  }

  std::string describe() const {
    if (!system_path.empty()) return system_path;
    if (example == "example2") return "example2(theta=" + detail::fmt_double(theta) + ")";
    return example;
  }

  SwitchedLpvSystem load() const {
    if (!system_path.empty() && !example.empty()) throw UsageError("--system and --example are mutually exclusive");
    if (!system_path.empty()) return load_system(system_path);
    if (example == "example1") return example1();
    if (example == "example2") return example2(theta);
    if (example.empty()) throw UsageError("one of --system or --example is required");
    throw UsageError("unknown example '" + example + "' (expected example1 or example2)");
  }
};

struct ConditionArgs {
  std::string condition = "theorem1";
  int N = 2;
  bool time_invariant = false;
  int degree = 1;
  bool zero_tail = false;

  void add(CLI::App* app, bool single_N = true) {
    app->add_option("--condition", condition, "lemma2, lemma3, theorem1 or corollary1")->capture_default_str();
    if (single_N) app->add_option("--N", N, "Number of Lyapunov matrices")->capture_default_str();
    app->add_flag("--time-invariant", time_invariant, "Freeze the parameter across instants");
    app->add_option("--degree", degree, "Degree of parameter-dependent variables")->capture_default_str();
    app->add_flag("--zero-tail", zero_tail, "Fix P_2..P_N to zero");
  }

  Condition parsed() const {
    try {
      return parse_condition(condition);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  GenOptions gen() const {
    if (degree < 0) throw UsageError("--degree must be >= 0");
    return GenOptions{time_invariant, degree, zero_tail};
  }

  void check_N(int n) const {
    if (n < 1) throw UsageError("--N must be >= 1");
  }
};

struct SolverArgs {
  std::string options_file;
  int max_iterations = 0;
  double convergence_tol = 0;
  double threshold = 0;
  double bound = -1;
  std::string solution;
  CLI::Option* o_iter = nullptr;
  CLI::Option* o_tol = nullptr;
  CLI::Option* o_thr = nullptr;
  CLI::Option* o_bound = nullptr;

  void add(CLI::App* app) {
    app->add_option("--options", options_file, std::string("Solver options JSON (default: $") + kOptionsEnv + ")");
    o_iter = app->add_option("--max-iterations", max_iterations, "Interior point iteration limit");
    o_tol = app->add_option("--convergence-tol", convergence_tol, "Relative residual and gap tolerance");
    o_thr = app->add_option("--threshold", threshold, "Margin above which a problem is declared feasible");
    o_bound = app->add_option("--variable-bound", bound, "Box bound on decision variables (0 disables)");
  }

  SolveOptions resolve() const {
    SolveOptions o;
    std::string path = options_file;
    if (path.empty())
      if (const char* env = std::getenv(kOptionsEnv)) path = env;
    if (!path.empty()) {
      const Json j = detail::parse_text(detail::read_file(path), path);
      if (!j.is_object()) throw ParseError(path + ": expected an object");
      for (const auto& [key, v] : j.items()) {
        if (!v.is_number()) throw ParseError(path + ": option '" + key + "' must be a number");
        if (key == "max_iterations")
          o.max_iterations = v.get<int>();
        else if (key == "convergence_tol")
          o.convergence_tol = v.get<double>();
        else if (key == "feasibility_margin_threshold")
          o.feasibility_margin_threshold = v.get<double>();
        else if (key == "variable_bound")
          o.variable_bound = v.get<double>();
        else if (key == "margin_cap")
          o.margin_cap = v.get<double>();
        else
          throw ParseError(path + ": unknown option '" + key + "'");
      }
    }
    if (o_iter && o_iter->count()) o.max_iterations = max_iterations;
    if (o_tol && o_tol->count()) o.convergence_tol = convergence_tol;
    if (o_thr && o_thr->count()) o.feasibility_margin_threshold = threshold;
    if (o_bound && o_bound->count()) o.variable_bound = bound;
    if (o.max_iterations < 1 || !(o.convergence_tol > 0) || !(o.feasibility_margin_threshold > 0) || o.variable_bound < 0)
      throw UsageError("solver options: iterations, tolerance and threshold must be positive, bound non-negative");
    if (!solution.empty()) {
      o.backend = Backend::external_file;
      o.external_solution = solution;
    }
    return o;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
  if (!f) throw Error("write failed for " + path);
}

Json solver_json(const SdpResult& r) {
  return Json{{"status", to_string(r.status)},
              {"iterations", r.iterations},
              {"primal_infeasibility", r.primal_infeasibility},
              {"dual_infeasibility", r.dual_infeasibility},
              {"relative_gap", r.relative_gap}};
}

Json modes_json(const std::vector<int>& modes) {
  Json a = Json::array();
  for (int i : modes) a.push_back(i + 1);
  return a;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw UsageError(what + ": '" + tok + "' is not an integer");
    }
  }
  if (out.empty()) throw UsageError(what + " is empty");
  return out;
}

Vector parse_vector(const std::string& s, const std::string& what) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw UsageError(what + ": '" + tok + "' is not a number");
    }
  }
  if (vals.empty()) throw UsageError(what + " is empty");
  return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

// ---------------------------------------------------------------------------

struct CheckArgs {
  SystemSource src;
  ConditionArgs cond;
  SolverArgs solver;
  std::string certificate_out;
  std::string report_out;
  int grid_depth = 10;
  int samples = 1000;
  std::uint64_t seed = 1;
  bool no_verify = false;
  bool timings = false;
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  const auto t0 = Clock::now();
  const Condition c = a.cond.parsed();
  a.cond.check_N(a.cond.N);
  const SolveOptions opt = a.solver.resolve();
  const SwitchedLpvSystem sys = a.src.load();
  const LmiProblem prob = generate(c, sys, a.cond.N, a.cond.gen());
  const double t_gen = seconds_since(t0);
  const auto t1 = Clock::now();
  const SolveOutcome o = solve_feasibility(prob, opt);
  const double t_solve = seconds_since(t1);

  Json rep;
  rep["system"] = a.src.describe();
  rep["condition"] = to_string(c);
  rep["N"] = prob.metadata.N;
  rep["time_invariant"] = a.cond.time_invariant;
  rep["N_V"] = prob.metadata.num_variables;
  rep["N_R"] = prob.metadata.num_rows;
  rep["verdict"] = to_string(o.verdict);
  rep["margin"] = o.solver_margin;
  rep["recheck_margin"] = o.recheck_margin;
  rep["threshold"] = opt.feasibility_margin_threshold;
  rep["reason"] = o.reason;
  if (o.capped) rep["capped"] = true;
  rep["solver"] = solver_json(o.solver);
  double t_verify = 0.0;
  if (o.certificate) {
    if (!a.no_verify) {
      const auto t2 = Clock::now();
      VerifyOptions vo;
      vo.grid_depth = a.grid_depth;
      vo.random_samples = a.samples;
      vo.seed = a.seed;
      const auto vr = verify_certificate(sys, prob, o.certificate->assignment, vo);
      rep["verification"] = Json{{"result", vr.ok ? "PASS" : "FAIL"},
                                 {"min_margin", vr.min_margin},
                                 {"min_positivity", vr.min_positivity},
                                 {"max_negativity", vr.max_negativity},
                                 {"worst_equation", vr.worst_equation},
                                 {"worst_modes", modes_json(vr.worst_modes)},
                                 {"samples", vr.samples},
                                 {"grid_depth", a.grid_depth},
                                 {"random_samples", a.samples}};
      VerifyOptions bo;
      bo.seed = a.seed;
      bo.random_samples = a.samples;
      const auto lb = lyapunov_bounds(sys, prob, o.certificate->assignment, bo);
      rep["lyapunov_bounds"] = Json{{"beta1", lb.beta1}, {"beta2", lb.beta2}, {"beta3", lb.beta3}, {"sampled", true}, {"samples", lb.samples}};
      t_verify = seconds_since(t2);
    }
    if (!a.certificate_out.empty()) {
      write_text(a.certificate_out, write_certificate(prob, *o.certificate));
      rep["certificate"] = a.certificate_out;
    }
  }
  if (a.timings) rep["timings"] = Json{{"generate_s", t_gen}, {"solve_s", t_solve}, {"verify_s", t_verify}};
  const std::string text = rep.dump(2) + "\n";
  if (a.report_out.empty())
    out << text;
  else
    write_text(a.report_out, text);
  switch (o.verdict) {
    case Verdict::feasible: return kFeasible;
    case Verdict::infeasible: return kInfeasible;
    case Verdict::inconclusive: return kInconclusive;
  }
  return kInconclusive;
}

struct MarginArgs {
  std::string family_path;
  std::string example = "example2";
  ConditionArgs cond;
  std::string N_list = "2";
  double lo = 0.5;
  double hi = 1.0;
  double tol = 1e-4;
  std::string format = "json";
  std::string out_path;
  std::string audit_path;
  SolverArgs solver;
};

int cmd_margin(const MarginArgs& a, std::ostream& out) {
  const Condition c = a.cond.parsed();
  const std::vector<int> Ns = parse_int_list(a.N_list, "--N");
  for (int n : Ns) a.cond.check_N(n);
  if (a.format != "json" && a.format != "csv") throw UsageError("--format must be json or csv");
  const SolveOptions opt = a.solver.resolve();
  LinearFamily fam;
  if (!a.family_path.empty())
    fam = load_family(a.family_path);
  else if (a.example == "example2")
    fam = example2_family();
  else
    throw UsageError("margin needs --family or --example example2");

  Json rows = Json::array();
  Json audits = Json::array();
  std::string csv = "condition,N,theta_max,N_V,N_R\n";
  // lemma2 and lemma3 ignore N, so a sweep collapses to one row.
  std::vector<int> sweep = Ns;
  if (c == Condition::lemma2 || c == Condition::lemma3) sweep = {Ns.front()};
  for (int N : sweep) {
    MarginQuery q;
    q.family = [&fam](double th) { return fam.at(th); };
    q.condition = c;
    q.N = N;
    q.lo = a.lo;
    q.hi = a.hi;
    q.tol = a.tol;
    q.gen = a.cond.gen();
    MarginResult r;
    try {
      r = margin_search(q, opt);
    } catch (const BracketError& e) {
      throw UsageError(std::string(e.what()) + " (condition " + to_string(c) + ", N=" + std::to_string(N) + ")");
    }
    const int n_eff = condition_N(c, N);
    rows.push_back(Json{{"condition", to_string(c)}, {"N", n_eff}, {"theta_max", r.theta_max}, {"N_V", r.num_variables}, {"N_R", r.num_rows}});
    audits.push_back(margin_audit_json(q, r));
    std::ostringstream line;
    line << to_string(c) << ',' << n_eff << ',' << detail::fmt_double(r.theta_max) << ',' << r.num_variables << ',' << r.num_rows << "\n";
    csv += line.str();
  }
  const std::string text = a.format == "csv" ? csv : rows.dump(2) + "\n";
  if (a.out_path.empty())
    out << text;
  else
    write_text(a.out_path, text);
  if (!a.audit_path.empty()) write_text(a.audit_path, audits.dump(2) + "\n");
  return kFeasible;
}

struct SimulateArgs {
  SystemSource src;
  ConditionArgs cond;
  SolverArgs solver;
  std::string certificate_path;
  int steps = 15;
  std::string x0;
  std::string switching = "periodic";
  int start_mode = 1;
  std::string alpha = "random";
  std::uint64_t seed = 1;
  std::string out_path;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const Condition c = a.cond.parsed();
  a.cond.check_N(a.cond.N);
  if (a.steps < 0) throw UsageError("--steps must be >= 0");
  const SwitchedLpvSystem sys = a.src.load();
  const LmiProblem prob = generate(c, sys, a.cond.N, a.cond.gen());
  Certificate cert;
  if (!a.certificate_path.empty()) {
    cert = import_certificate(detail::read_file(a.certificate_path), prob, a.certificate_path);
  } else {
    const SolveOutcome o = solve_feasibility(prob, a.solver.resolve());
    if (o.verdict != Verdict::feasible) {
      err << "simulate: no certificate (" << to_string(o.verdict) << ": " << o.reason << ")\n";
      return o.verdict == Verdict::infeasible ? kInfeasible : kInconclusive;
    }
    cert = *o.certificate;
  }

  Vector x0 = a.x0.empty() ? Vector::Ones(sys.n) : parse_vector(a.x0, "--x0");
  if (x0.size() != sys.n) throw UsageError("--x0 needs " + std::to_string(sys.n) + " entries");

  SwitchingSignal sigma;
  if (a.switching == "periodic") {
    if (a.start_mode < 1 || a.start_mode > sys.m) throw UsageError("--start-mode outside 1.." + std::to_string(sys.m));
    sigma = SwitchingSignal::periodic_cycle(sys.m, a.start_mode - 1);
  } else if (a.switching == "random") {
    sigma = SwitchingSignal::random(a.seed);
  } else if (a.switching.rfind("explicit:", 0) == 0) {
    std::vector<int> modes = parse_int_list(a.switching.substr(9), "--switching");
    for (int& i : modes) --i;
    sigma = SwitchingSignal::explicit_modes(modes);
  } else {
    throw UsageError("--switching must be periodic, random or explicit:i,j,...");
  }

  ParameterTrajectory params;
  if (a.alpha == "random") {
    // Offset so switching and parameters do not share a stream.
    params = ParameterTrajectory::random(a.seed + 0x9e3779b97f4a7c15ULL);
  } else if (a.alpha.rfind("constant:", 0) == 0) {
    params = ParameterTrajectory::constant(parse_vector(a.alpha.substr(9), "--alpha"));
  } else if (a.alpha.rfind("sinusoidal:", 0) == 0) {
    params = ParameterTrajectory::sinusoidal(parse_vector(a.alpha.substr(11), "--alpha")(0));
  } else {
    throw UsageError("--alpha must be random, constant:a1,..,aV or sinusoidal:w");
  }

  const Trajectory t = simulate(sys, sigma, params, x0, a.steps, &prob, &cert.assignment);
  const std::string csv = trajectory_csv(t);
  if (a.out_path.empty())
    out << csv;
  else
    write_text(a.out_path, csv);
  return kFeasible;
}

struct CountArgs {
  int n = 0, m = 0, V = 0, N = 1;
  ConditionArgs cond;
};

int cmd_count(const CountArgs& a, std::ostream& out) {
  const Condition c = a.cond.parsed();
  a.cond.check_N(a.N);
  if (a.n < 1 || a.m < 1 || a.V < 1) throw UsageError("--n, --m and --V must be >= 1");
  const GenOptions g = a.cond.gen();
  Json rep{{"condition", to_string(c)},
           {"N", condition_N(c, a.N)},
           {"n", a.n},
           {"m", a.m},
           {"V", a.V},
           {"N_V", count_variables(a.n, condition_N(c, a.N), c, a.V, a.m, g.variable_degree, g.zero_tail)},
           {"N_R", count_rows(c, a.n, a.m, a.V, condition_N(c, a.N), g)}};
  out << rep.dump(2) << "\n";
  return kFeasible;
}

struct ConvertArgs {
  std::string input;
  std::string output;
};

int cmd_convert(const ConvertArgs& a, std::ostream& out) {
  const SwitchedLpvSystem sys = load_system(a.input);
  const std::string text = system_to_json(sys).dump(2) + "\n";
  if (a.output.empty())
    out << text;
  else
    write_text(a.output, text);
  return kFeasible;
}

struct ExportArgs {
  SystemSource src;
  ConditionArgs cond;
  SolverArgs solver;
  std::string output;
};

int cmd_export(const ExportArgs& a, std::ostream& out) {
  const Condition c = a.cond.parsed();
  a.cond.check_N(a.cond.N);
  const SolveOptions opt = a.solver.resolve();
  const LmiProblem prob = generate(c, a.src.load(), a.cond.N, a.cond.gen());
  const std::string text = export_sdpa(prob, opt);
  if (a.output.empty())
    out << text;
  else
    write_text(a.output, text);
  return kFeasible;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stability analysis of discrete-time switched LPV systems with multi-matrix Lyapunov functions"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  CheckArgs check;
  auto* c_check = app.add_subcommand("check", "Generate and solve one LMI problem, verify the certificate");
  check.src.add(c_check);
  check.cond.add(c_check);
  check.solver.add(c_check);
  c_check->add_option("--solution", check.solver.solution, "Read the certificate from a file instead of solving");
  c_check->add_option("--certificate", check.certificate_out, "Write the certificate here when feasible");
  c_check->add_option("--report", check.report_out, "Write the JSON report here instead of stdout");
  c_check->add_option("--grid-depth", check.grid_depth, "Verification grid depth per simplex")->capture_default_str();
  c_check->add_option("--samples", check.samples, "Random verification points")->capture_default_str();
  c_check->add_option("--seed", check.seed, "Seed for random verification points")->capture_default_str();
  c_check->add_flag("--no-verify", check.no_verify, "Skip sampling verification and Lyapunov bounds");
  c_check->add_flag("--timings", check.timings, "Include wall-clock timings in the report");

  MarginArgs margin;
  auto* c_margin = app.add_subcommand("margin", "Bisect the largest theta of a linear family that passes a condition");
  c_margin->add_option("--family", margin.family_path, "Family JSON {\"family\": {\"base\": [...], \"slope\": [...]}}");
  c_margin->add_option("--example", margin.example, "Built-in family (example2)")->capture_default_str();
  margin.cond.add(c_margin, false);
  c_margin->add_option("--N", margin.N_list, "Comma-separated list of N values")->capture_default_str();
  c_margin->add_option("--lo", margin.lo, "Lower end of the bracket (must be feasible)")->capture_default_str();
  c_margin->add_option("--hi", margin.hi, "Upper end of the bracket (must not be feasible)")->capture_default_str();
  c_margin->add_option("--tol", margin.tol, "Final bracket width")->capture_default_str();
  c_margin->add_option("--format", margin.format, "json or csv")->capture_default_str();
  c_margin->add_option("--out", margin.out_path, "Output file (default stdout)");
  c_margin->add_option("--audit", margin.audit_path, "Write the bisection probes as JSON");
  margin.solver.add(c_margin);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate a trajectory and evaluate the certified Lyapunov function");
  sim.src.add(c_sim);
  sim.cond.add(c_sim);
  sim.solver.add(c_sim);
  c_sim->add_option("--certificate", sim.certificate_path, "Certificate file (solved on the fly when absent)");
  c_sim->add_option("--steps", sim.steps, "Horizon")->capture_default_str();
  c_sim->add_option("--x0", sim.x0, "Initial state, comma-separated (default all ones)");
  c_sim->add_option("--switching", sim.switching, "periodic, random or explicit:i,j,... (one-based)")->capture_default_str();
  c_sim->add_option("--start-mode", sim.start_mode, "First mode of periodic switching (one-based)")->capture_default_str();
  c_sim->add_option("--alpha", sim.alpha, "random, constant:a1,..,aV or sinusoidal:w")->capture_default_str();
  c_sim->add_option("--seed", sim.seed, "Seed for random signals")->capture_default_str();
  c_sim->add_option("--out", sim.out_path, "CSV output (default stdout)");

  CountArgs count;
  auto* c_count = app.add_subcommand("count", "Print decision variable and LMI row counts");
  c_count->add_option("--n", count.n, "State dimension")->required();
  c_count->add_option("--m", count.m, "Number of modes")->required();
  c_count->add_option("--V", count.V, "Number of polytope vertices")->required();
  c_count->add_option("--N", count.N, "Number of Lyapunov matrices")->capture_default_str();
  count.cond.add(c_count, false);

  ConvertArgs conv;
  auto* c_conv = app.add_subcommand("convert", "Rewrite a system file (e.g. norm-bounded) in polytopic form");
  c_conv->add_option("--input", conv.input, "Input system JSON")->required();
  c_conv->add_option("--output", conv.output, "Output file (default stdout)");

  ExportArgs exp;
  auto* c_exp = app.add_subcommand("export", "Write the max-margin SDP in SDPA sparse format");
  exp.src.add(c_exp);
  exp.cond.add(c_exp);
  exp.solver.add(c_exp);
  c_exp->add_option("--output", exp.output, "Output file (default stdout)");

  // CLI11 consumes arguments from the back.
  std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0; everything else is a usage error.
    return app.exit(e, out, err) == 0 ? kFeasible : kUsage;
  }

  try {
    if (*c_check) return cmd_check(check, out);
    if (*c_margin) return cmd_margin(margin, out);
    if (*c_sim) return cmd_simulate(sim, out, err);
    if (*c_count) return cmd_count(count, out);
    if (*c_conv) return cmd_convert(conv, out);
    if (*c_exp) return cmd_export(exp, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace lpvstab::cli
