#pragma once

// Margin bisection, trajectory simulation and Lyapunov function diagnostics.

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lpvstab/sdp.hpp"

namespace lpvstab {

class BracketError : public Error {
 public:
  BracketError(const std::string& msg, Verdict lo, Verdict hi) : Error(msg), lo_verdict(lo), hi_verdict(hi) {}
  Verdict lo_verdict;
  Verdict hi_verdict;
};

struct MarginQuery {
  std::function<SwitchedLpvSystem(double)> family;
  Condition condition = Condition::theorem1;
  int N = 1;
  double lo = 0.0;
  double hi = 1.0;
  double tol = 1e-4;
  GenOptions gen;
};

struct MarginProbe {
  double theta = 0.0;
  Verdict verdict = Verdict::inconclusive;
  double margin = 0.0;
};

struct MarginResult {
  double theta_max = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<MarginProbe> probes;
  int num_variables = 0;
  int num_rows = 0;
  /// Problem and certificate at the final feasible end of the bracket.
  LmiProblem problem;
  Certificate certificate;
  SwitchedLpvSystem system;
};

/// Bisection on theta. Inconclusive probes count as not feasible, so the
/// reported lower end is always certified.
inline MarginResult margin_search(const MarginQuery& q, const SolveOptions& opt = {}) {
  if (!(q.lo < q.hi)) throw std::invalid_argument("margin_search: bracket needs lo < hi");
  if (!(q.tol > 0)) throw std::invalid_argument("margin_search: tol must be positive");
  MarginResult r;
  auto probe = [&](double theta) {
    SwitchedLpvSystem sys = q.family(theta);
    LmiProblem prob = generate(q.condition, sys, q.N, q.gen);
    SolveOutcome o = solve_feasibility(prob, opt);
    r.probes.push_back({theta, o.verdict, o.solver_margin});
    r.num_variables = prob.metadata.num_variables;
    r.num_rows = prob.metadata.num_rows;
    if (o.verdict == Verdict::feasible) {
      r.problem = std::move(prob);
      r.certificate = *o.certificate;
      r.system = std::move(sys);
    }
    return o.verdict;
  };
  const Verdict vlo = probe(q.lo);
  const Verdict vhi = probe(q.hi);
  if (vlo != Verdict::feasible || vhi == Verdict::feasible) {
    throw BracketError("invalid bracket: lo=" + std::to_string(q.lo) + " is " + to_string(vlo) + ", hi=" + std::to_string(q.hi) + " is " +
                           to_string(vhi),
                       vlo, vhi);
  }
  // Keep the certificate of the lower end.
  LmiProblem best_prob = r.problem;
  Certificate best_cert = r.certificate;
  SwitchedLpvSystem best_sys = r.system;
  double lo = q.lo, hi = q.hi;
  while (hi - lo > q.tol) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid) == Verdict::feasible) {
      lo = mid;
      best_prob = r.problem;
      best_cert = r.certificate;
      best_sys = r.system;
    } else {
      hi = mid;
    }
  }
  r.lo = lo;
  r.hi = hi;
  r.theta_max = 0.5 * (lo + hi);
  r.problem = std::move(best_prob);
  r.certificate = std::move(best_cert);
  r.system = std::move(best_sys);
  return r;
}

inline Json margin_audit_json(const MarginQuery& q, const MarginResult& r) {
  Json probes = Json::array();
  for (const auto& p : r.probes) probes.push_back({{"theta", p.theta}, {"verdict", to_string(p.verdict)}, {"margin", p.margin}});
  return Json{{"condition", to_string(q.condition)},
              {"N", condition_N(q.condition, q.N)},
              {"bracket", {q.lo, q.hi}},
              {"tol", q.tol},
              {"theta_max", r.theta_max},
              {"final_bracket", {r.lo, r.hi}},
              {"N_V", r.num_variables},
              {"N_R", r.num_rows},
              {"probes", std::move(probes)}};
}

// ---------------------------------------------------------------------------
// Lyapunov matrix along a realized trajectory.

/// Number of consecutive (mode, parameter) pairs the Lyapunov matrix at k
/// depends on.
inline int lyapunov_window(const ProblemMetadata& meta) {
  switch (meta.condition) {
    case Condition::lemma2: return 1;
    case Condition::lemma3: return 1;
    case Condition::theorem1: return meta.N - 1;
    case Condition::corollary1: return std::max(1, meta.N - 1);
  }
  return 1;
}

/// Components V_j = x' Psi_{j-1}' P_j Psi_{j-1} x of the Lyapunov matrix at
/// time k as matrices (one for lemma2: S^{-1}). `modes[r]`, `alphas[r]` are
/// sigma(k+r), alpha_{k+r}.
inline std::vector<Matrix> lyapunov_components(const SwitchedLpvSystem& sys, const LmiProblem& prob, const Assignment& a,
                                               const std::vector<int>& modes, const std::vector<Vector>& alphas) {
  const auto& meta = prob.metadata;
  const int n = sys.n;
  std::vector<Matrix> out;
  if (meta.condition == Condition::lemma2) {
    const Matrix S = detail::variable_at(a, prob, "S" + std::to_string(modes.at(0) + 1), alphas.at(0), n);
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success) throw Error("lyapunov_components: S is not positive definite");
    out.push_back(detail::sym(llt.solve(Matrix::Identity(n, n))));
    return out;
  }
  const int N = condition_N(meta.condition, meta.N);
  const bool param_dep = meta.condition == Condition::corollary1;
  Matrix psi = Matrix::Identity(n, n);
  for (int j = 1; j <= N; ++j) {
    if (j > 1) psi = sys.at(modes.at(static_cast<std::size_t>(j - 2)), alphas.at(static_cast<std::size_t>(j - 2))) * psi;
    const Vector al = param_dep ? alphas.at(0) : Vector::Constant(sys.V, 1.0 / sys.V);
    const Matrix P = detail::variable_at(a, prob, "P" + std::to_string(j), al, n);
    out.push_back(psi.transpose() * P * psi);
  }
  return out;
}

struct Trajectory {
  std::vector<Vector> states;       // x(0) .. x(steps)
  std::vector<int> switching;       // sigma(0) .. sigma(steps-1), zero-based
  std::vector<Vector> parameters;   // alpha_0 .. alpha_{steps-1}
  std::vector<double> lyapunov_total;
  std::vector<std::vector<double>> lyapunov_components;  // [k][j]
};

inline Trajectory simulate(const SwitchedLpvSystem& sys, const SwitchingSignal& sigma, const ParameterTrajectory& params, const Vector& x0,
                           int steps, const LmiProblem* prob = nullptr, const Assignment* cert = nullptr) {
  require_valid(sys);
  if (steps < 0) throw std::invalid_argument("simulate: negative step count");
  if (x0.size() != sys.n) throw std::invalid_argument("simulate: x0 has dimension " + std::to_string(x0.size()) + ", system has " + std::to_string(sys.n));
  if ((prob == nullptr) != (cert == nullptr)) throw std::invalid_argument("simulate: problem and certificate go together");
  if (prob && (prob->metadata.n != sys.n || prob->metadata.m != sys.m || prob->metadata.V != sys.V))
    throw std::invalid_argument("simulate: certificate dimensions do not match the system");
  Trajectory t;
  t.switching = sigma.materialize(steps, sys.m);
  t.parameters = params.materialize(steps, sys.V);
  t.states.push_back(x0);
  for (int k = 0; k < steps; ++k)
    t.states.push_back(sys.at(t.switching[static_cast<std::size_t>(k)], t.parameters[static_cast<std::size_t>(k)]) * t.states.back());
  if (!prob) return t;
  const int w = lyapunov_window(prob->metadata);
  for (int k = 0; k + w <= steps; ++k) {
    std::vector<int> modes(t.switching.begin() + k, t.switching.begin() + k + w);
    std::vector<Vector> alphas(t.parameters.begin() + k, t.parameters.begin() + k + w);
    const auto comps = lyapunov_components(sys, *prob, *cert, modes, alphas);
    const Vector& x = t.states[static_cast<std::size_t>(k)];
    std::vector<double> v;
    double total = 0.0;
    for (const auto& M : comps) {
      v.push_back(x.dot(M * x));
      total += v.back();
    }
    t.lyapunov_total.push_back(total);
    t.lyapunov_components.push_back(std::move(v));
  }
  return t;
}

/// Columns k, x_1..x_n, sigma (one-based), alpha_1..alpha_V, V_total, V_1..V_N.
inline std::string trajectory_csv(const Trajectory& t) {
  const std::size_t n = t.states.empty() ? 0 : static_cast<std::size_t>(t.states.front().size());
  const std::size_t V = t.parameters.empty() ? 0 : static_cast<std::size_t>(t.parameters.front().size());
  const std::size_t nc = t.lyapunov_components.empty() ? 0 : t.lyapunov_components.front().size();
  std::string out = "k";
  for (std::size_t i = 1; i <= n; ++i) out += ",x_" + std::to_string(i);
  out += ",sigma";
  for (std::size_t i = 1; i <= V; ++i) out += ",alpha_" + std::to_string(i);
  if (nc) {
    out += ",V_total";
    for (std::size_t j = 1; j <= nc; ++j) out += ",V_" + std::to_string(j);
  }
  out += "\n";
  for (std::size_t k = 0; k < t.states.size(); ++k) {
    out += std::to_string(k);
    for (std::size_t i = 0; i < n; ++i) out += "," + detail::fmt_double(t.states[k](static_cast<Eigen::Index>(i)));
    out += ",";
    if (k < t.switching.size()) out += std::to_string(t.switching[k] + 1);
    for (std::size_t i = 0; i < V; ++i) {
      out += ",";
      if (k < t.parameters.size()) out += detail::fmt_double(t.parameters[k](static_cast<Eigen::Index>(i)));
    }
    if (nc) {
      out += ",";
      if (k < t.lyapunov_total.size()) out += detail::fmt_double(t.lyapunov_total[k]);
      for (std::size_t j = 0; j < nc; ++j) {
        out += ",";
        if (k < t.lyapunov_components.size()) out += detail::fmt_double(t.lyapunov_components[k][j]);
      }
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampled Lyapunov bounds: beta1 <= lambda(M) <= beta2 and decrease margin beta3.

struct LyapunovBounds {
  double beta1 = std::numeric_limits<double>::infinity();
  double beta2 = -std::numeric_limits<double>::infinity();
  double beta3 = std::numeric_limits<double>::infinity();
  long long samples = 0;
  /// These are sample extrema, not exact optima over the simplex.
  bool sampled = true;
};

inline LyapunovBounds lyapunov_bounds(const SwitchedLpvSystem& sys, const LmiProblem& prob, const Assignment& a, const VerifyOptions& o = {}) {
  LyapunovBounds b;
  SplitRng rng(o.seed);
  const auto& meta = prob.metadata;
  auto eig = [](const Matrix& M) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(detail::sym(M), Eigen::EigenvaluesOnly);
    return std::pair{es.eigenvalues()(0), es.eigenvalues()(es.eigenvalues().size() - 1)};
  };
  if (meta.condition == Condition::lemma2) {
    const auto layout = equation_layouts(meta.condition, 1, meta.n, meta.V, meta.options).front();
    const auto pts = detail::sample_points(layout.signature, o, rng);
    detail::for_each_mode_sequence(sys.m, 2, [&](const std::vector<int>& modes) {
      for (const auto& pt : pts) {
        const Vector& a0 = pt.coordinates[static_cast<std::size_t>(layout.instant_simplex[0])];
        const Vector& a1 = pt.coordinates[static_cast<std::size_t>(layout.instant_simplex[1])];
        const Matrix Pi = lyapunov_components(sys, prob, a, {modes[0]}, {a0}).front();
        const Matrix Pj = lyapunov_components(sys, prob, a, {modes[1]}, {a1}).front();
        const Matrix A = sys.at(modes[0], a0);
        auto [lo, hi] = eig(Pi);
        b.beta1 = std::min(b.beta1, lo);
        b.beta2 = std::max(b.beta2, hi);
        b.beta3 = std::min(b.beta3, eig(Pi - A.transpose() * Pj * A).first);
        ++b.samples;
      }
    });
    return b;
  }
  const auto layouts = equation_layouts(meta.condition, condition_N(meta.condition, meta.N), meta.n, meta.V, meta.options);
  for (const auto& layout : layouts) {
    const auto pts = detail::sample_points(layout.signature, o, rng);
    const bool pos = layout.sense == Sense::positive;
    detail::for_each_mode_sequence(sys.m, layout.num_modes, [&](const std::vector<int>& modes) {
      for (const auto& pt : pts) {
        const Matrix v = raw_condition(sys, prob, a, layout, modes, pt);
        auto [lo, hi] = eig(v);
        if (pos) {
          b.beta1 = std::min(b.beta1, lo);
          b.beta2 = std::max(b.beta2, hi);
        } else {
          b.beta3 = std::min(b.beta3, -hi);
        }
        ++b.samples;
      }
    });
  }
  return b;
}

}  // namespace lpvstab
