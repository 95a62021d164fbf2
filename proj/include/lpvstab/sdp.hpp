#pragma once

// Block SDP solver and the max-margin feasibility wrapper.
//
// Standard form (dual):  maximize b'y  subject to  Z = C - sum_i y_i A_i >= 0,
// with primal          minimize C.X  subject to  A_i.X = b_i, X >= 0.
//
// Infeasible primal-dual interior point method with the HKM search direction
// and Mehrotra predictor-corrector steps.

#include <Eigen/Cholesky>
#include <charconv>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lpvstab/lmi.hpp"
#include "lpvstab/system_io.hpp"

namespace lpvstab {

enum class Backend { builtin, external_file };

struct SolveOptions {
  int max_iterations = 200;
  /// Relative primal/dual infeasibility and gap at which the IPM stops.
  double convergence_tol = 1e-9;
  /// Minimum rechecked eigenvalue margin for a feasible verdict.
  double feasibility_margin_threshold = 1e-7;
  Backend backend = Backend::builtin;
  /// Certificate file read by the external_file backend.
  std::string external_solution;
  /// |x_k| <= bound on every scalar decision variable; 0 disables the box.
  double variable_bound = 1.0;
  /// Upper bound on the margin variable, only used when the box is disabled.
  double margin_cap = 1e6;
  double step_fraction = 0.95;
};

enum class SolverStatus { optimal, max_iterations, numerical_error };

inline std::string to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::optimal: return "optimal";
    case SolverStatus::max_iterations: return "max_iterations";
    case SolverStatus::numerical_error: return "numerical_error";
  }
  return "?";
}

struct SdpBlock {
  int size = 0;
  Matrix C;
  /// Sparse list of (y index, A_i); indices ascending.
  std::vector<std::pair<int, Matrix>> A;
};

struct SdpProblem {
  int num_y = 0;
  Vector b;
  std::vector<SdpBlock> blocks;
};

struct SdpResult {
  SolverStatus status = SolverStatus::numerical_error;
  Vector y;
  std::vector<Matrix> X;
  std::vector<Matrix> Z;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
};

namespace detail {

inline double frob_dot(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

inline Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }

/// Shortest text that reads back to the same double.
inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Largest alpha with M + alpha dM >= 0, given M > 0.
inline double max_step(const Matrix& M, const Matrix& dM) {
  if (M.rows() == 1) {
    const double d = dM(0, 0);
    return d < 0 ? -M(0, 0) / d : std::numeric_limits<double>::infinity();
  }
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success) return 0.0;
  const Matrix L = llt.matrixL();
  Matrix W = L.triangularView<Eigen::Lower>().solve(dM);
  W = L.triangularView<Eigen::Lower>().solve(W.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(W), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin < 0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

inline std::optional<Matrix> spd_inverse(const Matrix& M) {
  if (M.rows() == 1) {
    if (!(M(0, 0) > 0)) return std::nullopt;
    return Matrix::Constant(1, 1, 1.0 / M(0, 0));
  }
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success) return std::nullopt;
  return sym(llt.solve(Matrix::Identity(M.rows(), M.cols())));
}

}  // namespace detail

inline SdpResult solve_sdp(const SdpProblem& P, const SolveOptions& opt = {}) {
  using detail::frob_dot;
  using detail::sym;
  const std::size_t K = P.blocks.size();
  const int ny = P.num_y;
  SdpResult res;
  res.y = Vector::Zero(ny);

  // Starting point scaled as in CSDP.
  int ntot = 0;
  std::vector<double> a_norm(static_cast<std::size_t>(ny), 0.0);
  double c_norm2 = 0.0;
  for (const auto& blk : P.blocks) {
    ntot += blk.size;
    c_norm2 += blk.C.squaredNorm();
    for (const auto& [i, A] : blk.A) a_norm[static_cast<std::size_t>(i)] += A.squaredNorm();
  }
  double alpha0 = 0.0, beta0 = std::sqrt(c_norm2);
  for (int i = 0; i < ny; ++i) {
    const double an = std::sqrt(a_norm[static_cast<std::size_t>(i)]);
    alpha0 = std::max(alpha0, (1.0 + std::abs(P.b(i))) / (1.0 + an));
    beta0 = std::max(beta0, an);
  }
  alpha0 = std::max(1.0, alpha0);
  beta0 = (1.0 + beta0) / std::sqrt(static_cast<double>(std::max(ntot, 1)));
  std::vector<Matrix> X(K), Z(K);
  for (std::size_t k = 0; k < K; ++k) {
    const int s = P.blocks[k].size;
    X[k] = 10.0 * alpha0 * Matrix::Identity(s, s);
    Z[k] = 10.0 * beta0 * Matrix::Identity(s, s);
  }
  Vector& y = res.y;
  const double b_norm = P.b.norm();
  const double c_norm = std::sqrt(c_norm2);

  std::vector<Matrix> Zinv(K), Rd(K), dX(K), dZ(K), dXp(K), dZp(K), Q0(K);
  for (int it = 0; it <= opt.max_iterations; ++it) {
    res.iterations = it;
    // Residuals and measures.
    Vector Rp = P.b;
    double rd2 = 0.0, pobj = 0.0, xz = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const auto& blk = P.blocks[k];
      Rd[k] = blk.C - Z[k];
      for (const auto& [i, A] : blk.A) {
        Rd[k] -= y(i) * A;
        Rp(i) -= frob_dot(A, X[k]);
      }
      rd2 += Rd[k].squaredNorm();
      pobj += frob_dot(blk.C, X[k]);
      xz += frob_dot(X[k], Z[k]);
    }
    const double dobj = P.b.dot(y);
    res.primal_objective = pobj;
    res.dual_objective = dobj;
    res.primal_infeasibility = Rp.norm() / (1.0 + b_norm);
    res.dual_infeasibility = std::sqrt(rd2) / (1.0 + c_norm);
    res.relative_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (!std::isfinite(pobj) || !std::isfinite(dobj)) {
      res.status = SolverStatus::numerical_error;
      break;
    }
    if (res.primal_infeasibility < opt.convergence_tol && res.dual_infeasibility < opt.convergence_tol && res.relative_gap < opt.convergence_tol) {
      res.status = SolverStatus::optimal;
      break;
    }
    if (it == opt.max_iterations) {
      res.status = SolverStatus::max_iterations;
      break;
    }
    const double mu = xz / ntot;

    // Schur complement M_ij = A_i . (X A_j Z^-1).
    Matrix M = Matrix::Zero(ny, ny);
    Vector rhs_base = P.b;
    bool ok = true;
    for (std::size_t k = 0; k < K && ok; ++k) {
      const auto& blk = P.blocks[k];
      auto zi = detail::spd_inverse(Z[k]);
      if (!zi) {
        ok = false;
        break;
      }
      Zinv[k] = std::move(*zi);
      const Eigen::Index nn = blk.size * blk.size;
      const auto J = static_cast<Eigen::Index>(blk.A.size());
      if (J == 0) continue;
      Matrix Amat(J, nn), Kmat(J, nn);
      for (Eigen::Index j = 0; j < J; ++j) {
        const Matrix& A = blk.A[static_cast<std::size_t>(j)].second;
        const Matrix Kj = X[k] * A * Zinv[k];
        Amat.row(j) = Eigen::Map<const Eigen::RowVectorXd>(A.data(), nn);
        Kmat.row(j) = Eigen::Map<const Eigen::RowVectorXd>(Kj.data(), nn);
      }
      const Matrix Mb = Amat * Kmat.transpose();
      const Matrix XRZ = X[k] * Rd[k] * Zinv[k];
      for (Eigen::Index a = 0; a < J; ++a) {
        const int ia = blk.A[static_cast<std::size_t>(a)].first;
        rhs_base(ia) += frob_dot(blk.A[static_cast<std::size_t>(a)].second, XRZ);
        for (Eigen::Index c = 0; c < J; ++c) M(ia, blk.A[static_cast<std::size_t>(c)].first) += Mb(a, c);
      }
    }
    if (!ok) {
      res.status = SolverStatus::numerical_error;
      break;
    }
    M = sym(M);
    Eigen::LLT<Matrix> llt(M);
    Eigen::LDLT<Matrix> ldlt;
    const bool use_llt = llt.info() == Eigen::Success;
    if (!use_llt) ldlt.compute(M);

    // One Newton solve for a given Q0 (rhs_i = b_i + A_i.XRdZ^-1 - A_i.Q0).
    auto newton = [&](bool with_q0, std::vector<Matrix>& outX, std::vector<Matrix>& outZ, Vector& outy) {
      Vector rhs = rhs_base;
      if (with_q0)
        for (std::size_t k = 0; k < K; ++k)
          for (const auto& [i, A] : P.blocks[k].A) rhs(i) -= frob_dot(A, Q0[k]);
      outy = use_llt ? Vector(llt.solve(rhs)) : Vector(ldlt.solve(rhs));
      for (std::size_t k = 0; k < K; ++k) {
        outZ[k] = Rd[k];
        for (const auto& [i, A] : P.blocks[k].A) outZ[k] -= outy(i) * A;
        Matrix dx = -X[k] - X[k] * outZ[k] * Zinv[k];
        if (with_q0) dx += Q0[k];
        outX[k] = sym(dx);
      }
    };
    auto steps = [&](const std::vector<Matrix>& dx, const std::vector<Matrix>& dz) {
      double ap = std::numeric_limits<double>::infinity(), ad = ap;
      for (std::size_t k = 0; k < K; ++k) {
        ap = std::min(ap, detail::max_step(X[k], dx[k]));
        ad = std::min(ad, detail::max_step(Z[k], dz[k]));
      }
      return std::pair{ap, ad};
    };

    // Predictor.
    Vector dyp;
    newton(false, dXp, dZp, dyp);
    auto [app, adp] = steps(dXp, dZp);
    app = std::min(1.0, app);
    adp = std::min(1.0, adp);
    double xz_aff = 0.0;
    for (std::size_t k = 0; k < K; ++k) xz_aff += frob_dot(X[k] + app * dXp[k], Z[k] + adp * dZp[k]);
    const double mu_aff = std::max(0.0, xz_aff / ntot);
    const double sigma = std::pow(std::min(1.0, mu_aff / mu), 3);

    // Corrector.
    for (std::size_t k = 0; k < K; ++k) Q0[k] = sigma * mu * Zinv[k] - dXp[k] * dZp[k] * Zinv[k];
    Vector dy;
    newton(true, dX, dZ, dy);
    auto [ap, ad] = steps(dX, dZ);
    ap = std::min(1.0, opt.step_fraction * ap);
    ad = std::min(1.0, opt.step_fraction * ad);
    if (!std::isfinite(ap) || !std::isfinite(ad) || !dy.allFinite()) {
      res.status = SolverStatus::numerical_error;
      break;
    }
    for (std::size_t k = 0; k < K; ++k) {
      X[k] = sym(X[k] + ap * dX[k]);
      Z[k] = sym(Z[k] + ad * dZ[k]);
    }
    y += ad * dy;
  }
  res.X = std::move(X);
  res.Z = std::move(Z);
  return res;
}

// ---------------------------------------------------------------------------
// Max-margin form of an LMI feasibility problem.
//
// y = (x_0 .. x_{p-1}, t); maximize t subject to
//   sense * lhs_c(x) - t I >= 0   for margin constraints,
//   sense * lhs_c(x)       >= 0   otherwise,
//   bound -/+ x_k >= 0            (box, when enabled),
//   cap - t >= 0                  (only without the box).

enum class BlockKind { constraint, upper_bound, lower_bound, cap };

struct BlockOrigin {
  BlockKind kind = BlockKind::constraint;
  int index = 0;  // constraint index or scalar index
};

struct MarginSdp {
  SdpProblem sdp;
  std::vector<BlockOrigin> origin;
  int margin_index = 0;
};

inline double sense_sign(Sense s) { return s == Sense::positive ? 1.0 : -1.0; }

inline MarginSdp to_margin_sdp(const LmiProblem& prob, const SolveOptions& opt = {}) {
  MarginSdp out;
  const int p = prob.num_scalars();
  out.margin_index = p;
  out.sdp.num_y = p + 1;
  out.sdp.b = Vector::Zero(p + 1);
  out.sdp.b(p) = 1.0;
  for (std::size_t c = 0; c < prob.constraints.size(); ++c) {
    const auto& con = prob.constraints[c];
    const double sg = sense_sign(con.sense);
    SdpBlock blk;
    blk.size = con.size();
    blk.C = sg * con.constant;
    for (const auto& t : con.terms) blk.A.emplace_back(t.scalar, -sg * t.coefficient);
    if (con.margin) blk.A.emplace_back(p, Matrix::Identity(blk.size, blk.size));
    out.sdp.blocks.push_back(std::move(blk));
    out.origin.push_back({BlockKind::constraint, static_cast<int>(c)});
  }
  if (opt.variable_bound > 0) {
    for (int k = 0; k < p; ++k) {
      out.sdp.blocks.push_back({1, Matrix::Constant(1, 1, opt.variable_bound), {{k, Matrix::Constant(1, 1, 1.0)}}});
      out.origin.push_back({BlockKind::upper_bound, k});
      out.sdp.blocks.push_back({1, Matrix::Constant(1, 1, opt.variable_bound), {{k, Matrix::Constant(1, 1, -1.0)}}});
      out.origin.push_back({BlockKind::lower_bound, k});
    }
  } else {
    out.sdp.blocks.push_back({1, Matrix::Constant(1, 1, opt.margin_cap), {{p, Matrix::Constant(1, 1, 1.0)}}});
    out.origin.push_back({BlockKind::cap, 0});
  }
  return out;
}

enum class Verdict { feasible, infeasible, inconclusive };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::feasible: return "feasible";
    case Verdict::infeasible: return "infeasible";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct Certificate {
  Vector x;
  Assignment assignment;
  /// min over margin constraints of lambda_min(sense * lhs(x)).
  double margin = 0.0;
};

struct SolveOutcome {
  Verdict verdict = Verdict::inconclusive;
  /// Optimal t reported by the solver.
  double solver_margin = 0.0;
  /// Margin of the returned x, recomputed by eigen-decomposition.
  double recheck_margin = 0.0;
  std::string worst_label;
  /// t* reached the margin cap (only possible without the box).
  bool capped = false;
  SdpResult solver;
  std::optional<Certificate> certificate;
  std::string reason;
};

/// Smallest eigenvalue of sense * lhs(x) over all margin constraints.
inline double constraint_margin(const LmiProblem& prob, const Vector& x, std::string* worst = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : prob.constraints) {
    const Matrix v = detail::sym(sense_sign(c.sense) * c.lhs(x));
    Eigen::SelfAdjointEigenSolver<Matrix> es(v, Eigen::EigenvaluesOnly);
    const double l = es.eigenvalues()(0);
    if (l < best) {
      best = l;
      if (worst) *worst = c.label;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Certificates:
//   * lpvstab certificate
//   margin 0.0253
//   variable P1 block 0 rows 2
//   1 0.2
//   0.2 1

inline std::string write_certificate(const LmiProblem& prob, const Certificate& cert) {
  std::ostringstream os;
  os << "* lpvstab certificate condition=" << to_string(prob.metadata.condition) << " N=" << prob.metadata.N << "\n";
  os << "margin " << detail::fmt_double(cert.margin) << "\n";
  for (const auto& v : prob.variables) {
    const auto& blocks = cert.assignment.at(v.name);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      os << "variable " << v.name << " block " << b << " rows " << blocks[b].rows() << "\n";
      for (Eigen::Index i = 0; i < blocks[b].rows(); ++i) {
        for (Eigen::Index j = 0; j < blocks[b].cols(); ++j) os << (j ? " " : "") << detail::fmt_double(blocks[b](i, j));
        os << "\n";
      }
    }
  }
  return os.str();
}

/// Reads a certificate and recomputes its margin against `prob`.
inline Certificate import_certificate(const std::string& text, const LmiProblem& prob, const std::string& source = "<certificate>") {
  std::istringstream in(text);
  std::string line;
  Assignment a;
  int lineno = 0;
  auto fail = [&](const std::string& msg) { return ParseError(source + ":" + std::to_string(lineno) + ": " + msg); };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "margin") continue;
    if (kw != "variable") throw fail("unexpected '" + kw + "'");
    std::string name, bkw, rkw;
    std::size_t block = 0;
    int rows = 0;
    if (!(ls >> name >> bkw >> block >> rkw >> rows) || bkw != "block" || rkw != "rows" || rows < 1) throw fail("malformed variable header");
    const MatrixVariable* v = prob.find_variable(name);
    if (!v) throw fail("unknown variable " + name);
    if (rows != v->dim) throw fail("variable " + name + " has dimension " + std::to_string(v->dim));
    Matrix m(rows, rows);
    for (int i = 0; i < rows; ++i) {
      if (!std::getline(in, line)) throw fail("truncated matrix for " + name);
      ++lineno;
      std::istringstream rs(line);
      for (int j = 0; j < rows; ++j)
        if (!(rs >> m(i, j))) throw fail("short row in " + name);
      std::string extra;
      if (rs >> extra) throw fail("long row in " + name);
    }
    auto& blocks = a[name];
    if (block != blocks.size()) throw fail("blocks of " + name + " out of order");
    blocks.push_back(std::move(m));
  }
  Certificate cert;
  cert.x = flatten_assignment(prob, a);
  cert.assignment = extract_assignment(prob, cert.x);
  cert.margin = constraint_margin(prob, cert.x);
  return cert;
}


inline SolveOutcome solve_feasibility(const LmiProblem& prob, const SolveOptions& opt = {}) {
  SolveOutcome out;
  if (prob.constraints.empty()) throw std::invalid_argument("solve_feasibility: problem has no constraints");
  if (opt.backend == Backend::external_file) {
    Certificate cert = import_certificate(detail::read_file(opt.external_solution), prob, opt.external_solution);
    out.solver_margin = out.recheck_margin = constraint_margin(prob, cert.x, &out.worst_label);
    if (out.recheck_margin > opt.feasibility_margin_threshold) {
      out.verdict = Verdict::feasible;
      out.certificate = std::move(cert);
      out.reason = "external certificate rechecked";
    } else {
      out.verdict = Verdict::inconclusive;
      out.reason = "external certificate does not clear the threshold";
    }
    return out;
  }
  const MarginSdp ms = to_margin_sdp(prob, opt);
  out.solver = solve_sdp(ms.sdp, opt);
  const Vector& y = out.solver.y;
  out.solver_margin = y(ms.margin_index);
  const Vector x = y.head(prob.num_scalars());
  out.recheck_margin = x.allFinite() ? constraint_margin(prob, x, &out.worst_label) : -std::numeric_limits<double>::infinity();
  const bool converged = out.solver.status == SolverStatus::optimal;
  out.capped = opt.variable_bound <= 0 && out.solver_margin >= opt.margin_cap * (1.0 - 1e-6);
  if (out.recheck_margin > opt.feasibility_margin_threshold) {
    out.verdict = Verdict::feasible;
    out.certificate = Certificate{x, extract_assignment(prob, x), out.recheck_margin};
    out.reason = converged ? "solver optimal, margin rechecked" : "solver " + to_string(out.solver.status) + " but rechecked margin is positive";
  } else if (converged && out.solver_margin <= opt.feasibility_margin_threshold) {
    out.verdict = Verdict::infeasible;
    out.reason = "optimal margin does not exceed the tolerance";
  } else {
    out.verdict = Verdict::inconclusive;
    out.reason = converged ? "solver margin positive but recheck failed" : "solver " + to_string(out.solver.status);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling-based check of a certificate against the raw conditions.

struct VerifyOptions {
  /// Grid resolution per simplex (points with denominator `grid_depth`).
  int grid_depth = 20;
  /// Product grids above this size fall back to vertex combinations.
  long long max_grid_points = 20000;
  /// Random points added on top of the grid.
  int random_samples = 1000;
  std::uint64_t seed = 1;
};

struct VerificationReport {
  bool ok = false;
  /// min over samples of lambda_min(sense * expression).
  double min_margin = std::numeric_limits<double>::infinity();
  /// Smallest eigenvalue seen in positivity conditions.
  double min_positivity = std::numeric_limits<double>::infinity();
  /// Largest eigenvalue seen in negativity conditions.
  double max_negativity = -std::numeric_limits<double>::infinity();
  std::string worst_equation;
  std::vector<int> worst_modes;
  SimplexPoint worst_point;
  long long samples = 0;
};

namespace detail {

/// All points of a V-simplex with coordinates k/depth.
inline std::vector<Vector> simplex_grid(int V, int depth) {
  std::vector<Vector> pts;
  for (const auto& e : exponent_vectors(V, depth)) {
    Vector p(V);
    for (int i = 0; i < V; ++i) p(i) = static_cast<double>(e[static_cast<std::size_t>(i)]) / depth;
    pts.push_back(std::move(p));
  }
  return pts;
}

inline std::vector<SimplexPoint> sample_points(const SimplexSignature& sig, const VerifyOptions& o, SplitRng& rng) {
  std::vector<SimplexPoint> out;
  const int S = sig.num_simplexes();
  if (S == 0) return {SimplexPoint{}};
  std::vector<std::vector<Vector>> grids;
  long long total = 1;
  for (int s = 0; s < S; ++s) {
    grids.push_back(simplex_grid(sig.vertices(s), std::max(1, o.grid_depth)));
    total *= static_cast<long long>(grids.back().size());
    if (total > o.max_grid_points) break;
  }
  auto product = [&](const std::vector<std::vector<Vector>>& axes) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(S), 0);
    while (true) {
      SimplexPoint p;
      for (int s = 0; s < S; ++s) p.coordinates.push_back(axes[static_cast<std::size_t>(s)][idx[static_cast<std::size_t>(s)]]);
      out.push_back(std::move(p));
      int pos = S - 1;
      while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == axes[static_cast<std::size_t>(pos)].size()) idx[static_cast<std::size_t>(pos--)] = 0;
      if (pos < 0) break;
    }
  };
  if (total <= o.max_grid_points && static_cast<int>(grids.size()) == S) {
    product(grids);
  } else {
    // Too many grid points: vertex combinations only.
    std::vector<std::vector<Vector>> verts;
    long long vtotal = 1;
    for (int s = 0; s < S; ++s) {
      verts.push_back(simplex_grid(sig.vertices(s), 1));
      vtotal *= sig.vertices(s);
    }
    if (vtotal <= o.max_grid_points) product(verts);
  }
  for (int r = 0; r < o.random_samples; ++r) {
    SimplexPoint p;
    for (int s = 0; s < S; ++s) p.coordinates.push_back(rng.simplex(sig.vertices(s)));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace detail

/// Evaluates the unexpanded conditions at sampled parameter points for every
/// mode sequence. `ok` requires a strictly positive worst margin.
inline VerificationReport verify_certificate(const SwitchedLpvSystem& sys, const LmiProblem& prob, const Assignment& a,
                                             const VerifyOptions& o = {}) {
  VerificationReport rep;
  SplitRng rng(o.seed);
  const auto& meta = prob.metadata;
  const auto layouts = equation_layouts(meta.condition, condition_N(meta.condition, meta.N), meta.n, meta.V, meta.options);
  for (const auto& layout : layouts) {
    const auto points = detail::sample_points(layout.signature, o, rng);
    const double sg = sense_sign(layout.sense);
    detail::for_each_mode_sequence(sys.m, layout.num_modes, [&](const std::vector<int>& modes) {
      for (const auto& pt : points) {
        const Matrix v = detail::sym(sg * raw_condition(sys, prob, a, layout, modes, pt));
        Eigen::SelfAdjointEigenSolver<Matrix> es(v, Eigen::EigenvaluesOnly);
        const double l = es.eigenvalues()(0);
        ++rep.samples;
        if (layout.sense == Sense::positive)
          rep.min_positivity = std::min(rep.min_positivity, l);
        else
          rep.max_negativity = std::max(rep.max_negativity, -l);
        if (l < rep.min_margin) {
          rep.min_margin = l;
          rep.worst_equation = layout.name;
          rep.worst_modes = modes;
          rep.worst_point = pt;
        }
      }
    });
  }
  rep.ok = rep.min_margin > 0.0;
  return rep;
}

}  // namespace lpvstab
