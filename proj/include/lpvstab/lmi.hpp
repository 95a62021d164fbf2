#pragma once

// Finite LMI relaxations of the parameter-dependent stability conditions.
//
// Every condition is built as an affine expression in the scalar decision
// variables whose coefficients are matrix polynomials over a multi-simplex
// (one simplex per time instant, or a single shared simplex when the
// parameter is frozen). Each expression is homogenized to a fixed target
// degree and split into one LMI per monomial coefficient.
//
// Conditions (modes i_r, Phi_0 = I, Phi_r = A_{i_r}(alpha_{r-1}) Phi_{r-1}):
//
//   theorem1   pos: sum_{j<N} Phi_j' P_{j+1} Phi_j > 0                 over P^{N-1}
//              dec: sum_{z=1..N} Phi_z' P_z Phi_z - pos-sum < 0         over P^N
//   corollary1 as theorem1 with P_j(alpha) affine; pos uses P_{j+1}(alpha_0),
//              dec uses P_z(alpha_1) in the first sum and P_{j+1}(alpha_0)
//              in the subtracted one
//   lemma3     theorem1 with N = 2, written out term by term
//   lemma2     [[G_i + G_i' - S_i(a0), *], [A_i(a0) G_i(a0), S_j(a1)]] > 0
//              over (i, j), with S and G parameter dependent

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "lpvstab/simplex_poly.hpp"
#include "lpvstab/system.hpp"

namespace lpvstab {

enum class Condition { lemma2, lemma3, theorem1, corollary1 };
enum class Sense { positive, negative };
enum class Structure { symmetric, general };

inline std::string to_string(Condition c) {
  switch (c) {
    case Condition::lemma2: return "lemma2";
    case Condition::lemma3: return "lemma3";
    case Condition::theorem1: return "theorem1";
    case Condition::corollary1: return "corollary1";
  }
  return "?";
}

inline Condition parse_condition(const std::string& s) {
  if (s == "lemma2") return Condition::lemma2;
  if (s == "lemma3") return Condition::lemma3;
  if (s == "theorem1") return Condition::theorem1;
  if (s == "corollary1") return Condition::corollary1;
  throw std::invalid_argument("unknown condition '" + s + "' (expected lemma2, lemma3, theorem1 or corollary1)");
}

struct GenOptions {
  /// All time instants share one simplex (frozen parameter).
  bool time_invariant = false;
  /// Polynomial degree of parameter-dependent variables (lemma2, corollary1).
  int variable_degree = 1;
  /// Drops P_2..P_N (theorem1, lemma3, corollary1), i.e. fixes them to zero.
  bool zero_tail = false;

  bool operator==(const GenOptions&) const = default;
};

struct MatrixVariable {
  std::string name;
  int dim = 0;
  Structure structure = Structure::symmetric;
  int degree = 0;
  int vertices = 1;
  int first_scalar = 0;
  bool positive_definite = false;

  int scalars_per_block() const { return structure == Structure::symmetric ? dim * (dim + 1) / 2 : dim * dim; }
  int num_blocks() const { return degree == 0 ? 1 : static_cast<int>(monomial_count(vertices, degree)); }
  int num_scalars() const { return scalars_per_block() * num_blocks(); }

  /// Parameter exponents of each block; a single empty entry when constant.
  std::vector<std::vector<int>> block_exponents() const {
    if (degree == 0) return {std::vector<int>(static_cast<std::size_t>(vertices), 0)};
    return exponent_vectors(vertices, degree);
  }

  /// (row, col) of local scalar k; symmetric scalars walk the upper triangle.
  std::pair<int, int> position(int k) const {
    if (structure == Structure::general) return {k / dim, k % dim};
    for (int i = 0; i < dim; ++i) {
      const int row_len = dim - i;
      if (k < row_len) return {i, i + k};
      k -= row_len;
    }
    throw std::out_of_range("MatrixVariable::position");
  }

  Matrix basis(int k) const {
    auto [i, j] = position(k);
    Matrix e = Matrix::Zero(dim, dim);
    e(i, j) = 1.0;
    if (structure == Structure::symmetric) e(j, i) = 1.0;
    return e;
  }

  Matrix block_value(const Vector& x, int block) const {
    Matrix v = Matrix::Zero(dim, dim);
    const int base = first_scalar + block * scalars_per_block();
    for (int k = 0; k < scalars_per_block(); ++k) v += x(base + k) * basis(k);
    return v;
  }
};

struct LmiTerm {
  int scalar = 0;
  Matrix coefficient;
};

struct LmiConstraint {
  std::string equation;  // "pos", "dec" or "blk"
  int equation_index = 0;
  std::vector<int> modes;  // zero-based
  Monomial monomial;
  Sense sense = Sense::positive;
  /// Margin constraints enter the solver as sense*lhs >= t I; others as >= 0.
  bool margin = true;
  Matrix constant;
  std::vector<LmiTerm> terms;  // ascending scalar index
  std::string label;

  int size() const { return static_cast<int>(constant.rows()); }

  Matrix lhs(const Vector& x) const {
    Matrix v = constant;
    for (const auto& t : terms) v += x(t.scalar) * t.coefficient;
    return v;
  }
};

struct ProblemMetadata {
  Condition condition = Condition::theorem1;
  int N = 1;
  int n = 0;
  int m = 0;
  int V = 0;
  GenOptions options;
  int num_variables = 0;
  int num_rows = 0;
};

struct LmiProblem {
  std::vector<MatrixVariable> variables;
  std::vector<LmiConstraint> constraints;
  ProblemMetadata metadata;

  int num_scalars() const {
    int s = 0;
    for (const auto& v : variables) s += v.num_scalars();
    return s;
  }

  const MatrixVariable* find_variable(const std::string& name) const {
    for (const auto& v : variables)
      if (v.name == name) return &v;
    return nullptr;
  }

  /// Variable owning scalar index s.
  const MatrixVariable& owner(int s) const {
    for (const auto& v : variables)
      if (s >= v.first_scalar && s < v.first_scalar + v.num_scalars()) return v;
    throw std::out_of_range("scalar index outside every variable");
  }

  /// "P1#0(0,1)": variable, parameter block, entry.
  std::string scalar_name(int s) const {
    const auto& v = owner(s);
    const int local = s - v.first_scalar;
    const int block = local / v.scalars_per_block();
    auto [i, j] = v.position(local % v.scalars_per_block());
    return v.name + "#" + std::to_string(block) + "(" + std::to_string(i) + "," + std::to_string(j) + ")";
  }
};

// ---------------------------------------------------------------------------
// Equation layout: signature, mode-sequence length and target degrees.

struct EquationLayout {
  std::string name;
  Sense sense = Sense::positive;
  int num_modes = 0;
  SimplexSignature signature;
  std::vector<int> target_degrees;
  /// Time instant r -> simplex index.
  std::vector<int> instant_simplex;
  int block_size = 0;
};

namespace detail {

inline std::vector<int> instant_map(int instants, bool time_invariant) {
  std::vector<int> m(static_cast<std::size_t>(instants));
  for (int r = 0; r < instants; ++r) m[static_cast<std::size_t>(r)] = time_invariant ? 0 : r;
  return m;
}

inline EquationLayout make_layout(std::string name, Sense sense, int num_modes, int instants, int V, bool ti,
                                  std::vector<int> tv_degrees, int ti_degree, int block_size) {
  EquationLayout e;
  e.name = std::move(name);
  e.sense = sense;
  e.num_modes = num_modes;
  e.block_size = block_size;
  if (ti) {
    e.signature = SimplexSignature::uniform(1, V);
    e.target_degrees = {ti_degree};
  } else {
    e.signature = SimplexSignature::uniform(instants, V);
    e.target_degrees = std::move(tv_degrees);
  }
  e.instant_simplex = instant_map(instants, ti);
  return e;
}

}  // namespace detail

/// Equations of a condition in emission order.
inline std::vector<EquationLayout> equation_layouts(Condition c, int N, int n, int V, const GenOptions& o) {
  const bool ti = o.time_invariant;
  const int d = o.variable_degree;
  std::vector<EquationLayout> out;
  switch (c) {
    case Condition::theorem1: {
      out.push_back(detail::make_layout("pos", Sense::positive, N - 1, N - 1, V, ti, std::vector<int>(static_cast<std::size_t>(N - 1), 2),
                                        2 * (N - 1), n));
      out.push_back(detail::make_layout("dec", Sense::negative, N, N, V, ti, std::vector<int>(static_cast<std::size_t>(N), 2), 2 * N, n));
      break;
    }
    case Condition::lemma3: {
      out.push_back(detail::make_layout("pos", Sense::positive, 1, 1, V, ti, {2}, 2, n));
      out.push_back(detail::make_layout("dec", Sense::negative, 2, 2, V, ti, {2, 2}, 4, n));
      break;
    }
    case Condition::corollary1: {
      // P_j(alpha_k) needs the alpha_k simplex even when N = 1, and the
      // decrease condition always sees alpha_{k+1}.
      std::vector<int> pos_deg, dec_deg;
      if (N == 1) {
        pos_deg = {d};
        dec_deg = {std::max(2, d), d};
      } else {
        pos_deg.assign(static_cast<std::size_t>(N - 1), 2);
        pos_deg[0] = d + 2;
        dec_deg.assign(static_cast<std::size_t>(N), 2);
        dec_deg[0] = d + 2;
        dec_deg[1] = d + 2;
      }
      out.push_back(detail::make_layout("pos", Sense::positive, N - 1, std::max(N - 1, 1), V, ti, pos_deg, 2 * (N - 1) + d, n));
      out.push_back(detail::make_layout("dec", Sense::negative, N, std::max(N, 2), V, ti, dec_deg, 2 * N + d, n));
      break;
    }
    case Condition::lemma2: {
      out.push_back(detail::make_layout("blk", Sense::positive, 2, 2, V, ti, {d + 1, d}, d + 1, 2 * n));
      break;
    }
  }
  return out;
}

inline int condition_N(Condition c, int N) {
  if (c == Condition::lemma3) return 2;
  if (c == Condition::lemma2) return 1;
  return N;
}

// ---------------------------------------------------------------------------
// Counting formulas.

/// Scalar decision variables of a condition.
inline int count_variables(int n, int N, Condition c, int V = 2, int m = 1, int degree = 1, bool zero_tail = false) {
  if (n < 1 || N < 1 || V < 1 || m < 1 || degree < 0) throw std::invalid_argument("count_variables: arguments must be positive");
  const int sym = n * (n + 1) / 2;
  const int blocks = static_cast<int>(monomial_count(V, degree));
  switch (c) {
    case Condition::theorem1: return (zero_tail ? 1 : N) * sym;
    case Condition::lemma3: return (zero_tail ? 1 : 2) * sym;
    case Condition::corollary1: return blocks * (zero_tail ? 1 : N) * sym;
    case Condition::lemma2: return m * blocks * (sym + n * n);
  }
  throw std::invalid_argument("count_variables: unknown condition");
}

/// LMI rows of the theorem1 relaxation:
/// n m^{N-1} (V(V+1)/2)^{N-1} + n m^N (V(V+1)/2)^N.
inline long long count_rows(int n, int m, int V, int N) {
  if (n < 1 || m < 1 || V < 1 || N < 1) throw std::invalid_argument("count_rows: arguments must be positive");
  const long long pairs = static_cast<long long>(V) * (V + 1) / 2;
  long long a = n, b = n;
  for (int k = 0; k < N - 1; ++k) a *= m * pairs;
  for (int k = 0; k < N; ++k) b *= m * pairs;
  return a + b;
}

/// LMI rows for any condition, in closed form.
inline long long count_rows(Condition c, int n, int m, int V, int N, const GenOptions& o = {}) {
  if (n < 1 || m < 1 || V < 1 || N < 1) throw std::invalid_argument("count_rows: arguments must be positive");
  auto pw = [](long long base, int e) {
    long long r = 1;
    for (int k = 0; k < e; ++k) r *= base;
    return r;
  };
  auto mc = [V](int deg) { return monomial_count(V, deg); };
  const int d = o.variable_degree;
  const bool ti = o.time_invariant;
  switch (c) {
    case Condition::theorem1:
      if (!ti) return count_rows(n, m, V, N);
      return n * pw(m, N - 1) * mc(2 * (N - 1)) + n * pw(m, N) * mc(2 * N);
    case Condition::lemma3:
      return ti ? n * m * mc(2) + n * m * m * mc(4) : count_rows(n, m, V, 2);
    case Condition::corollary1:
      if (ti) return n * pw(m, N - 1) * mc(2 * (N - 1) + d) + n * pw(m, N) * mc(2 * N + d);
      if (N == 1) return n * mc(d) + n * m * mc(std::max(2, d)) * mc(d);
      return n * pw(m, N - 1) * mc(d + 2) * pw(mc(2), N - 2) + n * pw(m, N) * mc(d + 2) * mc(d + 2) * pw(mc(2), N - 2);
    case Condition::lemma2:
      return 2LL * n * m * m * mc(d + 1) * (ti ? 1 : mc(d));
  }
  throw std::invalid_argument("count_rows: unknown condition");
}

// ---------------------------------------------------------------------------
// Labels: "dec;modes=1,2;mono=2,0|1,1" (modes one-based).

inline std::string make_label(const std::string& equation, const std::vector<int>& modes, const Monomial& mono,
                              const SimplexSignature& sig) {
  std::ostringstream os;
  os << equation << ";modes=";
  for (std::size_t i = 0; i < modes.size(); ++i) os << (i ? "," : "") << modes[i] + 1;
  os << ";mono=" << to_string(mono, sig);
  return os.str();
}

struct ParsedLabel {
  std::string equation;
  std::vector<int> modes;  // zero-based
  Monomial monomial;
};

/// Parses a label and checks it against the problem's declared domains.
inline ParsedLabel parse_label(const std::string& label, const ProblemMetadata& meta) {
  ParsedLabel out;
  const auto p1 = label.find(';');
  const auto p2 = label.find(';', p1 == std::string::npos ? p1 : p1 + 1);
  if (p1 == std::string::npos || p2 == std::string::npos) throw std::invalid_argument("malformed label '" + label + "'");
  out.equation = label.substr(0, p1);
  const std::string modes_part = label.substr(p1 + 1, p2 - p1 - 1);
  const std::string mono_part = label.substr(p2 + 1);
  if (modes_part.rfind("modes=", 0) != 0 || mono_part.rfind("mono=", 0) != 0) throw std::invalid_argument("malformed label '" + label + "'");
  const auto layouts = equation_layouts(meta.condition, condition_N(meta.condition, meta.N), meta.n, meta.V, meta.options);
  const EquationLayout* layout = nullptr;
  for (const auto& l : layouts)
    if (l.name == out.equation) layout = &l;
  if (!layout) throw std::invalid_argument("label names unknown equation '" + out.equation + "'");
  std::stringstream ms(modes_part.substr(6));
  std::string tok;
  while (std::getline(ms, tok, ','))
    if (!tok.empty()) out.modes.push_back(std::stoi(tok) - 1);
  if (static_cast<int>(out.modes.size()) != layout->num_modes) throw std::invalid_argument("label has wrong mode count");
  for (int i : out.modes)
    if (i < 0 || i >= meta.m) throw std::invalid_argument("label mode outside 1..m");
  out.monomial = parse_monomial(mono_part.substr(5), layout->signature);
  if (out.monomial.degrees(layout->signature) != layout->target_degrees) throw std::invalid_argument("label monomial has wrong degree");
  return out;
}

// ---------------------------------------------------------------------------
// Expression building.

namespace detail {

/// constant + sum_s x_s * coeff_s with polynomial coefficients.
class AffineExpr {
 public:
  AffineExpr(SimplexSignature sig, int dim) : sig_(std::move(sig)), dim_(dim) {}

  const SimplexSignature& signature() const { return sig_; }

  void add(int scalar, const MatrixPolynomial& p) {
    auto it = coeffs_.find(scalar);
    if (it == coeffs_.end())
      coeffs_.emplace(scalar, p);
    else
      it->second = it->second + p;
  }

  /// Polynomial alpha_s^{e_b} * value for parameter block b of `var`, or
  /// the constant `value` when `var` is constant.
  MatrixPolynomial variable_term(const MatrixVariable& var, int block, int simplex, const Matrix& value) const {
    if (var.degree == 0) return MatrixPolynomial::constant(sig_, value);
    Monomial mono{std::vector<int>(static_cast<std::size_t>(sig_.total_vertices()), 0)};
    const auto exps = var.block_exponents();
    for (int i = 0; i < var.vertices; ++i)
      mono.exponents[static_cast<std::size_t>(sig_.offset(simplex) + i)] = exps[static_cast<std::size_t>(block)][static_cast<std::size_t>(i)];
    return MatrixPolynomial::term(sig_, mono, value);
  }

  /// Adds sign * L' X(alpha_simplex) L.
  void add_congruence(const MatrixVariable& var, int simplex, const MatrixPolynomial& L, double sign) {
    for (int b = 0; b < var.num_blocks(); ++b)
      for (int k = 0; k < var.scalars_per_block(); ++k) {
        const int s = var.first_scalar + b * var.scalars_per_block() + k;
        add(s, congruence(variable_term(var, b, simplex, sign * var.basis(k)), L));
      }
  }

  /// Splits into one constraint per monomial of the target degree.
  void emit(const EquationLayout& layout, const std::vector<int>& modes, std::vector<LmiConstraint>& out) const {
    std::map<Monomial, LmiConstraint> by_mono;
    auto slot = [&](const Monomial& mono) -> LmiConstraint& {
      auto it = by_mono.find(mono);
      if (it != by_mono.end()) return it->second;
      LmiConstraint c;
      c.equation = layout.name;
      c.modes = modes;
      c.monomial = mono;
      c.sense = layout.sense;
      c.constant = Matrix::Zero(dim_, dim_);
      c.label = make_label(layout.name, modes, mono, sig_);
      return by_mono.emplace(mono, std::move(c)).first->second;
    };
    for (const auto& [scalar, poly] : coeffs_) {
      for (auto& [mono, coeff] : coefficient_lmis(homogenize(poly, layout.target_degrees))) {
        slot(mono).terms.push_back({scalar, std::move(coeff)});
      }
    }
    for (auto& [mono, c] : by_mono) out.push_back(std::move(c));
  }

 private:
  SimplexSignature sig_;
  int dim_;
  std::map<int, MatrixPolynomial> coeffs_;
};

/// Calls f(modes) for every sequence in {0..m-1}^len, lexicographically.
inline void for_each_mode_sequence(int m, int len, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> seq(static_cast<std::size_t>(len), 0);
  while (true) {
    f(seq);
    int pos = len - 1;
    while (pos >= 0 && ++seq[static_cast<std::size_t>(pos)] == m) seq[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
  }
}

/// Phi_0 .. Phi_len as polynomials, Phi_r using instant r-1.
inline std::vector<MatrixPolynomial> phi_chain(const SwitchedLpvSystem& sys, const std::vector<int>& modes, int len,
                                               const EquationLayout& layout) {
  std::vector<MatrixPolynomial> phi;
  phi.push_back(MatrixPolynomial::constant(layout.signature, Matrix::Identity(sys.n, sys.n)));
  for (int r = 1; r <= len; ++r) {
    const int simplex = layout.instant_simplex[static_cast<std::size_t>(r - 1)];
    phi.push_back(multiply(sys.polynomial(modes[static_cast<std::size_t>(r - 1)], layout.signature, simplex), phi.back()));
  }
  return phi;
}

inline MatrixVariable declare(std::vector<MatrixVariable>& vars, int& next, std::string name, int dim, Structure st, int degree,
                              int V, bool pd) {
  MatrixVariable v;
  v.name = std::move(name);
  v.dim = dim;
  v.structure = st;
  v.degree = degree;
  v.vertices = V;
  v.first_scalar = next;
  v.positive_definite = pd;
  next += v.num_scalars();
  vars.push_back(v);
  return v;
}

inline LmiProblem finish(LmiProblem p, Condition c, int N, const SwitchedLpvSystem& sys, const GenOptions& o) {
  p.metadata.condition = c;
  p.metadata.N = N;
  p.metadata.n = sys.n;
  p.metadata.m = sys.m;
  p.metadata.V = sys.V;
  p.metadata.options = o;
  p.metadata.num_variables = p.num_scalars();
  const auto layouts = equation_layouts(c, condition_N(c, N), sys.n, sys.V, o);
  int rows = 0;
  for (auto& con : p.constraints) {
    rows += con.size();
    for (std::size_t e = 0; e < layouts.size(); ++e)
      if (layouts[e].name == con.equation) con.equation_index = static_cast<int>(e);
  }
  p.metadata.num_rows = rows;
  return p;
}

inline void check_options(const GenOptions& o) {
  if (o.variable_degree < 0) throw std::invalid_argument("variable degree must be >= 0");
}

}  // namespace detail

inline LmiProblem gen_theorem1(const SwitchedLpvSystem& sys, int N, const GenOptions& o = {}) {
  require_valid(sys);
  detail::check_options(o);
  if (N < 1) throw std::invalid_argument("gen_theorem1: N must be >= 1");
  LmiProblem prob;
  int next = 0;
  std::vector<MatrixVariable> P;
  for (int j = 1; j <= (o.zero_tail ? 1 : N); ++j)
    P.push_back(detail::declare(prob.variables, next, "P" + std::to_string(j), sys.n, Structure::symmetric, 0, sys.V, false));
  const auto layouts = equation_layouts(Condition::theorem1, N, sys.n, sys.V, o);
  for (const auto& layout : layouts) {
    const bool dec = layout.name == "dec";
    detail::for_each_mode_sequence(sys.m, layout.num_modes, [&](const std::vector<int>& modes) {
      const auto phi = detail::phi_chain(sys, modes, layout.num_modes, layout);
      detail::AffineExpr expr(layout.signature, sys.n);
      for (int j = 0; j < N && j < static_cast<int>(P.size()); ++j) expr.add_congruence(P[static_cast<std::size_t>(j)], 0, phi[static_cast<std::size_t>(j)], dec ? -1.0 : 1.0);
      if (dec)
        for (int z = 1; z <= N && z <= static_cast<int>(P.size()); ++z) expr.add_congruence(P[static_cast<std::size_t>(z - 1)], 0, phi[static_cast<std::size_t>(z)], 1.0);
      expr.emit(layout, modes, prob.constraints);
    });
  }
  return detail::finish(std::move(prob), Condition::theorem1, N, sys, o);
}

/// The N = 2 case written term by term:
///   P1 + A_i' P2 A_i > 0,
///   A_i' P1 A_i + A_i' A_j' P2 A_j A_i - (P1 + A_i' P2 A_i) < 0.
inline LmiProblem gen_lemma3(const SwitchedLpvSystem& sys, const GenOptions& o = {}) {
  require_valid(sys);
  detail::check_options(o);
  LmiProblem prob;
  int next = 0;
  const MatrixVariable P1 = detail::declare(prob.variables, next, "P1", sys.n, Structure::symmetric, 0, sys.V, false);
  std::optional<MatrixVariable> P2;
  if (!o.zero_tail) P2 = detail::declare(prob.variables, next, "P2", sys.n, Structure::symmetric, 0, sys.V, false);
  const auto layouts = equation_layouts(Condition::lemma3, 2, sys.n, sys.V, o);
  const auto& pos = layouts[0];
  const auto& dec = layouts[1];
  const Matrix I = Matrix::Identity(sys.n, sys.n);

  detail::for_each_mode_sequence(sys.m, 1, [&](const std::vector<int>& modes) {
    const auto Ai = sys.polynomial(modes[0], pos.signature, pos.instant_simplex[0]);
    detail::AffineExpr expr(pos.signature, sys.n);
    expr.add_congruence(P1, 0, MatrixPolynomial::constant(pos.signature, I), 1.0);
    if (P2) expr.add_congruence(*P2, 0, Ai, 1.0);
    expr.emit(pos, modes, prob.constraints);
  });
  detail::for_each_mode_sequence(sys.m, 2, [&](const std::vector<int>& modes) {
    const auto Ai = sys.polynomial(modes[0], dec.signature, dec.instant_simplex[0]);
    const auto Aj = sys.polynomial(modes[1], dec.signature, dec.instant_simplex[1]);
    const auto Id = MatrixPolynomial::constant(dec.signature, I);
    detail::AffineExpr expr(dec.signature, sys.n);
    expr.add_congruence(P1, 0, Ai, 1.0);
    expr.add_congruence(P1, 0, Id, -1.0);
    if (P2) {
      for (int k = 0; k < P2->scalars_per_block(); ++k) {
        const auto inner = congruence(MatrixPolynomial::constant(dec.signature, P2->basis(k)), Aj);
        expr.add(P2->first_scalar + k, congruence(inner, Ai));
      }
      expr.add_congruence(*P2, 0, Ai, -1.0);
    }
    expr.emit(dec, modes, prob.constraints);
  });
  return detail::finish(std::move(prob), Condition::lemma3, 2, sys, o);
}

inline LmiProblem gen_corollary1(const SwitchedLpvSystem& sys, int N, const GenOptions& o = {}) {
  require_valid(sys);
  detail::check_options(o);
  if (N < 1) throw std::invalid_argument("gen_corollary1: N must be >= 1");
  LmiProblem prob;
  int next = 0;
  std::vector<MatrixVariable> P;
  for (int j = 1; j <= (o.zero_tail ? 1 : N); ++j)
    P.push_back(detail::declare(prob.variables, next, "P" + std::to_string(j), sys.n, Structure::symmetric, o.variable_degree, sys.V, false));
  const auto layouts = equation_layouts(Condition::corollary1, N, sys.n, sys.V, o);
  for (const auto& layout : layouts) {
    const bool dec = layout.name == "dec";
    const int now = layout.instant_simplex[0];
    detail::for_each_mode_sequence(sys.m, layout.num_modes, [&](const std::vector<int>& modes) {
      const auto phi = detail::phi_chain(sys, modes, layout.num_modes, layout);
      detail::AffineExpr expr(layout.signature, sys.n);
      for (int j = 0; j < N && j < static_cast<int>(P.size()); ++j)
        expr.add_congruence(P[static_cast<std::size_t>(j)], now, phi[static_cast<std::size_t>(j)], dec ? -1.0 : 1.0);
      if (dec) {
        const int next_instant = layout.instant_simplex[1];
        for (int z = 1; z <= N && z <= static_cast<int>(P.size()); ++z)
          expr.add_congruence(P[static_cast<std::size_t>(z - 1)], next_instant, phi[static_cast<std::size_t>(z)], 1.0);
      }
      expr.emit(layout, modes, prob.constraints);
    });
  }
  return detail::finish(std::move(prob), Condition::corollary1, N, sys, o);
}

/// Slack-variable condition with S_i, G_i parameter dependent. G_i is a
/// general square matrix (only G + G' enters symmetrically). Positivity of
/// S_j follows from the lower-right block, so no separate constraint is
/// emitted for it.
inline LmiProblem gen_lemma2(const SwitchedLpvSystem& sys, const GenOptions& o = {}) {
  require_valid(sys);
  detail::check_options(o);
  LmiProblem prob;
  int next = 0;
  std::vector<MatrixVariable> S, G;
  for (int i = 1; i <= sys.m; ++i)
    S.push_back(detail::declare(prob.variables, next, "S" + std::to_string(i), sys.n, Structure::symmetric, o.variable_degree, sys.V, true));
  for (int i = 1; i <= sys.m; ++i)
    G.push_back(detail::declare(prob.variables, next, "G" + std::to_string(i), sys.n, Structure::general, o.variable_degree, sys.V, false));
  const auto layout = equation_layouts(Condition::lemma2, 1, sys.n, sys.V, o).front();
  const int n = sys.n;
  const int s0 = layout.instant_simplex[0];
  const int s1 = layout.instant_simplex[1];
  detail::for_each_mode_sequence(sys.m, 2, [&](const std::vector<int>& modes) {
    const int i = modes[0];
    const int j = modes[1];
    const auto Ai = sys.polynomial(i, layout.signature, s0);
    detail::AffineExpr expr(layout.signature, 2 * n);
    const auto& Si = S[static_cast<std::size_t>(i)];
    const auto& Sj = S[static_cast<std::size_t>(j)];
    const auto& Gi = G[static_cast<std::size_t>(i)];
    for (int b = 0; b < Si.num_blocks(); ++b)
      for (int k = 0; k < Si.scalars_per_block(); ++k) {
        const int s = b * Si.scalars_per_block() + k;
        expr.add(Si.first_scalar + s, embed(expr.variable_term(Si, b, s0, -Si.basis(k)), 2 * n, 2 * n, 0, 0));
        expr.add(Sj.first_scalar + s, embed(expr.variable_term(Sj, b, s1, Sj.basis(k)), 2 * n, 2 * n, n, n));
      }
    for (int b = 0; b < Gi.num_blocks(); ++b)
      for (int k = 0; k < Gi.scalars_per_block(); ++k) {
        const Matrix E = Gi.basis(k);
        const auto g = expr.variable_term(Gi, b, s0, E);
        const auto ag = multiply(Ai, g);
        auto block = embed(g + g.transpose(), 2 * n, 2 * n, 0, 0);
        block = block + embed(ag, 2 * n, 2 * n, n, 0) + embed(ag.transpose(), 2 * n, 2 * n, 0, n);
        expr.add(Gi.first_scalar + b * Gi.scalars_per_block() + k, block);
      }
    expr.emit(layout, modes, prob.constraints);
  });
  return detail::finish(std::move(prob), Condition::lemma2, 1, sys, o);
}

inline LmiProblem generate(Condition c, const SwitchedLpvSystem& sys, int N, const GenOptions& o = {}) {
  switch (c) {
    case Condition::lemma2: return gen_lemma2(sys, o);
    case Condition::lemma3: return gen_lemma3(sys, o);
    case Condition::theorem1: return gen_theorem1(sys, N, o);
    case Condition::corollary1: return gen_corollary1(sys, N, o);
  }
  throw std::invalid_argument("generate: unknown condition");
}

/// Same construction with the parameter frozen across all instants.
inline LmiProblem time_invariant_variant(Condition c, const SwitchedLpvSystem& sys, int N, GenOptions o = {}) {
  o.time_invariant = true;
  return generate(c, sys, N, o);
}

// ---------------------------------------------------------------------------
// Assignments and direct evaluation of the parameter-dependent conditions.

/// Variable name -> one matrix per parameter block.
using Assignment = std::map<std::string, std::vector<Matrix>>;

inline Assignment extract_assignment(const LmiProblem& p, const Vector& x) {
  if (x.size() != p.num_scalars()) throw std::invalid_argument("extract_assignment: vector length mismatch");
  Assignment a;
  for (const auto& v : p.variables) {
    auto& blocks = a[v.name];
    for (int b = 0; b < v.num_blocks(); ++b) {
      Matrix m = v.block_value(x, b);
      if (v.structure == Structure::symmetric) m = 0.5 * (m + m.transpose());
      blocks.push_back(std::move(m));
    }
  }
  return a;
}

inline Vector flatten_assignment(const LmiProblem& p, const Assignment& a) {
  Vector x = Vector::Zero(p.num_scalars());
  for (const auto& v : p.variables) {
    auto it = a.find(v.name);
    if (it == a.end()) throw std::invalid_argument("assignment lacks variable " + v.name);
    if (static_cast<int>(it->second.size()) != v.num_blocks()) throw std::invalid_argument("assignment for " + v.name + " has wrong block count");
    for (int b = 0; b < v.num_blocks(); ++b) {
      const Matrix& m = it->second[static_cast<std::size_t>(b)];
      if (m.rows() != v.dim || m.cols() != v.dim) throw std::invalid_argument("assignment for " + v.name + " has wrong shape");
      for (int k = 0; k < v.scalars_per_block(); ++k) {
        auto [i, j] = v.position(k);
        x(v.first_scalar + b * v.scalars_per_block() + k) = m(i, j);
      }
    }
  }
  return x;
}

namespace detail {

/// sum_b alpha^{e_b} X_b, or zero when the variable is absent.
inline Matrix variable_at(const Assignment& a, const LmiProblem& p, const std::string& name, const Vector& alpha, int n) {
  const MatrixVariable* v = p.find_variable(name);
  auto it = a.find(name);
  if (!v || it == a.end()) return Matrix::Zero(n, n);
  const auto exps = v->block_exponents();
  Matrix r = Matrix::Zero(v->dim, v->dim);
  for (std::size_t b = 0; b < exps.size(); ++b) {
    double w = 1.0;
    for (int i = 0; i < v->vertices; ++i) w *= std::pow(alpha(i), exps[b][static_cast<std::size_t>(i)]);
    r += w * it->second[b];
  }
  return r;
}

}  // namespace detail

/// Value of the raw (unexpanded) left-hand side of one equation for a given
/// mode sequence and multi-simplex point, computed with plain matrix
/// products. `point` follows the equation's signature.
inline Matrix raw_condition(const SwitchedLpvSystem& sys, const LmiProblem& prob, const Assignment& a, const EquationLayout& layout,
                            const std::vector<int>& modes, const SimplexPoint& point) {
  const auto& meta = prob.metadata;
  if (!point.matches(layout.signature)) throw std::invalid_argument("raw_condition: point does not match the equation signature");
  const int n = sys.n;
  auto alpha = [&](int instant) -> const Vector& {
    return point.coordinates[static_cast<std::size_t>(layout.instant_simplex[static_cast<std::size_t>(instant)])];
  };
  auto A = [&](int r) { return sys.at(modes[static_cast<std::size_t>(r)], alpha(r)); };
  auto P = [&](int j, int instant) {
    const Vector& al = instant >= 0 ? alpha(instant) : Vector::Constant(sys.V, 1.0 / sys.V).eval();
    return detail::variable_at(a, prob, "P" + std::to_string(j), al, n);
  };

  switch (meta.condition) {
    case Condition::theorem1:
    case Condition::corollary1: {
      const int N = meta.N;
      const bool cor = meta.condition == Condition::corollary1;
      std::vector<Matrix> phi{Matrix::Identity(n, n)};
      for (int r = 0; r < layout.num_modes; ++r) phi.push_back(A(r) * phi.back());
      Matrix sum_now = Matrix::Zero(n, n);
      for (int j = 0; j < N; ++j) sum_now += phi[static_cast<std::size_t>(j)].transpose() * P(j + 1, cor ? 0 : -1) * phi[static_cast<std::size_t>(j)];
      if (layout.name == "pos") return sum_now;
      Matrix sum_next = Matrix::Zero(n, n);
      for (int z = 1; z <= N; ++z) sum_next += phi[static_cast<std::size_t>(z)].transpose() * P(z, cor ? 1 : -1) * phi[static_cast<std::size_t>(z)];
      return sum_next - sum_now;
    }
    case Condition::lemma3: {
      const Matrix P1 = P(1, -1), P2 = P(2, -1);
      const Matrix Ai = A(0);
      const Matrix v = P1 + Ai.transpose() * P2 * Ai;
      if (layout.name == "pos") return v;
      const Matrix Aj = A(1);
      return Ai.transpose() * P1 * Ai + Ai.transpose() * Aj.transpose() * P2 * Aj * Ai - v;
    }
    case Condition::lemma2: {
      const int i = modes[0], j = modes[1];
      const Matrix Si = detail::variable_at(a, prob, "S" + std::to_string(i + 1), alpha(0), n);
      const Matrix Sj = detail::variable_at(a, prob, "S" + std::to_string(j + 1), alpha(1), n);
      const Matrix Gi = detail::variable_at(a, prob, "G" + std::to_string(i + 1), alpha(0), n);
      const Matrix AG = A(0) * Gi;
      Matrix blk(2 * n, 2 * n);
      blk << Gi + Gi.transpose() - Si, AG.transpose(), AG, Sj;
      return blk;
    }
  }
  throw std::invalid_argument("raw_condition: unknown condition");
}

// ---------------------------------------------------------------------------
// Canonical comparison form.

/// label -> (scalar name or "const") -> coefficient.
using CanonicalConstraintSet = std::map<std::string, std::map<std::string, Matrix>>;

inline CanonicalConstraintSet canonical_form(const LmiProblem& p) {
  CanonicalConstraintSet out;
  for (const auto& c : p.constraints) {
    auto& entry = out[c.label];
    if (c.constant.cwiseAbs().maxCoeff() >= kCoefficientDropTol) entry["const"] = c.constant;
    for (const auto& t : c.terms) entry[p.scalar_name(t.scalar)] = t.coefficient;
  }
  return out;
}

/// Same labels, same variable sets, coefficients equal to `tol` (max-abs).
inline bool canonical_equal(const CanonicalConstraintSet& a, const CanonicalConstraintSet& b, double tol, std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (a.size() != b.size()) return fail("constraint counts differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  for (const auto& [label, terms] : a) {
    auto it = b.find(label);
    if (it == b.end()) return fail("missing constraint " + label);
    if (terms.size() != it->second.size()) return fail("term sets differ in " + label);
    for (const auto& [name, m] : terms) {
      auto jt = it->second.find(name);
      if (jt == it->second.end()) return fail("missing term " + name + " in " + label);
      if (m.rows() != jt->second.rows() || (m - jt->second).cwiseAbs().maxCoeff() > tol) return fail("coefficient differs for " + name + " in " + label);
    }
  }
  return true;
}

}  // namespace lpvstab
