#pragma once

// Matrix-valued polynomials over a cartesian product of unit simplexes.
//
// A polynomial is stored in homogeneous form: every monomial carries the same
// degree in each simplex. Since the coordinates of a simplex sum to one, a
// lower-degree term can always be lifted by multiplying with powers of that
// sum, which leaves every on-simplex value unchanged. Requiring each monomial
// coefficient of a homogeneous polynomial to be definite is sufficient (not
// necessary) for the polynomial to be definite on the whole multi-simplex,
// because the monomials are non-negative there and not all zero.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace lpvstab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Coefficients whose max-abs entry falls below this are dropped.
inline constexpr double kCoefficientDropTol = 1e-14;
inline constexpr double kSimplexTol = 1e-12;

class SimplexSignature {
 public:
  SimplexSignature() = default;

  explicit SimplexSignature(std::vector<int> vertices_per_simplex)
      : vertices_(std::move(vertices_per_simplex)) {
    offsets_.reserve(vertices_.size() + 1);
    for (int v : vertices_) {
      if (v < 1) throw std::invalid_argument("SimplexSignature: every simplex needs at least one vertex");
      offsets_.push_back(offsets_.back() + v);
    }
  }

  static SimplexSignature uniform(int num_simplexes, int vertices) {
    if (num_simplexes < 0) throw std::invalid_argument("SimplexSignature: negative simplex count");
    return SimplexSignature(std::vector<int>(static_cast<std::size_t>(num_simplexes), vertices));
  }

  int num_simplexes() const { return static_cast<int>(vertices_.size()); }
  int vertices(int s) const { return vertices_.at(static_cast<std::size_t>(s)); }
  int offset(int s) const { return offsets_.at(static_cast<std::size_t>(s)); }
  int total_vertices() const { return offsets_.empty() ? 0 : offsets_.back(); }
  const std::vector<int>& vertices_per_simplex() const { return vertices_; }

  bool operator==(const SimplexSignature& other) const { return vertices_ == other.vertices_; }

 private:
  std::vector<int> vertices_;
  std::vector<int> offsets_{0};
};

/// Exponents flattened simplex-major: the block for simplex s starts at
/// signature.offset(s). Ordering is lexicographic on the flat vector.
struct Monomial {
  std::vector<int> exponents;

  auto operator<=>(const Monomial&) const = default;
  bool operator==(const Monomial&) const = default;

  std::span<const int> block(const SimplexSignature& sig, int s) const {
    return std::span<const int>(exponents).subspan(static_cast<std::size_t>(sig.offset(s)),
                                                   static_cast<std::size_t>(sig.vertices(s)));
  }

  int degree(const SimplexSignature& sig, int s) const {
    auto b = block(sig, s);
    return std::accumulate(b.begin(), b.end(), 0);
  }

  std::vector<int> degrees(const SimplexSignature& sig) const {
    std::vector<int> d(static_cast<std::size_t>(sig.num_simplexes()));
    for (int s = 0; s < sig.num_simplexes(); ++s) d[static_cast<std::size_t>(s)] = degree(sig, s);
    return d;
  }
};

/// "2,0|1,1" style rendering, one group per simplex.
inline std::string to_string(const Monomial& mono, const SimplexSignature& sig) {
  std::ostringstream os;
  for (int s = 0; s < sig.num_simplexes(); ++s) {
    if (s) os << '|';
    auto b = mono.block(sig, s);
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (i) os << ',';
      os << b[i];
    }
  }
  return os.str();
}

inline Monomial parse_monomial(const std::string& text, const SimplexSignature& sig) {
  Monomial mono;
  std::vector<std::vector<int>> groups(1);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::size_t used = 0;
    int value = std::stoi(token, &used);
    if (used != token.size() || value < 0) throw std::invalid_argument("bad monomial exponent '" + token + "'");
    groups.back().push_back(value);
    token.clear();
  };
  for (char c : text) {
    if (c == ',') {
      flush();
    } else if (c == '|') {
      flush();
      groups.emplace_back();
    } else {
      token.push_back(c);
    }
  }
  flush();
  if (sig.num_simplexes() == 0) {
    if (!(groups.size() == 1 && groups[0].empty())) throw std::invalid_argument("monomial does not match signature");
    return mono;
  }
  if (static_cast<int>(groups.size()) != sig.num_simplexes())
    throw std::invalid_argument("monomial has wrong number of simplex groups");
  for (int s = 0; s < sig.num_simplexes(); ++s) {
    const auto& g = groups[static_cast<std::size_t>(s)];
    if (static_cast<int>(g.size()) != sig.vertices(s))
      throw std::invalid_argument("monomial group has wrong vertex count");
    mono.exponents.insert(mono.exponents.end(), g.begin(), g.end());
  }
  return mono;
}

/// All exponent vectors of total degree `degree` over `vertices` variables,
/// in descending lexicographic order (e.g. V=2, d=2: (2,0), (1,1), (0,2)).
inline std::vector<std::vector<int>> exponent_vectors(int vertices, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(static_cast<std::size_t>(vertices), 0);
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == vertices - 1) {
      current[static_cast<std::size_t>(pos)] = remaining;
      out.push_back(current);
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      current[static_cast<std::size_t>(pos)] = e;
      self(self, pos + 1, remaining - e);
    }
  };
  if (vertices > 0 && degree >= 0) rec(rec, 0, degree);
  return out;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

/// Number of monomials of degree d over V variables: C(d+V-1, d).
inline long long monomial_count(int vertices, int degree) {
  return static_cast<long long>(binomial(degree + vertices - 1, degree));
}

inline long long monomial_count(const SimplexSignature& sig, const std::vector<int>& degrees) {
  long long c = 1;
  for (int s = 0; s < sig.num_simplexes(); ++s) c *= monomial_count(sig.vertices(s), degrees.at(static_cast<std::size_t>(s)));
  return c;
}

/// d! / prod(e_i!)
inline double multinomial(const std::vector<int>& e) {
  double r = 1.0;
  int total = 0;
  for (int k : e) {
    for (int i = 1; i <= k; ++i) r = r * static_cast<double>(total + i) / static_cast<double>(i);
    total += k;
  }
  return std::round(r);
}

struct SimplexPoint {
  std::vector<Vector> coordinates;

  bool matches(const SimplexSignature& sig) const {
    if (static_cast<int>(coordinates.size()) != sig.num_simplexes()) return false;
    for (int s = 0; s < sig.num_simplexes(); ++s)
      if (coordinates[static_cast<std::size_t>(s)].size() != sig.vertices(s)) return false;
    return true;
  }

  bool on_simplex(double tol = kSimplexTol) const {
    for (const auto& c : coordinates) {
      if ((c.array() < -tol).any()) return false;
      if (std::abs(c.sum() - 1.0) > tol) return false;
    }
    return true;
  }

  double monomial_value(const SimplexSignature& sig, const Monomial& mono) const {
    double v = 1.0;
    for (int s = 0; s < sig.num_simplexes(); ++s) {
      auto b = mono.block(sig, s);
      const auto& c = coordinates[static_cast<std::size_t>(s)];
      for (std::size_t i = 0; i < b.size(); ++i)
        if (b[i] != 0) v *= std::pow(c(static_cast<Eigen::Index>(i)), b[i]);
    }
    return v;
  }
};

class MatrixPolynomial {
 public:
  using TermMap = std::map<Monomial, Matrix>;

  MatrixPolynomial() = default;

  /// Zero polynomial carrying a structural degree.
  MatrixPolynomial(SimplexSignature sig, int rows, int cols, std::vector<int> degrees)
      : sig_(std::move(sig)), rows_(rows), cols_(cols), degrees_(std::move(degrees)) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("MatrixPolynomial: dimensions must be positive");
    if (static_cast<int>(degrees_.size()) != sig_.num_simplexes())
      throw std::invalid_argument("MatrixPolynomial: degree list does not match signature");
    for (int d : degrees_)
      if (d < 0) throw std::invalid_argument("MatrixPolynomial: negative degree");
  }

  static MatrixPolynomial zero(const SimplexSignature& sig, int rows, int cols) {
    return MatrixPolynomial(sig, rows, cols, std::vector<int>(static_cast<std::size_t>(sig.num_simplexes()), 0));
  }

  static MatrixPolynomial constant(const SimplexSignature& sig, const Matrix& value) {
    MatrixPolynomial p = zero(sig, static_cast<int>(value.rows()), static_cast<int>(value.cols()));
    p.accumulate(Monomial{std::vector<int>(static_cast<std::size_t>(sig.total_vertices()), 0)}, value);
    return p;
  }

  /// Sum_l alpha_{s,l} * vertex_l on simplex `simplex_index`.
  static MatrixPolynomial affine_from_vertices(const SimplexSignature& sig, int simplex_index,
                                               const std::vector<Matrix>& vertex_matrices) {
    if (simplex_index < 0 || simplex_index >= sig.num_simplexes())
      throw std::invalid_argument("affine_from_vertices: simplex index out of range");
    if (static_cast<int>(vertex_matrices.size()) != sig.vertices(simplex_index))
      throw std::invalid_argument("affine_from_vertices: vertex count does not match simplex");
    const auto rows = vertex_matrices.front().rows();
    const auto cols = vertex_matrices.front().cols();
    for (const auto& m : vertex_matrices)
      if (m.rows() != rows || m.cols() != cols) throw std::invalid_argument("affine_from_vertices: shape mismatch");
    std::vector<int> deg(static_cast<std::size_t>(sig.num_simplexes()), 0);
    deg[static_cast<std::size_t>(simplex_index)] = 1;
    MatrixPolynomial p(sig, static_cast<int>(rows), static_cast<int>(cols), deg);
    for (int l = 0; l < sig.vertices(simplex_index); ++l) {
      Monomial mono{std::vector<int>(static_cast<std::size_t>(sig.total_vertices()), 0)};
      mono.exponents[static_cast<std::size_t>(sig.offset(simplex_index) + l)] = 1;
      p.accumulate(mono, vertex_matrices[static_cast<std::size_t>(l)]);
    }
    return p;
  }

  /// Single term value * alpha^mono.
  static MatrixPolynomial term(const SimplexSignature& sig, const Monomial& mono, const Matrix& value) {
    if (static_cast<int>(mono.exponents.size()) != sig.total_vertices())
      throw std::invalid_argument("term: monomial does not match signature");
    MatrixPolynomial p(sig, static_cast<int>(value.rows()), static_cast<int>(value.cols()), mono.degrees(sig));
    p.accumulate(mono, value);
    return p;
  }

  const SimplexSignature& signature() const { return sig_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<int>& degrees() const { return degrees_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  bool operator==(const MatrixPolynomial& other) const {
    if (!(sig_ == other.sig_) || rows_ != other.rows_ || cols_ != other.cols_ || degrees_ != other.degrees_) return false;
    if (terms_.size() != other.terms_.size()) return false;
    auto it = other.terms_.begin();
    for (const auto& [mono, coeff] : terms_) {
      if (!(mono == it->first) || coeff != it->second) return false;
      ++it;
    }
    return true;
  }

  MatrixPolynomial transpose() const {
    MatrixPolynomial r(sig_, cols_, rows_, degrees_);
    for (const auto& [mono, coeff] : terms_) r.terms_.emplace(mono, coeff.transpose());
    return r;
  }

  MatrixPolynomial scaled(double c) const {
    MatrixPolynomial r(sig_, rows_, cols_, degrees_);
    for (const auto& [mono, coeff] : terms_) r.accumulate(mono, c * coeff);
    return r;
  }

  /// (M + M^T)/2 applied to every coefficient.
  MatrixPolynomial symmetrized() const {
    if (rows_ != cols_) throw std::invalid_argument("symmetrized: polynomial is not square");
    MatrixPolynomial r(sig_, rows_, cols_, degrees_);
    for (const auto& [mono, coeff] : terms_) r.accumulate(mono, 0.5 * (coeff + coeff.transpose()));
    return r;
  }

  friend MatrixPolynomial operator+(const MatrixPolynomial& a, const MatrixPolynomial& b);
  friend MatrixPolynomial operator-(const MatrixPolynomial& a, const MatrixPolynomial& b) { return a + b.scaled(-1.0); }
  friend MatrixPolynomial multiply(const MatrixPolynomial& a, const MatrixPolynomial& b);
  friend MatrixPolynomial homogenize(const MatrixPolynomial& p, const std::vector<int>& target_degrees);

  /// Adds value * alpha^mono; drops the entry if the sum is negligible.
  void accumulate(const Monomial& mono, const Matrix& value) {
    if (value.rows() != rows_ || value.cols() != cols_) throw std::invalid_argument("accumulate: shape mismatch");
    if (mono.degrees(sig_) != degrees_) throw std::invalid_argument("accumulate: monomial degree is not homogeneous");
    auto it = terms_.find(mono);
    if (it == terms_.end()) {
      if (value.cwiseAbs().maxCoeff() >= kCoefficientDropTol) terms_.emplace(mono, value);
      return;
    }
    it->second += value;
    if (it->second.cwiseAbs().maxCoeff() < kCoefficientDropTol) terms_.erase(it);
  }

 private:
  SimplexSignature sig_;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> degrees_;
  TermMap terms_;
};

inline MatrixPolynomial homogenize(const MatrixPolynomial& p, const std::vector<int>& target_degrees) {
  const auto& sig = p.signature();
  if (static_cast<int>(target_degrees.size()) != sig.num_simplexes())
    throw std::invalid_argument("homogenize: target degree list does not match signature");
  for (std::size_t s = 0; s < target_degrees.size(); ++s)
    if (target_degrees[s] < p.degrees()[s]) throw std::invalid_argument("homogenize: target below current degree");
  if (target_degrees == p.degrees()) return p;

  // Expansion of (sum_i alpha_{s,i})^deficit for every simplex with a deficit.
  std::vector<std::vector<std::pair<std::vector<int>, double>>> factors(target_degrees.size());
  for (int s = 0; s < sig.num_simplexes(); ++s) {
    const int deficit = target_degrees[static_cast<std::size_t>(s)] - p.degrees()[static_cast<std::size_t>(s)];
    for (auto& e : exponent_vectors(sig.vertices(s), deficit)) {
      double w = multinomial(e);
      factors[static_cast<std::size_t>(s)].emplace_back(std::move(e), w);
    }
  }

  MatrixPolynomial r(sig, p.rows(), p.cols(), target_degrees);
  for (const auto& [mono, coeff] : p.terms()) {
    // Odometer over the per-simplex expansions.
    std::vector<std::size_t> idx(factors.size(), 0);
    while (true) {
      Monomial out = mono;
      double w = 1.0;
      for (int s = 0; s < sig.num_simplexes(); ++s) {
        const auto& [e, c] = factors[static_cast<std::size_t>(s)][idx[static_cast<std::size_t>(s)]];
        for (int i = 0; i < sig.vertices(s); ++i) out.exponents[static_cast<std::size_t>(sig.offset(s) + i)] += e[static_cast<std::size_t>(i)];
        w *= c;
      }
      r.accumulate(out, w * coeff);
      std::size_t s = 0;
      for (; s < factors.size(); ++s) {
        if (++idx[s] < factors[s].size()) break;
        idx[s] = 0;
      }
      if (s == factors.size()) break;
    }
  }
  return r;
}

inline MatrixPolynomial operator+(const MatrixPolynomial& a, const MatrixPolynomial& b) {
  if (!(a.signature() == b.signature())) throw std::invalid_argument("add: signature mismatch");
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("add: shape mismatch");
  std::vector<int> deg(a.degrees().size());
  for (std::size_t s = 0; s < deg.size(); ++s) deg[s] = std::max(a.degrees()[s], b.degrees()[s]);
  MatrixPolynomial r = homogenize(a, deg);
  const MatrixPolynomial hb = homogenize(b, deg);
  for (const auto& [mono, coeff] : hb.terms()) r.accumulate(mono, coeff);
  return r;
}

inline MatrixPolynomial multiply(const MatrixPolynomial& a, const MatrixPolynomial& b) {
  if (!(a.signature() == b.signature())) throw std::invalid_argument("multiply: signature mismatch");
  if (a.cols() != b.rows()) throw std::invalid_argument("multiply: inner dimensions differ");
  std::vector<int> deg(a.degrees().size());
  for (std::size_t s = 0; s < deg.size(); ++s) deg[s] = a.degrees()[s] + b.degrees()[s];
  MatrixPolynomial r(a.signature(), a.rows(), b.cols(), deg);
  for (const auto& [ma, ca] : a.terms()) {
    for (const auto& [mb, cb] : b.terms()) {
      Monomial m = ma;
      for (std::size_t i = 0; i < m.exponents.size(); ++i) m.exponents[i] += mb.exponents[i];
      r.accumulate(m, ca * cb);
    }
  }
  return r;
}

/// q^T p q; symmetrized when p is symmetric-valued.
inline MatrixPolynomial congruence(const MatrixPolynomial& p, const MatrixPolynomial& q) {
  if (p.rows() != p.cols()) throw std::invalid_argument("congruence: inner polynomial must be square");
  if (q.rows() != p.rows()) throw std::invalid_argument("congruence: dimension mismatch");
  MatrixPolynomial r = multiply(q.transpose(), multiply(p, q));
  bool symmetric = true;
  for (const auto& [mono, coeff] : p.terms())
    if ((coeff - coeff.transpose()).cwiseAbs().maxCoeff() > 0.0) symmetric = false;
  return symmetric ? r.symmetrized() : r;
}

/// Places p inside a zero matrix of shape rows x cols at (row_offset, col_offset).
inline MatrixPolynomial embed(const MatrixPolynomial& p, int rows, int cols, int row_offset, int col_offset) {
  if (row_offset < 0 || col_offset < 0 || row_offset + p.rows() > rows || col_offset + p.cols() > cols)
    throw std::invalid_argument("embed: block does not fit");
  MatrixPolynomial r(p.signature(), rows, cols, p.degrees());
  for (const auto& [mono, coeff] : p.terms()) {
    Matrix big = Matrix::Zero(rows, cols);
    big.block(row_offset, col_offset, p.rows(), p.cols()) = coeff;
    r.accumulate(mono, big);
  }
  return r;
}

/// Re-expresses p over `target` by sending simplex s of p to simplex
/// `simplex_map[s]` of the target. Several source simplexes may share one
/// target simplex (their exponents add), which is how frozen-parameter
/// variants collapse time instants.
inline MatrixPolynomial remap(const MatrixPolynomial& p, const SimplexSignature& target, const std::vector<int>& simplex_map) {
  const auto& sig = p.signature();
  if (static_cast<int>(simplex_map.size()) != sig.num_simplexes()) throw std::invalid_argument("remap: map size mismatch");
  std::vector<int> deg(static_cast<std::size_t>(target.num_simplexes()), 0);
  for (int s = 0; s < sig.num_simplexes(); ++s) {
    const int t = simplex_map[static_cast<std::size_t>(s)];
    if (t < 0 || t >= target.num_simplexes() || target.vertices(t) != sig.vertices(s))
      throw std::invalid_argument("remap: incompatible target simplex");
    deg[static_cast<std::size_t>(t)] += p.degrees()[static_cast<std::size_t>(s)];
  }
  MatrixPolynomial r(target, p.rows(), p.cols(), deg);
  for (const auto& [mono, coeff] : p.terms()) {
    Monomial out{std::vector<int>(static_cast<std::size_t>(target.total_vertices()), 0)};
    for (int s = 0; s < sig.num_simplexes(); ++s) {
      const int t = simplex_map[static_cast<std::size_t>(s)];
      for (int i = 0; i < sig.vertices(s); ++i)
        out.exponents[static_cast<std::size_t>(target.offset(t) + i)] += mono.exponents[static_cast<std::size_t>(sig.offset(s) + i)];
    }
    r.accumulate(out, coeff);
  }
  return r;
}

inline Matrix evaluate(const MatrixPolynomial& p, const SimplexPoint& point) {
  if (!point.matches(p.signature())) throw std::invalid_argument("evaluate: point does not match signature");
  Matrix r = Matrix::Zero(p.rows(), p.cols());
  for (const auto& [mono, coeff] : p.terms()) r += point.monomial_value(p.signature(), mono) * coeff;
  return r;
}

/// Per-monomial coefficients of a square, homogeneous polynomial, symmetrized,
/// in monomial order.
inline std::vector<std::pair<Monomial, Matrix>> coefficient_lmis(const MatrixPolynomial& p) {
  if (p.rows() != p.cols()) throw std::invalid_argument("coefficient_lmis: polynomial is not square");
  std::vector<std::pair<Monomial, Matrix>> out;
  out.reserve(p.terms().size());
  for (const auto& [mono, coeff] : p.terms()) out.emplace_back(mono, 0.5 * (coeff + coeff.transpose()));
  return out;
}

}  // namespace lpvstab
