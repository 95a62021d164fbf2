#pragma once

// Switched discrete-time LPV systems in polytopic form:
//   x(k+1) = A_{sigma(k)}(alpha_k) x(k),  A_i(alpha) = sum_l alpha_l A_{i,l}.
// All modes share the same vertex count V and the same parameter alpha_k.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lpvstab/simplex_poly.hpp"

namespace lpvstab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ValidationIssue {
  std::string path;
  std::string message;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues)
      : Error(describe(issues)), issues_(std::move(issues)) {}
  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  static std::string describe(const std::vector<ValidationIssue>& issues) {
    std::string s = "invalid system:";
    for (const auto& i : issues) s += " [" + i.path + ": " + i.message + "]";
    return s;
  }
  std::vector<ValidationIssue> issues_;
};

struct SwitchedLpvSystem {
  int n = 0;
  int m = 0;
  int V = 0;
  /// vertices[mode][vertex], zero-based.
  std::vector<std::vector<Matrix>> vertices;

  const Matrix& vertex(int mode, int l) const {
    return vertices.at(static_cast<std::size_t>(mode)).at(static_cast<std::size_t>(l));
  }

  Matrix at(int mode, const Vector& alpha) const {
    Matrix a = Matrix::Zero(n, n);
    for (int l = 0; l < V; ++l) a += alpha(l) * vertex(mode, l);
    return a;
  }

  /// The affine polynomial A_mode(alpha) on simplex `simplex_index` of `sig`.
  MatrixPolynomial polynomial(int mode, const SimplexSignature& sig, int simplex_index) const {
    return MatrixPolynomial::affine_from_vertices(sig, simplex_index, vertices.at(static_cast<std::size_t>(mode)));
  }

  bool operator==(const SwitchedLpvSystem& o) const {
    if (n != o.n || m != o.m || V != o.V || vertices.size() != o.vertices.size()) return false;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      if (vertices[i].size() != o.vertices[i].size()) return false;
      for (std::size_t l = 0; l < vertices[i].size(); ++l) {
        if (vertices[i][l].rows() != o.vertices[i][l].rows() || vertices[i][l].cols() != o.vertices[i][l].cols()) return false;
        if (vertices[i][l] != o.vertices[i][l]) return false;
      }
    }
    return true;
  }
};

/// Never throws; an empty result means the system is valid.
inline std::vector<ValidationIssue> validate(const SwitchedLpvSystem& sys) {
  std::vector<ValidationIssue> issues;
  if (sys.n < 1) issues.push_back({"n", "state dimension must be >= 1"});
  if (sys.m < 1) issues.push_back({"m", "number of modes must be >= 1"});
  if (sys.V < 1) issues.push_back({"V", "number of vertices must be >= 1"});
  if (static_cast<int>(sys.vertices.size()) != sys.m)
    issues.push_back({"vertices", "expected " + std::to_string(sys.m) + " modes, found " + std::to_string(sys.vertices.size())});
  for (std::size_t i = 0; i < sys.vertices.size(); ++i) {
    const std::string mode_path = "vertices[" + std::to_string(i) + "]";
    if (static_cast<int>(sys.vertices[i].size()) != sys.V)
      issues.push_back({mode_path, "expected " + std::to_string(sys.V) + " vertices, found " + std::to_string(sys.vertices[i].size())});
    for (std::size_t l = 0; l < sys.vertices[i].size(); ++l) {
      const auto& a = sys.vertices[i][l];
      const std::string path = mode_path + "[" + std::to_string(l) + "]";
      if (a.rows() != sys.n || a.cols() != sys.n)
        issues.push_back({path, "expected " + std::to_string(sys.n) + "x" + std::to_string(sys.n) + ", found " +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols())});
      else if (!a.allFinite())
        issues.push_back({path, "non-finite entry"});
    }
  }
  return issues;
}

inline void require_valid(const SwitchedLpvSystem& sys) {
  auto issues = validate(sys);
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

/// A0 + D F(k) E with scalar F(k) in [-rho, rho].
struct NormBoundedUncertainty {
  std::vector<Matrix> A0;
  std::vector<Vector> D;
  std::vector<Eigen::RowVectorXd> E;
  double rho = 0.0;
};

/// Two vertices per mode: A0 + rho D E and A0 - rho D E.
inline SwitchedLpvSystem from_norm_bounded(const NormBoundedUncertainty& u) {
  if (u.A0.empty()) throw std::invalid_argument("from_norm_bounded: no modes");
  if (u.D.size() != u.A0.size() || u.E.size() != u.A0.size())
    throw std::invalid_argument("from_norm_bounded: A0, D and E must list the same number of modes");
  if (!(u.rho >= 0.0) || !std::isfinite(u.rho)) throw std::invalid_argument("from_norm_bounded: rho must be finite and >= 0");
  SwitchedLpvSystem sys;
  sys.n = static_cast<int>(u.A0.front().rows());
  sys.m = static_cast<int>(u.A0.size());
  sys.V = 2;
  for (std::size_t i = 0; i < u.A0.size(); ++i) {
    if (u.A0[i].rows() != sys.n || u.A0[i].cols() != sys.n || u.D[i].size() != sys.n || u.E[i].size() != sys.n)
      throw std::invalid_argument("from_norm_bounded: dimension mismatch in mode " + std::to_string(i + 1));
    const Matrix de = u.rho * (u.D[i] * u.E[i]);
    sys.vertices.push_back({u.A0[i] + de, u.A0[i] - de});
  }
  return sys;
}

/// A parameterized family A_i(beta) = base_i + beta * slope_i with beta in
/// [-theta, theta]; its polytopic form has vertices at beta = +theta, -theta.
struct LinearFamily {
  std::vector<Matrix> base;
  std::vector<Matrix> slope;

  SwitchedLpvSystem at(double theta) const {
    if (!(theta >= 0.0)) throw std::invalid_argument("LinearFamily: theta must be >= 0");
    if (base.empty() || base.size() != slope.size()) throw std::invalid_argument("LinearFamily: base/slope mismatch");
    SwitchedLpvSystem sys;
    sys.n = static_cast<int>(base.front().rows());
    sys.m = static_cast<int>(base.size());
    sys.V = 2;
    for (std::size_t i = 0; i < base.size(); ++i) sys.vertices.push_back({base[i] + theta * slope[i], base[i] - theta * slope[i]});
    return sys;
  }
};

/// A1(b) = [[b, b], [0, 0]], A2(b) = [[-b, 0], [b, -b]].
inline LinearFamily example2_family() {
  LinearFamily f;
  Matrix s1(2, 2), s2(2, 2);
  s1 << 1, 1, 0, 0;
  s2 << -1, 0, 1, -1;
  f.base = {Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
  f.slope = {s1, s2};
  return f;
}

inline SwitchedLpvSystem example2(double theta) {
  if (!(theta >= 0.0)) throw std::invalid_argument("example2: theta must be >= 0");
  return example2_family().at(theta);
}

inline NormBoundedUncertainty example1_uncertainty() {
  NormBoundedUncertainty u;
  Matrix a01(5, 5), a02(5, 5);
  a01 << 0.2, 0.2, 0.3, 0.1, -0.5,
         0.8, 0, -0.1, -0.3, 0.3,
         0, -0.3, -0.4, 0, 0,
         0, 0.3, 0.1, 0.3, 0.5,
         -0.2, 0, 0, 0, 0.1;
  a02 << -0.7, -0.7, 0, 0, 0.2,
         0.5, 0.3, 0.3, -0.3, 0,
         0.3, 0.4, 0.3, 0.6, 0.3,
         0.3, -0.8, 0, 0, 0,
         0.1, -0.7, 0.1, -0.3, 0.3;
  Vector d1(5), d2(5);
  d1 << 0.2, 0.5, -0.1, 0.3, 0.2;
  d2 << -0.5, 0.38, 0.5, 0.2, 0.5;
  Eigen::RowVectorXd e1(5), e2(5);
  e1 << -0.3, -0.3, -0.5, 0.2, 0.3;
  e2 << -0.2, 0.1, -0.1, -0.05, 0.7;
  u.A0 = {a01, a02};
  u.D = {d1, d2};
  u.E = {e1, e2};
  u.rho = 1.0;
  return u;
}

inline SwitchedLpvSystem example1() { return from_norm_bounded(example1_uncertainty()); }

// ---------------------------------------------------------------------------
// Signals. Random generators use splitmix64 with explicit bit-level
// conversions so sequences do not depend on the standard library's
// distribution implementations.

class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int below(int k) { return static_cast<int>(next() % static_cast<std::uint64_t>(k)); }
  /// Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
  /// Uniform on the unit simplex (flat Dirichlet).
  Vector simplex(int V) {
    Vector w(V);
    for (int i = 0; i < V; ++i) {
      double u = uniform();
      while (u <= 0.0) u = uniform();
      w(i) = -std::log(u);
    }
    return w / w.sum();
  }

 private:
  std::uint64_t state_;
};

struct SwitchingSignal {
  enum class Kind { explicit_sequence, periodic, random };
  Kind kind = Kind::periodic;
  /// Zero-based modes for explicit_sequence; for periodic, the cycle.
  std::vector<int> sequence;
  std::uint64_t seed = 0;

  /// Visits 0, 1, ..., m-1, 0, ... starting at `start`.
  static SwitchingSignal periodic_cycle(int m, int start = 0) {
    SwitchingSignal s;
    s.kind = Kind::periodic;
    for (int i = 0; i < m; ++i) s.sequence.push_back((start + i) % m);
    return s;
  }
  static SwitchingSignal explicit_modes(std::vector<int> modes) {
    SwitchingSignal s;
    s.kind = Kind::explicit_sequence;
    s.sequence = std::move(modes);
    return s;
  }
  static SwitchingSignal random(std::uint64_t seed) {
    SwitchingSignal s;
    s.kind = Kind::random;
    s.seed = seed;
    return s;
  }

  std::vector<int> materialize(int steps, int m) const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(steps));
    switch (kind) {
      case Kind::explicit_sequence:
        if (static_cast<int>(sequence.size()) < steps) throw Error("switching signal exhausted");
        out.assign(sequence.begin(), sequence.begin() + steps);
        break;
      case Kind::periodic:
        if (sequence.empty()) throw Error("periodic switching signal has an empty cycle");
        for (int k = 0; k < steps; ++k) out.push_back(sequence[static_cast<std::size_t>(k) % sequence.size()]);
        break;
      case Kind::random: {
        SplitRng rng(seed);
        for (int k = 0; k < steps; ++k) out.push_back(rng.below(m));
        break;
      }
    }
    for (int i : out)
      if (i < 0 || i >= m) throw Error("switching signal references mode " + std::to_string(i + 1) + " outside 1.." + std::to_string(m));
    return out;
  }
};

struct ParameterTrajectory {
  enum class Kind { explicit_sequence, constant, random, sinusoidal };
  Kind kind = Kind::random;
  std::vector<Vector> sequence;  // explicit points, or the single constant point
  std::uint64_t seed = 0;
  double frequency = 0.5;  // rad per step, sinusoidal only
  double phase = 0.0;

  static ParameterTrajectory constant(Vector alpha) {
    ParameterTrajectory p;
    p.kind = Kind::constant;
    p.sequence = {std::move(alpha)};
    return p;
  }
  static ParameterTrajectory explicit_points(std::vector<Vector> points) {
    ParameterTrajectory p;
    p.kind = Kind::explicit_sequence;
    p.sequence = std::move(points);
    return p;
  }
  static ParameterTrajectory random(std::uint64_t seed) {
    ParameterTrajectory p;
    p.kind = Kind::random;
    p.seed = seed;
    return p;
  }
  static ParameterTrajectory sinusoidal(double frequency, double phase = 0.0) {
    ParameterTrajectory p;
    p.kind = Kind::sinusoidal;
    p.frequency = frequency;
    p.phase = phase;
    return p;
  }

  std::vector<Vector> materialize(int steps, int V) const {
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(steps));
    switch (kind) {
      case Kind::explicit_sequence:
        if (static_cast<int>(sequence.size()) < steps) throw Error("parameter trajectory exhausted");
        out.assign(sequence.begin(), sequence.begin() + steps);
        break;
      case Kind::constant:
        if (sequence.size() != 1) throw Error("constant parameter trajectory needs exactly one point");
        out.assign(static_cast<std::size_t>(steps), sequence.front());
        break;
      case Kind::random: {
        SplitRng rng(seed);
        for (int k = 0; k < steps; ++k) out.push_back(rng.simplex(V));
        break;
      }
      case Kind::sinusoidal:
        // Barycentric weights 1 + cos(w k + phi + 2 pi l / V), normalized.
        for (int k = 0; k < steps; ++k) {
          Vector a(V);
          for (int l = 0; l < V; ++l) a(l) = 1.0 + std::cos(frequency * k + phase + 6.283185307179586 * l / V);
          if (a.sum() <= 0.0) a.setConstant(1.0);
          out.push_back(a / a.sum());
        }
        break;
    }
    for (const auto& a : out) {
      if (a.size() != V) throw Error("parameter point has " + std::to_string(a.size()) + " coordinates, expected " + std::to_string(V));
      if ((a.array() < -kSimplexTol).any() || std::abs(a.sum() - 1.0) > kSimplexTol) throw Error("parameter point is not on the unit simplex");
    }
    return out;
  }
};

}  // namespace lpvstab
