#pragma once

// Reference computations for the tests. None of these go through the
// polynomial machinery of the library: expressions are formed with plain
// matrix products, and coefficient sets are written out by hand.

#include <map>
#include <string>
#include <vector>

#include "lpvstab/lpvstab.hpp"

namespace oracle {

using lpvstab::Matrix;
using lpvstab::Vector;

inline lpvstab::SwitchedLpvSystem random_system(lpvstab::SplitRng& rng, int n, int m, int V, double scale = 0.4) {
  lpvstab::SwitchedLpvSystem s;
  s.n = n;
  s.m = m;
  s.V = V;
  for (int i = 0; i < m; ++i) {
    std::vector<Matrix> verts;
    for (int l = 0; l < V; ++l) {
      Matrix a(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a(r, c) = scale * rng.normal();
      verts.push_back(a);
    }
    s.vertices.push_back(verts);
  }
  return s;
}

inline Vector random_x(lpvstab::SplitRng& rng, int size) {
  Vector x(size);
  for (int i = 0; i < size; ++i) x(i) = rng.normal();
  return x;
}

inline Matrix A_at(const lpvstab::SwitchedLpvSystem& s, int mode, const Vector& alpha) {
  Matrix a = Matrix::Zero(s.n, s.n);
  for (int l = 0; l < s.V; ++l) a += alpha(l) * s.vertices[static_cast<std::size_t>(mode)][static_cast<std::size_t>(l)];
  return a;
}

/// Value of a (possibly parameter-dependent) variable: sum_b alpha^{e_b} X_b
/// with e_b in descending lexicographic order.
inline Matrix var_at(const std::vector<Matrix>& blocks, int degree, const Vector& alpha) {
  if (degree == 0) return blocks.front();
  const auto exps = lpvstab::exponent_vectors(static_cast<int>(alpha.size()), degree);
  Matrix r = Matrix::Zero(blocks.front().rows(), blocks.front().cols());
  for (std::size_t b = 0; b < exps.size(); ++b) {
    double w = 1.0;
    for (Eigen::Index i = 0; i < alpha.size(); ++i) w *= std::pow(alpha(i), exps[b][static_cast<std::size_t>(i)]);
    r += w * blocks[b];
  }
  return r;
}

/// Raw condition for `equation` with one parameter vector per time instant.
/// Variables are looked up by name; a missing name means zero.
inline Matrix raw(const lpvstab::SwitchedLpvSystem& s, lpvstab::Condition c, int N, int degree, const lpvstab::Assignment& a,
                  const std::string& equation, const std::vector<int>& modes, const std::vector<Vector>& alpha) {
  const int n = s.n;
  auto var = [&](const std::string& name, const Vector& al, int deg) -> Matrix {
    auto it = a.find(name);
    if (it == a.end()) return Matrix::Zero(n, n);
    return var_at(it->second, deg, al);
  };
  if (c == lpvstab::Condition::lemma2) {
    const int i = modes[0], j = modes[1];
    const Matrix Si = var("S" + std::to_string(i + 1), alpha[0], degree);
    const Matrix Sj = var("S" + std::to_string(j + 1), alpha[1], degree);
    const Matrix Gi = var("G" + std::to_string(i + 1), alpha[0], degree);
    const Matrix Ai = A_at(s, i, alpha[0]);
    Matrix r(2 * n, 2 * n);
    r.topLeftCorner(n, n) = Gi + Gi.transpose() - Si;
    r.topRightCorner(n, n) = (Ai * Gi).transpose();
    r.bottomLeftCorner(n, n) = Ai * Gi;
    r.bottomRightCorner(n, n) = Sj;
    return r;
  }
  const bool cor = c == lpvstab::Condition::corollary1;
  const int deg = cor ? degree : 0;
  const int NN = c == lpvstab::Condition::lemma3 ? 2 : N;
  // Phi_j for j = 0..len.
  std::vector<Matrix> phi{Matrix::Identity(n, n)};
  for (std::size_t r = 0; r < modes.size(); ++r) phi.push_back(A_at(s, modes[r], alpha[r]) * phi.back());
  Matrix now = Matrix::Zero(n, n);
  for (int j = 0; j < NN; ++j) now += phi[static_cast<std::size_t>(j)].transpose() * var("P" + std::to_string(j + 1), alpha[0], deg) * phi[static_cast<std::size_t>(j)];
  if (equation == "pos") return now;
  Matrix next = Matrix::Zero(n, n);
  for (int z = 1; z <= NN; ++z) next += phi[static_cast<std::size_t>(z)].transpose() * var("P" + std::to_string(z), alpha[1], deg) * phi[static_cast<std::size_t>(z)];
  return next - now;
}

/// The two-instant finite LMIs with constant P1, P2 for a given mode pair
/// and vertex indices: key "pos:l,q" or "dec:l,q|r,p" (zero-based, l <= q,
/// r <= p) -> matrix.
inline std::map<std::string, Matrix> finite_lemma3(const lpvstab::SwitchedLpvSystem& s, const Matrix& P1, const Matrix& P2, int i, int j) {
  std::map<std::string, Matrix> out;
  const auto& Ai = s.vertices[static_cast<std::size_t>(i)];
  const auto& Aj = s.vertices[static_cast<std::size_t>(j)];
  const int V = s.V;
  auto key = [](int l, int q) { return std::to_string(l) + "," + std::to_string(q); };
  for (int l = 0; l < V; ++l) out["pos:" + key(l, l)] = P1 + Ai[l].transpose() * P2 * Ai[l];
  for (int l = 0; l < V; ++l)
    for (int q = l + 1; q < V; ++q) out["pos:" + key(l, q)] = 2 * P1 + Ai[l].transpose() * P2 * Ai[q] + Ai[q].transpose() * P2 * Ai[l];
  for (int l = 0; l < V; ++l)
    for (int r = 0; r < V; ++r)
      out["dec:" + key(l, l) + "|" + key(r, r)] = Ai[l].transpose() * P1 * Ai[l] + Ai[l].transpose() * Aj[r].transpose() * P2 * Aj[r] * Ai[l] -
                                                  (P1 + Ai[l].transpose() * P2 * Ai[l]);
  for (int l = 0; l < V; ++l)
    for (int r = 0; r < V; ++r)
      for (int p = r + 1; p < V; ++p)
        out["dec:" + key(l, l) + "|" + key(r, p)] = 2 * Ai[l].transpose() * P1 * Ai[l] + Ai[l].transpose() * Aj[r].transpose() * P2 * Aj[p] * Ai[l] +
                                                    Ai[l].transpose() * Aj[p].transpose() * P2 * Aj[r] * Ai[l] -
                                                    (2 * P1 + 2 * Ai[l].transpose() * P2 * Ai[l]);
  for (int l = 0; l < V; ++l)
    for (int q = l + 1; q < V; ++q)
      for (int r = 0; r < V; ++r)
        out["dec:" + key(l, q) + "|" + key(r, r)] =
            Ai[l].transpose() * P1 * Ai[q] + Ai[q].transpose() * P1 * Ai[l] + Ai[l].transpose() * Aj[r].transpose() * P2 * Aj[r] * Ai[q] +
            Ai[q].transpose() * Aj[r].transpose() * P2 * Aj[r] * Ai[l] - (2 * P1 + Ai[l].transpose() * P2 * Ai[q] + Ai[q].transpose() * P2 * Ai[l]);
  for (int l = 0; l < V; ++l)
    for (int q = l + 1; q < V; ++q)
      for (int r = 0; r < V; ++r)
        for (int p = r + 1; p < V; ++p)
          out["dec:" + key(l, q) + "|" + key(r, p)] =
              2 * Ai[l].transpose() * P1 * Ai[q] + 2 * Ai[q].transpose() * P1 * Ai[l] + Ai[l].transpose() * Aj[r].transpose() * P2 * Aj[p] * Ai[q] +
              Ai[q].transpose() * Aj[r].transpose() * P2 * Aj[p] * Ai[l] + Ai[l].transpose() * Aj[p].transpose() * P2 * Aj[r] * Ai[q] +
              Ai[q].transpose() * Aj[p].transpose() * P2 * Aj[r] * Ai[l] - (4 * P1 + 2 * Ai[l].transpose() * P2 * Ai[q] + 2 * Ai[q].transpose() * P2 * Ai[l]);
  return out;
}

/// Vertex pair (l, q) with l <= q for a degree-2 exponent block.
inline std::pair<int, int> pair_of(const std::vector<int>& e) {
  std::vector<int> idx;
  for (std::size_t k = 0; k < e.size(); ++k)
    for (int c = 0; c < e[k]; ++c) idx.push_back(static_cast<int>(k));
  return {idx.at(0), idx.at(1)};
}

// ---------------------------------------------------------------------------
// Classical single-matrix condition A_i(a)' P A_i(a) - P < 0, P > 0, lifted
// to the multi-simplex layout used by the N-matrix condition.

inline double multinomial2(const std::vector<int>& e) {
  // Coefficient of alpha^e in (sum alpha)^2.
  for (int v : e)
    if (v == 2) return 1.0;
  return 2.0;
}

inline std::string mono_text(const std::vector<std::vector<int>>& blocks) {
  std::string s;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (b) s += "|";
    for (std::size_t k = 0; k < blocks[b].size(); ++k) s += (k ? "," : "") + std::to_string(blocks[b][k]);
  }
  return s;
}

/// Expected canonical constraint set of the N-matrix condition with P_2..P_N
/// removed, built from the classical condition by hand.
inline lpvstab::CanonicalConstraintSet classical_lifted(const lpvstab::SwitchedLpvSystem& s, int N) {
  const int n = s.n, m = s.m, V = s.V;
  lpvstab::CanonicalConstraintSet out;
  std::vector<std::pair<int, int>> entries;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) entries.emplace_back(i, j);
  auto basis = [&](int i, int j) {
    Matrix E = Matrix::Zero(n, n);
    E(i, j) = E(j, i) = 1.0;
    return E;
  };
  auto name = [](int i, int j) { return "P1#0(" + std::to_string(i) + "," + std::to_string(j) + ")"; };
  const auto deg2 = lpvstab::exponent_vectors(V, 2);

  // Enumerate mode sequences and per-simplex degree-2 exponents.
  auto for_each_seq = [&](int len, auto&& f) {
    std::vector<int> seq(static_cast<std::size_t>(len), 0);
    while (true) {
      f(seq);
      int pos = len - 1;
      while (pos >= 0 && ++seq[static_cast<std::size_t>(pos)] == m) seq[static_cast<std::size_t>(pos--)] = 0;
      if (pos < 0) break;
    }
  };
  auto for_each_mono = [&](int simplexes, auto&& f) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(simplexes), 0);
    while (true) {
      std::vector<std::vector<int>> blocks;
      for (auto k : idx) blocks.push_back(deg2[k]);
      f(blocks);
      int pos = simplexes - 1;
      while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == deg2.size()) idx[static_cast<std::size_t>(pos--)] = 0;
      if (pos < 0) break;
    }
  };
  auto modes_text = [](const std::vector<int>& seq) {
    std::string t;
    for (std::size_t k = 0; k < seq.size(); ++k) t += (k ? "," : "") + std::to_string(seq[k] + 1);
    return t;
  };

  // Positivity: P1 * prod multinomial over N-1 simplexes.
  for_each_seq(N - 1, [&](const std::vector<int>& seq) {
    for_each_mono(N - 1, [&](const std::vector<std::vector<int>>& blocks) {
      double w = 1.0;
      for (const auto& b : blocks) w *= multinomial2(b);
      auto& entry = out["pos;modes=" + modes_text(seq) + ";mono=" + mono_text(blocks)];
      for (auto [i, j] : entries) entry[name(i, j)] = w * basis(i, j);
    });
  });
  // Decrease: classical coefficient on simplex 0 times lifting on the rest.
  for_each_seq(N, [&](const std::vector<int>& seq) {
    const auto& Av = s.vertices[static_cast<std::size_t>(seq[0])];
    for_each_mono(N, [&](const std::vector<std::vector<int>>& blocks) {
      double w = 1.0;
      for (std::size_t b = 1; b < blocks.size(); ++b) w *= multinomial2(blocks[b]);
      auto [l, q] = pair_of(blocks[0]);
      auto& entry = out["dec;modes=" + modes_text(seq) + ";mono=" + mono_text(blocks)];
      for (auto [i, j] : entries) {
        const Matrix E = basis(i, j);
        Matrix c = l == q ? Matrix(Av[l].transpose() * E * Av[l] - E)
                          : Matrix(Av[l].transpose() * E * Av[q] + Av[q].transpose() * E * Av[l] - 2 * E);
        c = w * c;
        if (c.cwiseAbs().maxCoeff() >= lpvstab::kCoefficientDropTol) entry[name(i, j)] = c;
      }
    });
  });
  return out;
}

/// Largest |difference| between sum_mono alpha^mono * lhs_mono(x) and the
/// raw expression, over `points` random parameter draws per (equation,
/// mode sequence).
inline double expansion_error(const lpvstab::SwitchedLpvSystem& s, const lpvstab::LmiProblem& p, const Vector& x, int points,
                              lpvstab::SplitRng& rng) {
  const auto& meta = p.metadata;
  const auto a = lpvstab::extract_assignment(p, x);
  const auto layouts = lpvstab::equation_layouts(meta.condition, lpvstab::condition_N(meta.condition, meta.N), meta.n, meta.V, meta.options);
  // Group constraints by (equation, modes).
  std::map<std::pair<std::string, std::vector<int>>, std::vector<const lpvstab::LmiConstraint*>> groups;
  for (const auto& c : p.constraints) groups[{c.equation, c.modes}].push_back(&c);
  double worst = 0.0;
  for (const auto& layout : layouts) {
    for (const auto& [key, cons] : groups) {
      if (key.first != layout.name) continue;
      std::vector<Matrix> lhs;
      for (const auto* c : cons) lhs.push_back(c->lhs(x));
      for (int r = 0; r < points; ++r) {
        lpvstab::SimplexPoint pt;
        for (int k = 0; k < layout.signature.num_simplexes(); ++k) pt.coordinates.push_back(rng.simplex(meta.V));
        Matrix sum = Matrix::Zero(cons.front()->size(), cons.front()->size());
        for (std::size_t i = 0; i < cons.size(); ++i) sum += pt.monomial_value(layout.signature, cons[i]->monomial) * lhs[i];
        // One parameter per time instant for the oracle.
        std::vector<Vector> alpha;
        for (int inst : layout.instant_simplex) alpha.push_back(pt.coordinates.empty() ? Vector::Constant(meta.V, 1.0 / meta.V) : pt.coordinates[static_cast<std::size_t>(inst)]);
        if (alpha.empty()) alpha.push_back(Vector::Constant(meta.V, 1.0 / meta.V));
        if (alpha.size() < 2) alpha.push_back(alpha.front());
        const Matrix ref = raw(s, meta.condition, meta.N, meta.options.variable_degree, a, layout.name, key.second, alpha);
        worst = std::max(worst, (sum - ref).cwiseAbs().maxCoeff());
      }
    }
  }
  return worst;
}

}  // namespace oracle
