#pragma once

// SDPA sparse format (.dat-s) for the max-margin problem.
//
// SDPA convention: minimize c'x subject to sum_i F_i x_i - F_0 >= 0, which is
// the dual standard form with x = y, c = -b, F_i = -A_i, F_0 = -C. The box
// bounds (or the margin cap) are written as one diagonal block.
//
// Comment lines starting with '*' carry what is needed to rebuild the
// LmiProblem on import:
//   * problem condition=theorem1 N=2 n=2 m=2 V=2 time_invariant=0 variable_degree=1 zero_tail=0 rows=84
//   * variable P1 symmetric dim=2 degree=0 vertices=2 first=0 pd=0
//   * block 1 sense=positive margin=1 label=pos;modes=1;mono=0,2
//   * bound 1            or   * cap 1000000

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lpvstab/sdp.hpp"
#include "lpvstab/system_io.hpp"

namespace lpvstab {

namespace detail {

inline std::map<std::string, std::string> key_values(std::istringstream& is) {
  std::map<std::string, std::string> kv;
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ParseError("sdpa: malformed metadata token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

inline const std::string& kv_at(const std::map<std::string, std::string>& kv, const std::string& k) {
  auto it = kv.find(k);
  if (it == kv.end()) throw ParseError("sdpa: metadata lacks '" + k + "'");
  return it->second;
}

inline int kv_int(const std::map<std::string, std::string>& kv, const std::string& k) {
  try {
    return std::stoi(kv_at(kv, k));
  } catch (const std::logic_error&) {
    throw ParseError("sdpa: metadata '" + k + "' is not an integer");
  }
}

}  // namespace detail

inline std::string export_sdpa(const LmiProblem& prob, const SolveOptions& opt = {}) {
  using detail::fmt_double;
  const MarginSdp ms = to_margin_sdp(prob, opt);
  const auto& meta = prob.metadata;
  std::ostringstream os;
  os << "* lpvstab max-margin SDP, variables x_1..x_" << ms.margin_index << " then t\n";
  os << "* problem condition=" << to_string(meta.condition) << " N=" << meta.N << " n=" << meta.n << " m=" << meta.m << " V=" << meta.V
     << " time_invariant=" << meta.options.time_invariant << " variable_degree=" << meta.options.variable_degree
     << " zero_tail=" << meta.options.zero_tail << " rows=" << meta.num_rows << "\n";
  for (const auto& v : prob.variables)
    os << "* variable " << v.name << ' ' << (v.structure == Structure::symmetric ? "symmetric" : "general") << " dim=" << v.dim
       << " degree=" << v.degree << " vertices=" << v.vertices << " first=" << v.first_scalar << " pd=" << v.positive_definite << "\n";
  for (std::size_t c = 0; c < prob.constraints.size(); ++c) {
    const auto& con = prob.constraints[c];
    os << "* block " << c + 1 << " sense=" << (con.sense == Sense::positive ? "positive" : "negative") << " margin=" << con.margin
       << " label=" << con.label << "\n";
  }
  if (opt.variable_bound > 0)
    os << "* bound " << fmt_double(opt.variable_bound) << "\n";
  else
    os << "* cap " << fmt_double(opt.margin_cap) << "\n";

  const std::size_t nc = prob.constraints.size();
  const std::size_t ndiag = ms.sdp.blocks.size() - nc;
  os << ms.sdp.num_y << "\n" << nc + 1 << "\n";
  for (std::size_t c = 0; c < nc; ++c) os << ms.sdp.blocks[c].size << ' ';
  os << '-' << ndiag << "\n";
  for (int i = 0; i < ms.sdp.num_y; ++i) os << (i ? " " : "") << fmt_double(-ms.sdp.b(i));
  os << "\n";
  // Entries grouped by matrix number, then block.
  auto emit = [&](int matno, int blkno, const Matrix& m, int diag_pos) {
    if (diag_pos >= 0) {
      if (m(0, 0) != 0.0) os << matno << ' ' << blkno << ' ' << diag_pos + 1 << ' ' << diag_pos + 1 << ' ' << fmt_double(m(0, 0)) << "\n";
      return;
    }
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = i; j < m.cols(); ++j)
        if (m(i, j) != 0.0) os << matno << ' ' << blkno << ' ' << i + 1 << ' ' << j + 1 << ' ' << fmt_double(m(i, j)) << "\n";
  };
  std::vector<std::vector<std::tuple<int, std::size_t, const Matrix*>>> by_mat(static_cast<std::size_t>(ms.sdp.num_y + 1));
  for (std::size_t k = 0; k < ms.sdp.blocks.size(); ++k) {
    const auto& blk = ms.sdp.blocks[k];
    by_mat[0].emplace_back(0, k, &blk.C);
    for (const auto& [i, A] : blk.A) by_mat[static_cast<std::size_t>(i + 1)].emplace_back(i + 1, k, &A);
  }
  for (const auto& entries : by_mat)
    for (const auto& [matno, k, mat] : entries) {
      const bool diag = k >= nc;
      const int blkno = diag ? static_cast<int>(nc + 1) : static_cast<int>(k + 1);
      // F_0 = -C, F_i = -A_i.
      emit(matno, blkno, -*mat, diag ? static_cast<int>(k - nc) : -1);
    }
  return os.str();
}

struct ImportedSdpa {
  SdpProblem sdp;
  /// Present when the file carries lpvstab metadata.
  std::optional<LmiProblem> problem;
  SolveOptions options;
};

inline ImportedSdpa import_sdpa(const std::string& text, const std::string& source = "<sdpa>") {
  ImportedSdpa out;
  std::istringstream in(text);
  std::string line;
  std::optional<ProblemMetadata> meta;
  std::vector<MatrixVariable> vars;
  std::map<int, std::tuple<Sense, bool, std::string>> block_meta;
  bool has_bound = false, has_cap = false;
  int lineno = 0;
  std::vector<std::pair<int, std::string>> body;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '*' || line[0] == '"') {
      std::istringstream ls(line.substr(1));
      std::string kind;
      ls >> kind;
      try {
        if (kind == "problem") {
          auto kv = detail::key_values(ls);
          ProblemMetadata m;
          m.condition = parse_condition(detail::kv_at(kv, "condition"));
          m.N = detail::kv_int(kv, "N");
          m.n = detail::kv_int(kv, "n");
          m.m = detail::kv_int(kv, "m");
          m.V = detail::kv_int(kv, "V");
          m.options.time_invariant = detail::kv_int(kv, "time_invariant") != 0;
          m.options.variable_degree = detail::kv_int(kv, "variable_degree");
          m.options.zero_tail = detail::kv_int(kv, "zero_tail") != 0;
          meta = m;
        } else if (kind == "variable") {
          MatrixVariable v;
          std::string st;
          ls >> v.name >> st;
          if (st != "symmetric" && st != "general") throw ParseError("unknown variable structure '" + st + "'");
          v.structure = st == "symmetric" ? Structure::symmetric : Structure::general;
          auto kv = detail::key_values(ls);
          v.dim = detail::kv_int(kv, "dim");
          v.degree = detail::kv_int(kv, "degree");
          v.vertices = detail::kv_int(kv, "vertices");
          v.first_scalar = detail::kv_int(kv, "first");
          v.positive_definite = detail::kv_int(kv, "pd") != 0;
          vars.push_back(v);
        } else if (kind == "block") {
          int idx = 0;
          ls >> idx;
          auto kv = detail::key_values(ls);
          const std::string& sn = detail::kv_at(kv, "sense");
          if (sn != "positive" && sn != "negative") throw ParseError("unknown sense '" + sn + "'");
          block_meta[idx] = {sn == "positive" ? Sense::positive : Sense::negative, detail::kv_int(kv, "margin") != 0, detail::kv_at(kv, "label")};
        } else if (kind == "bound") {
          ls >> out.options.variable_bound;
          has_bound = true;
        } else if (kind == "cap") {
          ls >> out.options.margin_cap;
          out.options.variable_bound = 0;
          has_cap = true;
        }
      } catch (const ParseError& e) {
        throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what());
      } catch (const std::invalid_argument& e) {
        throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what());
      }
      continue;
    }
    body.emplace_back(lineno, line);
  }
  auto fail = [&](int ln, const std::string& msg) -> ParseError { return ParseError(source + ":" + std::to_string(ln) + ": " + msg); };
  if (body.size() < 4) throw ParseError(source + ": truncated SDPA file");
  auto clean = [](std::string s) {
    for (char& c : s)
      if (c == ',' || c == '{' || c == '}' || c == '(' || c == ')') c = ' ';
    return s;
  };
  int mdim = 0, nblocks = 0;
  {
    std::istringstream a(clean(body[0].second)), b(clean(body[1].second));
    if (!(a >> mdim) || mdim < 1) throw fail(body[0].first, "expected the number of variables");
    if (!(b >> nblocks) || nblocks < 1) throw fail(body[1].first, "expected the number of blocks");
  }
  std::vector<int> sizes;
  {
    std::istringstream s(clean(body[2].second));
    int v;
    while (s >> v) sizes.push_back(v);
    if (static_cast<int>(sizes.size()) != nblocks) throw fail(body[2].first, "block structure does not list every block");
  }
  Vector c(mdim);
  {
    std::istringstream s(clean(body[3].second));
    for (int i = 0; i < mdim; ++i)
      if (!(s >> c(i))) throw fail(body[3].first, "objective vector too short");
  }
  // SDPA block b -> first internal block index; diagonal blocks expand to 1x1 blocks.
  std::vector<int> first_internal;
  std::vector<SdpBlock> blocks;
  for (int s : sizes) {
    first_internal.push_back(static_cast<int>(blocks.size()));
    if (s == 0) throw ParseError(source + ": zero block size");
    const int count = s < 0 ? -s : 1;
    const int dim = s < 0 ? 1 : s;
    for (int k = 0; k < count; ++k) blocks.push_back({dim, Matrix::Zero(dim, dim), {}});
  }
  std::vector<std::map<int, Matrix>> amats(blocks.size());
  for (std::size_t l = 4; l < body.size(); ++l) {
    std::istringstream s(clean(body[l].second));
    int matno, blkno, i, j;
    double v;
    if (!(s >> matno >> blkno >> i >> j >> v)) throw fail(body[l].first, "expected 'matno blkno i j value'");
    if (matno < 0 || matno > mdim) throw fail(body[l].first, "matrix number out of range");
    if (blkno < 1 || blkno > nblocks) throw fail(body[l].first, "block number out of range");
    const int sz = sizes[static_cast<std::size_t>(blkno - 1)];
    const int lim = sz < 0 ? -sz : sz;
    if (i < 1 || j < 1 || i > lim || j > lim) throw fail(body[l].first, "entry index out of range");
    std::size_t k = static_cast<std::size_t>(first_internal[static_cast<std::size_t>(blkno - 1)]);
    int r = i - 1, cc = j - 1;
    if (sz < 0) {
      if (i != j) throw fail(body[l].first, "off-diagonal entry in a diagonal block");
      k += static_cast<std::size_t>(i - 1);
      r = cc = 0;
    }
    // F_0 = -C, F_i = -A_i.
    Matrix& target = matno == 0 ? blocks[k].C : amats[k].try_emplace(matno - 1, Matrix::Zero(blocks[k].size, blocks[k].size)).first->second;
    target(r, cc) = -v;
    target(cc, r) = -v;
  }
  for (std::size_t k = 0; k < blocks.size(); ++k)
    for (auto& [i, A] : amats[k]) blocks[k].A.emplace_back(i, std::move(A));
  out.sdp.num_y = mdim;
  out.sdp.b = -c;
  out.sdp.blocks = std::move(blocks);

  if (!meta) return out;
  if (!has_bound && !has_cap) throw ParseError(source + ": metadata lacks the bound/cap line");
  LmiProblem prob;
  prob.variables = vars;
  const int p = mdim - 1;
  if (prob.num_scalars() != p) throw ParseError(source + ": variable metadata does not cover every scalar");
  for (int b = 1; b < nblocks; ++b) {
    auto it = block_meta.find(b);
    if (it == block_meta.end()) throw ParseError(source + ": no metadata for block " + std::to_string(b));
    const auto& [sense, margin, label] = it->second;
    const SdpBlock& blk = out.sdp.blocks[static_cast<std::size_t>(first_internal[static_cast<std::size_t>(b - 1)])];
    const double sg = sense_sign(sense);
    LmiConstraint con;
    con.sense = sense;
    con.margin = margin;
    con.label = label;
    con.constant = sg * blk.C;
    for (const auto& [i, A] : blk.A)
      if (i < p) con.terms.push_back({i, -sg * A});
    const ParsedLabel pl = parse_label(label, *meta);
    con.equation = pl.equation;
    con.modes = pl.modes;
    con.monomial = pl.monomial;
    const auto layouts = equation_layouts(meta->condition, condition_N(meta->condition, meta->N), meta->n, meta->V, meta->options);
    for (std::size_t e = 0; e < layouts.size(); ++e)
      if (layouts[e].name == pl.equation) con.equation_index = static_cast<int>(e);
    prob.constraints.push_back(std::move(con));
  }
  prob.metadata = *meta;
  prob.metadata.num_variables = prob.num_scalars();
  int rows = 0;
  for (const auto& con : prob.constraints) rows += con.size();
  prob.metadata.num_rows = rows;
  out.problem = std::move(prob);
  return out;
}

}  // namespace lpvstab
