#pragma once

// JSON system files.
//
//   {"n": 2, "m": 2, "V": 2,
//    "vertices": [ [ A11, A12 ], [ A21, A22 ] ]}        matrices as row lists
//
// or the norm-bounded form, converted to two vertices per mode on load:
//
//   {"norm_bounded": {"A0": [A01, A02], "D": [d1, d2], "E": [e1, e2], "rho": 1}}
//
// A third form describes a linear family used by margin searches:
//
//   {"family": {"base": [B1, B2], "slope": [S1, S2]}}

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "lpvstab/system.hpp"

namespace lpvstab {

using Json = nlohmann::json;

class ParseError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline const Json& require_key(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing key \"" + key + "\"");
  return *it;
}

inline int require_int(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = require_key(j, key, where);
  if (!v.is_number_integer()) throw ParseError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

inline double require_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected a number");
  return j.get<double>();
}

inline Matrix matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ParseError(where + ": expected a non-empty list of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw ParseError(where + "[0]: expected a non-empty row");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    const std::string rw = where + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ParseError(rw + ": ragged row");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = require_number(row[static_cast<std::size_t>(c)], rw + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline Vector vector_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ParseError(where + ": expected a non-empty list of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = require_number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

inline std::vector<Matrix> matrix_list(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected a list of matrices");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(matrix_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json vector_to_json(const Eigen::Ref<const Vector>& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

/// Converts nlohmann's byte offset into a line number.
inline Json parse_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw ParseError(source + ":" + std::to_string(line) + ": " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline NormBoundedUncertainty norm_bounded_from_json(const Json& j) {
  const std::string w = "norm_bounded";
  NormBoundedUncertainty u;
  u.A0 = detail::matrix_list(detail::require_key(j, "A0", w), w + ".A0");
  const Json& d = detail::require_key(j, "D", w);
  const Json& e = detail::require_key(j, "E", w);
  if (!d.is_array() || !e.is_array()) throw ParseError(w + ": D and E must be lists");
  for (std::size_t i = 0; i < d.size(); ++i) u.D.push_back(detail::vector_from_json(d[i], w + ".D[" + std::to_string(i) + "]"));
  for (std::size_t i = 0; i < e.size(); ++i)
    u.E.push_back(detail::vector_from_json(e[i], w + ".E[" + std::to_string(i) + "]").transpose());
  u.rho = detail::require_number(detail::require_key(j, "rho", w), w + ".rho");
  return u;
}

inline Json norm_bounded_to_json(const NormBoundedUncertainty& u) {
  Json j;
  Json a0 = Json::array(), d = Json::array(), e = Json::array();
  for (const auto& m : u.A0) a0.push_back(detail::matrix_to_json(m));
  for (const auto& v : u.D) d.push_back(detail::vector_to_json(v));
  for (const auto& v : u.E) e.push_back(detail::vector_to_json(v.transpose()));
  j["A0"] = std::move(a0);
  j["D"] = std::move(d);
  j["E"] = std::move(e);
  j["rho"] = u.rho;
  return Json{{"norm_bounded", std::move(j)}};
}

/// Structural parse only; invariants are left to validate().
inline SwitchedLpvSystem system_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("system: expected a JSON object");
  if (j.contains("norm_bounded")) {
    try {
      return from_norm_bounded(norm_bounded_from_json(j.at("norm_bounded")));
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("norm_bounded: ") + e.what());
    }
  }
  SwitchedLpvSystem sys;
  sys.n = detail::require_int(j, "n", "system");
  sys.m = detail::require_int(j, "m", "system");
  sys.V = detail::require_int(j, "V", "system");
  const Json& modes = detail::require_key(j, "vertices", "system");
  if (!modes.is_array()) throw ParseError("system.vertices: expected a list of modes");
  for (std::size_t i = 0; i < modes.size(); ++i)
    sys.vertices.push_back(detail::matrix_list(modes[i], "system.vertices[" + std::to_string(i) + "]"));
  return sys;
}

inline Json system_to_json(const SwitchedLpvSystem& sys) {
  Json modes = Json::array();
  for (const auto& mode : sys.vertices) {
    Json vs = Json::array();
    for (const auto& a : mode) vs.push_back(detail::matrix_to_json(a));
    modes.push_back(std::move(vs));
  }
  return Json{{"n", sys.n}, {"m", sys.m}, {"V", sys.V}, {"vertices", std::move(modes)}};
}

inline SwitchedLpvSystem parse_system(const std::string& text, const std::string& source = "<string>") {
  return system_from_json(detail::parse_text(text, source));
}

/// Throws ParseError on malformed input and ValidationError on invariant
/// violations.
inline SwitchedLpvSystem load_system(const std::string& path) {
  SwitchedLpvSystem sys = parse_system(detail::read_file(path), path);
  require_valid(sys);
  return sys;
}

inline void save_system(const SwitchedLpvSystem& sys, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << system_to_json(sys).dump(2) << '\n';
}

inline LinearFamily family_from_json(const Json& j) {
  const Json& f = detail::require_key(j, "family", "file");
  LinearFamily fam;
  fam.base = detail::matrix_list(detail::require_key(f, "base", "family"), "family.base");
  fam.slope = detail::matrix_list(detail::require_key(f, "slope", "family"), "family.slope");
  if (fam.base.empty() || fam.base.size() != fam.slope.size()) throw ParseError("family: base and slope must list the same modes");
  for (std::size_t i = 0; i < fam.base.size(); ++i) {
    const auto n = fam.base.front().rows();
    for (const Matrix* m : {&fam.base[i], &fam.slope[i]})
      if (m->rows() != n || m->cols() != n) throw ParseError("family: mode " + std::to_string(i + 1) + " is not " + std::to_string(n) + "x" + std::to_string(n));
  }
  return fam;
}

inline Json family_to_json(const LinearFamily& fam) {
  Json base = Json::array(), slope = Json::array();
  for (const auto& m : fam.base) base.push_back(detail::matrix_to_json(m));
  for (const auto& m : fam.slope) slope.push_back(detail::matrix_to_json(m));
  return Json{{"family", Json{{"base", std::move(base)}, {"slope", std::move(slope)}}}};
}

inline LinearFamily load_family(const std::string& path) {
  return family_from_json(detail::parse_text(detail::read_file(path), path));
}

}  // namespace lpvstab
