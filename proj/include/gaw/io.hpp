#pragma once

// Instance and result documents. Matrices are arrays of rows; reals are
// written with 17 significant digits so every double survives a round trip.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaw/solver.hpp"

namespace gaw {

using Json = nlohmann::ordered_json;

struct InstanceFile {
  Index d = 1;
  Index steps = 1;
  Vec a, b;
  Mat A, B;
  double lambda = 0.0;
  std::optional<std::vector<Mat>> p_override;
  std::optional<std::vector<double>> times;
  std::string name;

  ProcessLaw mu(const Tolerances& tol = kDefaultTolerances) const { return law("A", a, A, tol); }
  ProcessLaw nu(const Tolerances& tol = kDefaultTolerances) const { return law("B", b, B, tol); }

 private:
  ProcessLaw law(const char* field, const Vec& m, const Mat& c, const Tolerances& tol) const {
    try {
      return ProcessLaw::make(d, steps, m, c, tol);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
      fail(ErrorKind::NotPositiveDefinite,
           std::string("field '") + field +
               "': covariance must be symmetric positive definite (non-degenerate Gaussian laws "
               "are required): " + e.what());
    }
  }
};

namespace detail {

inline void require_field(bool ok, const std::string& field, const std::string& what) {
  require(ok, ErrorKind::InvalidInput, "field '" + field + "': " + what);
}

inline double read_real(const Json& j, const std::string& field) {
  require_field(j.is_number(), field, "expected a number");
  const double v = j.get<double>();
  require_field(std::isfinite(v), field, "must be finite");
  return v;
}

inline Index read_count(const Json& j, const std::string& field) {
  require_field(j.is_number_integer() && j.get<long long>() >= 1, field,
                "expected a positive integer");
  return static_cast<Index>(j.get<long long>());
}

inline Vec read_vec(const Json& j, const std::string& field, Index n) {
  require_field(j.is_array(), field, "expected an array of numbers");
  require_field(static_cast<Index>(j.size()) == n, field,
                "expected length " + std::to_string(n) + ", got " + std::to_string(j.size()));
  Vec v(n);
  for (Index i = 0; i < n; ++i) {
    v(i) = read_real(j[static_cast<std::size_t>(i)], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

inline Mat read_mat(const Json& j, const std::string& field, Index rows, Index cols) {
  require_field(j.is_array() && static_cast<Index>(j.size()) == rows, field,
                "expected " + std::to_string(rows) + " rows");
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const std::string row = field + "[" + std::to_string(r) + "]";
    m.row(r) = read_vec(j[static_cast<std::size_t>(r)], row, cols).transpose();
  }
  return m;
}

inline Json mat_json(const Mat& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json vec_json(const Vec& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Json blocks_json(const BlockContraction& p) {
  Json out = Json::array();
  for (const Mat& b : p.blocks()) out.push_back(mat_json(b));
  return out;
}

inline std::string format_real(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

inline void emit(std::ostream& os, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  // Arrays of scalars stay on one line so matrices read as rows.
  auto flat = [](const Json& a) {
    for (const Json& e : a) {
      if (e.is_structured()) return false;
    }
    return true;
  };
  if (j.is_object()) {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) os << ",\n";
      first = false;
      os << pad << Json(it.key()).dump() << ": ";
      emit(os, it.value(), indent, depth + 1);
    }
    os << "\n" << close << "}";
  } else if (j.is_array()) {
    if (j.empty() || flat(j)) {
      os << "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ", ";
        emit(os, j[i], indent, depth + 1);
      }
      os << "]";
      return;
    }
    os << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) os << ",\n";
      os << pad;
      emit(os, j[i], indent, depth + 1);
    }
    os << "\n" << close << "]";
  } else if (j.is_number_float()) {
    os << format_real(j.get<double>());
  } else {
    os << j.dump();
  }
}

}  // namespace detail

/// Serializes with 17 significant digits; non-finite reals become null.
inline std::string to_text(const Json& j) {
  std::ostringstream os;
  detail::emit(os, j, 2, 0);
  os << "\n";
  return os.str();
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::InvalidInput, origin + ": malformed JSON: " + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::InvalidInput, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline InstanceFile parse_instance(const Json& j) {
  require(j.is_object(), ErrorKind::InvalidInput, "instance must be a JSON object");
  static const std::set<std::string> known = {"name", "d", "T", "a", "b", "A",
                                              "B", "lambda", "P", "times"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    detail::require_field(known.count(it.key()) == 1, it.key(), "unknown field");
  }
  for (const char* f : {"d", "T", "a", "b", "A", "B"}) {
    detail::require_field(j.contains(f), f, "missing");
  }
  InstanceFile inst;
  if (j.contains("name")) {
    detail::require_field(j["name"].is_string(), "name", "expected a string");
    inst.name = j["name"].get<std::string>();
  }
  inst.d = detail::read_count(j["d"], "d");
  inst.steps = detail::read_count(j["T"], "T");
  const Index n = inst.d * inst.steps;
  inst.a = detail::read_vec(j["a"], "a", n);
  inst.b = detail::read_vec(j["b"], "b", n);
  inst.A = detail::read_mat(j["A"], "A", n, n);
  inst.B = detail::read_mat(j["B"], "B", n, n);
  if (j.contains("lambda")) {
    inst.lambda = detail::read_real(j["lambda"], "lambda");
    detail::require_field(inst.lambda >= 0.0, "lambda", "must be >= 0");
  }
  if (j.contains("P")) {
    const Json& p = j["P"];
    detail::require_field(p.is_array() && static_cast<Index>(p.size()) == inst.steps, "P",
                          "expected T=" + std::to_string(inst.steps) + " blocks");
    std::vector<Mat> blocks;
    for (std::size_t t = 0; t < p.size(); ++t) {
      blocks.push_back(detail::read_mat(p[t], "P[" + std::to_string(t) + "]", inst.d, inst.d));
    }
    inst.p_override = std::move(blocks);
  }
  if (j.contains("times")) {
    const Json& t = j["times"];
    detail::require_field(t.is_array() && !t.empty(), "times", "expected a non-empty array");
    std::vector<double> times;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double v = detail::read_real(t[i], "times[" + std::to_string(i) + "]");
      detail::require_field(v >= 0.0 && v <= 1.0, "times[" + std::to_string(i) + "]",
                            "must lie in [0,1]");
      times.push_back(v);
    }
    inst.times = std::move(times);
  }
  return inst;
}

inline InstanceFile load_instance(const std::string& path) {
  return parse_instance(parse_json_text(read_file(path), path));
}

inline Json instance_json(const InstanceFile& inst) {
  Json j;
  if (!inst.name.empty()) j["name"] = inst.name;
  j["d"] = inst.d;
  j["T"] = inst.steps;
  j["a"] = detail::vec_json(inst.a);
  j["b"] = detail::vec_json(inst.b);
  j["A"] = detail::mat_json(inst.A);
  j["B"] = detail::mat_json(inst.B);
  j["lambda"] = inst.lambda;
  if (inst.p_override) {
    Json p = Json::array();
    for (const Mat& m : *inst.p_override) p.push_back(detail::mat_json(m));
    j["P"] = std::move(p);
  }
  if (inst.times) j["times"] = *inst.times;
  return j;
}

/// Result document for `solve` and `verify`.
struct ResultFile {
  Json doc;

  static ResultFile from_report(const ProcessLaw& mu, const ProcessLaw& nu,
                                const SolveReport& r) {
    ResultFile out;
    Json& j = out.doc;
    j["d"] = mu.d();
    j["T"] = mu.steps();
    j["lambda"] = r.lambda;
    j["value"] = r.value;
    j["value_breakdown"] = {{"mean", r.mean_term},
                            {"trace", r.trace_term},
                            {"coupling", -r.coupling_term},
                            {"entropy", r.entropy_term}};
    j["S_diag"] = detail::vec_json(r.s_diag);
    j["D_lambda_diag"] = detail::vec_json(r.d_lambda_diag);
    j["P"] = detail::blocks_json(r.p_opt);
    j["coupling_cov"] = detail::mat_json(optimal_coupling(mu, nu, r).cov());
    j["unique"] = r.unique;
    j["monge"] = r.monge;
    return out;
  }

  void add_w2(const W2Report& w) {
    doc["w2"] = {{"lambda", w.lambda},
                 {"value", w.value},
                 {"cross_cov", detail::mat_json(w.c_lambda)}};
  }

  std::string text() const { return to_text(doc); }
};

namespace detail {

inline void check_keys(const Json& j, const std::string& where,
                       const std::set<std::string>& required,
                       const std::set<std::string>& optional) {
  require(j.is_object(), ErrorKind::InvalidInput, where + ": expected an object");
  for (const std::string& k : required) {
    require(j.contains(k), ErrorKind::InvalidInput, where + ": missing '" + k + "'");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    require(required.count(it.key()) || optional.count(it.key()), ErrorKind::InvalidInput,
            where + ": unknown field '" + it.key() + "'");
  }
}

inline void check_number(const Json& j, const std::string& where) {
  require(j.is_number() || j.is_null(), ErrorKind::InvalidInput, where + ": expected a number");
}

inline void check_numbers(const Json& j, const std::string& where, int depth) {
  require(j.is_array(), ErrorKind::InvalidInput, where + ": expected an array");
  for (const Json& e : j) {
    if (depth > 1) {
      check_numbers(e, where, depth - 1);
    } else {
      check_number(e, where);
    }
  }
}

}  // namespace detail

/// Structural check against schema/result.schema.json.
inline void validate_result(const Json& j) {
  using detail::check_keys;
  using detail::check_number;
  using detail::check_numbers;
  check_keys(j, "result",
             {"d", "T", "lambda", "value", "value_breakdown", "S_diag", "D_lambda_diag", "P",
              "coupling_cov", "unique", "monge"},
             {"w2", "override", "oracle"});
  require(j["d"].is_number_integer() && j["T"].is_number_integer(), ErrorKind::InvalidInput,
          "result: d and T must be integers");
  check_number(j["lambda"], "lambda");
  check_number(j["value"], "value");
  check_keys(j["value_breakdown"], "value_breakdown", {"mean", "trace", "coupling", "entropy"},
             {});
  for (const auto& [k, v] : j["value_breakdown"].items()) check_number(v, "value_breakdown." + k);
  check_numbers(j["S_diag"], "S_diag", 1);
  check_numbers(j["D_lambda_diag"], "D_lambda_diag", 1);
  check_numbers(j["P"], "P", 3);
  check_numbers(j["coupling_cov"], "coupling_cov", 2);
  require(j["unique"].is_boolean() && j["monge"].is_boolean(), ErrorKind::InvalidInput,
          "result: unique and monge must be booleans");
  if (j.contains("w2")) {
    check_keys(j["w2"], "w2", {"lambda", "value", "cross_cov"}, {});
    check_numbers(j["w2"]["cross_cov"], "w2.cross_cov", 2);
  }
  if (j.contains("override")) {
    check_keys(j["override"], "override", {"P", "cost", "monge", "gap"}, {});
    check_numbers(j["override"]["P"], "override.P", 3);
  }
  if (j.contains("oracle")) {
    const Json& o = j["oracle"];
    check_keys(o, "oracle", {"within_tolerance"}, {"param", "dp"});
    if (o.contains("param")) {
      check_keys(o["param"], "oracle.param",
                 {"method", "value", "gap", "tolerance", "P", "tie_count", "ties", "evaluations"},
                 {"w2_gap"});
      check_numbers(o["param"]["P"], "oracle.param.P", 3);
      check_numbers(o["param"]["ties"], "oracle.param.ties", 4);
    }
    if (o.contains("dp")) {
      check_keys(o["dp"], "oracle.dp", {"value", "gap", "tolerance", "grid"}, {});
    }
  }
}

}  // namespace gaw
