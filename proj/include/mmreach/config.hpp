#pragma once

#include <cctype>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "mmreach/fixtures.hpp"
#include "mmreach/io.hpp"

namespace mmreach {

// ---------------------------------------------------------------------------
// Rectangle literals: "[a,b]x[c,d]x..."
// ---------------------------------------------------------------------------

inline HyperRect parse_rect_literal(const std::string& text, bool allow_inf = false) {
  std::vector<double> lo, hi;
  std::size_t p = 0;
  auto skip_ws = [&] {
    while (p < text.size() && std::isspace(static_cast<unsigned char>(text[p]))) ++p;
  };
  auto expect = [&](char c) {
    skip_ws();
    if (p >= text.size() || text[p] != c)
      throw ConfigError("rectangle literal \"" + text + "\": expected '" + std::string(1, c) +
                        "' at position " + std::to_string(p));
    ++p;
  };
  auto number = [&]() -> double {
    skip_ws();
    std::size_t q = p;
    if (q < text.size() && (text[q] == '+' || text[q] == '-')) ++q;
    if (text.compare(q, 3, "inf") == 0) {
      if (!allow_inf)
        throw ConfigError("rectangle literal \"" + text +
                          "\": infinite bounds are only allowed in domain blocks");
      double v = (text[p] == '-') ? -kInf : kInf;
      p = q + 3;
      return v;
    }
    const char* begin = text.c_str() + p;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin)
      throw ConfigError("rectangle literal \"" + text + "\": expected a number at position " +
                        std::to_string(p));
    if (std::isnan(v)) throw ConfigError("rectangle literal \"" + text + "\": NaN bound");
    if (!std::isfinite(v) && !allow_inf)
      throw ConfigError("rectangle literal \"" + text +
                        "\": infinite bounds are only allowed in domain blocks");
    p = static_cast<std::size_t>(end - text.c_str());
    return v;
  };

  for (;;) {
    expect('[');
    lo.push_back(number());
    expect(',');
    hi.push_back(number());
    expect(']');
    skip_ws();
    if (p >= text.size()) break;
    if (text[p] != 'x' && text[p] != 'X')
      throw ConfigError("rectangle literal \"" + text + "\": expected 'x' between intervals");
    ++p;
  }
  try {
    return HyperRect::of(ExtVec(std::move(lo)), ExtVec(std::move(hi)));
  } catch (const NotARectangle& e) {
    throw ConfigError("rectangle literal \"" + text + "\": " + e.what());
  }
}

// Short display form; not meant to round-trip exactly.
inline std::string rect_literal(const HyperRect& r) {
  std::string s;
  char buf[64];
  for (std::size_t i = 0; i < r.dim(); ++i) {
    if (i) s += "x";
    std::snprintf(buf, sizeof(buf), "[%g,%g]", r.lo[i], r.hi[i]);
    s += buf;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Analysis configuration
// ---------------------------------------------------------------------------

struct SystemConfig {
  std::string fixture;  // non-empty selects a built-in system
  std::string name = "custom";
  std::size_t n = 0, m = 0;
  std::optional<HyperRect> domain;    // default: whole space (fixture: its own)
  std::optional<HyperRect> dist_box;  // required for custom systems with m > 0
  std::vector<PolyExpr> field;        // custom systems: n rows over n+m variables

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

struct JacobianConfig {
  std::vector<double> jx_lo, jx_hi;      // n*n, row-major
  std::vector<double> jw_lo, jw_hi;      // n*m, row-major
  std::vector<std::uint8_t> delta;       // optional selection flags, n*n
  std::vector<std::uint8_t> epsilon;     // optional, n*m

  friend bool operator==(const JacobianConfig&, const JacobianConfig&) = default;
};

struct DecompConfig {
  std::string mode = "builtin";  // builtin | polynomial | jacobian | monotone | user
  bool backward = false;
  std::optional<JacobianConfig> jacobian;  // jacobian mode
  std::vector<PolyExpr> rows;              // user mode: n rows over 2(n+m) variables

  friend bool operator==(const DecompConfig&, const DecompConfig&) = default;
};

struct CommandConfig {
  std::string kind;  // reach | backreach | equilibrium | certify | validate | montecarlo
  std::optional<HyperRect> box;  // X0 (reach, montecarlo) or X1 (backreach)
  double T = 1.0;
  std::optional<EmbeddingPoint> start;  // equilibrium search start / newton guess
  std::string method = "flow";          // equilibrium: flow | newton
  std::string cert_kind = "invariant-rect";
  std::optional<EmbeddingPoint> witness;  // certify: explicit witness
  double tol = 0.0;                       // certificate slack
  std::size_t samples = 10000;            // validate
  std::optional<HyperRect> test_box;      // validate: sampling box override
  std::size_t count = 10000;              // montecarlo
  std::uint64_t seed = 7;
  std::size_t switches = 8;     // montecarlo switch count
  bool backward = false;        // montecarlo: sample the reversed dynamics

  friend bool operator==(const CommandConfig&, const CommandConfig&) = default;
};

struct OutputConfig {
  std::string dir = ".";
  std::string stem;  // default: the command kind
  bool csv = true;
  bool json_files = true;

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct AnalysisConfig {
  SystemConfig system;
  DecompConfig decomposition;
  CommandConfig command;
  IntegratorConfig integrator;
  OutputConfig output;

  friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

// ---------------------------------------------------------------------------
// JSON round-trip
// ---------------------------------------------------------------------------

namespace detail {

inline double json_num_in(const json& j, bool allow_inf, const std::string& where) {
  double v;
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf")
      v = kInf;
    else if (s == "-inf")
      v = -kInf;
    else
      throw ConfigError(where + ": unrecognized number \"" + s + "\"");
  } else if (j.is_number()) {
    v = j.get<double>();
  } else {
    throw ConfigError(where + ": expected a number");
  }
  if (std::isnan(v)) throw ConfigError(where + ": NaN");
  if (!std::isfinite(v) && !allow_inf)
    throw ConfigError(where + ": infinite values are only allowed in domain blocks");
  return v;
}

inline ExtVec json_vec_in(const json& j, bool allow_inf, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(json_num_in(e, allow_inf, where));
  return ExtVec(std::move(v));
}

inline HyperRect json_rect_in(const json& j, bool allow_inf, const std::string& where) {
  if (j.is_string()) return parse_rect_literal(j.get<std::string>(), allow_inf);
  if (j.is_object() && j.contains("lo") && j.contains("hi")) {
    ExtVec lo = json_vec_in(j["lo"], allow_inf, where + ".lo");
    ExtVec hi = json_vec_in(j["hi"], allow_inf, where + ".hi");
    try {
      return HyperRect::of(std::move(lo), std::move(hi));
    } catch (const NotARectangle& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  throw ConfigError(where + ": expected a rectangle literal or {lo, hi}");
}

inline EmbeddingPoint json_point_in(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("x") || !j.contains("xhat"))
    throw ConfigError(where + ": expected {x, xhat}");
  try {
    return EmbeddingPoint(json_vec_in(j["x"], false, where + ".x"),
                          json_vec_in(j["xhat"], false, where + ".xhat"));
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline json poly_json(const PolyExpr& p) {
  json terms = json::array();
  for (const auto& t : p.terms) terms.push_back(json{{"coeff", t.c}, {"exponents", t.exp}});
  return terms;
}

inline PolyExpr json_poly_in(const json& j, std::size_t nvars, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of terms");
  std::vector<Monomial> terms;
  for (const auto& t : j) {
    if (!t.is_object() || !t.contains("coeff") || !t.contains("exponents"))
      throw ConfigError(where + ": every term needs coeff and exponents");
    Monomial mono;
    mono.c = json_num_in(t["coeff"], false, where + ".coeff");
    const json& ex = t["exponents"];
    if (!ex.is_array()) throw ConfigError(where + ": exponents must be an array");
    for (const auto& e : ex) {
      if (!e.is_number_unsigned())
        throw ConfigError(where + ": exponents must be nonnegative integers");
      mono.exp.push_back(e.get<unsigned>());
    }
    if (mono.exp.size() != nvars)
      throw ConfigError(where + ": exponent list length " + std::to_string(mono.exp.size()) +
                        " != variable count " + std::to_string(nvars));
    terms.push_back(std::move(mono));
  }
  try {
    return PolyExpr::make(nvars, std::move(terms));
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

template <typename T>
T json_get(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

inline json config_json(const AnalysisConfig& c) {
  json sys;
  if (!c.system.fixture.empty()) sys["fixture"] = c.system.fixture;
  sys["name"] = c.system.name;
  sys["n"] = c.system.n;
  sys["m"] = c.system.m;
  if (c.system.domain) sys["domain"] = rect_json(*c.system.domain);
  if (c.system.dist_box) sys["disturbance"] = rect_json(*c.system.dist_box);
  if (!c.system.field.empty()) {
    json rows = json::array();
    for (const auto& r : c.system.field) rows.push_back(detail::poly_json(r));
    sys["field"] = rows;
  }

  json dec;
  dec["mode"] = c.decomposition.mode;
  dec["backward"] = c.decomposition.backward;
  if (c.decomposition.jacobian) {
    const auto& jb = *c.decomposition.jacobian;
    json jj{{"jx_lo", jb.jx_lo}, {"jx_hi", jb.jx_hi}, {"jw_lo", jb.jw_lo}, {"jw_hi", jb.jw_hi}};
    if (!jb.delta.empty()) jj["delta"] = jb.delta;
    if (!jb.epsilon.empty()) jj["epsilon"] = jb.epsilon;
    dec["jacobian"] = jj;
  }
  if (!c.decomposition.rows.empty()) {
    json rows = json::array();
    for (const auto& r : c.decomposition.rows) rows.push_back(detail::poly_json(r));
    dec["rows"] = rows;
  }

  json cmd;
  cmd["kind"] = c.command.kind;
  if (c.command.box) cmd["box"] = rect_json(*c.command.box);
  cmd["T"] = c.command.T;
  if (c.command.start) cmd["start"] = point_json(*c.command.start);
  cmd["method"] = c.command.method;
  cmd["cert_kind"] = c.command.cert_kind;
  if (c.command.witness) cmd["witness"] = point_json(*c.command.witness);
  cmd["tol"] = c.command.tol;
  cmd["samples"] = c.command.samples;
  if (c.command.test_box) cmd["test_box"] = rect_json(*c.command.test_box);
  cmd["count"] = c.command.count;
  cmd["seed"] = c.command.seed;
  cmd["switches"] = c.command.switches;
  cmd["backward"] = c.command.backward;

  json integ;
  integ["method"] = c.integrator.method == IntegratorConfig::Method::rkf45 ? "rkf45" : "rk4";
  integ["rtol"] = c.integrator.rtol;
  integ["atol"] = c.integrator.atol;
  integ["fixed_step"] = c.integrator.fixed_step;
  integ["max_step"] = num_json(c.integrator.max_step);
  integ["max_steps"] = c.integrator.max_steps;

  json out;
  out["dir"] = c.output.dir;
  out["stem"] = c.output.stem;
  out["csv"] = c.output.csv;
  out["json"] = c.output.json_files;

  return json{{"system", sys},
              {"decomposition", dec},
              {"command", cmd},
              {"integrator", integ},
              {"output", out}};
}

inline AnalysisConfig parse_config(const json& root) {
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  AnalysisConfig c;

  if (root.contains("system")) {
    const json& s = root["system"];
    c.system.fixture = detail::json_get<std::string>(s, "fixture", "");
    c.system.name = detail::json_get<std::string>(s, "name", "custom");
    c.system.n = detail::json_get<std::size_t>(s, "n", 0);
    c.system.m = detail::json_get<std::size_t>(s, "m", 0);
    if (s.contains("domain")) c.system.domain = detail::json_rect_in(s["domain"], true, "system.domain");
    if (s.contains("disturbance"))
      c.system.dist_box = detail::json_rect_in(s["disturbance"], false, "system.disturbance");
    if (s.contains("field")) {
      const json& rows = s["field"];
      if (!rows.is_array()) throw ConfigError("system.field: expected an array of rows");
      for (std::size_t i = 0; i < rows.size(); ++i)
        c.system.field.push_back(detail::json_poly_in(
            rows[i], c.system.n + c.system.m, "system.field[" + std::to_string(i) + "]"));
    }
  }

  if (root.contains("decomposition")) {
    const json& d = root["decomposition"];
    c.decomposition.mode = detail::json_get<std::string>(d, "mode", "builtin");
    c.decomposition.backward = detail::json_get<bool>(d, "backward", false);
    if (d.contains("jacobian")) {
      const json& jj = d["jacobian"];
      JacobianConfig jb;
      jb.jx_lo = detail::json_get<std::vector<double>>(jj, "jx_lo", {});
      jb.jx_hi = detail::json_get<std::vector<double>>(jj, "jx_hi", {});
      jb.jw_lo = detail::json_get<std::vector<double>>(jj, "jw_lo", {});
      jb.jw_hi = detail::json_get<std::vector<double>>(jj, "jw_hi", {});
      jb.delta = detail::json_get<std::vector<std::uint8_t>>(jj, "delta", {});
      jb.epsilon = detail::json_get<std::vector<std::uint8_t>>(jj, "epsilon", {});
      c.decomposition.jacobian = std::move(jb);
    }
    if (d.contains("rows")) {
      const json& rows = d["rows"];
      if (!rows.is_array()) throw ConfigError("decomposition.rows: expected an array of rows");
      std::size_t dv = 2 * (c.system.n + c.system.m);
      for (std::size_t i = 0; i < rows.size(); ++i)
        c.decomposition.rows.push_back(
            detail::json_poly_in(rows[i], dv, "decomposition.rows[" + std::to_string(i) + "]"));
    }
  }

  if (root.contains("command")) {
    const json& k = root["command"];
    c.command.kind = detail::json_get<std::string>(k, "kind", "");
    for (const char* key : {"box", "x0", "x1"})
      if (k.contains(key)) c.command.box = detail::json_rect_in(k[key], false, std::string("command.") + key);
    c.command.T = detail::json_get<double>(k, "T", 1.0);
    if (k.contains("start")) c.command.start = detail::json_point_in(k["start"], "command.start");
    c.command.method = detail::json_get<std::string>(k, "method", "flow");
    c.command.cert_kind = detail::json_get<std::string>(k, "cert_kind", "invariant-rect");
    if (k.contains("witness"))
      c.command.witness = detail::json_point_in(k["witness"], "command.witness");
    c.command.tol = detail::json_get<double>(k, "tol", 0.0);
    c.command.samples = detail::json_get<std::size_t>(k, "samples", 10000);
    if (k.contains("test_box"))
      c.command.test_box = detail::json_rect_in(k["test_box"], false, "command.test_box");
    c.command.count = detail::json_get<std::size_t>(k, "count", 10000);
    c.command.seed = detail::json_get<std::uint64_t>(k, "seed", 7);
    c.command.switches = detail::json_get<std::size_t>(k, "switches", 8);
    c.command.backward = detail::json_get<bool>(k, "backward", false);
  }

  if (root.contains("integrator")) {
    const json& g = root["integrator"];
    std::string method = detail::json_get<std::string>(g, "method", "rkf45");
    if (method == "rkf45")
      c.integrator.method = IntegratorConfig::Method::rkf45;
    else if (method == "rk4")
      c.integrator.method = IntegratorConfig::Method::rk4;
    else
      throw ConfigError("integrator.method: expected rkf45 or rk4, got \"" + method + "\"");
    c.integrator.rtol = detail::json_get<double>(g, "rtol", 1e-8);
    c.integrator.atol = detail::json_get<double>(g, "atol", 1e-10);
    c.integrator.fixed_step = detail::json_get<double>(g, "fixed_step", 1e-2);
    if (g.contains("max_step"))
      c.integrator.max_step = detail::json_num_in(g["max_step"], true, "integrator.max_step");
    c.integrator.max_steps = detail::json_get<std::size_t>(g, "max_steps", 2000000);
  }

  if (root.contains("output")) {
    const json& o = root["output"];
    c.output.dir = detail::json_get<std::string>(o, "dir", ".");
    c.output.stem = detail::json_get<std::string>(o, "stem", "");
    c.output.csv = detail::json_get<bool>(o, "csv", true);
    c.output.json_files = detail::json_get<bool>(o, "json", true);
  }

  return c;
}

inline AnalysisConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_config(root);
}

// ---------------------------------------------------------------------------
// Config validation and object construction
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_one_of(const std::string& s, std::initializer_list<const char*> opts) {
  for (const char* o : opts)
    if (s == o) return true;
  return false;
}

}  // namespace detail

// Fills in implied fields and rejects inconsistent ones.
inline void normalize_config(AnalysisConfig& c) {
  if (!detail::is_one_of(c.command.kind,
                         {"reach", "backreach", "equilibrium", "certify", "validate",
                          "montecarlo"}))
    throw ConfigError("command.kind must be one of reach, backreach, equilibrium, certify, "
                      "validate, montecarlo (got \"" +
                      c.command.kind + "\")");
  if (!detail::is_one_of(c.decomposition.mode,
                         {"builtin", "polynomial", "jacobian", "monotone", "user"}))
    throw ConfigError("decomposition.mode must be one of builtin, polynomial, jacobian, "
                      "monotone, user (got \"" +
                      c.decomposition.mode + "\")");
  if (!detail::is_one_of(c.command.method, {"flow", "newton"}))
    throw ConfigError("command.method must be flow or newton");
  if (!detail::is_one_of(c.command.cert_kind,
                         {"invariant-rect", "attractive-rect", "invariant-complement"}))
    throw ConfigError("command.cert_kind must be one of invariant-rect, attractive-rect, "
                      "invariant-complement");
  if (c.command.kind == "backreach") c.decomposition.backward = true;
  if (c.command.kind == "certify" && c.command.cert_kind == "invariant-complement")
    c.decomposition.backward = true;
  if ((c.command.kind == "reach" || c.command.kind == "backreach" ||
       c.command.kind == "montecarlo") &&
      !c.command.box)
    throw ConfigError("command." + c.command.kind + " needs a start rectangle (box)");
  if (c.command.T < 0.0) throw ConfigError("command.T must be nonnegative");
  if (c.output.stem.empty()) c.output.stem = c.command.kind;
}

struct BuiltAnalysis {
  SystemDef sys;      // forward system
  DecompositionFn d;  // decomposition of F, or of -F when decomposition.backward
  std::optional<Fixture> fixture;
};

inline BuiltAnalysis build_analysis(const AnalysisConfig& c) {
  BuiltAnalysis out;

  if (!c.system.fixture.empty()) {
    if (!c.system.field.empty())
      throw ConfigError("system: give either a fixture name or a field, not both");
    Fixture f = fixture_by_name(c.system.fixture);
    if (c.system.n != 0 && c.system.n != f.sys.n)
      throw ConfigError("system.n does not match fixture " + f.name);
    if (c.system.m != 0 && c.system.m != f.sys.m)
      throw ConfigError("system.m does not match fixture " + f.name);
    out.sys = f.sys;
    if (c.system.domain) {
      if (c.system.domain->dim() != f.sys.n)
        throw ConfigError("system.domain dimension != n");
      out.sys.domain = *c.system.domain;
    }
    if (c.system.dist_box) {
      if (c.system.dist_box->dim() != f.sys.m)
        throw ConfigError("system.disturbance dimension != m");
      out.sys.dist_box = *c.system.dist_box;
    }
    f.sys = out.sys;
    out.fixture = std::move(f);
  } else {
    if (c.system.n == 0) throw ConfigError("system.n must be positive for custom systems");
    if (c.system.field.size() != c.system.n)
      throw ConfigError("system.field needs exactly n rows");
    HyperRect domain = c.system.domain ? *c.system.domain : HyperRect::whole_space(c.system.n);
    HyperRect dist;
    if (c.system.m > 0) {
      if (!c.system.dist_box)
        throw ConfigError("system.disturbance is required when m > 0");
      dist = *c.system.dist_box;
    } else {
      dist = HyperRect::of(ExtVec(), ExtVec());
    }
    try {
      out.sys =
          SystemDef::from_poly(c.system.field, c.system.m, domain, dist, c.system.name);
    } catch (const Error& e) {
      throw ConfigError(std::string("system: ") + e.what());
    }
  }

  const bool backward = c.decomposition.backward;
  const std::string& mode = c.decomposition.mode;
  const SystemDef& sys = out.sys;

  if (mode == "builtin") {
    if (!out.fixture)
      throw ConfigError("decomposition.mode builtin needs a fixture system");
    if (backward) {
      if (!out.fixture->backward)
        throw ConfigError("fixture " + out.fixture->name + " has no backward decomposition");
      out.d = *out.fixture->backward;
    } else {
      out.d = out.fixture->d;
    }
  } else if (mode == "polynomial") {
    out.d = build_polynomial_decomposition(backward ? sys.reversed() : sys);
  } else if (mode == "jacobian") {
    if (!c.decomposition.jacobian)
      throw ConfigError("decomposition.mode jacobian needs a jacobian block");
    const auto& jc = *c.decomposition.jacobian;
    JacobianBounds bounds;
    try {
      bounds = JacobianBounds::make(sys.n, sys.m, jc.jx_lo, jc.jx_hi, jc.jw_lo, jc.jw_hi);
    } catch (const Error& e) {
      throw ConfigError(std::string("decomposition.jacobian: ") + e.what());
    }
    std::optional<SelectionFlags> flags;
    if (!jc.delta.empty() || !jc.epsilon.empty()) {
      SelectionFlags f;
      f.delta = jc.delta;
      f.epsilon = jc.epsilon;
      flags = std::move(f);
    }
    DecompositionFn fd = build_jacobian_decomposition(sys, bounds, flags);
    out.d = backward ? build_backward_decomposition(sys, fd) : fd;
  } else if (mode == "monotone") {
    DecompositionFn fd = build_monotone_decomposition(sys);
    out.d = backward ? build_backward_decomposition(sys, fd) : fd;
  } else {  // user
    if (c.decomposition.rows.empty())
      throw ConfigError("decomposition.mode user needs rows");
    try {
      out.d = make_user_decomposition_from_rows(sys.n, sys.m, c.decomposition.rows);
    } catch (const Error& e) {
      throw ConfigError(std::string("decomposition.rows: ") + e.what());
    }
  }

  if (c.command.box && c.command.box->dim() != sys.n)
    throw ConfigError("command box dimension != n");
  if (c.command.start && c.command.start->dim() != sys.n)
    throw ConfigError("command.start dimension != n");
  if (c.command.witness && c.command.witness->dim() != sys.n)
    throw ConfigError("command.witness dimension != n");
  if (c.command.test_box && c.command.test_box->dim() != sys.n)
    throw ConfigError("command.test_box dimension != n");

  return out;
}

}  // namespace mmreach
