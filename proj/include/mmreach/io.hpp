#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "mmreach/invariance.hpp"

namespace mmreach {

using nlohmann::json;

namespace detail {

// Round-trip formatting for CSV cells.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

// time,x1..xn
inline void write_trajectory_csv(std::ostream& out, const Trajectory& tr) {
  std::size_t n = tr.states.empty() ? 0 : tr.states.front().size();
  out << "time";
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  out << "\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    out << detail::fmt_double(tr.times[k]);
    for (std::size_t i = 0; i < n; ++i) out << "," << detail::fmt_double(tr.states[k][i]);
    out << "\n";
  }
}

// time,x1..xn,xhat1..xhatn
inline void write_embedding_csv(std::ostream& out, const EmbeddingTrajectory& tr) {
  std::size_t n = tr.points.empty() ? 0 : tr.points.front().dim();
  out << "time";
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",xhat" << i;
  out << "\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    out << detail::fmt_double(tr.times[k]);
    for (std::size_t i = 0; i < n; ++i) out << "," << detail::fmt_double(tr.points[k].x[i]);
    for (std::size_t i = 0; i < n; ++i) out << "," << detail::fmt_double(tr.points[k].xhat[i]);
    out << "\n";
  }
}

// time,lo1..lon,hi1..hin
inline void write_tube_csv(std::ostream& out,
                           const std::vector<std::pair<double, HyperRect>>& tube) {
  std::size_t n = tube.empty() ? 0 : tube.front().second.dim();
  out << "time";
  for (std::size_t i = 1; i <= n; ++i) out << ",lo" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",hi" << i;
  out << "\n";
  for (const auto& [t, r] : tube) {
    out << detail::fmt_double(t);
    for (std::size_t i = 0; i < n; ++i) out << "," << detail::fmt_double(r.lo[i]);
    for (std::size_t i = 0; i < n; ++i) out << "," << detail::fmt_double(r.hi[i]);
    out << "\n";
  }
}

// x1..xn, one row per point
inline void write_cloud_csv(std::ostream& out, const std::vector<ExtVec>& points) {
  std::size_t n = points.empty() ? 0 : points.front().size();
  for (std::size_t i = 1; i <= n; ++i) out << (i > 1 ? "," : "") << "x" << i;
  out << "\n";
  for (const auto& p : points) {
    for (std::size_t i = 0; i < n; ++i) out << (i ? "," : "") << detail::fmt_double(p[i]);
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

// JSON has no infinities; rectangle faces at +-inf are encoded as strings.
inline json num_json(double v) {
  if (std::isnan(v)) return nullptr;
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

inline json vec_json(const ExtVec& v) {
  json a = json::array();
  for (double x : v.e) a.push_back(num_json(x));
  return a;
}

inline json rect_json(const HyperRect& r) {
  return json{{"lo", vec_json(r.lo)}, {"hi", vec_json(r.hi)}};
}

inline json point_json(const EmbeddingPoint& p) {
  return json{{"x", vec_json(p.x)}, {"xhat", vec_json(p.xhat)}};
}

inline json validation_json(const ValidationReport& rep) {
  json v = json::array();
  for (const auto& viol : rep.violations) {
    json at = json::array();
    for (double x : viol.at) at.push_back(num_json(x));
    v.push_back(json{{"condition", viol.condition},
                     {"row", viol.row},
                     {"col", viol.col},
                     {"at", at},
                     {"value", num_json(viol.value)}});
  }
  return json{{"passed", rep.passed},
              {"samples_checked", rep.samples_checked},
              {"skipped_nonsmooth", rep.skipped_nonsmooth},
              {"violation_count", rep.violation_count},
              {"violations", v},
              {"assumptions", rep.assumptions}};
}

inline json stability_json(const StabilityInfo& s) {
  json evs = json::array();
  for (const auto& [re, im] : s.eigenvalues) evs.push_back(json::array({re, im}));
  return json{{"eigenvalues", evs},
              {"max_real_part", num_json(s.max_real_part)},
              {"stable", s.stable}};
}

inline json attractivity_json(const AttractivityReport& a) {
  return json{{"embedding_samples", a.embedding_samples},
              {"embedding_converged", a.embedding_converged},
              {"system_samples", a.system_samples},
              {"system_converged", a.system_converged},
              {"fraction_embedding", a.fraction_embedding},
              {"fraction_system", a.fraction_system},
              {"ball_radius", a.ball_radius},
              {"horizon", a.horizon},
              {"seed", a.seed},
              {"stability", stability_json(a.stability)}};
}

inline json certificate_json(const Certificate& c) {
  json j{{"kind", c.kind},
         {"rect", rect_json(c.rect)},
         {"witness", point_json(c.witness)},
         {"margin", num_json(c.margin)},
         {"residual", num_json(c.residual)},
         {"tol", num_json(c.tol)},
         {"tol_eq", num_json(c.tol_eq)},
         {"system", c.system_fingerprint},
         {"tool", c.tool_version},
         {"seeds", c.seeds},
         {"notes", c.notes}};
  if (c.attractivity) j["attractivity"] = attractivity_json(*c.attractivity);
  return j;
}

inline json equilibrium_json(const EquilibriumResult& e) {
  return json{{"point", point_json(e.point)},
              {"residual", num_json(e.residual)},
              {"method", e.method == EquilibriumMethod::flow ? "flow" : "newton"},
              {"in_triangle", e.in_triangle},
              {"flow_time", num_json(e.flow_time)},
              {"iterations", e.iterations}};
}

inline json reach_json(const ReachResult& r) {
  json tube = json::array();
  for (const auto& [t, rect] : r.tube)
    tube.push_back(json{{"time", num_json(t)}, {"rect", rect_json(rect)}});
  json j{{"direction", r.direction},
         {"T", num_json(r.T)},
         {"hypothesis_ok", r.hypothesis_ok},
         {"rect", r.rect ? rect_json(*r.rect) : json(nullptr)},
         {"tube", tube}};
  return j;
}

inline json montecarlo_json(const MonteCarloResult& mc) {
  return json{{"requested", mc.requested},
              {"completed", mc.completed},
              {"excluded_domain", mc.excluded_domain},
              {"failed", mc.failed},
              {"seed", mc.seed},
              {"hull", mc.hull ? rect_json(*mc.hull) : json(nullptr)}};
}

inline json monotone_json(const MonotoneCorollaryResult& r) {
  return json{{"x_eq", vec_json(r.x_eq)},
              {"xhat_eq", vec_json(r.xhat_eq)},
              {"residual_lo", num_json(r.residual_lo)},
              {"residual_hi", num_json(r.residual_hi)},
              {"certificate", certificate_json(r.cert)}};
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out = detail::open_out(path);
  out << j.dump(2) << "\n";
}

}  // namespace mmreach
