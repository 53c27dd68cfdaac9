#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "mmreach/config.hpp"

namespace mmreach {

// Exit code contract: 0 success, 1 refused certification or failed
// validation, 2 configuration error, 3 numeric failure.
inline int exit_code_for(const Error& e) {
  if (dynamic_cast<const CertificationRefused*>(&e)) return 1;
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const ConstructionError*>(&e)) return 2;
  if (dynamic_cast<const ValueError*>(&e)) return 2;
  if (dynamic_cast<const DimensionError*>(&e)) return 2;
  if (dynamic_cast<const DomainError*>(&e)) return 2;
  return 3;
}

inline const char* error_name(const Error& e) {
  if (dynamic_cast<const UnsupportedMonomial*>(&e)) return "UnsupportedMonomial";
  if (dynamic_cast<const ConstructionError*>(&e)) return "ConstructionError";
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const CertificationRefused*>(&e)) return "CertificationRefused";
  if (dynamic_cast<const NoConvergence*>(&e)) return "NoConvergence";
  if (dynamic_cast<const IntegrationError*>(&e)) return "IntegrationError";
  if (dynamic_cast<const PreconditionFailed*>(&e)) return "PreconditionFailed";
  if (dynamic_cast<const EvalError*>(&e)) return "EvalError";
  if (dynamic_cast<const NotARectangle*>(&e)) return "NotARectangle";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const DimensionError*>(&e)) return "DimensionError";
  if (dynamic_cast<const ValueError*>(&e)) return "ValueError";
  return "Error";
}

struct RunResult {
  int exit_code = 0;
  json summary;                        // also written as <stem>.json
  std::vector<std::string> artifacts;  // files written, in order
};

namespace detail {

inline HyperRect clip_rect(const HyperRect& a, const HyperRect& b) {
  return HyperRect::of(cw_max(a.lo, b.lo), cw_min(a.hi, b.hi));
}

struct ArtifactWriter {
  const OutputConfig& out;
  std::vector<std::string>* paths;

  std::string file(const std::string& suffix) const {
    std::filesystem::path dir(out.dir);
    if (!dir.empty()) std::filesystem::create_directories(dir);
    return (dir / (out.stem + suffix)).string();
  }

  void json_file(const json& j) const {
    if (!out.json_files) return;
    std::string p = file(".json");
    write_json(p, j);
    paths->push_back(p);
  }

  template <typename Fn>
  void csv_file(const std::string& suffix, Fn&& writer) const {
    if (!out.csv) return;
    std::string p = file(suffix);
    std::ofstream f = open_out(p);
    writer(f);
    paths->push_back(p);
  }
};

// Start point for the equilibrium search: explicit, else the fixture default.
inline EmbeddingPoint equilibrium_start(const AnalysisConfig& c, const BuiltAnalysis& built) {
  if (c.command.start) return *c.command.start;
  if (built.fixture) {
    const auto& f = *built.fixture;
    const auto& s = c.decomposition.backward ? f.backward_south_start : f.south_start;
    if (s) return *s;
  }
  throw ConfigError("command needs a start point (none given and no fixture default exists)");
}

inline EquilibriumResult find_equilibrium(const EmbeddingSystem& E, const EmbeddingPoint& start,
                                          const std::string& method,
                                          const IntegratorConfig& integ) {
  if (method == "newton") return solve_equilibrium_newton(E, start);
  FlowEquilibriumConfig fc;
  fc.integ = integ;
  return find_equilibrium_flow(E, start, fc);
}

// Sampling region for the attractivity evidence: the certified rectangle,
// inflated by a quarter of its largest width plus a small absolute pad, then
// clipped to the domain sampling box.
inline HyperRect attractivity_region(const SystemDef& sys, const HyperRect& rect) {
  double wmax = 0.0;
  for (std::size_t i = 0; i < rect.dim(); ++i) wmax = std::max(wmax, rect.hi[i] - rect.lo[i]);
  HyperRect grown = rect.deflated(-(0.25 * wmax + 0.1));
  return clip_rect(grown, sampling_box(sys.domain));
}

}  // namespace detail

inline RunResult run(AnalysisConfig cfg) {
  normalize_config(cfg);
  BuiltAnalysis built = build_analysis(cfg);
  const SystemDef& sys = built.sys;
  const std::string& kind = cfg.command.kind;

  RunResult res;
  detail::ArtifactWriter w{cfg.output, &res.artifacts};

  if (kind == "reach" || kind == "backreach") {
    ReachResult r = kind == "reach"
                        ? forward_reach(sys, built.d, *cfg.command.box, cfg.command.T,
                                        cfg.integrator)
                        : backward_reach(sys, built.d, *cfg.command.box, cfg.command.T,
                                         cfg.integrator);
    res.summary = reach_json(r);
    res.summary.erase("tube");  // full tube goes to CSV, keep the JSON small
    res.summary["tube_samples"] = r.tube.size();
    w.json_file(res.summary);
    w.csv_file("_tube.csv", [&](std::ostream& f) { write_tube_csv(f, r.tube); });
    return res;
  }

  if (kind == "equilibrium") {
    EmbeddingSystem E =
        make_embedding(cfg.decomposition.backward ? sys.reversed() : sys, built.d);
    EmbeddingPoint start = detail::equilibrium_start(cfg, built);
    EquilibriumResult eq =
        detail::find_equilibrium(E, start, cfg.command.method, cfg.integrator);
    res.summary = equilibrium_json(eq);
    w.json_file(res.summary);
    return res;
  }

  if (kind == "certify") {
    const std::string& ck = cfg.command.cert_kind;
    Certificate cert;
    if (ck == "invariant-complement") {
      EmbeddingPoint witness = [&] {
        if (cfg.command.witness) return *cfg.command.witness;
        EmbeddingSystem Eb = make_embedding(sys.reversed(), built.d);
        EquilibriumResult eq = detail::find_equilibrium(Eb, detail::equilibrium_start(cfg, built),
                                                        cfg.command.method, cfg.integrator);
        return eq.point;
      }();
      cert = certify_complement_invariant(sys, built.d, witness,
                                          std::max(cfg.command.tol, 1e-8));
    } else {
      EmbeddingSystem E = make_embedding(sys, built.d);
      if (ck == "invariant-rect" && cfg.command.witness) {
        cert = certify_invariant_rect(E, *cfg.command.witness, cfg.command.tol);
      } else {
        EquilibriumResult eq = detail::find_equilibrium(E, detail::equilibrium_start(cfg, built),
                                                        cfg.command.method, cfg.integrator);
        double tol = std::max(cfg.command.tol, 2.0 * eq.residual + 1e-12);
        if (ck == "invariant-rect") {
          cert = certify_invariant_rect(E, eq.point, tol);
          cert.residual = eq.residual;
        } else {  // attractive-rect
          AttractivityParams ap;
          ap.region = detail::attractivity_region(sys, detail::snap_rect(eq.point));
          ap.seed = cfg.command.seed;
          ap.integ = cfg.integrator;
          AttractivityReport evidence = check_attractivity(E, eq.point, ap);
          cert = certify_attractive_rect(E, eq, evidence, tol);
        }
      }
    }
    res.summary = certificate_json(cert);
    w.json_file(res.summary);
    return res;
  }

  if (kind == "validate") {
    SamplingPlan plan;
    plan.samples = cfg.command.samples;
    plan.seed = cfg.command.seed;
    plan.test_box = cfg.command.test_box;
    SystemDef target = cfg.decomposition.backward ? sys.reversed() : sys;
    ValidationReport rep = validate_decomposition(target, built.d, plan);
    res.summary = validation_json(rep);
    res.summary["decomposition"] = built.d.describe;
    res.summary["direction"] = cfg.decomposition.backward ? "backward" : "forward";
    w.json_file(res.summary);
    res.exit_code = rep.passed ? 0 : 1;
    return res;
  }

  // montecarlo
  MonteCarloResult mc =
      monte_carlo_reach(sys, *cfg.command.box, cfg.command.T, cfg.command.count,
                        cfg.command.seed, cfg.command.switches, cfg.integrator,
                        cfg.command.backward);
  res.summary = montecarlo_json(mc);
  w.json_file(res.summary);
  w.csv_file("_cloud.csv", [&](std::ostream& f) { write_cloud_csv(f, mc.endpoints); });
  return res;
}

inline int run_and_report(const AnalysisConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    RunResult r = run(cfg);
    out << r.summary.dump(2) << "\n";
    for (const auto& p : r.artifacts) err << "wrote " << p << "\n";
    return r.exit_code;
  } catch (const Error& e) {
    err << error_name(e) << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

// Catalog of the built-in systems.
inline void list_fixtures(std::ostream& out) {
  for (const auto& name : fixture_names()) {
    Fixture f = fixture_by_name(name);
    out << f.name << "  (" << f.title << ")\n";
    out << "  n=" << f.sys.n << " m=" << f.sys.m;
    if (f.sys.m > 0)
      out << "  W=" << rect_literal(f.sys.dist_box);
    else
      out << "  W=(none)";
    out << "\n  decompositions: forward";
    if (f.backward) out << ", backward";
    out << "\n";
  }
}

}  // namespace mmreach
