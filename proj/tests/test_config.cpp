#include <catch2/catch_amalgamated.hpp>

#include "mmreach/config.hpp"

#include <cstdio>
#include <fstream>

using namespace mmreach;
using Catch::Approx;

namespace {

PolyExpr relax_row() {
  // -x + w over variables (x, w)
  return PolyExpr::make(2, {Monomial{-1.0, {1, 0}}, Monomial{1.0, {0, 1}}});
}

AnalysisConfig relax_config() {
  AnalysisConfig c;
  c.system.name = "relax";
  c.system.n = 1;
  c.system.m = 1;
  c.system.dist_box = HyperRect::cube(1, -1.0, 1.0);
  c.system.field = {relax_row()};
  c.decomposition.mode = "polynomial";
  c.command.kind = "validate";
  return c;
}

}  // namespace

TEST_CASE("rectangle literals parse", "[config]") {
  HyperRect r = parse_rect_literal("[-0.5,0.5]x[-0.5,0.5]");
  REQUIRE(r == HyperRect::cube(2, -0.5, 0.5));

  // whitespace, capital X, one dimension
  REQUIRE(parse_rect_literal(" [ -1 , 2 ] X [ 0 , 3.5 ] ").hi[1] == Approx(3.5));
  REQUIRE(parse_rect_literal("[1e-3,2]").dim() == 1);

  HyperRect d = parse_rect_literal("[-inf,inf]x[0,1]", true);
  REQUIRE(d.lo[0] == -kInf);
  REQUIRE(d.hi[0] == kInf);
  REQUIRE(d.hi[1] == 1.0);
}

TEST_CASE("rectangle literals reject garbage", "[config]") {
  REQUIRE_THROWS_AS(parse_rect_literal(""), ConfigError);
  REQUIRE_THROWS_AS(parse_rect_literal("[1,2"), ConfigError);
  REQUIRE_THROWS_AS(parse_rect_literal("[1,2]y[3,4]"), ConfigError);
  REQUIRE_THROWS_AS(parse_rect_literal("[a,b]"), ConfigError);
  REQUIRE_THROWS_AS(parse_rect_literal("[2,1]"), ConfigError);        // inverted
  REQUIRE_THROWS_AS(parse_rect_literal("[nan,1]"), ConfigError);
  REQUIRE_THROWS_AS(parse_rect_literal("[-inf,0]"), ConfigError);     // inf needs allow_inf
  REQUIRE_THROWS_AS(parse_rect_literal("[-inf,0]", false), ConfigError);
}

TEST_CASE("rect_literal display form", "[config]") {
  REQUIRE(rect_literal(HyperRect::cube(2, -1.0, 1.0)) == "[-1,1]x[-1,1]");
}

TEST_CASE("config json round trip covers every field", "[config]") {
  AnalysisConfig c;
  c.system.name = "relax";
  c.system.n = 1;
  c.system.m = 1;
  c.system.domain = HyperRect::whole_space(1);
  c.system.dist_box = HyperRect::cube(1, -1.0, 1.0);
  c.system.field = {relax_row()};

  c.decomposition.mode = "user";
  c.decomposition.backward = true;
  JacobianConfig jb;
  jb.jx_lo = {-1.0};
  jb.jx_hi = {-1.0};
  jb.jw_lo = {1.0};
  jb.jw_hi = {1.0};
  jb.delta = {1};
  c.decomposition.jacobian = jb;
  // d = -xhat + w over (x, w, xhat, what)
  c.decomposition.rows = {PolyExpr::make(4, {Monomial{-1.0, {0, 0, 1, 0}},
                                             Monomial{1.0, {0, 1, 0, 0}}})};

  c.command.kind = "certify";
  c.command.box = HyperRect::cube(1, 0.0, 1.0);
  c.command.T = 2.5;
  c.command.start = EmbeddingPoint({-1.0}, {1.0});
  c.command.method = "newton";
  c.command.cert_kind = "attractive-rect";
  c.command.witness = EmbeddingPoint({-0.5}, {0.5});
  c.command.tol = 1e-8;
  c.command.samples = 500;
  c.command.test_box = HyperRect::cube(1, -2.0, 2.0);
  c.command.count = 123;
  c.command.seed = 99;
  c.command.switches = 4;
  c.command.backward = true;

  c.integrator.method = IntegratorConfig::Method::rk4;
  c.integrator.rtol = 1e-7;
  c.integrator.atol = 1e-9;
  c.integrator.fixed_step = 0.02;
  c.integrator.max_step = 0.5;
  c.integrator.max_steps = 1000;

  c.output.dir = "/tmp";
  c.output.stem = "run1";
  c.output.csv = false;
  c.output.json_files = true;

  AnalysisConfig back = parse_config(config_json(c));
  REQUIRE(back == c);

  // infinite max_step also survives (serialized as a string)
  c.integrator.max_step = kInf;
  REQUIRE(parse_config(config_json(c)) == c);
}

TEST_CASE("config parser accepts x0/x1 aliases and literals", "[config]") {
  json root = {{"command", {{"kind", "reach"}, {"x0", "[0,1]x[0,1]"}}}};
  AnalysisConfig c = parse_config(root);
  REQUIRE(c.command.box == HyperRect::of({0.0, 0.0}, {1.0, 1.0}));

  json root2 = {{"command", {{"kind", "backreach"}, {"x1", {{"lo", {0.0}}, {"hi", {2.0}}}}}}};
  REQUIRE(parse_config(root2).command.box == HyperRect::of({0.0}, {2.0}));
}

TEST_CASE("config parser rejects malformed input", "[config]") {
  REQUIRE_THROWS_AS(parse_config(json::array()), ConfigError);
  // wrong type for a field
  REQUIRE_THROWS_AS(parse_config(json{{"command", {{"kind", 5}}}}), ConfigError);
  // NaN is never a valid number
  REQUIRE_THROWS_AS(parse_config(json{{"command", {{"box", {{"lo", {"nah"}}, {"hi", {1.0}}}}}}}),
                    ConfigError);
  // infinite bounds outside a domain block
  REQUIRE_THROWS_AS(
      parse_config(json{{"command", {{"box", {{"lo", {"-inf"}}, {"hi", {1.0}}}}}}}),
      ConfigError);
  // bad integrator method
  REQUIRE_THROWS_AS(parse_config(json{{"integrator", {{"method", "euler"}}}}), ConfigError);
  // malformed embedding point
  REQUIRE_THROWS_AS(parse_config(json{{"command", {{"start", {{"x", {0.0}}}}}}}), ConfigError);
  // polynomial term arity mismatch
  json bad_field = {{"system",
                     {{"n", 2},
                      {"m", 0},
                      {"field", {json::array({json{{"coeff", 1.0}, {"exponents", {1}}}})}}}}};
  REQUIRE_THROWS_AS(parse_config(bad_field), ConfigError);
}

TEST_CASE("normalize_config fills defaults and rejects bad enums", "[config]") {
  AnalysisConfig c = relax_config();
  c.command.kind = "reach";
  c.command.box = HyperRect::cube(1, 0.0, 1.0);
  normalize_config(c);
  REQUIRE(c.output.stem == "reach");
  REQUIRE_FALSE(c.decomposition.backward);

  c.command.kind = "backreach";
  normalize_config(c);
  REQUIRE(c.decomposition.backward);

  AnalysisConfig k = relax_config();
  k.command.kind = "certify";
  k.command.cert_kind = "invariant-complement";
  normalize_config(k);
  REQUIRE(k.decomposition.backward);

  AnalysisConfig bad = relax_config();
  bad.command.kind = "explore";
  REQUIRE_THROWS_AS(normalize_config(bad), ConfigError);

  bad = relax_config();
  bad.decomposition.mode = "magic";
  REQUIRE_THROWS_AS(normalize_config(bad), ConfigError);

  bad = relax_config();
  bad.command.method = "bisect";
  REQUIRE_THROWS_AS(normalize_config(bad), ConfigError);

  bad = relax_config();
  bad.command.cert_kind = "lyapunov";
  REQUIRE_THROWS_AS(normalize_config(bad), ConfigError);

  bad = relax_config();
  bad.command.kind = "reach";  // no box
  REQUIRE_THROWS_AS(normalize_config(bad), ConfigError);

  bad = relax_config();
  bad.command.T = -1.0;
  REQUIRE_THROWS_AS(normalize_config(bad), ConfigError);
}

TEST_CASE("build_analysis resolves fixtures with overrides", "[config]") {
  AnalysisConfig c;
  c.system.fixture = "example2";
  c.decomposition.mode = "builtin";
  c.command.kind = "equilibrium";
  BuiltAnalysis b = build_analysis(c);
  REQUIRE(b.sys.name == "example2");
  REQUIRE(b.fixture.has_value());
  REQUIRE(b.d.n == 2);

  // overrides flow into both the system and the attached fixture
  c.system.dist_box = HyperRect::cube(1, -0.5, 0.5);
  BuiltAnalysis o = build_analysis(c);
  REQUIRE(o.sys.dist_box == HyperRect::cube(1, -0.5, 0.5));
  REQUIRE(o.fixture->sys.dist_box == o.sys.dist_box);

  // backward builtin pulls the fixture's backward decomposition
  c.decomposition.backward = true;
  REQUIRE(build_analysis(c).d.n == 2);

  // mismatched sizes are refused
  AnalysisConfig bad = c;
  bad.system.n = 3;
  REQUIRE_THROWS_AS(build_analysis(bad), ConfigError);
  bad = c;
  bad.system.m = 2;
  REQUIRE_THROWS_AS(build_analysis(bad), ConfigError);
  bad = c;
  bad.system.domain = HyperRect::cube(3, -1.0, 1.0);
  REQUIRE_THROWS_AS(build_analysis(bad), ConfigError);
  bad = c;
  bad.system.field = {relax_row()};
  REQUIRE_THROWS_AS(build_analysis(bad), ConfigError);
}

TEST_CASE("build_analysis constructs custom systems", "[config]") {
  AnalysisConfig c = relax_config();
  BuiltAnalysis b = build_analysis(c);
  REQUIRE(b.sys.name == "relax");
  REQUIRE_FALSE(b.fixture.has_value());
  REQUIRE(b.d.provenance == Provenance::polynomial_piecewise);
  ExtVec v = b.d.eval(ExtVec{0.5}, ExtVec{0.25}, ExtVec{0.5}, ExtVec{0.25});
  REQUIRE(v[0] == Approx(-0.5 + 0.25).margin(1e-12));

  // jacobian mode
  AnalysisConfig j = relax_config();
  j.decomposition.mode = "jacobian";
  REQUIRE_THROWS_AS(build_analysis(j), ConfigError);  // block missing
  JacobianConfig jb;
  jb.jx_lo = {-1.0};
  jb.jx_hi = {-1.0};
  jb.jw_lo = {1.0};
  jb.jw_hi = {1.0};
  j.decomposition.jacobian = jb;
  BuiltAnalysis jbuilt = build_analysis(j);
  REQUIRE(jbuilt.d.provenance == Provenance::jacobian_bound);
  j.decomposition.jacobian->jx_lo = {1.0, 2.0};  // wrong length
  REQUIRE_THROWS_AS(build_analysis(j), ConfigError);

  // monotone mode works for the cooperative relaxation
  AnalysisConfig m = relax_config();
  m.decomposition.mode = "monotone";
  REQUIRE(build_analysis(m).d.provenance == Provenance::monotone);

  // user mode
  AnalysisConfig u = relax_config();
  u.decomposition.mode = "user";
  REQUIRE_THROWS_AS(build_analysis(u), ConfigError);  // rows missing
  u.decomposition.rows = {PolyExpr::make(4, {Monomial{-1.0, {1, 0, 0, 0}},
                                             Monomial{1.0, {0, 1, 0, 0}}})};
  ExtVec uv = build_analysis(u).d.eval(ExtVec{2.0}, ExtVec{0.5}, ExtVec{0.0}, ExtVec{0.0});
  REQUIRE(uv[0] == Approx(-1.5).margin(1e-12));

  // custom-system validation failures
  AnalysisConfig bad = relax_config();
  bad.system.n = 0;
  REQUIRE_THROWS_AS(build_analysis(bad), ConfigError);
  bad = relax_config();
  bad.system.field = {};
  REQUIRE_THROWS_AS(build_analysis(bad), ConfigError);
  bad = relax_config();
  bad.system.dist_box.reset();
  REQUIRE_THROWS_AS(build_analysis(bad), ConfigError);
}

TEST_CASE("build_analysis checks command geometry sizes", "[config]") {
  AnalysisConfig c = relax_config();
  c.command.box = HyperRect::cube(2, 0.0, 1.0);
  REQUIRE_THROWS_AS(build_analysis(c), ConfigError);

  c = relax_config();
  c.command.start = EmbeddingPoint({0.0, 0.0}, {1.0, 1.0});
  REQUIRE_THROWS_AS(build_analysis(c), ConfigError);

  c = relax_config();
  c.command.witness = EmbeddingPoint({0.0, 0.0}, {1.0, 1.0});
  REQUIRE_THROWS_AS(build_analysis(c), ConfigError);

  c = relax_config();
  c.command.test_box = HyperRect::cube(2, 0.0, 1.0);
  REQUIRE_THROWS_AS(build_analysis(c), ConfigError);
}

TEST_CASE("load_config reads files and reports failures", "[config]") {
  REQUIRE_THROWS_AS(load_config("/nonexistent/mmreach.json"), ConfigError);

  std::string good = "/tmp/mmreach_cfg_good.json";
  {
    std::ofstream out(good);
    out << R"({"system": {"fixture": "example1"}, "command": {"kind": "reach",)"
        << R"( "box": "[-0.5,0.5]x[-0.5,0.5]"}})";
  }
  AnalysisConfig c = load_config(good);
  REQUIRE(c.system.fixture == "example1");
  REQUIRE(c.command.box == HyperRect::cube(2, -0.5, 0.5));
  std::remove(good.c_str());

  std::string bad = "/tmp/mmreach_cfg_bad.json";
  {
    std::ofstream out(bad);
    out << "{not json";
  }
  REQUIRE_THROWS_AS(load_config(bad), ConfigError);
  std::remove(bad.c_str());
}
