#include <catch2/catch_amalgamated.hpp>

#include "mmreach/fixtures.hpp"
#include "mmreach/invariance.hpp"

#include <random>

using namespace mmreach;
using Catch::Approx;

namespace {

// pointwise comparison of two decompositions on random doubled tuples
void expect_same(const SystemDef& sys, const DecompositionFn& a, const DecompositionFn& b,
                 double box = 3.0, int samples = 500) {
  std::mt19937_64 gen(17);
  HyperRect xbox = HyperRect::cube(sys.n, -box, box);
  for (int s = 0; s < samples; ++s) {
    ExtVec x = detail::uniform_in_rect(gen, xbox);
    ExtVec xh = detail::uniform_in_rect(gen, xbox);
    ExtVec w = detail::uniform_in_rect(gen, sys.dist_box);
    ExtVec wh = detail::uniform_in_rect(gen, sys.dist_box);
    ExtVec va = a.eval(x, w, xh, wh);
    ExtVec vb = b.eval(x, w, xh, wh);
    for (std::size_t i = 0; i < sys.n; ++i) REQUIRE(va[i] == Approx(vb[i]).margin(1e-12));
  }
}

}  // namespace

TEST_CASE("fixture registry", "[fixtures]") {
  REQUIRE(fixture_names() == std::vector<std::string>{"example1", "example2", "example3",
                                                      "casestudy"});
  for (const auto& name : fixture_names()) {
    Fixture f = fixture_by_name(name);
    REQUIRE(f.name == name);
    REQUIRE_FALSE(f.title.empty());
    REQUIRE(f.d.n == f.sys.n);
  }
  REQUIRE_THROWS_AS(fixture_by_name("nope"), ConfigError);
}

TEST_CASE("fixture disturbance boxes", "[fixtures]") {
  REQUIRE(fixture_by_name("example1").sys.m == 0);
  Fixture f2 = fixture_by_name("example2");
  REQUIRE(f2.sys.dist_box == HyperRect::cube(1, -2.0, 2.0));
  Fixture f3 = fixture_by_name("example3");
  REQUIRE(f3.sys.dist_box == HyperRect::cube(1, 0.0, 0.25));
  Fixture cs = fixture_by_name("casestudy");
  REQUIRE(cs.sys.dist_box == HyperRect::cube(2, -0.75, 0.75));
}

TEST_CASE("diagonal identity holds on every fixture", "[fixtures]") {
  std::mt19937_64 gen(23);
  for (const auto& name : fixture_names()) {
    Fixture f = fixture_by_name(name);
    HyperRect xbox = HyperRect::cube(f.sys.n, -3.0, 3.0);
    for (int s = 0; s < 300; ++s) {
      ExtVec x = detail::uniform_in_rect(gen, xbox);
      ExtVec w = detail::uniform_in_rect(gen, f.sys.dist_box);
      ExtVec lhs = f.d.eval(x, w, x, w);
      ExtVec rhs = f.sys.field(x, w);
      for (std::size_t i = 0; i < f.sys.n; ++i) REQUIRE(lhs[i] == Approx(rhs[i]).margin(1e-12));
    }
  }
}

TEST_CASE("hand-coded decompositions equal their constructed counterparts", "[fixtures]") {
  Fixture f1 = fixture_by_name("example1");
  expect_same(f1.sys, f1.d, build_polynomial_decomposition(f1.sys));

  Fixture f2 = fixture_by_name("example2");
  expect_same(f2.sys, f2.d, build_polynomial_decomposition(f2.sys));

  Fixture f3 = fixture_by_name("example3");
  expect_same(f3.sys, *f3.backward, build_polynomial_decomposition(f3.sys.reversed()));

  Fixture cs = fixture_by_name("casestudy");
  expect_same(cs.sys, cs.d, build_polynomial_decomposition(cs.sys));
  expect_same(cs.sys, *cs.backward, build_polynomial_decomposition(cs.sys.reversed()));
}

TEST_CASE("example3 forward decomposition closed form", "[fixtures]") {
  Fixture f = fixture_by_name("example3");
  std::mt19937_64 gen(29);
  HyperRect xbox = HyperRect::cube(2, -3.0, 3.0);
  for (int s = 0; s < 300; ++s) {
    ExtVec x = detail::uniform_in_rect(gen, xbox);
    ExtVec xh = detail::uniform_in_rect(gen, xbox);
    ExtVec w = detail::uniform_in_rect(gen, f.sys.dist_box);
    ExtVec wh = detail::uniform_in_rect(gen, f.sys.dist_box);
    ExtVec v = f.d.eval(x, w, xh, wh);
    double d1 = x[0] >= 0.0 ? x[0] * x[1] + w[0] : x[0] * xh[1] + w[0];
    REQUIRE(v[0] == Approx(d1).margin(1e-12));
    REQUIRE(v[1] == Approx(x[0] + 1.0).margin(1e-12));
  }
}

TEST_CASE("example1 backward is the dual of the forward table", "[fixtures]") {
  Fixture f = fixture_by_name("example1");
  REQUIRE(f.backward.has_value());
  REQUIRE(f.backward->provenance == Provenance::backward_derived);
  std::mt19937_64 gen(31);
  HyperRect xbox = HyperRect::cube(2, -3.0, 3.0);
  ExtVec none{};
  for (int s = 0; s < 300; ++s) {
    ExtVec x = detail::uniform_in_rect(gen, xbox);
    ExtVec xh = detail::uniform_in_rect(gen, xbox);
    ExtVec lhs = f.backward->eval(x, none, xh, none);
    ExtVec rhs = f.d.eval(xh, none, x, none);
    for (std::size_t i = 0; i < 2; ++i) REQUIRE(lhs[i] == Approx(-rhs[i]).margin(1e-12));
  }
}

TEST_CASE("every fixture decomposition validates by sampling", "[fixtures][validator]") {
  SamplingPlan plan;
  plan.samples = 1500;
  plan.test_box = HyperRect::cube(2, -3.0, 3.0);
  for (const auto& name : fixture_names()) {
    Fixture f = fixture_by_name(name);
    INFO(name);
    REQUIRE(validate_decomposition(f.sys, f.d, plan).passed);
    if (f.backward) REQUIRE(validate_decomposition(f.sys.reversed(), *f.backward, plan).passed);
  }

  Example1Jacobian v = example1_jacobian_variant();
  SamplingPlan vplan;
  vplan.samples = 1500;
  REQUIRE(validate_decomposition(v.sys, v.d, vplan).passed);
}

TEST_CASE("south set starting points are genuine members", "[fixtures][south]") {
  Fixture f2 = fixture_by_name("example2");
  REQUIRE(in_south_set(make_embedding(f2.sys, f2.d), *f2.south_start).valid);
  REQUIRE_FALSE(f2.backward_south_start.has_value());

  Fixture cs = fixture_by_name("casestudy");
  REQUIRE(in_south_set(make_embedding(cs.sys, cs.d), *cs.south_start).valid);
  REQUIRE(in_south_set(make_embedding(cs.sys.reversed(), *cs.backward),
                       *cs.backward_south_start).valid);

  // the drift fixtures have no ordered equilibrium and no default start
  REQUIRE_FALSE(fixture_by_name("example1").south_start.has_value());
  REQUIRE_FALSE(fixture_by_name("example3").south_start.has_value());
}

TEST_CASE("piece counts of the constructed tables", "[fixtures][polynomial]") {
  Fixture f1 = fixture_by_name("example1");
  PolyDecomposition p1 = analyze_polynomial_decomposition(f1.sys);
  REQUIRE(p1.piece_count() == 5);  // 3-way square split + constant + bare row

  Fixture cs = fixture_by_name("casestudy");
  PolyDecomposition pc = analyze_polynomial_decomposition(cs.sys);
  REQUIRE(pc.piece_count() == 18);  // two rows: 4 plain terms + a 5-case cubic each
  REQUIRE(pc.to_fn().describe.find("18 pieces") != std::string::npos);
}
