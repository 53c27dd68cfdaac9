#include <catch2/catch_amalgamated.hpp>

#include "mmreach/fixtures.hpp"
#include "mmreach/reach.hpp"

using namespace mmreach;
using Catch::Approx;

TEST_CASE("snap_rect absorbs integrator noise only", "[reach]") {
  EmbeddingPoint tidy(ExtVec{0.0, 0.0}, ExtVec{1.0, 1.0});
  REQUIRE(detail::snap_rect(tidy) == HyperRect::cube(2, 0.0, 1.0));

  EmbeddingPoint noisy(ExtVec{1.0 + 1e-12, 0.0}, ExtVec{1.0, 1.0});
  HyperRect snapped = detail::snap_rect(noisy);
  REQUIRE(snapped.lo[0] == snapped.hi[0]);
  REQUIRE(snapped.lo[0] == Approx(1.0).margin(1e-11));

  EmbeddingPoint broken(ExtVec{1.5, 0.0}, ExtVec{1.0, 1.0});
  REQUIRE_THROWS_AS(detail::snap_rect(broken), NotARectangle);
}

TEST_CASE("forward reach on the drift fixture matches the reference flow", "[reach]") {
  Fixture f = fixture_by_name("example1");
  HyperRect X0 = HyperRect::cube(2, -0.5, 0.5);
  ReachResult r = forward_reach(f.sys, f.d, X0, 1.0);

  REQUIRE(r.direction == "forward");
  REQUIRE(r.hypothesis_ok);
  REQUIRE(r.rect.has_value());
  // endpoint values cross-checked against an independent tight-tolerance integration
  REQUIRE(r.rect->lo[0] == Approx(0.97668981).margin(1e-6));
  REQUIRE(r.rect->lo[1] == Approx(-0.22445513).margin(1e-6));
  REQUIRE(r.rect->hi[0] == Approx(4.22116599).margin(1e-6));
  REQUIRE(r.rect->hi[1] == Approx(2.45296465).margin(1e-6));

  REQUIRE(r.tube.size() == r.trajectory.size());
  REQUIRE(r.tube.front().first == 0.0);
  REQUIRE(r.tube.front().second == X0);
  REQUIRE(r.tube.back().first == Approx(1.0));
  for (std::size_t k = 1; k < r.tube.size(); ++k)
    REQUIRE(r.tube[k].first > r.tube[k - 1].first);

  ReachResult still = forward_reach(f.sys, f.d, X0, 0.0);
  REQUIRE(still.rect == X0);
  REQUIRE(still.tube.size() == 1);
}

TEST_CASE("forward reach preconditions", "[reach]") {
  Fixture f = fixture_by_name("example1");
  REQUIRE_THROWS_AS(forward_reach(f.sys, f.d, HyperRect::whole_space(2), 1.0),
                    PreconditionFailed);
  REQUIRE_THROWS_AS(forward_reach(f.sys, f.d, HyperRect::cube(1, 0.0, 1.0), 1.0),
                    DimensionError);
  REQUIRE_THROWS_AS(forward_reach(f.sys, f.d, HyperRect::cube(2, 0.0, 1.0), -1.0), ValueError);

  Example1Jacobian v = example1_jacobian_variant();
  REQUIRE_THROWS_AS(forward_reach(v.sys, v.d, HyperRect::cube(2, -6.0, 6.0), 1.0),
                    PreconditionFailed);  // X0 pokes out of the clipped domain
}

TEST_CASE("leaving the domain drops the claim but keeps the tube", "[reach]") {
  Example1Jacobian v = example1_jacobian_variant();
  ReachResult r = forward_reach(v.sys, v.d, HyperRect::cube(2, -0.5, 0.5), 1.0);
  REQUIRE_FALSE(r.hypothesis_ok);
  REQUIRE_FALSE(r.rect.has_value());
  REQUIRE(r.tube.size() >= 2);
  REQUIRE(r.tube.back().first < 1.0);
  // every tube rectangle recorded is inside the clipped domain
  for (const auto& [t, rect] : r.tube) REQUIRE(rect_subset(rect, v.sys.domain, 1e-12));
}

TEST_CASE("backward reach on example3 matches the reference flow", "[reach]") {
  Fixture f = fixture_by_name("example3");
  REQUIRE(f.backward.has_value());
  HyperRect X1 = HyperRect::of(ExtVec{-0.25, -0.5}, ExtVec{0.25, 0.0});
  ReachResult r = backward_reach(f.sys, *f.backward, X1, 1.0);
  REQUIRE(r.direction == "backward");
  REQUIRE(r.hypothesis_ok);
  REQUIRE(r.rect->lo[0] == Approx(-1.33805333).margin(1e-6));
  REQUIRE(r.rect->lo[1] == Approx(-1.92368777).margin(1e-6));
  REQUIRE(r.rect->hi[0] == Approx(0.80540410).margin(1e-6));
  REQUIRE(r.rect->hi[1] == Approx(-0.38424173).margin(1e-6));
}

TEST_CASE("monte carlo endpoints stay inside the certified tube end", "[reach][montecarlo]") {
  Fixture f = fixture_by_name("example2");
  HyperRect X0 = HyperRect::cube(2, -1.0, 1.0);
  ReachResult r = forward_reach(f.sys, f.d, X0, 2.0);
  MonteCarloResult mc = monte_carlo_reach(f.sys, X0, 2.0, 500, 21);

  REQUIRE(mc.requested == 500);
  REQUIRE(mc.completed == 500);
  REQUIRE(mc.excluded_domain == 0);
  REQUIRE(mc.failed == 0);
  REQUIRE(mc.endpoints.size() == 500);
  for (const auto& p : mc.endpoints) REQUIRE(r.rect->contains(p, 1e-6));
  REQUIRE(mc.hull.has_value());
  REQUIRE(rect_subset(*mc.hull, *r.rect, 1e-6));
}

TEST_CASE("monte carlo is deterministic in the seed", "[reach][montecarlo]") {
  Fixture f = fixture_by_name("example2");
  HyperRect X0 = HyperRect::cube(2, -1.0, 1.0);
  MonteCarloResult a = monte_carlo_reach(f.sys, X0, 1.0, 64, 9);
  MonteCarloResult b = monte_carlo_reach(f.sys, X0, 1.0, 64, 9);
  MonteCarloResult c = monte_carlo_reach(f.sys, X0, 1.0, 64, 10);
  REQUIRE(a.endpoints.size() == b.endpoints.size());
  for (std::size_t i = 0; i < a.endpoints.size(); ++i) REQUIRE(a.endpoints[i] == b.endpoints[i]);
  bool differs = false;
  for (std::size_t i = 0; i < c.endpoints.size(); ++i)
    differs = differs || !(a.endpoints[i] == c.endpoints[i]);
  REQUIRE(differs);
}

TEST_CASE("monte carlo counts domain exits instead of failing", "[reach][montecarlo]") {
  Example1Jacobian v = example1_jacobian_variant();
  // x1 grows past the clipped face within T = 2 for every start
  MonteCarloResult mc = monte_carlo_reach(v.sys, HyperRect::cube(2, 4.0, 4.5), 2.0, 32, 5);
  REQUIRE(mc.excluded_domain == 32);
  REQUIRE(mc.completed == 0);
  REQUIRE_FALSE(mc.hull.has_value());

  REQUIRE_THROWS_AS(monte_carlo_reach(v.sys, HyperRect::cube(2, -7.0, 7.0), 1.0, 8, 5),
                    PreconditionFailed);
}

TEST_CASE("backward monte carlo runs the reversed dynamics", "[reach][montecarlo]") {
  Fixture f = fixture_by_name("example3");
  HyperRect X1 = HyperRect::of(ExtVec{-0.25, -0.5}, ExtVec{0.25, 0.0});
  ReachResult r = backward_reach(f.sys, *f.backward, X1, 1.0);
  MonteCarloResult mc = monte_carlo_reach(f.sys, X1, 1.0, 300, 77, 8, {}, true);
  REQUIRE(mc.completed == 300);
  for (const auto& p : mc.endpoints) REQUIRE(r.rect->contains(p, 1e-6));
}
