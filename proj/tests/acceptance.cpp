// Acceptance gate for the library: eleven end-to-end checks, one line of
// output each, exit code = number of failures.  Tolerances are pinned here.

#include "mmreach/mmreach.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

using namespace mmreach;

namespace {

constexpr double kEqTol = 0.01;          // equilibrium coordinates vs published values
constexpr double kContainSlack = 1e-6;   // sample containment slack
constexpr double kVolumeRatioMax = 0.9;  // piecewise vs jacobian tightness
constexpr double kSeSlack = 1e-9;        // order preservation slack
constexpr double kCorollaryTol = 1e-6;   // monotone corollary equilibrium
constexpr double kAttractBall = 0.05;    // convergence ball radius
constexpr std::uint64_t kSeed = 2026;

struct Gate {
  int failures = 0;

  void run(int id, double budget_s, const char* label, const std::function<void()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    std::string error;
    try {
      body();
    } catch (const std::exception& e) {
      error = e.what();
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (error.empty() && dt > budget_s)
      error = "over time budget (" + std::to_string(budget_s) + " s)";
    if (!error.empty()) ++failures;
    std::printf("criterion %2d: %s  %7.2fs  %s%s%s\n", id, error.empty() ? "PASS" : "FAIL", dt,
                label, error.empty() ? "" : " -- ", error.c_str());
    std::fflush(stdout);
  }
};

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

void require_close(double got, double want, double tol, const std::string& what) {
  if (!(std::abs(got - want) <= tol))
    throw std::runtime_error(what + ": got " + std::to_string(got) + ", want " +
                             std::to_string(want) + " +- " + std::to_string(tol));
}

void check_point(const EmbeddingPoint& p, const std::vector<double>& want, double tol,
                 const std::string& what) {
  std::vector<double> flat = p.flat();
  require(flat.size() == want.size(), what + ": dimension mismatch");
  for (std::size_t i = 0; i < want.size(); ++i)
    require_close(flat[i], want[i], tol, what + "[" + std::to_string(i) + "]");
}

bool has_condition(const ValidationReport& rep, const std::string& cond) {
  for (const auto& v : rep.violations)
    if (v.condition == cond) return true;
  return false;
}

// --- criterion 1: example2 equilibrium by both methods ----------------------

void criterion1() {
  Fixture f = fixture_by_name("example2");
  EmbeddingSystem E = make_embedding(f.sys, f.d);
  std::vector<double> want{-1.37, -1.95, 1.37, 1.95};

  EquilibriumResult fl = find_equilibrium_flow(E, *f.south_start);
  require(fl.in_triangle, "flow equilibrium not ordered");
  check_point(fl.point, want, kEqTol, "flow equilibrium");

  EquilibriumResult nw = solve_equilibrium_newton(E, *f.south_start);
  require(nw.in_triangle, "newton equilibrium not ordered");
  check_point(nw.point, want, kEqTol, "newton equilibrium");
}

// --- criterion 2: case study forward and backward equilibria ----------------

void criterion2() {
  Fixture f = fixture_by_name("casestudy");

  EmbeddingSystem E = make_embedding(f.sys, f.d);
  EquilibriumResult fwd = find_equilibrium_flow(E, *f.south_start);
  require(fwd.in_triangle, "forward equilibrium not ordered");
  check_point(fwd.point, {-1.36, -1.36, 1.36, 1.36}, kEqTol, "forward equilibrium");

  EmbeddingSystem Eb = make_embedding(f.sys.reversed(), *f.backward);
  EquilibriumResult bwd = solve_equilibrium_newton(Eb, *f.backward_south_start);
  require(bwd.in_triangle, "backward equilibrium not ordered");
  check_point(bwd.point, {-0.59, -0.59, 0.59, 0.59}, kEqTol, "backward equilibrium");
}

// --- criterion 3: forward reach set contains sampled endpoints --------------

void criterion3() {
  Fixture f = fixture_by_name("example1");
  HyperRect X0 = HyperRect::cube(2, -0.5, 0.5);
  ReachResult r = forward_reach(f.sys, f.d, X0, 1.0);
  require(r.hypothesis_ok && r.rect.has_value(), "reach hypothesis failed");

  MonteCarloResult mc = monte_carlo_reach(f.sys, X0, 1.0, 10000, kSeed);
  require(mc.completed == 10000, "expected 10000 completed samples, got " +
                                     std::to_string(mc.completed));
  require(mc.hull.has_value(), "no sample hull");
  require(rect_subset(*mc.hull, *r.rect, kContainSlack),
          "a sampled endpoint escaped the reach rectangle");
}

// --- criterion 4: piecewise bound is strictly tighter than jacobian bound ---

void criterion4() {
  Fixture f = fixture_by_name("example1");
  HyperRect X0 = HyperRect::cube(2, -0.5, 0.5);
  ReachResult rp = forward_reach(f.sys, f.d, X0, 0.25);

  Example1Jacobian v = example1_jacobian_variant();
  ReachResult rj = forward_reach(v.sys, v.d, X0, 0.25);

  require(rp.hypothesis_ok && rj.hypothesis_ok, "reach hypothesis failed");
  require(rect_subset(*rp.rect, *rj.rect), "piecewise rectangle not inside jacobian rectangle");
  double ratio = rp.rect->volume() / rj.rect->volume();
  require(ratio < kVolumeRatioMax,
          "volume ratio " + std::to_string(ratio) + " not below " +
              std::to_string(kVolumeRatioMax));
}

// --- criterion 5: backward reach set contains backward sampled endpoints ----

void criterion5() {
  Fixture f = fixture_by_name("example3");
  HyperRect X1 = HyperRect::of({-0.25, -0.5}, {0.25, 0.0});
  ReachResult r = backward_reach(f.sys, *f.backward, X1, 1.0);
  require(r.hypothesis_ok && r.rect.has_value(), "backward reach hypothesis failed");

  MonteCarloResult mc = monte_carlo_reach(f.sys, X1, 1.0, 10000, kSeed, 8, {}, true);
  require(mc.completed == 10000, "expected 10000 completed samples, got " +
                                     std::to_string(mc.completed));
  require(rect_subset(*mc.hull, *r.rect, kContainSlack),
          "a backward endpoint escaped the backward reach rectangle");
}

// --- criterion 6: certified invariant rectangle traps trajectories ----------

void criterion6() {
  Fixture f = fixture_by_name("example2");
  HyperRect R = HyperRect::of({-1.37, -1.95}, {1.37, 1.95});
  std::mt19937_64 gen(kSeed);
  std::size_t violations = 0;
  for (std::size_t i = 0; i < 500; ++i) {
    ExtVec x0 = detail::uniform_in_rect(gen, R);
    DisturbanceSignal w =
        DisturbanceSignal::random(f.sys.dist_box, 10.0, 8, detail::derive_seed(kSeed, i));
    Trajectory tr = flow_system(f.sys, x0, w, 10.0);
    require(tr.exit == ExitFlag::completed, "trajectory did not complete");
    for (const ExtVec& s : tr.states)
      if (!R.contains(s, kContainSlack)) ++violations;
  }
  require(violations == 0, std::to_string(violations) + " samples left the rectangle");
}

// --- criterion 7: complement of the backward rectangle is never entered -----

void criterion7() {
  Fixture f = fixture_by_name("casestudy");
  HyperRect shell_outer = HyperRect::cube(2, -1.2, 1.2);
  HyperRect hole = HyperRect::cube(2, -0.59, 0.59);
  HyperRect forbidden = HyperRect::cube(2, -0.59 + kContainSlack, 0.59 - kContainSlack);

  std::mt19937_64 gen(kSeed);
  std::size_t violations = 0;
  for (std::size_t i = 0; i < 500; ++i) {
    ExtVec x0 = detail::uniform_in_rect(gen, shell_outer);
    while (hole.contains(x0)) x0 = detail::uniform_in_rect(gen, shell_outer);
    DisturbanceSignal w =
        DisturbanceSignal::random(f.sys.dist_box, 10.0, 8, detail::derive_seed(kSeed, i));
    Trajectory tr = flow_system(f.sys, x0, w, 10.0);
    require(tr.exit == ExitFlag::completed, "trajectory did not complete");
    for (const ExtVec& s : tr.states)
      if (forbidden.contains(s)) ++violations;
  }
  require(violations == 0, std::to_string(violations) + " samples entered the rectangle");
}

// --- criterion 8: embedding attractivity with stable linearization ----------

void criterion8() {
  for (const char* name : {"example2", "casestudy"}) {
    Fixture f = fixture_by_name(name);
    EmbeddingSystem E = make_embedding(f.sys, f.d);
    EquilibriumResult eq = find_equilibrium_flow(E, *f.south_start);

    AttractivityParams p;
    p.samples = 100;
    p.horizon = 20.0;
    p.ball_radius = kAttractBall;
    p.region = HyperRect::cube(2, -5.0, 5.0);
    p.seed = kSeed;
    AttractivityReport rep = check_attractivity(E, eq.point, p);
    require(rep.fraction_embedding == 1.0,
            std::string(name) + ": converged fraction " +
                std::to_string(rep.fraction_embedding));
    require(rep.stability.stable && rep.stability.max_real_part < 0.0,
            std::string(name) + ": linearization not stable");
  }
}

// --- criterion 9: southeast order and triangle invariance along the flow ----

void criterion9() {
  struct Setup {
    const char* name;
    double box, T;
  };
  for (const Setup& s : {Setup{"example1", 1.0, 1.0}, Setup{"example2", 3.0, 3.0},
                         Setup{"example3", 1.0, 1.0}, Setup{"casestudy", 2.0, 3.0}}) {
    Fixture f = fixture_by_name(s.name);
    EmbeddingSystem E = make_embedding(f.sys, f.d);
    const std::size_t n = E.n(), half = 2 * n;
    // pairs attracted to a common equilibrium close their gap to ~1e-9 over
    // the horizon, so integrate well below the order slack
    IntegratorConfig cfg;
    cfg.rtol = 1e-11;
    cfg.atol = 1e-13;

    detail::OdeRhs rhs = [&E, half](double, const std::vector<double>& y,
                                    std::vector<double>& dy) {
      std::vector<double> a(y.begin(), y.begin() + half);
      std::vector<double> b(y.begin() + half, y.end());
      std::vector<double> da = E.eval_flat(a), db = E.eval_flat(b);
      dy.resize(2 * half);
      std::copy(da.begin(), da.end(), dy.begin());
      std::copy(db.begin(), db.end(), dy.begin() + half);
    };
    detail::InsideFn inside = [](const std::vector<double>&) { return true; };

    std::mt19937_64 gen(kSeed);
    std::uniform_real_distribution<double> u(-s.box, s.box);
    for (int pair = 0; pair < 200; ++pair) {
      // four draws per coordinate, sorted: a = (q1, q4) encloses b = (q2, q3)
      std::vector<double> y0(2 * half);
      for (std::size_t i = 0; i < n; ++i) {
        double q[4] = {u(gen), u(gen), u(gen), u(gen)};
        std::sort(q, q + 4);
        y0[i] = q[0];
        y0[n + i] = q[3];
        y0[half + i] = q[1];
        y0[half + n + i] = q[2];
      }
      detail::RawTrajectory raw =
          detail::integrate_segment(rhs, y0, 0.0, s.T, cfg, inside, cfg.max_steps);
      require(raw.exit == ExitFlag::completed, std::string(s.name) + ": pair flow truncated");

      EmbeddingTrajectory a, b;
      a.times = b.times = raw.times;
      for (const auto& st : raw.states) {
        a.points.push_back(EmbeddingPoint::from_flat({st.begin(), st.begin() + half}));
        b.points.push_back(EmbeddingPoint::from_flat({st.begin() + half, st.end()}));
      }
      OrderCheck se = check_se_order(a, b, kSeSlack);
      require(se.ok, std::string(s.name) + ": order broken, slack " + std::to_string(se.worst) +
                         " at t=" + std::to_string(se.at_time));
      require(check_triangle(a, kSeSlack).ok && check_triangle(b, kSeSlack).ok,
              std::string(s.name) + ": triangle invariance broken");
    }
  }
}

// --- criterion 10: the validator accepts the good tables, rejects mutants ---

void criterion10() {
  Fixture f1 = fixture_by_name("example1");
  Fixture f2 = fixture_by_name("example2");
  Fixture f3 = fixture_by_name("example3");
  Fixture cs = fixture_by_name("casestudy");
  Example1Jacobian v = example1_jacobian_variant();

  struct Item {
    const char* label;
    SystemDef sys;
    DecompositionFn d;
  };
  std::vector<Item> good{
      {"example1 d", f1.sys, f1.d},
      {"example3 D", f3.sys.reversed(), *f3.backward},
      {"casestudy d", cs.sys, cs.d},
      {"casestudy D", cs.sys.reversed(), *cs.backward},
      {"example1 polynomial", f1.sys, build_polynomial_decomposition(f1.sys)},
      {"example2 polynomial", f2.sys, build_polynomial_decomposition(f2.sys)},
      {"example3 polynomial", f3.sys, build_polynomial_decomposition(f3.sys)},
      {"casestudy polynomial", cs.sys, build_polynomial_decomposition(cs.sys)},
      {"example2 backward", f2.sys.reversed(), *f2.backward},
      {"example3 backward polynomial", f3.sys.reversed(),
       build_polynomial_decomposition(f3.sys.reversed())},
      {"casestudy backward polynomial", cs.sys.reversed(),
       build_polynomial_decomposition(cs.sys.reversed())},
      {"example1 jacobian", v.sys, v.d},
      {"example1 backward derived", f1.sys.reversed(), *f1.backward},
  };
  SamplingPlan plan;
  plan.samples = 10000;
  for (const Item& it : good) {
    ValidationReport rep = validate_decomposition(it.sys, it.d, plan);
    require(rep.passed, std::string(it.label) + ": " + std::to_string(rep.violation_count) +
                            " violations");
  }

  // mutant 1: example1 row 1 with the state / hatted-state roles swapped
  DecompositionFn ma = make_user_decomposition(
      2, 0,
      [d = f1.d](const ExtVec& x, const ExtVec& w, const ExtVec& xh, const ExtVec& wh) {
        ExtVec swapped = d.eval(xh, wh, x, w);
        ExtVec straight = d.eval(x, w, xh, wh);
        return ExtVec::unchecked({swapped[0], straight[1]});
      });
  // mutant 2: example2 row 1 reads the plain state where the hat belongs
  DecompositionFn mb = make_user_decomposition(
      2, 1, [](const ExtVec& x, const ExtVec& w, const ExtVec& xh, const ExtVec& wh) {
        (void)xh;
        double w3 = w[0] * w[0] * w[0];
        return ExtVec::unchecked({-x[0] - x[0] * x[0] * x[0] - x[1] - wh[0],
                                  -x[1] - x[1] * x[1] * x[1] + x[0] + w3});
      });
  // mutant 3: example2 row 1 reads the plain disturbance where the hat belongs
  DecompositionFn mc = make_user_decomposition(
      2, 1, [](const ExtVec& x, const ExtVec& w, const ExtVec& xh, const ExtVec& wh) {
        (void)wh;
        double w3 = w[0] * w[0] * w[0];
        return ExtVec::unchecked({-x[0] - x[0] * x[0] * x[0] - xh[1] - w[0],
                                  -x[1] - x[1] * x[1] * x[1] + x[0] + w3});
      });

  SamplingPlan mplan;
  mplan.samples = 2000;
  ValidationReport ra = validate_decomposition(f1.sys, ma, mplan);
  require(!ra.passed && has_condition(ra, "d/dxhat"), "swapped-roles mutant not rejected");
  ValidationReport rb = validate_decomposition(f2.sys, mb, mplan);
  require(!rb.passed && has_condition(rb, "d/dx"), "plain-state mutant not rejected");
  ValidationReport rc = validate_decomposition(f2.sys, mc, mplan);
  require(!rc.passed && has_condition(rc, "d/dw"), "plain-disturbance mutant not rejected");
}

// --- criterion 11: monotone corollary on the scalar relaxation --------------

void criterion11() {
  PolyExpr row = PolyExpr::make(2, {Monomial{-1.0, {1, 0}}, Monomial{1.0, {0, 1}}});
  SystemDef sys = SystemDef::from_poly({row}, 1, HyperRect::whole_space(1),
                                       HyperRect::cube(1, -1.0, 1.0), "relax");
  DecompositionFn d = build_monotone_decomposition(sys);
  MonotoneCorollaryResult res = check_monotone_corollary(sys, d);
  require_close(res.x_eq[0], -1.0, kCorollaryTol, "lower equilibrium");
  require_close(res.xhat_eq[0], 1.0, kCorollaryTol, "upper equilibrium");
  require(res.cert.kind == "attractive-rect", "unexpected certificate kind");
}

}  // namespace

int main() {
  Gate gate;
  gate.run(1, 5.0, "example2 embedding equilibrium, flow and newton", criterion1);
  gate.run(2, 10.0, "case study forward and backward equilibria", criterion2);
  gate.run(3, 60.0, "example1 forward reach contains 10k sampled endpoints", criterion3);
  gate.run(4, 10.0, "piecewise reach strictly tighter than jacobian reach", criterion4);
  gate.run(5, 60.0, "example3 backward reach contains 10k sampled endpoints", criterion5);
  gate.run(6, 120.0, "example2 invariant rectangle traps 500 trajectories", criterion6);
  gate.run(7, 120.0, "case study trajectories avoid the certified hole", criterion7);
  gate.run(8, 120.0, "embedding attractivity with stable linearization", criterion8);
  gate.run(9, 120.0, "southeast order and triangle invariance preserved", criterion9);
  gate.run(10, 60.0, "validator accepts shipped tables, rejects sign-flip mutants",
           criterion10);
  gate.run(11, 10.0, "monotone corollary recovers the disturbance extremes", criterion11);

  std::printf("acceptance: %d of 11 criteria passed\n", 11 - gate.failures);
  return gate.failures;
}
