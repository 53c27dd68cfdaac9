#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmreach/decomp.hpp"
#include "mmreach/system.hpp"

namespace mmreach {

// Built-in systems used by the test suite and the command line front end.
struct Fixture {
  std::string name;
  std::string title;
  SystemDef sys;
  DecompositionFn d;                        // forward decomposition
  std::optional<DecompositionFn> backward;  // decomposition for the backward dynamics -F
  // Known members of the south set, used as default starts for the
  // equilibrium search; absent when no ordered equilibrium exists.
  std::optional<EmbeddingPoint> south_start;
  std::optional<EmbeddingPoint> backward_south_start;
};

namespace detail {

// Mixed cubic selector used by the case study decompositions.
inline double l_func(double a, double b, double c) {
  if ((a >= 0.0 && b <= 0.0 && b <= -c) || (b >= 0.0 && a < 0.0 && b >= -c)) return a * b * b;
  if ((a >= 0.0 && c >= 0.0 && b > -c) || (a < 0.0 && c <= 0.0 && b < -c)) return a * c * c;
  return a * b * c;
}

inline std::vector<unsigned> exps(std::initializer_list<unsigned> e) { return e; }

}  // namespace detail

// xdot = (x_2^2 + 2, x_1) on R^2, no disturbance.  The forward decomposition
// splits the square term into three pieces.
inline Fixture fixture_example1() {
  std::vector<PolyExpr> rows = {
      PolyExpr::make(2, {{1.0, detail::exps({0, 2})}, {2.0, detail::exps({0, 0})}}),
      PolyExpr::make(2, {{1.0, detail::exps({1, 0})}}),
  };
  SystemDef sys = SystemDef::from_poly(rows, 0, HyperRect::whole_space(2),
                                       HyperRect::of(ExtVec::unchecked({}), ExtVec::unchecked({})),
                                       "example1");

  DecompositionFn d;
  d.n = 2;
  d.m = 0;
  d.provenance = Provenance::user;
  d.describe = "three-piece square decomposition";
  d.eval = [](const ExtVec& x, const ExtVec&, const ExtVec& xh, const ExtVec&) {
    double d1;
    if (x[1] >= 0.0 && x[1] >= -xh[1])
      d1 = x[1] * x[1] + 2.0;
    else if (xh[1] <= 0.0 && x[1] < -xh[1])
      d1 = xh[1] * xh[1] + 2.0;
    else
      d1 = x[1] * xh[1] + 2.0;
    return ExtVec::unchecked({d1, x[0]});
  };

  Fixture f;
  f.name = "example1";
  f.title = "planar drift with unbounded square nonlinearity";
  f.sys = sys;
  f.d = d;
  f.backward = build_backward_decomposition(sys, d);
  return f;
}

// Jacobian-bound variant of example1 on the clipped domain [-5,5]^2, where
// dF_1/dx_2 = 2 x_2 is bounded in [-10, 10].
struct Example1Jacobian {
  SystemDef sys;
  JacobianBounds bounds;
  SelectionFlags flags;
  DecompositionFn d;
};

inline Example1Jacobian example1_jacobian_variant() {
  Fixture base = fixture_example1();
  Example1Jacobian v;
  v.sys = base.sys;
  v.sys.domain = HyperRect::cube(2, -5.0, 5.0);
  v.sys.name = "example1-clipped";
  v.bounds = JacobianBounds::make(2, 0,
                                  {0.0, -10.0,  //
                                   1.0, 0.0},
                                  {0.0, 10.0,  //
                                   1.0, 0.0});
  v.flags.delta = {0, 1, 1, 0};
  v.flags.epsilon = {};
  v.d = build_jacobian_decomposition(v.sys, v.bounds, v.flags);
  return v;
}

// xdot = (-x_1 - x_1^3 - x_2 - w, -x_2 - x_2^3 + x_1 + w^3) on R^2,
// w in [-2, 2].  Smooth decomposition; the embedding has a unique
// equilibrium near (-1.37, -1.95, 1.37, 1.95).
inline Fixture fixture_example2() {
  std::vector<PolyExpr> rows = {
      PolyExpr::make(3, {{-1.0, detail::exps({1, 0, 0})},
                         {-1.0, detail::exps({3, 0, 0})},
                         {-1.0, detail::exps({0, 1, 0})},
                         {-1.0, detail::exps({0, 0, 1})}}),
      PolyExpr::make(3, {{-1.0, detail::exps({0, 1, 0})},
                         {-1.0, detail::exps({0, 3, 0})},
                         {1.0, detail::exps({1, 0, 0})},
                         {1.0, detail::exps({0, 0, 3})}}),
  };
  SystemDef sys = SystemDef::from_poly(rows, 1, HyperRect::whole_space(2),
                                       HyperRect::cube(1, -2.0, 2.0), "example2");

  DecompositionFn d;
  d.n = 2;
  d.m = 1;
  d.provenance = Provenance::user;
  d.describe = "smooth decomposition with hatted cross terms";
  d.eval = [](const ExtVec& x, const ExtVec& w, const ExtVec& xh, const ExtVec& wh) {
    double d1 = -x[0] - x[0] * x[0] * x[0] - xh[1] - wh[0];
    double d2 = -x[1] - x[1] * x[1] * x[1] + x[0] + w[0] * w[0] * w[0];
    return ExtVec::unchecked({d1, d2});
  };

  Fixture f;
  f.name = "example2";
  f.title = "damped cubic pair with odd disturbance coupling";
  f.sys = sys;
  f.d = d;
  // The derived backward form is unavailable here (dd_1/dx_1 < 0), but the
  // piecewise constructor handles the negated field directly.
  f.backward = build_polynomial_decomposition(sys.reversed());
  f.south_start = EmbeddingPoint({-3.0, -3.0}, {3.0, 3.0});
  return f;
}

// xdot = (x_1 x_2 + w, x_1 + 1) on R^2, w in [0, 1/4].  The bilinear term
// splits on the sign of x_1; the backward decomposition mirrors that split.
inline Fixture fixture_example3() {
  std::vector<PolyExpr> rows = {
      PolyExpr::make(3, {{1.0, detail::exps({1, 1, 0})}, {1.0, detail::exps({0, 0, 1})}}),
      PolyExpr::make(3, {{1.0, detail::exps({1, 0, 0})}, {1.0, detail::exps({0, 0, 0})}}),
  };
  SystemDef sys = SystemDef::from_poly(rows, 1, HyperRect::whole_space(2),
                                       HyperRect::of({0.0}, {0.25}), "example3");

  DecompositionFn D;
  D.n = 2;
  D.m = 1;
  D.provenance = Provenance::user;
  D.describe = "backward bilinear split decomposition";
  D.eval = [](const ExtVec& x, const ExtVec&, const ExtVec& xh, const ExtVec& wh) {
    double d1 = x[0] >= 0.0 ? -x[0] * xh[1] - wh[0] : -x[0] * x[1] - wh[0];
    double d2 = -xh[0] - 1.0;
    return ExtVec::unchecked({d1, d2});
  };

  Fixture f;
  f.name = "example3";
  f.title = "bilinear drift with one-sided disturbance";
  f.sys = sys;
  f.d = build_polynomial_decomposition(sys);
  f.backward = D;
  return f;
}

// xdot = (-x_2 + x_1 (4 - 4 x_1^2 - x_2^2) + w_1,
//         x_1 + x_2 (4 - x_1^2 - 4 x_2^2) + w_2) on R^2, w in [-3/4, 3/4]^2.
// Both decompositions use the mixed cubic selector l.
inline Fixture fixture_casestudy() {
  std::vector<PolyExpr> rows = {
      PolyExpr::make(4, {{-1.0, detail::exps({0, 1, 0, 0})},
                         {4.0, detail::exps({1, 0, 0, 0})},
                         {-4.0, detail::exps({3, 0, 0, 0})},
                         {-1.0, detail::exps({1, 2, 0, 0})},
                         {1.0, detail::exps({0, 0, 1, 0})}}),
      PolyExpr::make(4, {{1.0, detail::exps({1, 0, 0, 0})},
                         {4.0, detail::exps({0, 1, 0, 0})},
                         {-4.0, detail::exps({0, 3, 0, 0})},
                         {-1.0, detail::exps({2, 1, 0, 0})},
                         {1.0, detail::exps({0, 0, 0, 1})}}),
  };
  SystemDef sys = SystemDef::from_poly(rows, 2, HyperRect::whole_space(2),
                                       HyperRect::cube(2, -0.75, 0.75), "casestudy");

  DecompositionFn d;
  d.n = 2;
  d.m = 2;
  d.provenance = Provenance::user;
  d.describe = "mixed cubic decomposition";
  d.eval = [](const ExtVec& x, const ExtVec& w, const ExtVec& xh, const ExtVec&) {
    double d1 = -xh[1] + 4.0 * x[0] - 4.0 * x[0] * x[0] * x[0] -
                detail::l_func(x[0], x[1], xh[1]) + w[0];
    double d2 = x[0] + 4.0 * x[1] - 4.0 * x[1] * x[1] * x[1] -
                detail::l_func(x[1], x[0], xh[0]) + w[1];
    return ExtVec::unchecked({d1, d2});
  };

  DecompositionFn D;
  D.n = 2;
  D.m = 2;
  D.provenance = Provenance::user;
  D.describe = "backward mixed cubic decomposition";
  D.eval = [](const ExtVec& x, const ExtVec&, const ExtVec& xh, const ExtVec& wh) {
    double d1 = x[1] - 4.0 * x[0] + 4.0 * x[0] * x[0] * x[0] -
                detail::l_func(-x[0], x[1], xh[1]) - wh[0];
    double d2 = -xh[0] - 4.0 * x[1] + 4.0 * x[1] * x[1] * x[1] -
                detail::l_func(-x[1], x[0], xh[0]) - wh[1];
    return ExtVec::unchecked({d1, d2});
  };

  Fixture f;
  f.name = "casestudy";
  f.title = "ring oscillator with inner repeller";
  f.sys = sys;
  f.d = d;
  f.backward = D;
  f.south_start = EmbeddingPoint({-2.0, -2.0}, {2.0, 2.0});
  f.backward_south_start = EmbeddingPoint({-0.55, -0.55}, {0.55, 0.55});
  return f;
}

inline std::vector<std::string> fixture_names() {
  return {"example1", "example2", "example3", "casestudy"};
}

inline Fixture fixture_by_name(const std::string& name) {
  if (name == "example1") return fixture_example1();
  if (name == "example2") return fixture_example2();
  if (name == "example3") return fixture_example3();
  if (name == "casestudy") return fixture_casestudy();
  throw ConfigError("unknown fixture '" + name + "'");
}

}  // namespace mmreach
