#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmreach/interval.hpp"
#include "mmreach/poly.hpp"
#include "mmreach/system.hpp"

namespace mmreach {

// ---------------------------------------------------------------------------
// Jacobian-bound construction
// ---------------------------------------------------------------------------

// Entrywise bounds on dF_i/dx_j and dF_i/dw_k over domain x dist_box.
// Lower entries may be -inf and upper entries +inf, but every off-diagonal
// state entry and every disturbance entry needs at least one finite side.
// Diagonal state entries are never used.
struct JacobianBounds {
  std::size_t n = 0, m = 0;
  std::vector<double> jx_lo, jx_hi;  // n*n, row-major
  std::vector<double> jw_lo, jw_hi;  // n*m, row-major

  static JacobianBounds make(std::size_t n, std::size_t m, std::vector<double> jx_lo,
                             std::vector<double> jx_hi, std::vector<double> jw_lo = {},
                             std::vector<double> jw_hi = {}) {
    JacobianBounds b;
    b.n = n;
    b.m = m;
    b.jx_lo = std::move(jx_lo);
    b.jx_hi = std::move(jx_hi);
    b.jw_lo = std::move(jw_lo);
    b.jw_hi = std::move(jw_hi);
    if (b.jx_lo.size() != n * n || b.jx_hi.size() != n * n)
      throw DimensionError("JacobianBounds: state blocks must be n*n");
    if (b.jw_lo.size() != n * m || b.jw_hi.size() != n * m)
      throw DimensionError("JacobianBounds: disturbance blocks must be n*m");
    for (std::size_t i = 0; i < n * n; ++i) {
      if (std::isnan(b.jx_lo[i]) || std::isnan(b.jx_hi[i]))
        throw ValueError("JacobianBounds: NaN entry");
      if (b.jx_lo[i] > b.jx_hi[i]) throw ValueError("JacobianBounds: lo > hi");
    }
    for (std::size_t i = 0; i < n * m; ++i) {
      if (std::isnan(b.jw_lo[i]) || std::isnan(b.jw_hi[i]))
        throw ValueError("JacobianBounds: NaN entry");
      if (b.jw_lo[i] > b.jw_hi[i]) throw ValueError("JacobianBounds: lo > hi");
    }
    return b;
  }

  double x_lo(std::size_t i, std::size_t j) const { return jx_lo[i * n + j]; }
  double x_hi(std::size_t i, std::size_t j) const { return jx_hi[i * n + j]; }
  double w_lo(std::size_t i, std::size_t k) const { return jw_lo[i * m + k]; }
  double w_hi(std::size_t i, std::size_t k) const { return jw_hi[i * m + k]; }
};

// Per-entry choice between the lower (0) and upper (1) Jacobian bound.
struct SelectionFlags {
  std::vector<std::uint8_t> delta;    // n*n, diagonal ignored
  std::vector<std::uint8_t> epsilon;  // n*m
};

// Picks, per entry, the side whose induced slope is smaller; the lower side
// wins ties.  Entries whose preferred side is infinite fall back to the
// other one.
inline SelectionFlags default_flags(const JacobianBounds& b) {
  SelectionFlags f;
  f.delta.assign(b.n * b.n, 0);
  f.epsilon.assign(b.n * b.m, 0);
  auto pick = [](double lo, double hi) -> std::uint8_t {
    // slope if choosing the lower side is max(-lo, 0); upper side max(hi, 0)
    double slope_lo = std::isfinite(lo) ? std::max(-lo, 0.0) : kInf;
    double slope_hi = std::isfinite(hi) ? std::max(hi, 0.0) : kInf;
    return slope_lo <= slope_hi ? 0 : 1;
  };
  for (std::size_t i = 0; i < b.n; ++i)
    for (std::size_t j = 0; j < b.n; ++j)
      if (i != j) f.delta[i * b.n + j] = pick(b.x_lo(i, j), b.x_hi(i, j));
  for (std::size_t i = 0; i < b.n; ++i)
    for (std::size_t k = 0; k < b.m; ++k)
      f.epsilon[i * b.m + k] = pick(b.w_lo(i, k), b.w_hi(i, k));
  return f;
}

// d_i(x, w, xhat, what) = F_i(xi, pi) + alpha.(x - xhat) + beta.(w - what)
// where xi_j is x_j or xhat_j and alpha_j the matching bound slope.  Bounds
// whose selected side lies on the wrong side of zero are relaxed to zero,
// which keeps them valid bounds and the added slopes nonnegative.
inline DecompositionFn build_jacobian_decomposition(
    const SystemDef& sys, const JacobianBounds& bounds,
    std::optional<SelectionFlags> flags = std::nullopt) {
  const std::size_t n = sys.n, m = sys.m;
  if (bounds.n != n || bounds.m != m)
    throw DimensionError("build_jacobian_decomposition: bounds dimension mismatch");
  SelectionFlags sel = flags ? *flags : default_flags(bounds);
  if (sel.delta.size() != n * n || sel.epsilon.size() != n * m)
    throw DimensionError("build_jacobian_decomposition: flags shape mismatch");

  // Per row: use_hat flags and slopes for states and disturbances.
  struct RowPlan {
    std::vector<std::uint8_t> hat_x, hat_w;
    std::vector<double> alpha, beta;
  };
  auto plans = std::make_shared<std::vector<RowPlan>>(n);
  for (std::size_t i = 0; i < n; ++i) {
    RowPlan& p = (*plans)[i];
    p.hat_x.assign(n, 0);
    p.hat_w.assign(m, 0);
    p.alpha.assign(n, 0.0);
    p.beta.assign(m, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;  // xi_i = x_i, alpha_i = 0
      bool upper = sel.delta[i * n + j] != 0;
      double bound = upper ? bounds.x_hi(i, j) : bounds.x_lo(i, j);
      if (!std::isfinite(bound))
        throw ConstructionError("build_jacobian_decomposition: selected state bound (" +
                                std::to_string(i) + "," + std::to_string(j) + ") is infinite");
      p.hat_x[j] = upper;
      p.alpha[j] = upper ? std::max(bound, 0.0) : std::max(-bound, 0.0);
    }
    for (std::size_t k = 0; k < m; ++k) {
      bool upper = sel.epsilon[i * m + k] != 0;
      double bound = upper ? bounds.w_hi(i, k) : bounds.w_lo(i, k);
      if (!std::isfinite(bound))
        throw ConstructionError("build_jacobian_decomposition: selected disturbance bound (" +
                                std::to_string(i) + "," + std::to_string(k) + ") is infinite");
      p.hat_w[k] = upper;
      p.beta[k] = upper ? std::max(bound, 0.0) : std::max(-bound, 0.0);
    }
  }

  FieldFn field = sys.field;
  DecompositionFn d;
  d.n = n;
  d.m = m;
  d.provenance = Provenance::jacobian_bound;
  d.describe = "jacobian-bound decomposition";
  d.eval = [plans, field, n, m](const ExtVec& x, const ExtVec& w, const ExtVec& xh,
                                const ExtVec& wh) {
    std::vector<double> out(n);
    std::vector<double> xi(n), pi(m);
    for (std::size_t i = 0; i < n; ++i) {
      const RowPlan& p = (*plans)[i];
      double corr = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        xi[j] = p.hat_x[j] ? xh[j] : x[j];
        corr += p.alpha[j] * (x[j] - xh[j]);
      }
      for (std::size_t k = 0; k < m; ++k) {
        pi[k] = p.hat_w[k] ? wh[k] : w[k];
        corr += p.beta[k] * (w[k] - wh[k]);
      }
      ExtVec f = field(ExtVec::unchecked(xi), ExtVec::unchecked(pi));
      out[i] = f[i] + corr;
    }
    return ExtVec::unchecked(std::move(out));
  };
  return d;
}

// ---------------------------------------------------------------------------
// Monotone construction
// ---------------------------------------------------------------------------

namespace detail {

// Samples the sign of one directional derivative family of the field; used
// by the cooperativity and backward-hypothesis prechecks.
struct DiagonalCheckPlan {
  std::size_t samples = 1000;
  std::uint64_t seed = 99;
  double tol_sign = 1e-6;
  double fd_step = 1e-5;
};

}  // namespace detail

// d(x, w, xhat, what) = F(x, w).  Valid when the system is cooperative in x
// and nondecreasing in w; both are spot-checked by sampling off-diagonal and
// disturbance Jacobian signs (a falsifier, not a proof).
inline DecompositionFn build_monotone_decomposition(const SystemDef& sys,
                                                    const detail::DiagonalCheckPlan& plan = {}) {
  const std::size_t n = sys.n, m = sys.m;
  std::mt19937_64 gen(plan.seed);
  HyperRect xbox = detail::sampling_box(sys.domain);
  for (std::size_t s = 0; s < plan.samples; ++s) {
    ExtVec x = detail::uniform_in_rect(gen, xbox);
    ExtVec w = detail::uniform_in_rect(gen, sys.dist_box);
    auto probe = [&](std::size_t jvar, bool state, std::size_t i) {
      std::vector<double> xs = x.e, ws = w.e;
      double& v = state ? xs[jvar] : ws[jvar];
      double v0 = v;
      double h = plan.fd_step * std::max(1.0, std::abs(v0));
      v = v0 + h;
      double fp = sys.field(ExtVec::unchecked(xs), ExtVec::unchecked(ws))[i];
      v = v0 - h;
      double fm = sys.field(ExtVec::unchecked(xs), ExtVec::unchecked(ws))[i];
      return (fp - fm) / (2.0 * h);
    };
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && probe(j, true, i) < -plan.tol_sign)
          throw ConstructionError(
              "build_monotone_decomposition: sampled dF_" + std::to_string(i + 1) + "/dx_" +
              std::to_string(j + 1) + " < 0; system is not cooperative");
      for (std::size_t k = 0; k < m; ++k)
        if (probe(k, false, i) < -plan.tol_sign)
          throw ConstructionError(
              "build_monotone_decomposition: sampled dF_" + std::to_string(i + 1) + "/dw_" +
              std::to_string(k + 1) + " < 0; field decreases in the disturbance");
    }
  }
  FieldFn field = sys.field;
  DecompositionFn d;
  d.n = n;
  d.m = m;
  d.provenance = Provenance::monotone;
  d.describe = "monotone decomposition d = F";
  d.eval = [field](const ExtVec& x, const ExtVec& w, const ExtVec&, const ExtVec&) {
    return field(x, w);
  };
  return d;
}

// ---------------------------------------------------------------------------
// Backward construction from a forward decomposition
// ---------------------------------------------------------------------------

// D(x, w, xhat, what) = -d(xhat, what, x, w) is a decomposition of the
// backward dynamics -F provided dd_i/dx_i >= 0 everywhere; that hypothesis
// is spot-checked by sampling.  Pair the result with sys.reversed().
inline DecompositionFn build_backward_decomposition(const SystemDef& sys,
                                                    const DecompositionFn& d,
                                                    const detail::DiagonalCheckPlan& plan = {}) {
  if (d.n != sys.n || d.m != sys.m)
    throw DimensionError("build_backward_decomposition: dimension mismatch");
  const std::size_t n = sys.n;
  std::mt19937_64 gen(plan.seed);
  HyperRect xbox = detail::sampling_box(sys.domain);
  for (std::size_t s = 0; s < plan.samples; ++s) {
    ExtVec x = detail::uniform_in_rect(gen, xbox);
    ExtVec xh = detail::uniform_in_rect(gen, xbox);
    ExtVec w = detail::uniform_in_rect(gen, sys.dist_box);
    ExtVec wh = detail::uniform_in_rect(gen, sys.dist_box);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> xs = x.e;
      double v0 = xs[i];
      double h = plan.fd_step * std::max(1.0, std::abs(v0));
      xs[i] = v0 + h;
      double fp = d.eval(ExtVec::unchecked(xs), w, xh, wh)[i];
      xs[i] = v0 - h;
      double fm = d.eval(ExtVec::unchecked(xs), w, xh, wh)[i];
      double base = d.eval(x, w, xh, wh)[i];
      double central = (fp - fm) / (2.0 * h);
      double fwd = (fp - base) / h, bwd = (base - fm) / h;
      bool smooth = std::abs(fwd - bwd) <= 1e-3 * std::max({1.0, std::abs(fwd), std::abs(bwd)});
      if (smooth && central < -plan.tol_sign)
        throw ConstructionError("build_backward_decomposition: sampled dd_" +
                                std::to_string(i + 1) + "/dx_" + std::to_string(i + 1) +
                                " < 0; hypothesis fails");
    }
  }
  DecompEvalFn fwd_eval = d.eval;
  DecompositionFn D;
  D.n = d.n;
  D.m = d.m;
  D.provenance = Provenance::backward_derived;
  D.describe = "backward decomposition D(x,w,xhat,what) = -d(xhat,what,x,w)";
  D.eval = [fwd_eval](const ExtVec& x, const ExtVec& w, const ExtVec& xh, const ExtVec& wh) {
    ExtVec v = fwd_eval(xh, wh, x, w);
    for (auto& c : v.e) c = -c;
    return v;
  };
  return D;
}

// ---------------------------------------------------------------------------
// Piecewise polynomial construction
// ---------------------------------------------------------------------------

// Guard atom: ca*v[va] + cb*v[vb] >= 0 (or > 0 when strict) over the doubled
// variable tuple (x, w, xhat, what).  Single-variable atoms set cb = 0.
struct GuardAtom {
  std::size_t va = 0;
  double ca = 1.0;
  std::size_t vb = 0;
  double cb = 0.0;
  bool strict = false;

  bool holds(const double* vals) const {
    double s = ca * vals[va] + cb * vals[vb];
    return strict ? s > 0.0 : s >= 0.0;
  }
};

// One guarded branch; the monomial lives over the doubled variable tuple.
struct TableCase {
  std::vector<GuardAtom> guard;  // conjunction; empty = always
  Monomial value;
};

// First-match case list.  Construction keeps these exhaustive: the final
// case of every table has an empty guard or the guards provably cover.
struct CaseTable {
  std::vector<TableCase> cases;

  double eval(const double* vals) const {
    for (const auto& c : cases) {
      bool ok = true;
      for (const auto& g : c.guard)
        if (!g.holds(vals)) {
          ok = false;
          break;
        }
      if (!ok) continue;
      double r = c.value.c;
      for (std::size_t j = 0; j < c.value.exp.size(); ++j)
        if (c.value.exp[j]) r *= detail::pow_u(vals[j], c.value.exp[j]);
      return r;
    }
    return 0.0;  // unreachable for well-formed tables
  }
};

// Introspectable result of the piecewise polynomial construction.
struct PolyDecomposition {
  std::size_t n = 0, m = 0;
  std::vector<std::vector<CaseTable>> rows;  // one table per source monomial

  std::size_t piece_count() const {
    std::size_t c = 0;
    for (const auto& row : rows)
      for (const auto& t : row) c += t.cases.size();
    return c;
  }

  DecompositionFn to_fn() const {
    auto self = std::make_shared<PolyDecomposition>(*this);
    DecompositionFn d;
    d.n = n;
    d.m = m;
    d.provenance = Provenance::polynomial_piecewise;
    d.describe = "piecewise polynomial decomposition (" + std::to_string(piece_count()) +
                 " pieces over " + std::to_string(rows.size()) + " rows)";
    std::size_t nn = n, mm = m;
    d.eval = [self, nn, mm](const ExtVec& x, const ExtVec& w, const ExtVec& xh,
                            const ExtVec& wh) {
      std::vector<double> vals;
      vals.reserve(2 * (nn + mm));
      vals.insert(vals.end(), x.e.begin(), x.e.end());
      vals.insert(vals.end(), w.e.begin(), w.e.end());
      vals.insert(vals.end(), xh.e.begin(), xh.e.end());
      vals.insert(vals.end(), wh.e.begin(), wh.e.end());
      std::vector<double> out(nn, 0.0);
      for (std::size_t i = 0; i < nn; ++i)
        for (const auto& t : self->rows[i]) out[i] += t.eval(vals.data());
      return ExtVec::unchecked(std::move(out));
    };
    return d;
  }
};

namespace detail {

// Doubled-tuple variable slots for an (n, m) system.
struct Slots {
  std::size_t n, m;
  std::size_t x(std::size_t j) const { return j; }
  std::size_t w(std::size_t k) const { return n + k; }
  std::size_t xh(std::size_t j) const { return n + m + j; }
  std::size_t wh(std::size_t k) const { return 2 * n + m + k; }
  std::size_t total() const { return 2 * (n + m); }
  // hat slot of a source variable index (0..n+m)
  std::size_t hat_of(std::size_t src) const { return src < n ? xh(src) : wh(src - n); }
};

inline Monomial doubled_monomial(const Slots& sl, double c,
                                 const std::vector<std::pair<std::size_t, unsigned>>& powers) {
  Monomial mono;
  mono.c = c;
  mono.exp.assign(sl.total(), 0);
  for (auto [slot, k] : powers) mono.exp[slot] += k;
  return mono;
}

inline CaseTable plain_case(Monomial mono) {
  CaseTable t;
  t.cases.push_back({{}, std::move(mono)});
  return t;
}

// Rule for c*s(v, vhat) (even square with sign-straddling range):
//   v^2 on {v >= 0, v + vhat >= 0}, vhat^2 on {vhat <= 0, v + vhat < 0},
//   v*vhat otherwise; c < 0 swaps the roles of v and vhat.
inline CaseTable square_case(const Slots& sl, double c, std::size_t v, std::size_t vh) {
  std::size_t a = c >= 0.0 ? v : vh;
  std::size_t b = c >= 0.0 ? vh : v;
  CaseTable t;
  t.cases.push_back({{GuardAtom{a, 1.0, a, 0.0, false}, GuardAtom{a, 1.0, b, 1.0, false}},
                     doubled_monomial(sl, c, {{a, 2}})});
  t.cases.push_back({{GuardAtom{b, -1.0, b, 0.0, false}, GuardAtom{a, -1.0, b, -1.0, true}},
                     doubled_monomial(sl, c, {{b, 2}})});
  t.cases.push_back({{}, doubled_monomial(sl, c, {{a, 1}, {b, 1}})});
  return t;
}

// Rule for c*x_i*v with v off-diagonal: partner is v where c*x_i >= 0 and
// vhat elsewhere.
inline CaseTable bilinear_case(const Slots& sl, double c, std::size_t xi, std::size_t v,
                               std::size_t vh) {
  CaseTable t;
  t.cases.push_back({{GuardAtom{xi, c >= 0.0 ? 1.0 : -1.0, xi, 0.0, false}},
                     doubled_monomial(sl, c, {{xi, 1}, {v, 1}})});
  t.cases.push_back({{}, doubled_monomial(sl, c, {{xi, 1}, {vh, 1}})});
  return t;
}

// l(a, b, c) from the mixed cubic rule, with sigma the sign applied to the
// diagonal variable inside the guards:
//   a b^2  if (a >= 0 >= b and b <= -c) or (b >= 0 > a and b >= -c)
//   a c^2  if (a, c >= 0 and b > -c)    or (a < 0, c <= 0 and b < -c)
//   a b c  otherwise
// A term coef*x_i*v^2 becomes coef*l(x_i, v, vhat) for coef < 0 and
// -coef*l(-x_i, v, vhat) for coef > 0; either way the branch values are
// coef*x_i*v^2, coef*x_i*vhat^2 and coef*x_i*v*vhat.
inline CaseTable mixed_cubic_case(const Slots& sl, double coef, std::size_t xi, std::size_t v,
                                  std::size_t vh) {
  double sigma = coef < 0.0 ? 1.0 : -1.0;
  GuardAtom a_nonneg{xi, sigma, xi, 0.0, false};
  GuardAtom a_neg{xi, -sigma, xi, 0.0, true};
  GuardAtom b_nonpos{v, -1.0, v, 0.0, false};
  GuardAtom b_nonneg{v, 1.0, v, 0.0, false};
  GuardAtom b_le_negc{v, -1.0, vh, -1.0, false};   // b <= -c  <=>  -b - c >= 0
  GuardAtom b_ge_negc{v, 1.0, vh, 1.0, false};     // b >= -c
  GuardAtom b_gt_negc{v, 1.0, vh, 1.0, true};      // b > -c
  GuardAtom b_lt_negc{v, -1.0, vh, -1.0, true};    // b < -c
  GuardAtom c_nonneg{vh, 1.0, vh, 0.0, false};
  GuardAtom c_nonpos{vh, -1.0, vh, 0.0, false};

  Monomial ab2 = doubled_monomial(sl, coef, {{xi, 1}, {v, 2}});
  Monomial ac2 = doubled_monomial(sl, coef, {{xi, 1}, {vh, 2}});
  Monomial abc = doubled_monomial(sl, coef, {{xi, 1}, {v, 1}, {vh, 1}});

  CaseTable t;
  t.cases.push_back({{a_nonneg, b_nonpos, b_le_negc}, ab2});
  t.cases.push_back({{b_nonneg, a_neg, b_ge_negc}, ab2});
  t.cases.push_back({{a_nonneg, c_nonneg, b_gt_negc}, ac2});
  t.cases.push_back({{a_neg, c_nonpos, b_lt_negc}, ac2});
  t.cases.push_back({{}, abc});
  return t;
}

// Per-variable value ranges of the source tuple (x over the domain, w over
// the disturbance box), for sign analysis of partials.
inline std::vector<Interval> source_ranges(const SystemDef& sys) {
  std::vector<Interval> r;
  r.reserve(sys.n + sys.m);
  for (std::size_t j = 0; j < sys.n; ++j) r.emplace_back(sys.domain.lo[j], sys.domain.hi[j]);
  for (std::size_t k = 0; k < sys.m; ++k) r.emplace_back(sys.dist_box.lo[k], sys.dist_box.hi[k]);
  return r;
}

inline std::string monomial_text(const Monomial& t, std::size_t n) {
  std::string s = std::to_string(t.c);
  for (std::size_t j = 0; j < t.exp.size(); ++j) {
    if (!t.exp[j]) continue;
    s += (j < n ? " x" + std::to_string(j + 1) : " w" + std::to_string(j - n + 1));
    if (t.exp[j] > 1) s += "^" + std::to_string(t.exp[j]);
  }
  return s;
}

}  // namespace detail

// Builds a piecewise polynomial decomposition for a polynomial field, one
// case table per monomial:
//   - constants and pure diagonal powers c*x_i^k pass through unchanged;
//   - monomials whose partials are sign-definite over the domain keep
//     increasing variables and substitute the hatted copy for decreasing
//     ones;
//   - c*v^2 with sign-straddling v uses the three-piece square table;
//   - c*x_i*v uses the two-piece bilinear split on the sign of c*x_i;
//   - c*x_i*v^2 uses the five-piece mixed cubic table;
// anything else throws UnsupportedMonomial.
inline PolyDecomposition analyze_polynomial_decomposition(const SystemDef& sys) {
  if (!sys.field_expr)
    throw ConstructionError("build_polynomial_decomposition: system has no polynomial field");
  const std::size_t n = sys.n, m = sys.m;
  detail::Slots sl{n, m};
  std::vector<detail::Interval> ranges = detail::source_ranges(sys);

  PolyDecomposition out;
  out.n = n;
  out.m = m;
  out.rows.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    for (const Monomial& t : (*sys.field_expr)[i].terms) {
      auto sup = t.support();

      // constants and pure diagonal powers
      if (sup.empty() || (sup.size() == 1 && sup[0] == i)) {
        std::vector<std::pair<std::size_t, unsigned>> powers;
        if (!sup.empty()) powers.push_back({sl.x(i), t.exp[i]});
        out.rows[i].push_back(detail::plain_case(detail::doubled_monomial(sl, t.c, powers)));
        continue;
      }

      // sign-definite partials: keep or hat each variable
      {
        PolyExpr as_poly = PolyExpr::make(n + m, {t});
        bool definite = true;
        std::vector<bool> hat(n + m, false);
        for (std::size_t v : sup) {
          if (v == i) continue;  // the diagonal variable is exempt and stays bare
          detail::Interval range = as_poly.partial(v).enclose(ranges);
          if (range.nonneg())
            hat[v] = false;
          else if (range.nonpos())
            hat[v] = true;
          else {
            definite = false;
            break;
          }
        }
        if (definite) {
          std::vector<std::pair<std::size_t, unsigned>> powers;
          for (std::size_t v : sup)
            powers.push_back({hat[v] ? sl.hat_of(v) : v, t.exp[v]});
          out.rows[i].push_back(detail::plain_case(detail::doubled_monomial(sl, t.c, powers)));
          continue;
        }
      }

      // shape rules on sign-straddling ranges
      if (sup.size() == 1 && t.exp[sup[0]] == 2) {
        std::size_t v = sup[0];
        out.rows[i].push_back(detail::square_case(sl, t.c, v, sl.hat_of(v)));
        continue;
      }
      if (sup.size() == 2 && t.exp[i] == 1) {
        std::size_t v = sup[0] == i ? sup[1] : sup[0];
        if (t.exp[v] == 1) {
          out.rows[i].push_back(detail::bilinear_case(sl, t.c, sl.x(i), v, sl.hat_of(v)));
          continue;
        }
        if (t.exp[v] == 2) {
          out.rows[i].push_back(detail::mixed_cubic_case(sl, t.c, sl.x(i), v, sl.hat_of(v)));
          continue;
        }
      }

      throw UnsupportedMonomial("build_polynomial_decomposition: no rule for monomial " +
                                detail::monomial_text(t, n) + " in row " + std::to_string(i + 1));
    }
  }
  return out;
}

inline DecompositionFn build_polynomial_decomposition(const SystemDef& sys) {
  return analyze_polynomial_decomposition(sys).to_fn();
}

// Wraps a caller-supplied evaluator; nothing is checked here beyond shape.
inline DecompositionFn make_user_decomposition(std::size_t n, std::size_t m, DecompEvalFn eval,
                                               std::string describe = "user decomposition") {
  if (!eval) throw ValueError("make_user_decomposition: evaluator must be set");
  DecompositionFn d;
  d.n = n;
  d.m = m;
  d.provenance = Provenance::user;
  d.eval = std::move(eval);
  d.describe = std::move(describe);
  return d;
}

// User decomposition given as polynomial rows over the doubled tuple
// (x, w, xhat, what); used by the file-based front end.
inline DecompositionFn make_user_decomposition_from_rows(std::size_t n, std::size_t m,
                                                         std::vector<PolyExpr> rows) {
  if (rows.size() != n)
    throw DimensionError("make_user_decomposition_from_rows: need n rows");
  for (const auto& r : rows)
    if (r.nvars != 2 * (n + m))
      throw DimensionError("make_user_decomposition_from_rows: rows over 2(n+m) vars");
  auto shared = std::make_shared<std::vector<PolyExpr>>(std::move(rows));
  DecompEvalFn eval = [shared, n, m](const ExtVec& x, const ExtVec& w, const ExtVec& xh,
                                     const ExtVec& wh) {
    std::vector<double> vals;
    vals.reserve(2 * (n + m));
    vals.insert(vals.end(), x.e.begin(), x.e.end());
    vals.insert(vals.end(), w.e.begin(), w.e.end());
    vals.insert(vals.end(), xh.e.begin(), xh.e.end());
    vals.insert(vals.end(), wh.e.begin(), wh.e.end());
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (*shared)[i].eval(vals.data());
    return ExtVec::unchecked(std::move(out));
  };
  return make_user_decomposition(n, m, std::move(eval), "user polynomial decomposition");
}

}  // namespace mmreach
