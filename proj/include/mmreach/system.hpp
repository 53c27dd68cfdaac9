#pragma once

#include <cstdint>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mmreach/geometry.hpp"
#include "mmreach/poly.hpp"
#include "mmreach/rng.hpp"

namespace mmreach {

using FieldFn = std::function<ExtVec(const ExtVec& x, const ExtVec& w)>;

// Continuous-time disturbed system  xdot = F(x, w),  x in domain, w in dist_box.
struct SystemDef {
  std::size_t n = 0;  // state dimension
  std::size_t m = 0;  // disturbance dimension
  HyperRect domain;   // n-dim, faces may be infinite
  HyperRect dist_box; // m-dim, finite
  FieldFn field;
  // Present when the field is polynomial; rows over (x_1..x_n, w_1..w_m).
  std::optional<std::vector<PolyExpr>> field_expr;
  std::string name = "system";

  static SystemDef make(std::size_t n, std::size_t m, HyperRect domain, HyperRect dist_box,
                        FieldFn field, std::string name = "system",
                        std::optional<std::vector<PolyExpr>> field_expr = std::nullopt) {
    if (n == 0) throw DimensionError("SystemDef: state dimension must be positive");
    if (domain.dim() != n) throw DimensionError("SystemDef: domain dimension != n");
    if (dist_box.dim() != m) throw DimensionError("SystemDef: dist_box dimension != m");
    if (!dist_box.is_finite()) throw ValueError("SystemDef: disturbance box must be finite");
    if (!field) throw ValueError("SystemDef: field evaluator must be set");
    if (field_expr) {
      if (field_expr->size() != n) throw DimensionError("SystemDef: field_expr needs n rows");
      for (const auto& row : *field_expr)
        if (row.nvars != n + m) throw DimensionError("SystemDef: field_expr rows over n+m vars");
    }
    SystemDef s;
    s.n = n;
    s.m = m;
    s.domain = std::move(domain);
    s.dist_box = std::move(dist_box);
    s.field = std::move(field);
    s.field_expr = std::move(field_expr);
    s.name = std::move(name);
    return s;
  }

  static SystemDef from_poly(std::vector<PolyExpr> rows, std::size_t m, HyperRect domain,
                             HyperRect dist_box, std::string name = "system") {
    std::size_t n = rows.size();
    auto shared = std::make_shared<std::vector<PolyExpr>>(rows);
    FieldFn f = [shared, n, m](const ExtVec& x, const ExtVec& w) {
      std::vector<double> vals(x.e);
      vals.insert(vals.end(), w.e.begin(), w.e.end());
      std::vector<double> out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = (*shared)[i].eval(vals.data());
      return ExtVec::unchecked(std::move(out));
    };
    return make(n, m, std::move(domain), std::move(dist_box), std::move(f), std::move(name),
                std::move(rows));
  }

  // Same system with the field negated: the backward dynamics  xdot = -F(x, w).
  SystemDef reversed() const {
    SystemDef g = *this;
    FieldFn fwd = field;
    g.field = [fwd](const ExtVec& x, const ExtVec& w) {
      ExtVec v = fwd(x, w);
      for (auto& c : v.e) c = -c;
      return v;
    };
    if (field_expr) {
      std::vector<PolyExpr> neg;
      for (const auto& row : *field_expr) neg.push_back(row.negated());
      g.field_expr = std::move(neg);
    }
    g.name = name + "-backward";
    return g;
  }
};

// Checked evaluation of the vector field.
inline ExtVec eval_field(const SystemDef& sys, const ExtVec& x, const ExtVec& w) {
  if (x.size() != sys.n) throw DimensionError("eval_field: wrong state length");
  if (w.size() != sys.m) throw DimensionError("eval_field: wrong disturbance length");
  if (!x.all_finite() || !w.all_finite()) throw ValueError("eval_field: non-finite argument");
  if (!sys.domain.contains(x)) throw DomainError("eval_field: state outside domain");
  if (!sys.dist_box.contains(w)) throw DomainError("eval_field: disturbance outside box");
  ExtVec f = sys.field(x, w);
  if (f.size() != sys.n) throw DimensionError("eval_field: field returned wrong length");
  if (!f.all_finite()) throw EvalError("eval_field: non-finite field value");
  return f;
}

// Stable identifier for certificates: FNV-1a over the system's name,
// dimensions and boxes.
inline std::string system_fingerprint(const SystemDef& sys) {
  std::string blob = sys.name + "|" + std::to_string(sys.n) + "|" + std::to_string(sys.m);
  char buf[32];
  auto push = [&](double v) {
    std::snprintf(buf, sizeof buf, "|%.17g", v);
    blob += buf;
  };
  for (std::size_t i = 0; i < sys.n; ++i) {
    push(sys.domain.lo[i]);
    push(sys.domain.hi[i]);
  }
  for (std::size_t k = 0; k < sys.m; ++k) {
    push(sys.dist_box.lo[k]);
    push(sys.dist_box.hi[k]);
  }
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : blob) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

enum class Provenance { user, jacobian_bound, monotone, polynomial_piecewise, backward_derived };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::user: return "user";
    case Provenance::jacobian_bound: return "jacobian-bound";
    case Provenance::monotone: return "monotone";
    case Provenance::polynomial_piecewise: return "polynomial-piecewise";
    case Provenance::backward_derived: return "backward-derived";
  }
  return "?";
}

using DecompEvalFn =
    std::function<ExtVec(const ExtVec& x, const ExtVec& w, const ExtVec& xhat, const ExtVec& what)>;

// Decomposition function d(x, w, xhat, what) for some system.  Only the
// evaluator and bookkeeping live here; whether it actually satisfies the
// decomposition conditions is the validator's business.
struct DecompositionFn {
  std::size_t n = 0, m = 0;
  Provenance provenance = Provenance::user;
  DecompEvalFn eval;
  std::string describe;

  ExtVec operator()(const ExtVec& x, const ExtVec& w, const ExtVec& xhat,
                    const ExtVec& what) const {
    return eval(x, w, xhat, what);
  }
};

// Sampling parameters for the decomposition validator.
struct SamplingPlan {
  std::size_t samples = 10000;
  std::uint64_t seed = 7u;
  // State samples are drawn from this box when set; otherwise from the system
  // domain clipped to [-10, 10] per coordinate.
  std::optional<HyperRect> test_box;
  double tol_eq = 1e-9;    // diagonal identity tolerance
  double tol_sign = 1e-6;  // sign condition tolerance
  double fd_step = 1e-5;   // finite difference step scale
};

struct ValidationViolation {
  std::string condition;  // "diagonal", "d/dx", "d/dxhat", "d/dw", "d/dwhat"
  std::size_t row = 0;    // output row i
  std::size_t col = 0;    // differentiated variable index (0 for diagonal)
  std::vector<double> at; // sample, laid out (x, w, xhat, what)
  double value = 0.0;     // measured derivative or identity residual
};

struct ValidationReport {
  bool passed = false;
  std::size_t samples_checked = 0;
  // Sign checks whose one-sided difference quotients disagreed (piece
  // boundary in range); the derivative need not exist there, so the sample
  // is not judged.
  std::size_t skipped_nonsmooth = 0;
  std::size_t violation_count = 0;
  std::vector<ValidationViolation> violations;  // capped at kMaxStored
  std::string assumptions =
      "local Lipschitz continuity of the decomposition is assumed, not verified";

  static constexpr std::size_t kMaxStored = 64;
};

namespace detail {

struct FdProbe {
  double central = 0.0;
  bool smooth = true;  // forward and backward quotients agree
};

// One-sided and central difference quotients of component `row` of `f`
// along coordinate `j` of `base` (length-matched callable over a flat vector).
template <typename Fn>
inline FdProbe fd_probe(const Fn& f, std::vector<double>& vals, std::size_t j, std::size_t row,
                        double base_val, double step_scale) {
  double v0 = vals[j];
  double h = step_scale * std::max(1.0, std::abs(v0));
  vals[j] = v0 + h;
  double fp = f(vals, row);
  vals[j] = v0 - h;
  double fm = f(vals, row);
  vals[j] = v0;
  FdProbe p;
  p.central = (fp - fm) / (2.0 * h);
  double fwd = (fp - base_val) / h;
  double bwd = (base_val - fm) / h;
  p.smooth = std::abs(fwd - bwd) <= 1e-3 * std::max({1.0, std::abs(fwd), std::abs(bwd)});
  return p;
}

}  // namespace detail

// Samples the decomposition conditions with finite differences.  This is a
// falsifier: a pass means no violation was found at the drawn samples, not a
// proof.  Conditions checked at each sample (x, w, xhat, what):
//   (i)   d(x, w, x, w) = F(x, w)
//   (ii)  dd_i/dx_j    >= 0 for i != j
//   (iii) dd_i/dxhat_j <= 0 for all i, j
//   (iv)  dd_i/dw_k    >= 0 and dd_i/dwhat_k <= 0
// Sign checks are skipped where the one-sided quotients disagree, since the
// conditions only bind where the derivative exists.
inline ValidationReport validate_decomposition(const SystemDef& sys, const DecompositionFn& d,
                                               const SamplingPlan& plan = {}) {
  if (d.n != sys.n || d.m != sys.m)
    throw DimensionError("validate_decomposition: decomposition/system dimension mismatch");
  const std::size_t n = sys.n, m = sys.m;
  HyperRect xbox = plan.test_box ? *plan.test_box : detail::sampling_box(sys.domain);
  if (xbox.dim() != n) throw DimensionError("validate_decomposition: test box dimension != n");

  ValidationReport rep;
  std::mt19937_64 gen(plan.seed);

  // Evaluator over the flat sample layout (x, w, xhat, what).
  auto eval_flat = [&](const std::vector<double>& vals, std::size_t row) -> double {
    ExtVec x = ExtVec::unchecked({vals.begin(), vals.begin() + n});
    ExtVec w = ExtVec::unchecked({vals.begin() + n, vals.begin() + n + m});
    ExtVec xh = ExtVec::unchecked({vals.begin() + n + m, vals.begin() + 2 * n + m});
    ExtVec wh = ExtVec::unchecked({vals.begin() + 2 * n + m, vals.end()});
    ExtVec out = d.eval(x, w, xh, wh);
    if (out.size() != n) throw DimensionError("validate_decomposition: evaluator row count");
    if (!out.all_finite()) throw EvalError("validate_decomposition: non-finite value");
    return out[row];
  };

  auto record = [&](const char* cond, std::size_t i, std::size_t j,
                    const std::vector<double>& at, double value) {
    ++rep.violation_count;
    if (rep.violations.size() < ValidationReport::kMaxStored)
      rep.violations.push_back({cond, i, j, at, value});
  };

  // checker for one signed derivative family at the current sample
  auto check_signed = [&](const std::vector<double>& vals, std::vector<double>& work,
                          std::size_t var_index, std::size_t i, double base, bool want_nonneg,
                          const char* cond) {
    detail::FdProbe p = detail::fd_probe(eval_flat, work, var_index, i, base, plan.fd_step);
    double signed_value = want_nonneg ? p.central : -p.central;
    if (signed_value < -plan.tol_sign) {
      if (p.smooth)
        record(cond, i, var_index, vals, p.central);
      else
        ++rep.skipped_nonsmooth;
    }
  };

  for (std::size_t s = 0; s < plan.samples; ++s) {
    ExtVec x = detail::uniform_in_rect(gen, xbox);
    ExtVec xh = detail::uniform_in_rect(gen, xbox);
    ExtVec w = detail::uniform_in_rect(gen, sys.dist_box);
    ExtVec wh = detail::uniform_in_rect(gen, sys.dist_box);

    std::vector<double> vals(x.e);
    vals.insert(vals.end(), w.e.begin(), w.e.end());
    vals.insert(vals.end(), xh.e.begin(), xh.e.end());
    vals.insert(vals.end(), wh.e.begin(), wh.e.end());

    // (i) diagonal identity, evaluated at (x, w, x, w)
    {
      ExtVec f = sys.field(x, w);
      ExtVec dd = d.eval(x, w, x, w);
      for (std::size_t i = 0; i < n; ++i) {
        double r = dd[i] - f[i];
        if (std::abs(r) > plan.tol_eq) {
          std::vector<double> diag(x.e);
          diag.insert(diag.end(), w.e.begin(), w.e.end());
          diag.insert(diag.end(), x.e.begin(), x.e.end());
          diag.insert(diag.end(), w.e.begin(), w.e.end());
          record("diagonal", i, 0, diag, r);
        }
      }
    }

    std::vector<double> work = vals;
    std::vector<double> base(n);
    for (std::size_t i = 0; i < n; ++i) base[i] = eval_flat(vals, i);

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) check_signed(vals, work, j, i, base[i], true, "d/dx");  // (ii)
        check_signed(vals, work, n + m + j, i, base[i], false, "d/dxhat"); // (iii)
      }
      for (std::size_t k = 0; k < m; ++k) {
        check_signed(vals, work, n + k, i, base[i], true, "d/dw");           // (iv)
        check_signed(vals, work, 2 * n + m + k, i, base[i], false, "d/dwhat");
      }
    }
    ++rep.samples_checked;
  }

  rep.passed = rep.violation_count == 0;
  return rep;
}

}  // namespace mmreach
