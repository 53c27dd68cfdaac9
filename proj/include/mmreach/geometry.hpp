#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mmreach/errors.hpp"

namespace mmreach {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Fixed-length vector over the extended reals.  Entries may be +-inf but
// never NaN; length is fixed at construction.  Length zero is permitted so
// that disturbance vectors of systems with m = 0 have a natural value.
struct ExtVec {
  std::vector<double> e;

  ExtVec() = default;
  explicit ExtVec(std::vector<double> entries) : e(std::move(entries)) { check(); }
  ExtVec(std::initializer_list<double> entries) : e(entries) { check(); }

  static ExtVec zeros(std::size_t n) { return ExtVec(std::vector<double>(n, 0.0)); }
  static ExtVec constant(std::size_t n, double v) { return ExtVec(std::vector<double>(n, v)); }
  // Skips the NaN scan; for hot paths that guarantee finiteness themselves.
  static ExtVec unchecked(std::vector<double> entries) {
    ExtVec v;
    v.e = std::move(entries);
    return v;
  }

  std::size_t size() const { return e.size(); }
  double operator[](std::size_t i) const { return e[i]; }
  double& operator[](std::size_t i) { return e[i]; }
  auto begin() const { return e.begin(); }
  auto end() const { return e.end(); }

  bool all_finite() const {
    for (double v : e)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const ExtVec& a, const ExtVec& b) { return a.e == b.e; }

 private:
  void check() const {
    for (double v : e)
      if (std::isnan(v)) throw ValueError("ExtVec: NaN entry rejected");
  }
};

inline void require_same_size(const ExtVec& a, const ExtVec& b, const char* where) {
  if (a.size() != b.size())
    throw DimensionError(std::string(where) + ": length mismatch (" +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

// Componentwise partial order on extended vectors.
inline bool cw_leq(const ExtVec& a, const ExtVec& b) {
  require_same_size(a, b, "cw_leq");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a[i] <= b[i])) return false;
  return true;
}

inline ExtVec cw_min(const ExtVec& a, const ExtVec& b) {
  require_same_size(a, b, "cw_min");
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = std::min(a[i], b[i]);
  return ExtVec::unchecked(std::move(r));
}

inline ExtVec cw_max(const ExtVec& a, const ExtVec& b) {
  require_same_size(a, b, "cw_max");
  std::vector<double> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = std::max(a[i], b[i]);
  return ExtVec::unchecked(std::move(r));
}

// Axis-aligned hyperrectangle [lo, hi], faces possibly at +-inf.
struct HyperRect {
  ExtVec lo, hi;

  HyperRect() = default;

  static HyperRect of(ExtVec lo_, ExtVec hi_) {
    require_same_size(lo_, hi_, "HyperRect");
    for (std::size_t i = 0; i < lo_.size(); ++i)
      if (!(lo_[i] <= hi_[i]))
        throw NotARectangle("HyperRect: lo[" + std::to_string(i) + "] > hi[" + std::to_string(i) + "]");
    HyperRect r;
    r.lo = std::move(lo_);
    r.hi = std::move(hi_);
    return r;
  }

  static HyperRect whole_space(std::size_t n) {
    return of(ExtVec::constant(n, -kInf), ExtVec::constant(n, kInf));
  }

  static HyperRect cube(std::size_t n, double a, double b) {
    return of(ExtVec::constant(n, a), ExtVec::constant(n, b));
  }

  std::size_t dim() const { return lo.size(); }

  bool is_finite() const { return lo.all_finite() && hi.all_finite(); }

  bool contains(const ExtVec& p, double slack = 0.0) const {
    require_same_size(lo, p, "HyperRect::contains");
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
    return true;
  }

  ExtVec widths() const {
    std::vector<double> w(dim());
    for (std::size_t i = 0; i < dim(); ++i) w[i] = hi[i] - lo[i];
    return ExtVec::unchecked(std::move(w));
  }

  ExtVec center() const {
    std::vector<double> c(dim());
    for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
    return ExtVec::unchecked(std::move(c));
  }

  double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < dim(); ++i) v *= (hi[i] - lo[i]);
    return v;
  }

  // Shrinks (eps > 0) or grows (eps < 0) every face by eps.
  HyperRect deflated(double eps) const {
    std::vector<double> l(dim()), h(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
      l[i] = lo[i] + eps;
      h[i] = hi[i] - eps;
    }
    return of(ExtVec(std::move(l)), ExtVec(std::move(h)));
  }

  friend bool operator==(const HyperRect& a, const HyperRect& b) {
    return a.lo == b.lo && a.hi == b.hi;
  }
};

// inner subset of outer, with optional per-face slack.
inline bool rect_subset(const HyperRect& inner, const HyperRect& outer, double slack = 0.0) {
  require_same_size(inner.lo, outer.lo, "rect_subset");
  for (std::size_t i = 0; i < inner.dim(); ++i) {
    if (inner.lo[i] < outer.lo[i] - slack) return false;
    if (inner.hi[i] > outer.hi[i] + slack) return false;
  }
  return true;
}

// A point of the embedding space: the pair (x, xhat), stored separately.
struct EmbeddingPoint {
  ExtVec x, xhat;

  EmbeddingPoint() = default;
  EmbeddingPoint(ExtVec x_, ExtVec xhat_) : x(std::move(x_)), xhat(std::move(xhat_)) {
    require_same_size(x, xhat, "EmbeddingPoint");
    if (!x.all_finite() || !xhat.all_finite())
      throw ValueError("EmbeddingPoint: entries must be finite");
  }

  static EmbeddingPoint from_rect(const HyperRect& r) {
    if (!r.is_finite()) throw ValueError("EmbeddingPoint: rectangle must be finite");
    return EmbeddingPoint(r.lo, r.hi);
  }

  static EmbeddingPoint diagonal(const ExtVec& p) { return EmbeddingPoint(p, p); }

  // Flat layout (x_1..x_n, xhat_1..xhat_n) used by the integrators.
  static EmbeddingPoint from_flat(const std::vector<double>& a) {
    if (a.size() % 2 != 0) throw DimensionError("EmbeddingPoint::from_flat: odd length");
    std::size_t n = a.size() / 2;
    return EmbeddingPoint(ExtVec(std::vector<double>(a.begin(), a.begin() + n)),
                          ExtVec(std::vector<double>(a.begin() + n, a.end())));
  }

  std::size_t dim() const { return x.size(); }

  std::vector<double> flat() const {
    std::vector<double> a(x.e);
    a.insert(a.end(), xhat.e.begin(), xhat.e.end());
    return a;
  }

  bool well_ordered() const { return cw_leq(x, xhat); }

  friend bool operator==(const EmbeddingPoint& a, const EmbeddingPoint& b) {
    return a.x == b.x && a.xhat == b.xhat;
  }
};

// Southeast order: (x, xhat) <=_SE (y, yhat) iff x <= y and yhat <= xhat.
inline bool se_leq(const EmbeddingPoint& a, const EmbeddingPoint& b) {
  return cw_leq(a.x, b.x) && cw_leq(b.xhat, a.xhat);
}

// Southeast order with absolute slack tau on every comparison.
inline bool se_leq_tol(const EmbeddingPoint& a, const EmbeddingPoint& b, double tau) {
  require_same_size(a.x, b.x, "se_leq_tol");
  require_same_size(a.xhat, b.xhat, "se_leq_tol");
  for (std::size_t i = 0; i < a.dim(); ++i) {
    if (!(a.x[i] <= b.x[i] + tau)) return false;
    if (!(b.xhat[i] <= a.xhat[i] + tau)) return false;
  }
  return true;
}

// The rectangle [[a]] = [x, xhat]; requires x <= xhat.
inline HyperRect rect_of(const EmbeddingPoint& a) {
  if (!a.well_ordered())
    throw NotARectangle("rect_of: point is not well ordered (x !<= xhat)");
  return HyperRect::of(a.x, a.xhat);
}

inline std::string to_string(const ExtVec& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(v[i]);
  }
  return s + ")";
}

}  // namespace mmreach
