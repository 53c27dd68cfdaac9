#pragma once

#include <algorithm>
#include <cmath>

#include "mmreach/geometry.hpp"

namespace mmreach::detail {

// Closed interval over the extended reals.  Used only for sign analysis of
// polynomial partial derivatives over boxes, so outward rounding is not
// needed, but the 0 * inf = 0 convention is (zero coefficients must kill
// unbounded factors).
struct Interval {
  double lo = 0.0, hi = 0.0;

  Interval() = default;
  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) throw ValueError("Interval: bad bounds");
  }

  static Interval point(double v) { return Interval(v, v); }

  bool nonneg() const { return lo >= 0.0; }
  bool nonpos() const { return hi <= 0.0; }
  bool contains(double v) const { return lo <= v && v <= hi; }
};

inline double ext_mul(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

inline Interval operator-(const Interval& a) { return Interval(-a.hi, -a.lo); }

inline Interval operator+(const Interval& a, const Interval& b) {
  return Interval(a.lo + b.lo, a.hi + b.hi);
}

inline Interval operator*(const Interval& a, const Interval& b) {
  double c[4] = {ext_mul(a.lo, b.lo), ext_mul(a.lo, b.hi), ext_mul(a.hi, b.lo),
                 ext_mul(a.hi, b.hi)};
  return Interval(std::min({c[0], c[1], c[2], c[3]}), std::max({c[0], c[1], c[2], c[3]}));
}

inline Interval ipow(const Interval& a, unsigned k) {
  if (k == 0) return Interval::point(1.0);
  if (k == 1) return a;
  if (k % 2 == 1 || a.lo >= 0.0) {
    double l = std::pow(a.lo, static_cast<double>(k));
    double h = std::pow(a.hi, static_cast<double>(k));
    return Interval(l, h);
  }
  if (a.hi <= 0.0) {
    double l = std::pow(a.hi, static_cast<double>(k));
    double h = std::pow(a.lo, static_cast<double>(k));
    return Interval(l, h);
  }
  double h = std::max(std::pow(a.lo, static_cast<double>(k)),
                      std::pow(a.hi, static_cast<double>(k)));
  return Interval(0.0, h);
}

inline Interval scale(double c, const Interval& a) {
  if (c >= 0.0) return Interval(ext_mul(c, a.lo), ext_mul(c, a.hi));
  return Interval(ext_mul(c, a.hi), ext_mul(c, a.lo));
}

}  // namespace mmreach::detail
