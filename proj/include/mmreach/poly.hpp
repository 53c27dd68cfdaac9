#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "mmreach/errors.hpp"
#include "mmreach/interval.hpp"

namespace mmreach {

// c * prod_j v_j^{exp[j]} over an ordered variable tuple.
struct Monomial {
  double c = 0.0;
  std::vector<unsigned> exp;

  unsigned degree() const {
    unsigned d = 0;
    for (unsigned k : exp) d += k;
    return d;
  }

  std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    for (std::size_t j = 0; j < exp.size(); ++j)
      if (exp[j] > 0) s.push_back(j);
    return s;
  }

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.c == b.c && a.exp == b.exp;
  }
};

namespace detail {
inline double pow_u(double v, unsigned k) {
  double r = 1.0;
  while (k) {
    if (k & 1u) r *= v;
    v *= v;
    k >>= 1u;
  }
  return r;
}
}  // namespace detail

// Polynomial in canonical form: terms sorted by exponent vector, duplicate
// exponents merged, zero coefficients dropped.
struct PolyExpr {
  std::size_t nvars = 0;
  std::vector<Monomial> terms;

  PolyExpr() = default;

  static PolyExpr make(std::size_t nvars, std::vector<Monomial> raw) {
    for (const auto& t : raw)
      if (t.exp.size() != nvars)
        throw DimensionError("PolyExpr: monomial exponent length != nvars");
    std::sort(raw.begin(), raw.end(),
              [](const Monomial& a, const Monomial& b) { return a.exp < b.exp; });
    PolyExpr p;
    p.nvars = nvars;
    for (auto& t : raw) {
      if (!p.terms.empty() && p.terms.back().exp == t.exp)
        p.terms.back().c += t.c;
      else
        p.terms.push_back(std::move(t));
    }
    std::erase_if(p.terms, [](const Monomial& t) { return t.c == 0.0; });
    return p;
  }

  static PolyExpr zero(std::size_t nvars) { return make(nvars, {}); }

  static PolyExpr constant(std::size_t nvars, double c) {
    return make(nvars, {Monomial{c, std::vector<unsigned>(nvars, 0)}});
  }

  static PolyExpr variable(std::size_t nvars, std::size_t j, double c = 1.0) {
    std::vector<unsigned> e(nvars, 0);
    e.at(j) = 1;
    return make(nvars, {Monomial{c, std::move(e)}});
  }

  double eval(const double* vals) const {
    double sum = 0.0;
    for (const auto& t : terms) {
      double m = t.c;
      for (std::size_t j = 0; j < nvars; ++j)
        if (t.exp[j]) m *= detail::pow_u(vals[j], t.exp[j]);
      sum += m;
    }
    return sum;
  }

  double eval(const std::vector<double>& vals) const {
    if (vals.size() != nvars) throw DimensionError("PolyExpr::eval: wrong arity");
    return eval(vals.data());
  }

  PolyExpr partial(std::size_t var) const {
    if (var >= nvars) throw DimensionError("PolyExpr::partial: variable out of range");
    std::vector<Monomial> out;
    for (const auto& t : terms) {
      if (t.exp[var] == 0) continue;
      Monomial d = t;
      d.c *= static_cast<double>(t.exp[var]);
      d.exp[var] -= 1;
      out.push_back(std::move(d));
    }
    return make(nvars, std::move(out));
  }

  PolyExpr negated() const {
    PolyExpr p = *this;
    for (auto& t : p.terms) t.c = -t.c;
    return p;
  }

  // Interval enclosure of the value over per-variable ranges.
  detail::Interval enclose(const std::vector<detail::Interval>& ranges) const {
    if (ranges.size() != nvars) throw DimensionError("PolyExpr::enclose: wrong arity");
    detail::Interval acc(0.0, 0.0);
    for (const auto& t : terms) {
      detail::Interval m(1.0, 1.0);
      for (std::size_t j = 0; j < nvars; ++j)
        if (t.exp[j]) m = m * detail::ipow(ranges[j], t.exp[j]);
      acc = acc + detail::scale(t.c, m);
    }
    return acc;
  }

  friend bool operator==(const PolyExpr& a, const PolyExpr& b) {
    return a.nvars == b.nvars && a.terms == b.terms;
  }
};

}  // namespace mmreach
