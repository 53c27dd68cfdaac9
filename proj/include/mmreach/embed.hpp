#pragma once

#include <utility>
#include <vector>

#include "mmreach/integrate.hpp"
#include "mmreach/system.hpp"

namespace mmreach {

// Deterministic embedding of a system under a decomposition: the 2n-dim field
//   e(x, xhat) = ( d(x, wlo, xhat, whi), d(xhat, whi, x, wlo) )
// with wlo, whi the extreme disturbances of the system's box.
struct EmbeddingSystem {
  SystemDef sys;
  DecompositionFn d;
  ExtVec wlo, whi;

  std::size_t n() const { return sys.n; }

  ExtVec lower(const EmbeddingPoint& a) const { return d.eval(a.x, wlo, a.xhat, whi); }
  ExtVec upper(const EmbeddingPoint& a) const { return d.eval(a.xhat, whi, a.x, wlo); }

  // Both halves stacked: (e_x, e_xhat), length 2n.
  ExtVec eval(const EmbeddingPoint& a) const {
    ExtVec lo = lower(a), hi = upper(a);
    std::vector<double> out(lo.e);
    out.insert(out.end(), hi.e.begin(), hi.e.end());
    return ExtVec::unchecked(std::move(out));
  }

  // Hot path for the integrators; tolerates non-finite entries (a rejected
  // step), which EmbeddingPoint construction would not.
  std::vector<double> eval_flat(const std::vector<double>& a) const {
    std::size_t nn = sys.n;
    ExtVec x = ExtVec::unchecked({a.begin(), a.begin() + nn});
    ExtVec xh = ExtVec::unchecked({a.begin() + nn, a.end()});
    ExtVec lo = d.eval(x, wlo, xh, whi);
    ExtVec hi = d.eval(xh, whi, x, wlo);
    std::vector<double> out(lo.e);
    out.insert(out.end(), hi.e.begin(), hi.e.end());
    return out;
  }
};

inline EmbeddingSystem make_embedding(const SystemDef& sys, const DecompositionFn& d) {
  if (d.n != sys.n || d.m != sys.m)
    throw DimensionError("make_embedding: decomposition/system dimension mismatch");
  if (!d.eval) throw ValueError("make_embedding: decomposition has no evaluator");
  EmbeddingSystem e;
  e.sys = sys;
  e.d = d;
  e.wlo = sys.dist_box.lo;
  e.whi = sys.dist_box.hi;
  return e;
}

// Nondeterministic embedding: eps(x, w, xhat, what) = (d(x,w,xhat,what), d(xhat,what,x,w)).
struct NondetEmbedding {
  SystemDef sys;
  DecompositionFn d;

  ExtVec eval(const EmbeddingPoint& a, const ExtVec& w, const ExtVec& what) const {
    ExtVec lo = d.eval(a.x, w, a.xhat, what);
    ExtVec hi = d.eval(a.xhat, what, a.x, w);
    std::vector<double> out(lo.e);
    out.insert(out.end(), hi.e.begin(), hi.e.end());
    return ExtVec::unchecked(std::move(out));
  }
};

inline NondetEmbedding make_nondet_embedding(const SystemDef& sys, const DecompositionFn& d) {
  if (d.n != sys.n || d.m != sys.m)
    throw DimensionError("make_nondet_embedding: decomposition/system dimension mismatch");
  NondetEmbedding e;
  e.sys = sys;
  e.d = d;
  return e;
}

struct EmbeddingTrajectory {
  std::vector<double> times;
  std::vector<EmbeddingPoint> points;
  ExitFlag exit = ExitFlag::completed;

  std::size_t size() const { return times.size(); }
  double end_time() const { return times.back(); }
  const EmbeddingPoint& endpoint() const { return points.back(); }
};

namespace detail {

inline EmbeddingTrajectory to_embedding_trajectory(RawTrajectory raw) {
  EmbeddingTrajectory tr;
  tr.times = std::move(raw.times);
  tr.points.reserve(raw.states.size());
  for (auto& s : raw.states) tr.points.push_back(EmbeddingPoint::from_flat(s));
  tr.exit = raw.exit;
  return tr;
}

inline InsideFn embedding_inside(const SystemDef& sys) {
  return [&sys](const std::vector<double>& y) {
    std::size_t n = sys.n;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] < sys.domain.lo[i] || y[i] > sys.domain.hi[i]) return false;
      if (y[n + i] < sys.domain.lo[i] || y[n + i] > sys.domain.hi[i]) return false;
    }
    return true;
  };
}

}  // namespace detail

// Flows the deterministic embedding from a0 over [0, T].  Truncates with
// left_domain if either half leaves the state domain.
inline EmbeddingTrajectory flow_embedding(const EmbeddingSystem& E, const EmbeddingPoint& a0,
                                          double T, const IntegratorConfig& cfg = {}) {
  if (T < 0.0) throw ValueError("flow_embedding: negative horizon");
  if (a0.dim() != E.n()) throw DimensionError("flow_embedding: a0 dimension != n");
  if (!E.sys.domain.contains(a0.x) || !E.sys.domain.contains(a0.xhat))
    throw DomainError("flow_embedding: a0 outside domain");

  detail::OdeRhs rhs = [&E](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy = E.eval_flat(y);
  };
  detail::InsideFn inside = detail::embedding_inside(E.sys);
  detail::RawTrajectory raw =
      detail::integrate_segment(rhs, a0.flat(), 0.0, T, cfg, inside, cfg.max_steps);
  if (T == 0.0) raw.exit = ExitFlag::completed;
  return detail::to_embedding_trajectory(std::move(raw));
}

// Flows the nondeterministic embedding under a pair of disturbance signals.
inline EmbeddingTrajectory flow_nondet(const NondetEmbedding& E, const EmbeddingPoint& a0,
                                       const DisturbanceSignal& w_signal,
                                       const DisturbanceSignal& what_signal, double T,
                                       const IntegratorConfig& cfg = {}) {
  if (T < 0.0) throw ValueError("flow_nondet: negative horizon");
  if (a0.dim() != E.sys.n) throw DimensionError("flow_nondet: a0 dimension != n");
  if (!E.sys.domain.contains(a0.x) || !E.sys.domain.contains(a0.xhat))
    throw DomainError("flow_nondet: a0 outside domain");
  if (!w_signal.values_within(E.sys.dist_box) || !what_signal.values_within(E.sys.dist_box))
    throw DomainError("flow_nondet: signal value outside disturbance box");

  // Merge the two signals into one of dimension 2m so switch restarts cover both.
  std::vector<double> cuts = w_signal.switch_times;
  for (double t : what_signal.switch_times) cuts.push_back(t);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<ExtVec> merged;
  merged.reserve(cuts.size());
  for (double t : cuts) {
    std::vector<double> v(w_signal.value(t).e);
    const auto& wh = what_signal.value(t).e;
    v.insert(v.end(), wh.begin(), wh.end());
    merged.push_back(ExtVec::unchecked(std::move(v)));
  }
  DisturbanceSignal pair_sig = DisturbanceSignal::piecewise(std::move(cuts), std::move(merged));

  const std::size_t m = E.sys.m;
  auto make_rhs = [&E, m](const ExtVec& ww) -> detail::OdeRhs {
    ExtVec w = ExtVec::unchecked({ww.e.begin(), ww.e.begin() + m});
    ExtVec wh = ExtVec::unchecked({ww.e.begin() + m, ww.e.end()});
    return [&E, w, wh](double, const std::vector<double>& y, std::vector<double>& dy) {
      std::size_t nn = E.sys.n;
      ExtVec x = ExtVec::unchecked({y.begin(), y.begin() + nn});
      ExtVec xh = ExtVec::unchecked({y.begin() + nn, y.end()});
      ExtVec lo = E.d.eval(x, w, xh, wh);
      ExtVec hi = E.d.eval(xh, wh, x, w);
      dy = lo.e;
      dy.insert(dy.end(), hi.e.begin(), hi.e.end());
    };
  };
  detail::InsideFn inside = detail::embedding_inside(E.sys);
  detail::RawTrajectory raw =
      detail::integrate_switched(make_rhs, pair_sig, a0.flat(), T, cfg, inside);
  return detail::to_embedding_trajectory(std::move(raw));
}

}  // namespace mmreach
