#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "mmreach/geometry.hpp"
#include "mmreach/rng.hpp"
#include "mmreach/system.hpp"

namespace mmreach {

enum class ExitFlag { completed, left_domain, step_failure };

inline const char* to_string(ExitFlag f) {
  switch (f) {
    case ExitFlag::completed: return "completed";
    case ExitFlag::left_domain: return "left-domain";
    case ExitFlag::step_failure: return "step-failure";
  }
  return "?";
}

struct IntegratorConfig {
  enum class Method { rkf45, rk4 };
  Method method = Method::rkf45;
  double rtol = 1e-8;
  double atol = 1e-10;
  double fixed_step = 1e-2;          // rk4 only
  double max_step = kInf;
  std::size_t max_steps = 2000000;   // across one flow call

  friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ExtVec> states;
  ExitFlag exit = ExitFlag::completed;

  std::size_t size() const { return times.size(); }
  double end_time() const { return times.back(); }
  const ExtVec& endpoint() const { return states.back(); }
};

// Piecewise-constant disturbance signal on [0, T-ish); value(t) is the value
// of the most recent switch at or before t.
struct DisturbanceSignal {
  std::vector<double> switch_times;  // ascending, first entry 0
  std::vector<ExtVec> values;

  static DisturbanceSignal constant(ExtVec v) {
    DisturbanceSignal s;
    s.switch_times = {0.0};
    s.values = {std::move(v)};
    return s;
  }

  static DisturbanceSignal piecewise(std::vector<double> times, std::vector<ExtVec> vals) {
    if (times.empty() || times.size() != vals.size())
      throw ValueError("DisturbanceSignal: need matching nonempty times/values");
    if (times.front() != 0.0) throw ValueError("DisturbanceSignal: first switch must be t=0");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw ValueError("DisturbanceSignal: times must increase");
    for (std::size_t i = 1; i < vals.size(); ++i)
      if (vals[i].size() != vals[0].size()) throw DimensionError("DisturbanceSignal: value sizes");
    DisturbanceSignal s;
    s.switch_times = std::move(times);
    s.values = std::move(vals);
    return s;
  }

  // Uniform values in box, switches equally spaced over [0, T].
  static DisturbanceSignal random(const HyperRect& box, double T, std::size_t switches,
                                  std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::size_t pieces = std::max<std::size_t>(1, switches);
    std::vector<double> times(pieces);
    std::vector<ExtVec> vals(pieces);
    for (std::size_t i = 0; i < pieces; ++i) {
      times[i] = T * static_cast<double>(i) / static_cast<double>(pieces);
      vals[i] = detail::uniform_in_rect(gen, box);
    }
    return piecewise(std::move(times), std::move(vals));
  }

  std::size_t dim() const { return values.empty() ? 0 : values[0].size(); }

  const ExtVec& value(double t) const {
    std::size_t k = 0;
    while (k + 1 < switch_times.size() && switch_times[k + 1] <= t) ++k;
    return values[k];
  }

  // Time-reversed signal on [0, T]: reversed(T).value(t) == value(T - t)
  // up to the convention at switch instants.
  DisturbanceSignal reversed(double T) const {
    std::vector<double> times;
    std::vector<ExtVec> vals;
    times.push_back(0.0);
    vals.push_back(value(T));
    for (std::size_t j = switch_times.size(); j-- > 0;) {
      double t = T - switch_times[j];
      if (t <= 0.0 || t >= T) continue;
      times.push_back(t);
      vals.push_back(j == 0 ? values[0] : values[j - 1]);
    }
    return piecewise(std::move(times), std::move(vals));
  }

  // Switch instants strictly inside (t0, t1), ascending.
  std::vector<double> switches_in(double t0, double t1) const {
    std::vector<double> out;
    for (double t : switch_times)
      if (t > t0 && t < t1) out.push_back(t);
    return out;
  }

  bool values_within(const HyperRect& box) const {
    for (const auto& v : values)
      if (!box.contains(v)) return false;
    return true;
  }
};

namespace detail {

using OdeRhs = std::function<void(double t, const std::vector<double>& y, std::vector<double>& dy)>;
using InsideFn = std::function<bool(const std::vector<double>&)>;

struct RawTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  ExitFlag exit = ExitFlag::completed;
  std::size_t steps_taken = 0;
};

inline bool finite_all(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Runge-Kutta-Fehlberg 4(5) with the classic tableau; local extrapolation
// (the 5th order value is kept).  Samples are recorded at every accepted step.
inline RawTrajectory rkf45(const OdeRhs& rhs, std::vector<double> y, double t0, double t1,
                           const IntegratorConfig& cfg, const InsideFn& inside,
                           std::size_t step_budget) {
  const std::size_t n = y.size();
  RawTrajectory out;
  out.times.push_back(t0);
  out.states.push_back(y);

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), tmp(n), y5(n), y4(n);
  double t = t0;

  rhs(t, y, k1);
  double ynorm = 0.0, fnorm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ynorm = std::max(ynorm, std::abs(y[i]));
    fnorm = std::max(fnorm, std::abs(k1[i]));
  }
  double h = std::min({t1 - t0, cfg.max_step, 0.01 * (1.0 + ynorm) / (1.0 + fnorm)});
  h = std::max(h, 1e-12);

  while (t < t1) {
    if (out.steps_taken >= step_budget) {
      out.exit = ExitFlag::step_failure;
      return out;
    }
    h = std::min(h, t1 - t);
    double hmin = 1e-14 * std::max(1.0, std::abs(t));
    if (h < hmin) {
      out.exit = ExitFlag::step_failure;
      return out;
    }

    rhs(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (k1[i] / 4.0);
    rhs(t + h / 4.0, tmp, k2);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (3.0 / 32.0 * k1[i] + 9.0 / 32.0 * k2[i]);
    rhs(t + 3.0 * h / 8.0, tmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (1932.0 / 2197.0 * k1[i] - 7200.0 / 2197.0 * k2[i] +
                           7296.0 / 2197.0 * k3[i]);
    rhs(t + 12.0 * h / 13.0, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (439.0 / 216.0 * k1[i] - 8.0 * k2[i] + 3680.0 / 513.0 * k3[i] -
                           845.0 / 4104.0 * k4[i]);
    rhs(t + h, tmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = y[i] + h * (-8.0 / 27.0 * k1[i] + 2.0 * k2[i] - 3544.0 / 2565.0 * k3[i] +
                           1859.0 / 4104.0 * k4[i] - 11.0 / 40.0 * k5[i]);
    rhs(t + h / 2.0, tmp, k6);

    bool ok = true;
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y5[i] = y[i] + h * (16.0 / 135.0 * k1[i] + 6656.0 / 12825.0 * k3[i] +
                          28561.0 / 56430.0 * k4[i] - 9.0 / 50.0 * k5[i] + 2.0 / 55.0 * k6[i]);
      y4[i] = y[i] + h * (25.0 / 216.0 * k1[i] + 1408.0 / 2565.0 * k3[i] +
                          2197.0 / 4104.0 * k4[i] - 1.0 / 5.0 * k5[i]);
      if (!std::isfinite(y5[i]) || !std::isfinite(y4[i])) {
        ok = false;
        break;
      }
      double scale = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err = std::max(err, std::abs(y5[i] - y4[i]) / scale);
    }

    ++out.steps_taken;
    if (!ok) {
      h *= 0.25;
      continue;
    }
    if (err <= 1.0) {
      t += h;
      y = y5;
      out.times.push_back(t);
      out.states.push_back(y);
      if (inside && !inside(y)) {
        out.exit = ExitFlag::left_domain;
        return out;
      }
    }
    double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::clamp(grow, 0.2, 5.0);
    h = std::min(h, cfg.max_step);
  }
  return out;
}

inline RawTrajectory rk4_fixed(const OdeRhs& rhs, std::vector<double> y, double t0, double t1,
                               const IntegratorConfig& cfg, const InsideFn& inside,
                               std::size_t step_budget) {
  const std::size_t n = y.size();
  RawTrajectory out;
  out.times.push_back(t0);
  out.states.push_back(y);
  if (cfg.fixed_step <= 0.0) throw ValueError("IntegratorConfig: fixed_step must be positive");

  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  double t = t0;
  while (t < t1) {
    if (out.steps_taken >= step_budget) {
      out.exit = ExitFlag::step_failure;
      return out;
    }
    double h = std::min(cfg.fixed_step, t1 - t);
    rhs(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(t + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(t + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(t + h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!finite_all(y)) {
      out.exit = ExitFlag::step_failure;
      return out;
    }
    t += h;
    ++out.steps_taken;
    out.times.push_back(t);
    out.states.push_back(y);
    if (inside && !inside(y)) {
      out.exit = ExitFlag::left_domain;
      return out;
    }
  }
  return out;
}

inline RawTrajectory integrate_segment(const OdeRhs& rhs, std::vector<double> y0, double t0,
                                       double t1, const IntegratorConfig& cfg,
                                       const InsideFn& inside, std::size_t step_budget) {
  if (cfg.method == IntegratorConfig::Method::rk4)
    return rk4_fixed(rhs, std::move(y0), t0, t1, cfg, inside, step_budget);
  return rkf45(rhs, std::move(y0), t0, t1, cfg, inside, step_budget);
}

// Integrates across disturbance switch instants, restarting at each so the
// right-hand side is smooth within every segment.
inline RawTrajectory integrate_switched(
    const std::function<OdeRhs(const ExtVec&)>& make_rhs, const DisturbanceSignal& sig,
    std::vector<double> y0, double T, const IntegratorConfig& cfg, const InsideFn& inside) {
  std::vector<double> cuts = {0.0};
  for (double s : sig.switches_in(0.0, T)) cuts.push_back(s);
  cuts.push_back(T);

  RawTrajectory full;
  full.times.push_back(0.0);
  full.states.push_back(y0);
  std::size_t budget = cfg.max_steps;

  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    double a = cuts[seg], b = cuts[seg + 1];
    if (!(b > a)) continue;
    OdeRhs rhs = make_rhs(sig.value(0.5 * (a + b)));
    RawTrajectory part = integrate_segment(rhs, full.states.back(), a, b, cfg, inside,
                                           budget - full.steps_taken);
    for (std::size_t i = 1; i < part.times.size(); ++i) {
      full.times.push_back(part.times[i]);
      full.states.push_back(std::move(part.states[i]));
    }
    full.steps_taken += part.steps_taken;
    if (part.exit != ExitFlag::completed) {
      full.exit = part.exit;
      return full;
    }
  }
  return full;
}

inline Trajectory to_trajectory(RawTrajectory raw) {
  Trajectory tr;
  tr.times = std::move(raw.times);
  tr.states.reserve(raw.states.size());
  for (auto& s : raw.states) tr.states.push_back(ExtVec::unchecked(std::move(s)));
  tr.exit = raw.exit;
  return tr;
}

}  // namespace detail

// Flows  xdot = F(x, w(t))  from x0 over [0, T].  The trajectory is truncated
// with exit flag left_domain if a sample leaves the state domain.
inline Trajectory flow_system(const SystemDef& sys, const ExtVec& x0,
                              const DisturbanceSignal& w_signal, double T,
                              const IntegratorConfig& cfg = {}) {
  if (T < 0.0) throw ValueError("flow_system: negative horizon");
  if (x0.size() != sys.n) throw DimensionError("flow_system: x0 length != n");
  if (!x0.all_finite()) throw ValueError("flow_system: x0 must be finite");
  if (!sys.domain.contains(x0)) throw DomainError("flow_system: x0 outside domain");
  if (w_signal.dim() != sys.m && !(sys.m == 0 && w_signal.values.empty()))
    throw DimensionError("flow_system: disturbance signal dimension != m");
  if (!w_signal.values_within(sys.dist_box))
    throw DomainError("flow_system: signal value outside disturbance box");

  auto make_rhs = [&sys](const ExtVec& w) -> detail::OdeRhs {
    return [&sys, w](double, const std::vector<double>& y, std::vector<double>& dy) {
      ExtVec f = sys.field(ExtVec::unchecked(std::vector<double>(y)), w);
      dy = f.e;
    };
  };
  detail::InsideFn inside = [&sys](const std::vector<double>& y) {
    for (std::size_t i = 0; i < sys.n; ++i)
      if (y[i] < sys.domain.lo[i] || y[i] > sys.domain.hi[i]) return false;
    return true;
  };
  auto sig = sys.m == 0 ? DisturbanceSignal::constant(ExtVec()) : w_signal;
  return detail::to_trajectory(detail::integrate_switched(make_rhs, sig, x0.e, T, cfg, inside));
}

}  // namespace mmreach
