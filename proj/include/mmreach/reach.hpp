#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmreach/embed.hpp"
#include "mmreach/parallel.hpp"

namespace mmreach {

namespace detail {

// Rectangle of an embedding sample.  Inversions within tol (integrator noise
// on a degenerate pair) are snapped shut; anything larger is a real order
// violation and surfaces as NotARectangle.
inline HyperRect snap_rect(const EmbeddingPoint& a, double tol = 1e-9) {
  std::vector<double> lo(a.dim()), hi(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    lo[i] = a.x[i];
    hi[i] = a.xhat[i];
    if (lo[i] > hi[i]) {
      if (lo[i] - hi[i] > tol)
        throw NotARectangle("embedding sample lost the order in coordinate " +
                            std::to_string(i + 1));
      lo[i] = hi[i] = 0.5 * (lo[i] + hi[i]);
    }
  }
  return HyperRect::of(ExtVec(std::move(lo)), ExtVec(std::move(hi)));
}

}  // namespace detail

struct ReachResult {
  std::string direction;  // "forward" or "backward"
  double T = 0.0;
  // True when the embedding trajectory stayed inside domain x domain for the
  // whole horizon; the over-approximation is only claimed in that case.
  bool hypothesis_ok = false;
  std::optional<HyperRect> rect;
  std::vector<std::pair<double, HyperRect>> tube;
  EmbeddingTrajectory trajectory;
};

// Over-approximates the forward reachable set of X0 over [0, T] by flowing
// the deterministic embedding from (X0.lo, X0.hi).
inline ReachResult forward_reach(const SystemDef& sys, const DecompositionFn& d,
                                 const HyperRect& X0, double T,
                                 const IntegratorConfig& cfg = {}) {
  if (!X0.is_finite()) throw PreconditionFailed("forward_reach: X0 must be finite");
  if (X0.dim() != sys.n) throw DimensionError("forward_reach: X0 dimension != n");
  if (!rect_subset(X0, sys.domain))
    throw PreconditionFailed("forward_reach: X0 must lie inside the state domain");
  if (T < 0.0) throw ValueError("forward_reach: negative horizon");

  EmbeddingSystem E = make_embedding(sys, d);
  EmbeddingTrajectory tr = flow_embedding(E, EmbeddingPoint::from_rect(X0), T, cfg);
  if (tr.exit == ExitFlag::step_failure)
    throw IntegrationError("forward_reach: integrator failed before the horizon");

  ReachResult r;
  r.direction = "forward";
  r.T = T;
  r.hypothesis_ok = tr.exit == ExitFlag::completed;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    // the final sample of a truncated run may already be outside the domain
    if (!r.hypothesis_ok && k + 1 == tr.size()) break;
    r.tube.emplace_back(tr.times[k], detail::snap_rect(tr.points[k]));
  }
  if (r.hypothesis_ok && !r.tube.empty()) r.rect = r.tube.back().second;
  r.trajectory = std::move(tr);
  return r;
}

// Over-approximates the backward reachable set of X1 over horizon T: every
// state that can reach X1 within T lies in the result.  D must be a
// decomposition of the backward dynamics -F.
inline ReachResult backward_reach(const SystemDef& sys, const DecompositionFn& D,
                                  const HyperRect& X1, double T,
                                  const IntegratorConfig& cfg = {}) {
  ReachResult r = forward_reach(sys.reversed(), D, X1, T, cfg);
  r.direction = "backward";
  return r;
}

struct MonteCarloResult {
  std::size_t requested = 0;
  std::size_t completed = 0;
  std::size_t excluded_domain = 0;  // left the state domain before T
  std::size_t failed = 0;           // integrator gave up
  std::uint64_t seed = 0;
  std::vector<ExtVec> endpoints;    // completed trajectories only, in sample order
  std::optional<HyperRect> hull;    // componentwise hull of the endpoints
};

// Samples trajectories under uniform initial states and piecewise-constant
// disturbance signals.  The hull under-approximates the true reachable set;
// it is the cross-check companion to forward_reach / backward_reach.
inline MonteCarloResult monte_carlo_reach(const SystemDef& sys, const HyperRect& X0, double T,
                                          std::size_t count, std::uint64_t seed,
                                          std::size_t switches = 8,
                                          const IntegratorConfig& cfg = {},
                                          bool backward = false) {
  if (!X0.is_finite()) throw PreconditionFailed("monte_carlo_reach: X0 must be finite");
  if (X0.dim() != sys.n) throw DimensionError("monte_carlo_reach: X0 dimension != n");
  if (!rect_subset(X0, sys.domain))
    throw PreconditionFailed("monte_carlo_reach: X0 must lie inside the state domain");

  const SystemDef run_sys = backward ? sys.reversed() : sys;

  struct Slot {
    int status = 0;  // 0 pending, 1 completed, 2 left domain, 3 failed
    ExtVec endpoint;
  };
  std::vector<Slot> slots(count);

  detail::parallel_for(count, [&](std::size_t i) {
    std::mt19937_64 gen(detail::derive_seed(seed, 2 * i));
    ExtVec x0 = detail::uniform_in_rect(gen, X0);
    DisturbanceSignal sig =
        sys.m == 0 ? DisturbanceSignal::constant(ExtVec())
                   : DisturbanceSignal::random(run_sys.dist_box, T, switches,
                                               detail::derive_seed(seed, 2 * i + 1));
    Trajectory tr = flow_system(run_sys, x0, sig, T, cfg);
    Slot& s = slots[i];
    switch (tr.exit) {
      case ExitFlag::completed:
        s.status = 1;
        s.endpoint = tr.endpoint();
        break;
      case ExitFlag::left_domain: s.status = 2; break;
      case ExitFlag::step_failure: s.status = 3; break;
    }
  });

  MonteCarloResult r;
  r.requested = count;
  r.seed = seed;
  std::vector<double> lo, hi;
  for (auto& s : slots) {
    if (s.status == 2) ++r.excluded_domain;
    if (s.status == 3) ++r.failed;
    if (s.status != 1) continue;
    ++r.completed;
    if (lo.empty()) {
      lo = s.endpoint.e;
      hi = s.endpoint.e;
    } else {
      for (std::size_t j = 0; j < lo.size(); ++j) {
        lo[j] = std::min(lo[j], s.endpoint[j]);
        hi[j] = std::max(hi[j], s.endpoint[j]);
      }
    }
    r.endpoints.push_back(std::move(s.endpoint));
  }
  if (!lo.empty()) r.hull = HyperRect::of(ExtVec(std::move(lo)), ExtVec(std::move(hi)));
  return r;
}

}  // namespace mmreach
