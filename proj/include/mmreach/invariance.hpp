#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmreach/embed.hpp"
#include "mmreach/parallel.hpp"
#include "mmreach/reach.hpp"
#include "mmreach/version.hpp"

namespace mmreach {

// ---------------------------------------------------------------------------
// South set membership
// ---------------------------------------------------------------------------

// Witness that a = (x, xhat) lies in the south set: x <= xhat and the
// embedding field points southeast, 0 <=_SE e(a).  The margin is the worst
// slack over all 3n inequalities; membership requires margin >= -tol.
struct SouthSetWitness {
  EmbeddingPoint point;
  double margin = 0.0;
  bool valid = false;
};

inline SouthSetWitness in_south_set(const EmbeddingSystem& E, const EmbeddingPoint& a,
                                    double tol = 0.0) {
  if (a.dim() != E.n()) throw DimensionError("in_south_set: dimension mismatch");
  if (!E.sys.domain.contains(a.x) || !E.sys.domain.contains(a.xhat))
    throw DomainError("in_south_set: point outside domain x domain");
  ExtVec lo = E.lower(a), hi = E.upper(a);
  if (!lo.all_finite() || !hi.all_finite()) throw EvalError("in_south_set: non-finite field");
  double margin = kInf;
  for (std::size_t i = 0; i < E.n(); ++i) {
    margin = std::min(margin, lo[i]);
    margin = std::min(margin, -hi[i]);
    margin = std::min(margin, a.xhat[i] - a.x[i]);
  }
  SouthSetWitness w;
  w.point = a;
  w.margin = margin;
  w.valid = margin >= -tol;
  return w;
}

// ---------------------------------------------------------------------------
// Embedding equilibria
// ---------------------------------------------------------------------------

enum class EquilibriumMethod { flow, newton };

struct EquilibriumResult {
  EmbeddingPoint point;
  double residual = kInf;  // ||e(point)||_inf
  EquilibriumMethod method = EquilibriumMethod::flow;
  bool in_triangle = false;
  double flow_time = 0.0;      // virtual time integrated (flow method)
  std::size_t iterations = 0;  // newton iterations
};

struct FlowEquilibriumConfig {
  double tol_eq = 1e-9;
  double max_time = 500.0;
  double chunk = 2.0;
  double se_slack = 1e-9;  // relative slack for the monotonicity check
  IntegratorConfig integ;
};

namespace detail {

inline double residual_inf(const EmbeddingSystem& E, const EmbeddingPoint& a) {
  ExtVec e = E.eval(a);
  double r = 0.0;
  for (double v : e.e) r = std::max(r, std::abs(v));
  return r;
}

// a <=_SE b within a relative slack; used between consecutive flow samples.
inline bool se_step_ok(const EmbeddingPoint& a, const EmbeddingPoint& b, double slack) {
  for (std::size_t i = 0; i < a.dim(); ++i) {
    double tx = slack * std::max(1.0, std::abs(a.x[i]));
    double th = slack * std::max(1.0, std::abs(a.xhat[i]));
    if (b.x[i] < a.x[i] - tx) return false;
    if (b.xhat[i] > a.xhat[i] + th) return false;
  }
  return true;
}

}  // namespace detail

// Integrates the embedding until the field residual drops below tol_eq.
// The flow from a south set point is southeast-nondecreasing; that is
// checked en route and a violation aborts the search, since it means the
// start point was not in the south set (or the tolerance is too tight).
inline EquilibriumResult find_equilibrium_flow(const EmbeddingSystem& E, const EmbeddingPoint& a0,
                                               const FlowEquilibriumConfig& cfg = {}) {
  EmbeddingPoint a = a0;
  double t = 0.0;
  double best_res = detail::residual_inf(E, a);
  EmbeddingPoint best = a;

  while (t < cfg.max_time) {
    double horizon = std::min(cfg.chunk, cfg.max_time - t);
    EmbeddingTrajectory tr = flow_embedding(E, a, horizon, cfg.integ);
    for (std::size_t k = 1; k < tr.size(); ++k) {
      if (!detail::se_step_ok(tr.points[k - 1], tr.points[k], cfg.se_slack))
        throw PreconditionFailed(
            "find_equilibrium_flow: flow is not southeast-monotone; the start point does not "
            "appear to lie in the south set");
      double res = detail::residual_inf(E, tr.points[k]);
      if (res < best_res) {
        best_res = res;
        best = tr.points[k];
      }
      if (res <= cfg.tol_eq) {
        EquilibriumResult r;
        r.point = tr.points[k];
        r.residual = res;
        r.method = EquilibriumMethod::flow;
        r.in_triangle = cw_leq(tr.points[k].x, tr.points[k].xhat);
        r.flow_time = t + (tr.times[k] - tr.times[0]);
        return r;
      }
    }
    if (tr.exit == ExitFlag::left_domain)
      throw NoConvergence("find_equilibrium_flow: embedding left the domain", best.flat(),
                          best_res);
    if (tr.exit == ExitFlag::step_failure)
      throw NoConvergence("find_equilibrium_flow: integrator failed", best.flat(), best_res);
    a = tr.endpoint();
    t += horizon;
  }
  throw NoConvergence("find_equilibrium_flow: residual " + std::to_string(best_res) +
                          " after t=" + std::to_string(cfg.max_time),
                      best.flat(), best_res);
}

struct NewtonConfig {
  double tol_eq = 1e-9;
  std::size_t max_iter = 50;
  double fd_step = 1e-6;
  double armijo_c = 1e-4;
  double lambda_min = 1e-10;
};

namespace detail {

inline Eigen::MatrixXd embedding_jacobian(const EmbeddingSystem& E, const std::vector<double>& a,
                                          double fd_step) {
  const std::size_t dim = a.size();
  Eigen::MatrixXd J(dim, dim);
  std::vector<double> work = a;
  for (std::size_t j = 0; j < dim; ++j) {
    double v0 = work[j];
    double h = fd_step * std::max(1.0, std::abs(v0));
    work[j] = v0 + h;
    std::vector<double> fp = E.eval_flat(work);
    work[j] = v0 - h;
    std::vector<double> fm = E.eval_flat(work);
    work[j] = v0;
    for (std::size_t i = 0; i < dim; ++i) J(i, j) = (fp[i] - fm[i]) / (2.0 * h);
  }
  return J;
}

}  // namespace detail

// Damped Newton iteration on e(a) = 0 with a finite-difference Jacobian and
// Armijo backtracking on ||e||^2.
inline EquilibriumResult solve_equilibrium_newton(const EmbeddingSystem& E,
                                                  const EmbeddingPoint& guess,
                                                  const NewtonConfig& cfg = {}) {
  const std::size_t dim = 2 * E.n();
  std::vector<double> a = guess.flat();

  auto residual_vec = [&](const std::vector<double>& p) { return E.eval_flat(p); };
  auto norm2 = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
  };
  auto norm_inf = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
  };

  std::vector<double> r = residual_vec(a);
  double best_res = norm_inf(r);
  std::vector<double> best = a;

  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    double rinf = norm_inf(r);
    if (rinf < best_res) {
      best_res = rinf;
      best = a;
    }
    if (rinf <= cfg.tol_eq) {
      EmbeddingPoint p = EmbeddingPoint::from_flat(a);
      EquilibriumResult out;
      out.point = p;
      out.residual = rinf;
      out.method = EquilibriumMethod::newton;
      out.in_triangle = cw_leq(p.x, p.xhat);
      out.iterations = it;
      return out;
    }
    if (!std::isfinite(rinf) || rinf > 1e12)
      throw NoConvergence("solve_equilibrium_newton: iteration diverged", best, best_res);

    Eigen::MatrixXd J = detail::embedding_jacobian(E, a, cfg.fd_step);
    Eigen::VectorXd rv(dim);
    for (std::size_t i = 0; i < dim; ++i) rv(static_cast<Eigen::Index>(i)) = r[i];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible())
      throw EvalError("solve_equilibrium_newton: singular Jacobian at the current iterate");
    Eigen::VectorXd step = lu.solve(-rv);

    double phi0 = norm2(r);
    double lambda = 1.0;
    std::vector<double> trial(dim);
    for (;;) {
      for (std::size_t i = 0; i < dim; ++i)
        trial[i] = a[i] + lambda * step(static_cast<Eigen::Index>(i));
      std::vector<double> rt = residual_vec(trial);
      bool finite = true;
      for (double v : rt)
        if (!std::isfinite(v)) finite = false;
      if (finite && norm2(rt) <= (1.0 - 2.0 * cfg.armijo_c * lambda) * phi0) {
        a = trial;
        r = rt;
        break;
      }
      lambda *= 0.5;
      if (lambda < cfg.lambda_min)
        throw NoConvergence("solve_equilibrium_newton: line search stalled", best, best_res);
    }
  }
  throw NoConvergence("solve_equilibrium_newton: out of iterations", best, best_res);
}

// ---------------------------------------------------------------------------
// Stability and attractivity evidence
// ---------------------------------------------------------------------------

struct StabilityInfo {
  std::vector<std::pair<double, double>> eigenvalues;  // (re, im)
  double max_real_part = kInf;
  bool stable = false;  // every real part < -1e-6
};

inline StabilityInfo embedding_stability(const EmbeddingSystem& E, const EmbeddingPoint& eq,
                                         double fd_step = 1e-6) {
  Eigen::MatrixXd J = detail::embedding_jacobian(E, eq.flat(), fd_step);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(J);
  StabilityInfo info;
  info.max_real_part = -kInf;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    std::complex<double> ev = solver.eigenvalues()(i);
    info.eigenvalues.emplace_back(ev.real(), ev.imag());
    info.max_real_part = std::max(info.max_real_part, ev.real());
  }
  info.stable = info.max_real_part < -1e-6;
  return info;
}

// Sampled convergence evidence around an embedding equilibrium.  This is
// empirical: it reports fractions, it proves nothing.
struct AttractivityParams {
  std::size_t samples = 100;
  double horizon = 20.0;
  double ball_radius = 0.05;
  HyperRect region;  // n-dim box for starts; pairs are ordered componentwise
  std::uint64_t seed = 1;
  std::size_t switches = 8;
  IntegratorConfig integ;
};

struct AttractivityReport {
  std::size_t embedding_samples = 0;
  std::size_t embedding_converged = 0;
  std::size_t system_samples = 0;
  std::size_t system_converged = 0;
  double fraction_embedding = 0.0;
  double fraction_system = 0.0;
  double ball_radius = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  StabilityInfo stability;
};

inline AttractivityReport check_attractivity(const EmbeddingSystem& E, const EmbeddingPoint& eq,
                                             const AttractivityParams& p) {
  if (p.region.dim() != E.n())
    throw DimensionError("check_attractivity: region dimension != n");
  if (!p.region.is_finite()) throw ValueError("check_attractivity: region must be finite");

  AttractivityReport rep;
  rep.ball_radius = p.ball_radius;
  rep.horizon = p.horizon;
  rep.seed = p.seed;
  rep.embedding_samples = p.samples;
  rep.system_samples = p.samples;

  HyperRect target = detail::snap_rect(eq).deflated(-p.ball_radius);

  // Embedding flows from ordered pairs drawn inside the region.
  std::vector<std::uint8_t> emb_ok(p.samples, 0);
  detail::parallel_for(p.samples, [&](std::size_t i) {
    std::mt19937_64 gen(detail::derive_seed(p.seed, i));
    ExtVec u = detail::uniform_in_rect(gen, p.region);
    ExtVec v = detail::uniform_in_rect(gen, p.region);
    EmbeddingPoint a(cw_min(u, v), cw_max(u, v));
    EmbeddingTrajectory tr = flow_embedding(E, a, p.horizon, p.integ);
    if (tr.exit != ExitFlag::completed) return;
    const EmbeddingPoint& end = tr.endpoint();
    bool near = true;
    for (std::size_t j = 0; j < E.n(); ++j) {
      if (std::abs(end.x[j] - eq.x[j]) > p.ball_radius) near = false;
      if (std::abs(end.xhat[j] - eq.xhat[j]) > p.ball_radius) near = false;
    }
    emb_ok[i] = near ? 1 : 0;
  });

  // System trajectories under random signals: enter the inflated rectangle
  // and stay there.
  std::vector<std::uint8_t> sys_ok(p.samples, 0);
  detail::parallel_for(p.samples, [&](std::size_t i) {
    std::mt19937_64 gen(detail::derive_seed(p.seed ^ 0x5b5b5b5bULL, i));
    ExtVec x0 = detail::uniform_in_rect(gen, p.region);
    DisturbanceSignal sig =
        E.sys.m == 0
            ? DisturbanceSignal::constant(ExtVec())
            : DisturbanceSignal::random(E.sys.dist_box, p.horizon, p.switches,
                                        detail::derive_seed(p.seed ^ 0xa7a7a7a7ULL, i));
    Trajectory tr = flow_system(E.sys, x0, sig, p.horizon, p.integ);
    if (tr.exit != ExitFlag::completed) return;
    bool entered = false, stayed = true;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      bool inside = target.contains(tr.states[k]);
      if (inside && !entered) entered = true;
      if (entered && !inside) stayed = false;
    }
    sys_ok[i] = (entered && stayed) ? 1 : 0;
  });

  for (std::size_t i = 0; i < p.samples; ++i) {
    rep.embedding_converged += emb_ok[i];
    rep.system_converged += sys_ok[i];
  }
  rep.fraction_embedding =
      p.samples ? static_cast<double>(rep.embedding_converged) / p.samples : 0.0;
  rep.fraction_system = p.samples ? static_cast<double>(rep.system_converged) / p.samples : 0.0;
  rep.stability = embedding_stability(E, eq);
  return rep;
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

struct Certificate {
  std::string kind;  // invariant-rect | attractive-rect | invariant-complement
  HyperRect rect;
  EmbeddingPoint witness;
  double margin = 0.0;
  double residual = std::numeric_limits<double>::quiet_NaN();
  double tol = 0.0;
  double tol_eq = std::numeric_limits<double>::quiet_NaN();
  std::string system_fingerprint;
  std::string tool_version = kToolVersion;
  std::vector<std::uint64_t> seeds;
  std::string notes;
  std::optional<AttractivityReport> attractivity;
};

// Robust forward invariance of [[a]] from a south set witness.  tol covers
// both interior witnesses (margin clearly positive) and equilibria (margin
// within residual noise of zero); refusal carries the margin.  Inversions
// below the snap tolerance are collapsed, anything larger is refused.
inline Certificate certify_invariant_rect(const EmbeddingSystem& E, const EmbeddingPoint& a,
                                          double tol = 0.0) {
  HyperRect rect;
  try {
    rect = detail::snap_rect(a);
  } catch (const NotARectangle&) {
    throw CertificationRefused("certify_invariant_rect: witness is not ordered (x !<= xhat)");
  }
  EmbeddingPoint witness = EmbeddingPoint::from_rect(rect);
  SouthSetWitness w = in_south_set(E, witness, tol);
  if (!w.valid)
    throw CertificationRefused("certify_invariant_rect: witness margin " +
                               std::to_string(w.margin) + " below -tol");
  Certificate c;
  c.kind = "invariant-rect";
  c.rect = rect;
  c.witness = witness;
  c.margin = w.margin;
  c.tol = tol;
  c.system_fingerprint = system_fingerprint(E.sys);
  return c;
}

// Invariance plus attractivity of the equilibrium rectangle.  Requires the
// linearization to be stable; the basin evidence stays empirical and is
// attached to the certificate.
inline Certificate certify_attractive_rect(const EmbeddingSystem& E, const EquilibriumResult& eq,
                                           const AttractivityReport& evidence, double tol = 0.0) {
  if (!eq.in_triangle)
    throw CertificationRefused("certify_attractive_rect: equilibrium is not ordered");
  double tol_used = std::max(tol, 2.0 * eq.residual);
  Certificate c = certify_invariant_rect(E, eq.point, tol_used);
  if (!evidence.stability.stable)
    throw CertificationRefused(
        "certify_attractive_rect: embedding linearization is not stable (max real part " +
        std::to_string(evidence.stability.max_real_part) + ")");
  c.kind = "attractive-rect";
  c.residual = eq.residual;
  c.seeds = {evidence.seed};
  c.attractivity = evidence;
  c.notes = "attractivity basin evidence is sampled, not proven";
  return c;
}

// Robust forward invariance of the complement domain \ [[a]], certified on
// the backward embedding.  D must be a decomposition of -F.
inline Certificate certify_complement_invariant(const SystemDef& sys, const DecompositionFn& D,
                                                const EmbeddingPoint& a, double tol = 0.0) {
  EmbeddingSystem Eb = make_embedding(sys.reversed(), D);
  HyperRect rect;
  try {
    rect = detail::snap_rect(a);
  } catch (const NotARectangle&) {
    throw CertificationRefused("certify_complement_invariant: witness is not ordered");
  }
  EmbeddingPoint witness = EmbeddingPoint::from_rect(rect);
  SouthSetWitness w = in_south_set(Eb, witness, tol);
  if (!w.valid)
    throw CertificationRefused("certify_complement_invariant: witness margin " +
                               std::to_string(w.margin) + " below -tol");
  Certificate c;
  c.kind = "invariant-complement";
  c.rect = rect;
  c.witness = witness;
  c.margin = w.margin;
  c.tol = tol;
  c.system_fingerprint = system_fingerprint(sys);
  c.notes = "certified set is the state domain minus the rectangle";
  return c;
}

// ---------------------------------------------------------------------------
// Monotone corollary
// ---------------------------------------------------------------------------

struct MonotoneCorollaryResult {
  ExtVec x_eq, xhat_eq;
  double residual_lo = kInf, residual_hi = kInf;
  Certificate cert;
};

namespace detail {

inline std::pair<ExtVec, double> flow_to_rest(const SystemDef& sys, const ExtVec& x0,
                                              const ExtVec& w, double tol_eq, double max_time,
                                              const IntegratorConfig& integ) {
  ExtVec x = x0;
  double t = 0.0;
  double best = kInf;
  while (t < max_time) {
    Trajectory tr = flow_system(sys, x, DisturbanceSignal::constant(w), std::min(2.0, max_time - t),
                                integ);
    for (std::size_t k = 0; k < tr.size(); ++k) {
      ExtVec f = sys.field(tr.states[k], w);
      double r = 0.0;
      for (double v : f.e) r = std::max(r, std::abs(v));
      best = std::min(best, r);
      if (r <= tol_eq) return {tr.states[k], r};
    }
    if (tr.exit != ExitFlag::completed)
      throw NoConvergence("check_monotone_corollary: flow left the domain or failed",
                          tr.endpoint().e, best);
    x = tr.endpoint();
    t += 2.0;
  }
  throw NoConvergence("check_monotone_corollary: no rest point within the time budget", x.e, best);
}

}  // namespace detail

// For a monotone system, the equilibria of the extreme constant-disturbance
// flows bound an invariant and attractive rectangle [x_eq, xhat_eq].  The
// minimality of that rectangle is recorded as a note, not checked.
inline MonotoneCorollaryResult check_monotone_corollary(const SystemDef& sys,
                                                        const DecompositionFn& d,
                                                        std::optional<ExtVec> x0 = std::nullopt,
                                                        double tol_eq = 1e-9,
                                                        double max_time = 500.0,
                                                        const IntegratorConfig& integ = {}) {
  if (d.provenance != Provenance::monotone)
    throw PreconditionFailed("check_monotone_corollary: needs the monotone decomposition d = F");
  ExtVec start = x0 ? *x0 : detail::sampling_box(sys.domain).center();

  auto [lo_eq, res_lo] =
      detail::flow_to_rest(sys, start, sys.dist_box.lo, tol_eq, max_time, integ);
  auto [hi_eq, res_hi] =
      detail::flow_to_rest(sys, start, sys.dist_box.hi, tol_eq, max_time, integ);

  // The flows approach the ordered pair of rest points from one start; snap
  // away inversions within the residual tolerance.
  for (std::size_t i = 0; i < sys.n; ++i) {
    if (lo_eq[i] > hi_eq[i]) {
      if (lo_eq[i] - hi_eq[i] > 4.0 * tol_eq)
        throw CertificationRefused(
            "check_monotone_corollary: rest points are not ordered; the system does not look "
            "monotone");
      double mid = 0.5 * (lo_eq[i] + hi_eq[i]);
      lo_eq[i] = hi_eq[i] = mid;
    }
  }

  EmbeddingSystem E = make_embedding(sys, d);
  EmbeddingPoint eq_pair(lo_eq, hi_eq);
  double tol_used = std::max(res_lo, res_hi) * 2.0 + tol_eq;
  Certificate c = certify_invariant_rect(E, eq_pair, tol_used);
  c.kind = "attractive-rect";
  c.residual = std::max(res_lo, res_hi);
  c.tol_eq = tol_eq;
  c.notes =
      "monotone flow construction; no proper subrectangle is robustly forward invariant "
      "(recorded, not checked)";

  MonotoneCorollaryResult out;
  out.x_eq = lo_eq;
  out.xhat_eq = hi_eq;
  out.residual_lo = res_lo;
  out.residual_hi = res_hi;
  out.cert = std::move(c);
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory order diagnostics
// ---------------------------------------------------------------------------

struct OrderCheck {
  bool ok = true;
  double worst = 0.0;   // most negative slack seen
  double at_time = 0.0;
  std::size_t index = 0;
};

// x(t) <= xhat(t) at every sample, within slack.
inline OrderCheck check_triangle(const EmbeddingTrajectory& tr, double slack = 1e-9) {
  OrderCheck c;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    for (std::size_t i = 0; i < tr.points[k].dim(); ++i) {
      double gap = tr.points[k].xhat[i] - tr.points[k].x[i];
      if (gap < c.worst) {
        c.worst = gap;
        c.at_time = tr.times[k];
        c.index = k;
      }
      if (gap < -slack) c.ok = false;
    }
  }
  return c;
}

// Southeast order between two trajectories sharing sample times.
inline OrderCheck check_se_order(const EmbeddingTrajectory& a, const EmbeddingTrajectory& b,
                                 double slack = 1e-9) {
  OrderCheck c;
  std::size_t count = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t i = 0; i < a.points[k].dim(); ++i) {
      double s1 = b.points[k].x[i] - a.points[k].x[i];
      double s2 = a.points[k].xhat[i] - b.points[k].xhat[i];
      double worst = std::min(s1, s2);
      if (worst < c.worst) {
        c.worst = worst;
        c.at_time = a.times[k];
        c.index = k;
      }
      if (worst < -slack) c.ok = false;
    }
  }
  return c;
}

}  // namespace mmreach
