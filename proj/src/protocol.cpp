#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "catfield/state_engineering.hpp"

namespace catfield {

namespace {

constexpr double kPi = std::numbers::pi;

// Bisection on a sign change of f between a and b (f(a), f(b) of opposite sign).
template <class F>
double bisect(const F& f, double a, double b, double fa) {
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

double branch_weighted_mean_n(const BranchSample& s1, const BranchSample& s2, const ProtocolConfig& p) {
  auto n_of = [&p](const BranchSample& s) {
    const cplx a = s.mu * p.alpha + s.nu * std::conj(p.alpha) + s.c;
    return std::norm(a) + std::norm(s.nu);
  };
  return std::norm(p.c1) * n_of(s1) + std::norm(p.c2) * n_of(s2);
}

}  // namespace

DriveConfig headline_drive() {
  DriveConfig c;
  c.omega = 2.0 * kPi * 51.1e9;
  c.omega0 = 0.0;
  c.chi = 6.5 * kPi * 1e4;
  c.kappa = 0.05 * c.chi;
  c.eta_slope = -2.0 * c.omega;
  c.eta_offset = 0.5 * kPi;
  c.t0 = 0.0;
  c.t2 = 2e-4;
  c.t_end = 2e-4;
  c.frame = Frame::drive;

  // Theta as a function of the residence time with t2 held fixed; the crossing
  // nearest 1e-4 s wins.
  auto theta_at = [&c](double tau) {
    DriveConfig d = c;
    d.t1 = d.t2 - tau;
    const SqueezeSample s = analytic_trajectory_point(d, Branch::one, d.t1);
    const WeakCouplingSolution w1(d, Branch::one, s.r, s.phi, d.t1);
    const WeakCouplingSolution w2(d, Branch::two, s.r, s.phi, d.t1);
    return wrap_angle(w1.at(d.t2).phi - w2.at(d.t2).phi);
  };
  const double nominal = 1e-4;
  const double span = 2.0 * kPi / (4.0 * c.chi);  // about one turn of Theta
  const int n = 64;
  double best = nominal, best_dist = std::numeric_limits<double>::infinity();
  double prev_tau = nominal - span, prev = theta_at(prev_tau);
  for (int k = 1; k <= n; ++k) {
    const double t = nominal - span + 2.0 * span * k / n;
    const double g = theta_at(t);
    if ((g <= 0.0) != (prev <= 0.0) && std::abs(g - prev) < kPi) {
      const double root = bisect(theta_at, prev_tau, t, prev);
      if (std::abs(root - nominal) < best_dist) {
        best = root;
        best_dist = std::abs(root - nominal);
      }
    }
    prev_tau = t;
    prev = g;
  }
  c.t1 = c.t2 - best;
  return c;
}

ProtocolConfig headline_protocol() {
  ProtocolConfig p;
  p.alpha = std::sqrt(2.0);
  p.detected_state = 2;
  p.target_theta = 0.0;
  return p;
}

SearchResult protocol_search(const DriveConfig& cfg, const ProtocolConfig& protocol, const SearchTargets& targets,
                             const SearchOptions& opts) {
  cfg.validate();
  protocol.validate();
  for (Branch b : {Branch::one, Branch::two}) {
    if (classify_regime(cfg, b).regime != RegimeClass::weak) {
      throw PreconditionError(std::string("protocol search needs weak coupling on both branches, branch ") +
                              std::to_string(static_cast<int>(b)) + " is " + regime_name(classify_regime(cfg, b).regime));
    }
  }

  // Step 1: atom residence time for the target Theta.
  const SqueezeSample at_t1 = analytic_trajectory_point(cfg, Branch::one, cfg.t1);
  const WeakCouplingSolution w1(cfg, Branch::one, at_t1.r, at_t1.phi, cfg.t1);
  const WeakCouplingSolution w2(cfg, Branch::two, at_t1.r, at_t1.phi, cfg.t1);
  auto theta_of = [&](double tau) { return wrap_angle(w1.at(cfg.t1 + tau).phi - w2.at(cfg.t1 + tau).phi); };
  auto gap = [&](double tau) { return wrap_angle(theta_of(tau) - targets.theta); };

  if (opts.tau_min < 0.0) throw PreconditionError("tau_min must be non-negative");
  const double tau_min = opts.tau_min;
  const double tau_max = opts.tau_max > 0.0 ? opts.tau_max : tau_min + 2.0 * std::max(w1.period(), w2.period());
  if (!(tau_max > tau_min)) throw PreconditionError("tau_max must exceed tau_min");
  const int n = std::max(opts.scan_points, 16);
  // At tau = 0 both branches coincide, so Theta = 0 there trivially; the scan
  // starts one step in.
  double prev_tau = tau_min + (tau_max - tau_min) / n, prev_gap = gap(prev_tau);
  double lo = theta_of(prev_tau), hi = lo;
  double tau = std::numeric_limits<double>::quiet_NaN();
  if (std::abs(prev_gap) <= 1e-15) tau = prev_tau;
  for (int k = 2; k <= n && std::isnan(tau); ++k) {
    const double t = tau_min + (tau_max - tau_min) * k / n;
    const double g = gap(t);
    const double th = theta_of(t);
    lo = std::min(lo, th);
    hi = std::max(hi, th);
    // A crossing, not a wrap-around jump of the angle difference.
    if ((g <= 0.0) != (prev_gap <= 0.0) && std::abs(g - prev_gap) < kPi) {
      tau = bisect(gap, prev_tau, t, prev_gap);
    }
    prev_tau = t;
    prev_gap = g;
  }
  if (std::isnan(tau)) {
    throw InfeasibleTarget("target Theta=" + std::to_string(targets.theta) +
                               " outside the reachable range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                               "] of the weak-coupling oscillation",
                           lo, hi);
  }

  SearchResult res{cfg, protocol, 0.0, 0.0, lo, hi};
  const double tail = cfg.t_end - cfg.t2;
  res.drive.t2 = cfg.t1 + tau;
  res.drive.t_end = res.drive.t2 + tail;
  res.theta_achieved = theta_of(tau);
  if (std::abs(wrap_angle(res.theta_achieved - targets.theta)) > opts.theta_tol) {
    throw Error("Theta root finding did not converge");
  }

  // Step 2: duration of the final resonant stage for the photon number.
  if (targets.mean_n > 0.0) {
    DriveConfig d = res.drive;
    // Scan until the resonant stage alone would add r = 12.
    const double step = 0.01 / std::max(cfg.kappa, 1e-300);
    const int max_steps = 600;
    d.t_end = d.t2 + step * max_steps;
    std::vector<double> times;
    for (int k = 0; k <= max_steps; ++k) times.push_back(d.t2 + step * k);
    const BranchEvolution e1 = evolve_branch(d, Branch::one, times, opts.prepare.ode);
    const BranchEvolution e2 = evolve_branch(d, Branch::two, times, opts.prepare.ode);
    auto estimate_at = [&](std::size_t k) {
      return branch_weighted_mean_n(e1.samples[k], e2.samples[k], protocol) - targets.mean_n;
    };
    const double first = estimate_at(0);
    if (first > targets.mean_n * opts.mean_n_rel_tol) {
      throw InfeasibleTarget("mean photon number at t2 already exceeds the target", first + targets.mean_n,
                             std::numeric_limits<double>::infinity());
    }
    std::size_t k_hi = 0;
    for (std::size_t k = 1; k < times.size(); ++k) {
      if (estimate_at(k) >= 0.0) {
        k_hi = k;
        break;
      }
    }
    if (k_hi == 0 && first < 0.0) {
      throw InfeasibleTarget("mean photon number target not reached within the scanned pump duration",
                             first + targets.mean_n, estimate_at(times.size() - 1) + targets.mean_n);
    }
    auto estimate = [&](double t_end) {
      DriveConfig dd = d;
      dd.t_end = t_end;
      const BranchSample s1 = evolve_branch(dd, Branch::one, {t_end}, opts.prepare.ode).samples.back();
      const BranchSample s2 = evolve_branch(dd, Branch::two, {t_end}, opts.prepare.ode).samples.back();
      return branch_weighted_mean_n(s1, s2, protocol) - targets.mean_n;
    };
    double t_end = k_hi == 0 ? d.t2 : bisect(estimate, times[k_hi - 1], times[k_hi], estimate_at(k_hi - 1));

    // Refine on the prepared state itself (interference between branches shifts <n>).
    auto prepared = [&](double te) {
      DriveConfig dd = d;
      dd.t_end = te;
      return prepare_cat(dd, protocol, opts.prepare).mean_n - targets.mean_n;
    };
    double g = prepared(t_end);
    double t_prev = t_end + step, g_prev = prepared(t_prev);
    for (int it = 0; it < 12 && std::abs(g) > 1e-3 * opts.mean_n_rel_tol * targets.mean_n; ++it) {
      if (g == g_prev) break;
      const double next = std::max(d.t2, t_end - g * (t_end - t_prev) / (g - g_prev));
      t_prev = t_end;
      g_prev = g;
      t_end = next;
      g = prepared(t_end);
    }
    res.drive.t_end = t_end;
    res.mean_n_achieved = g + targets.mean_n;
    if (std::abs(g) > opts.mean_n_rel_tol * targets.mean_n) {
      throw InfeasibleTarget("mean photon number target not reached", res.mean_n_achieved, res.mean_n_achieved);
    }
  } else {
    res.mean_n_achieved = prepare_cat(res.drive, protocol, opts.prepare).mean_n;
  }
  res.protocol.target_theta = targets.theta;
  return res;
}

}  // namespace catfield
