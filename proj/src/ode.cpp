#include "catfield/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/numeric/odeint.hpp>

namespace catfield {

namespace odeint = boost::numeric::odeint;

std::vector<OdeState> integrate_to_times(const OdeRhs& rhs, OdeState x, double t0,
                                         const std::vector<double>& times, const OdeOptions& opts,
                                         const OdePostStep& post, const std::vector<double>& breakpoints) {
  std::vector<OdeState> out;
  if (times.empty()) return out;
  const double t_last = times.back();
  const double dir = t_last >= t0 ? 1.0 : -1.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double prev = k == 0 ? t0 : times[k - 1];
    if ((times[k] - prev) * dir < 0.0) throw PreconditionError("integration times must be monotone");
  }

  // Merge report times with interior breakpoints.
  struct Target {
    double t;
    bool report;
  };
  std::vector<Target> targets;
  for (double t : times) targets.push_back({t, true});
  for (double b : breakpoints) {
    if ((b - t0) * dir > 0.0 && (t_last - b) * dir > 0.0) targets.push_back({b, false});
  }
  std::stable_sort(targets.begin(), targets.end(),
                   [dir](const Target& a, const Target& b) { return (a.t - b.t) * dir < 0.0; });

  using Stepper = odeint::runge_kutta_fehlberg78<OdeState>;
  auto stepper = odeint::make_controlled<Stepper>(opts.abs_tol, opts.rel_tol);
  auto sys = [&rhs](const OdeState& y, OdeState& dy, double t) { rhs(y, dy, t); };

  const double span = std::abs(t_last - t0);
  const double min_step = std::max(span * opts.min_step_fraction, 1e-300);
  double dt = opts.initial_step > 0.0 ? opts.initial_step * dir : dir * std::max(span / 100.0, min_step);
  double t = t0;
  long steps = 0;
  out.reserve(times.size());

  for (const Target& target : targets) {
    while ((target.t - t) * dir > 0.0) {
      const double remaining = target.t - t;
      const bool clipped = std::abs(dt) >= std::abs(remaining);
      double step = clipped ? remaining : dt;
      const double tried = step;
      const auto res = stepper.try_step(sys, x, t, step);
      if (res == odeint::success) {
        if (clipped) t = target.t;  // land exactly on the target
        if (post) post(x, t);
        if (!clipped || std::abs(step) > std::abs(dt)) dt = step;
        if (++steps > opts.max_steps) {
          throw IntegrationError("step budget exhausted at t=" + std::to_string(t));
        }
      } else {
        dt = step;
        if (std::abs(step) < min_step && std::abs(tried) > 0.0) {
          throw IntegrationError("step size underflow at t=" + std::to_string(t) +
                                 " (step " + std::to_string(step) + ")");
        }
      }
      for (const cplx& v : x) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
          throw IntegrationError("non-finite state at t=" + std::to_string(t));
        }
      }
    }
    if (target.report) out.push_back(x);
  }
  return out;
}

}  // namespace catfield
