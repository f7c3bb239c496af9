#include "catfield/squeeze_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace catfield {

namespace {

constexpr double kPi = std::numbers::pi;

bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

// sinh(2r) -> r without the cancellation of acosh near r = 0.
double r_from_sinh2r(double s) { return 0.5 * std::asinh(s); }

void require_resonant_outside(const DriveConfig& cfg) {
  const double d = cfg.detuning(Branch::one, false);
  const double scale = std::abs(cfg.omega) + std::abs(cfg.eta_slope) + cfg.chi + cfg.kappa;
  if (std::abs(d) > 1e-12 * std::max(scale, 1.0)) {
    throw PreconditionError("pump is not resonant with the empty cavity (omega + eta_slope/2 = " +
                            std::to_string(d) + ")");
  }
}

}  // namespace

void DriveConfig::validate() const {
  if (!finite_all({omega, omega0, chi, kappa, eta_slope, eta_offset, varkappa, varpi_slope, varpi_offset, t0, t1,
                   t2, t_end})) {
    throw PreconditionError("drive parameters must be finite");
  }
  if (!(t0 <= t1 && t1 <= t2 && t2 <= t_end)) throw PreconditionError("timeline must satisfy t0 <= t1 <= t2 <= t_end");
  if (chi < 0.0) throw PreconditionError("chi must be non-negative");
  if (kappa < 0.0) throw PreconditionError("kappa must be non-negative");
  if (varkappa < 0.0) throw PreconditionError("varkappa must be non-negative");
}

const char* regime_name(RegimeClass c) {
  switch (c) {
    case RegimeClass::resonant: return "resonant";
    case RegimeClass::weak: return "weak";
    case RegimeClass::critical: return "critical";
    case RegimeClass::strong: return "strong";
  }
  return "unknown";
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double resonant_constant(double r, double delta) { return std::cos(delta) * std::sinh(2.0 * r); }

double dispersive_constant(double p_ell, double r, double delta) {
  return std::cosh(2.0 * r) + p_ell * std::cos(delta) * std::sinh(2.0 * r);
}

CouplingRegime classify_regime(const DriveConfig& cfg, Branch branch) {
  const double d = cfg.detuning(branch, true);
  if (cfg.chi == 0.0 || d == 0.0) return {0.0, RegimeClass::resonant};
  const double p = 2.0 * cfg.kappa / d;
  const double ap = std::abs(p);
  RegimeClass c = RegimeClass::critical;
  if (std::abs(ap - 1.0) > 1e-12) c = ap < 1.0 ? RegimeClass::weak : RegimeClass::strong;
  return {p, c};
}

std::vector<Segment> timeline_segments(const DriveConfig& cfg, double from, double to) {
  std::vector<double> cuts{from};
  const double lo = std::min(from, to), hi = std::max(from, to);
  std::vector<double> marks{cfg.t0, cfg.t1, cfg.t2, cfg.t_end};
  if (to < from) std::reverse(marks.begin(), marks.end());
  for (double m : marks) {
    if (m > lo && m < hi && m != cuts.back()) cuts.push_back(m);
  }
  cuts.push_back(to);
  std::vector<Segment> segs;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    segs.push_back({cuts[k], cuts[k + 1], cfg.atom_inside(mid), cfg.pump_on(mid)});
  }
  return segs;
}

std::vector<OdeState> integrate_timeline(const DriveConfig& cfg, const SegmentRhsFactory& make_rhs, OdeState x,
                                         double t_from, const std::vector<double>& times, const OdeOptions& opts,
                                         const OdePostStep& post) {
  std::vector<OdeState> out;
  if (times.empty()) return out;
  const double dir = times.back() >= t_from ? 1.0 : -1.0;
  std::size_t next = 0;
  while (next < times.size() && times[next] == t_from) {
    out.push_back(x);
    ++next;
  }
  for (const Segment& seg : timeline_segments(cfg, t_from, times.back())) {
    if (seg.from == seg.to) continue;
    std::vector<double> local;
    std::size_t k = next;
    while (k < times.size() && (seg.to - times[k]) * dir >= 0.0) local.push_back(times[k++]);
    const bool report_end = local.empty() || local.back() != seg.to;
    if (report_end) local.push_back(seg.to);
    auto states = integrate_to_times(make_rhs(seg), std::move(x), seg.from, local, opts, post);
    x = states.back();
    const std::size_t keep = report_end ? states.size() - 1 : states.size();
    for (std::size_t i = 0; i < keep; ++i) out.push_back(std::move(states[i]));
    next = k;
  }
  return out;
}

SqueezeSample resonant_solution(const DriveConfig& cfg, double r_i, double phi_i, double t_i, double t) {
  if (r_i < 0.0) throw PreconditionError("squeeze factor must be non-negative");
  require_resonant_outside(cfg);
  const double delta_i = phi_i - cfg.eta_at(t_i);
  SqueezeSample s{t, r_i, 0.0, 0.0};
  const double u = 4.0 * cfg.kappa * (t - t_i);
  const double c = resonant_constant(r_i, delta_i);
  const double k = std::sqrt(1.0 + c * c);
  const double x_i = std::cosh(2.0 * r_i);
  const double ratio = x_i / k;
  if (ratio < 1.0 - 1e-12) throw Error("arccosh argument below 1 in the resonant solution");
  const double sin_i = std::sin(delta_i);
  const double a = (sin_i > 0.0 ? -1.0 : 1.0) * std::asinh(std::abs(sin_i) * std::sinh(2.0 * r_i) / k);
  const double ks = k * std::sinh(a + u);
  const double sinh2r = std::hypot(c, ks);
  s.r = r_from_sinh2r(sinh2r);
  double delta;
  if (sinh2r > 0.0) {
    delta = std::atan2(-ks / sinh2r, c / sinh2r);
  } else {
    delta = cfg.kappa > 0.0 ? -0.5 * kPi : wrap_angle(delta_i);
  }
  s.delta = wrap_angle(delta);
  s.phi = cfg.eta_at(t) + s.delta;
  return s;
}

WeakCouplingSolution::WeakCouplingSolution(const DriveConfig& cfg, Branch branch, double r1, double phi1,
                                           double t_start)
    : cfg_(cfg), t_start_(t_start), r1_(r1), delta1_(phi1 - cfg.eta_at(t_start)),
      detuning_(cfg.detuning(branch, true)) {
  if (r1 < 0.0) throw PreconditionError("squeeze factor must be non-negative");
  if (cfg.kappa == 0.0) {
    c1_ = std::cosh(2.0 * r1);
    center_ = c1_;
    return;
  }
  if (detuning_ == 0.0) throw PreconditionError("weak-coupling solution needs a detuned branch");
  p_ = 2.0 * cfg.kappa / detuning_;
  const double q = 1.0 - p_ * p_;
  if (!(q > 0.0)) throw PreconditionError("weak-coupling solution requires |P| < 1");
  c1_ = dispersive_constant(p_, r1, delta1_);
  const double disc = c1_ * c1_ - q;
  if (!(c1_ > 0.0) || disc <= 1e-14 * c1_ * c1_) {
    throw UnsupportedBranch("constant of motion C1=" + std::to_string(c1_) +
                            " does not exceed sqrt(1-P^2); closed form not available");
  }
  rate_ = 4.0 * cfg.kappa * std::sqrt(q) / std::abs(p_);
  center_ = c1_ / q;
  radius_ = std::abs(p_) * std::sqrt(disc) / q;
  const double s0 = std::clamp((center_ - std::cosh(2.0 * r1)) / radius_, -1.0, 1.0);
  psi0_ = std::asin(s0);
  sigma_ = std::sin(delta1_) >= 0.0 ? 1.0 : -1.0;
}

double WeakCouplingSolution::period() const {
  return rate_ > 0.0 ? 2.0 * kPi / rate_ : std::numeric_limits<double>::infinity();
}

SqueezeSample WeakCouplingSolution::at(double t) const {
  SqueezeSample s{t, r1_, 0.0, 0.0};
  const double tau = t - t_start_;
  if (cfg_.kappa == 0.0) {
    s.delta = wrap_angle(delta1_ - 2.0 * detuning_ * tau);
    s.phi = cfg_.eta_at(t) + s.delta;
    return s;
  }
  const double psi = psi0_ + sigma_ * rate_ * tau;
  const double x = std::max(1.0, center_ - radius_ * std::sin(psi));
  const double sinh2r = std::sqrt((x - 1.0) * (x + 1.0));
  s.r = r_from_sinh2r(sinh2r);
  if (sinh2r > 0.0) {
    const double cos_d = (c1_ - x) / (p_ * sinh2r);
    const double sin_d = radius_ * sigma_ * rate_ * std::cos(psi) / (4.0 * cfg_.kappa * sinh2r);
    s.delta = std::atan2(sin_d, cos_d);
  } else {
    s.delta = -0.5 * kPi;
  }
  s.delta = wrap_angle(s.delta);
  s.phi = cfg_.eta_at(t) + s.delta;
  return s;
}

SqueezeSample dispersive_weak_solution(const DriveConfig& cfg, Branch branch, double r1, double phi1, double t) {
  return WeakCouplingSolution(cfg, branch, r1, phi1, cfg.t1).at(t);
}

SqueezeTrajectory integrate_characteristic(const DriveConfig& cfg, Branch branch, const SqueezeInitial& init,
                                           const std::vector<double>& times, const OdeOptions& opts) {
  cfg.validate();
  if (init.r < 0.0) throw PreconditionError("squeeze factor must be non-negative");
  // p = mu, q = conj(nu) of the Bogoliubov map a -> mu a + nu a^dag.
  OdeState x{std::cosh(init.r), std::conj(std::polar(std::sinh(init.r), init.phi))};
  auto make_rhs = [&cfg, branch](const Segment& seg) -> OdeRhs {
    const double w = cfg.mode_frequency(branch, seg.atom);
    const bool pump = seg.pump;
    return [&cfg, w, pump](const OdeState& y, OdeState& dy, double t) {
      const cplx z = cfg.zeta(t, pump);
      const cplx i(0.0, 1.0);
      dy[0] = -i * w * y[0] - 2.0 * i * z * y[1];
      dy[1] = i * w * y[1] + 2.0 * i * std::conj(z) * y[0];
    };
  };
  auto renorm = [](OdeState& y, double) {
    const double n = std::norm(y[0]) - std::norm(y[1]);
    const double s = 1.0 / std::sqrt(n);
    y[0] *= s;
    y[1] *= s;
  };
  const auto states = integrate_timeline(cfg, make_rhs, x, init.t, times, opts, renorm);
  SqueezeTrajectory traj{branch, {}};
  traj.samples.reserve(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) {
    const cplx p = states[k][0], q = states[k][1];
    SqueezeSample s;
    s.t = times[k];
    s.r = std::asinh(std::abs(q));
    const double eta = cfg.eta_at(s.t);
    s.phi = std::abs(q) > 0.0 ? std::arg(p * std::conj(q)) : eta - 0.5 * kPi;
    s.delta = wrap_angle(s.phi - eta);
    traj.samples.push_back(s);
  }
  return traj;
}

SqueezeSample analytic_trajectory_point(const DriveConfig& cfg, Branch branch, double t) {
  cfg.validate();
  if (t < cfg.t0) throw PreconditionError("time precedes the start of the drive");
  const double first_end = std::min(t, cfg.t1);
  SqueezeSample s = resonant_solution(cfg, 0.0, cfg.eta_at(cfg.t0) - 0.5 * kPi, cfg.t0, first_end);
  if (t <= cfg.t1) return s;
  const bool dispersive = classify_regime(cfg, branch).regime != RegimeClass::resonant;
  const double inside_end = std::min(t, cfg.t2);
  if (dispersive) {
    s = WeakCouplingSolution(cfg, branch, s.r, s.phi, cfg.t1).at(inside_end);
  } else {
    s = resonant_solution(cfg, s.r, s.phi, cfg.t1, inside_end);
  }
  if (t <= cfg.t2) return s;
  const double pump_end = std::min(t, cfg.t_end);
  s = resonant_solution(cfg, s.r, s.phi, cfg.t2, pump_end);
  if (t > cfg.t_end) {
    // Free rotation once the pump is off: r frozen, phi advances at -2 (omega - w_f).
    s.phi += -2.0 * cfg.mode_frequency(branch, false) * (t - cfg.t_end);
    s.delta = wrap_angle(s.phi - cfg.eta_at(t));
    s.t = t;
  }
  return s;
}

}  // namespace catfield
