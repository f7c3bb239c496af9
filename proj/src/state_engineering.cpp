#include "catfield/state_engineering.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace catfield {

namespace {

constexpr cplx kI{0.0, 1.0};

// -i H x for H = w a^dag a + z a^dag^2 + z^* a^2 + xi a^dag + xi^* a + e.
void apply_minus_i_h(const cplx* x, cplx* dx, int n, double w, cplx z, cplx xi, double e) {
  const cplx zc = std::conj(z), xic = std::conj(xi);
  for (int k = 0; k < n; ++k) {
    cplx h = (w * k + e) * x[k];
    if (k >= 2) h += z * std::sqrt(double(k) * (k - 1)) * x[k - 2];
    if (k + 2 < n) h += zc * std::sqrt((k + 1.0) * (k + 2.0)) * x[k + 2];
    if (k >= 1) h += xi * std::sqrt(double(k)) * x[k - 1];
    if (k + 1 < n) h += xic * std::sqrt(k + 1.0) * x[k + 1];
    dx[k] = -kI * h;
  }
}

void check_unit_norm(const OdeState& x, const char* where) {
  double n = 0.0;
  for (const cplx& v : x) n += std::norm(v);
  if (std::abs(std::sqrt(n) - 1.0) > 1e-8) {
    throw IntegrationError(std::string(where) + ": norm drifted to " + std::to_string(std::sqrt(n)));
  }
}

std::vector<double> sorted_unique(std::vector<double> t) {
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

}  // namespace

BranchCoefficients branch_coefficients(const DriveConfig& cfg, const SqueezeTrajectory& traj) {
  if (traj.samples.empty()) throw PreconditionError("trajectory has no samples");
  BranchCoefficients out{traj.branch, {}};
  for (const SqueezeSample& s : traj.samples) {
    if (s.t < cfg.t0) throw PreconditionError("trajectory sample precedes t0");
    const bool atom = cfg.atom_inside(s.t), pump = cfg.pump_on(s.t);
    const double kappa = pump ? cfg.kappa : 0.0;
    const cplx xi = cfg.xi(s.t, pump);
    const double f = kappa * std::tanh(s.r) * std::cos(cfg.eta_at(s.t) - s.phi);
    const cplx lambda = xi * std::cosh(s.r) + std::conj(xi) * std::polar(std::sinh(s.r), s.phi);
    out.samples.push_back({s.t, cfg.mode_frequency(traj.branch, atom) + 2.0 * f, lambda, f});
  }
  return out;
}

std::vector<DisplacementSample> displacement_trajectory(const std::function<double(double)>& omega,
                                                        const std::function<cplx(double)>& lambda, cplx theta0,
                                                        double t_start, const std::vector<double>& times,
                                                        const OdeOptions& opts) {
  OdeRhs rhs = [&](const OdeState& y, OdeState& dy, double t) {
    const cplx l = lambda(t);
    dy[0] = -kI * (omega(t) * y[0] + l);
    dy[1] = 2.0 * std::imag(std::conj(y[0]) * l);
  };
  const auto states = integrate_to_times(rhs, OdeState{theta0, 0.0}, t_start, times, opts);
  std::vector<DisplacementSample> out;
  for (std::size_t k = 0; k < states.size(); ++k) out.push_back({times[k], states[k][0], states[k][1].real()});
  return out;
}

FockState apply_unitary(const UnitaryParams& u, const FockState& state) {
  FockState s = apply_rotation(state, u.beta);
  s = apply_displacement(s, u.theta);
  s = apply_squeeze(s, u.epsilon);
  return s.with_phase(u.phase);
}

FockState apply_unitary_adjoint(const UnitaryParams& u, const FockState& state) {
  FockState s = apply_squeeze(state.with_phase(-u.phase), -u.epsilon);
  s = apply_displacement(s, -u.theta);
  return apply_rotation(s, -u.beta);
}

CMatrix unitary_matrix(const UnitaryParams& u, int n_max) {
  CMatrix rot = CMatrix::Zero(n_max, n_max);
  for (int k = 0; k < n_max; ++k) rot(k, k) = std::polar(1.0, -u.beta * k);
  return std::polar(1.0, u.phase) * squeeze_matrix(u.epsilon, n_max) * displacement_matrix(u.theta, n_max) * rot;
}

cplx BranchSample::theta_from_map() const {
  const double mu_s = std::cosh(r);
  const cplx nu_s = std::polar(std::sinh(r), phi);
  return mu_s * c - nu_s * std::conj(c);
}

double BranchSample::beta_from_map() const { return -std::arg(mu); }

const BranchSample& BranchEvolution::at(double t) const {
  for (const BranchSample& s : samples) {
    if (s.t == t) return s;
  }
  throw PreconditionError("branch evolution was not sampled at t=" + std::to_string(t));
}

BranchEvolution evolve_branch(const DriveConfig& cfg, Branch branch, const std::vector<double>& times,
                              const OdeOptions& opts) {
  cfg.validate();
  for (double t : times) {
    if (t < cfg.t0) throw PreconditionError("branch evolution starts at t0");
  }
  // y = [p, q, c, theta, beta, phase, f] with p = mu, q = conj(nu).
  OdeState y{1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  auto terms = [&cfg](const OdeState& v, double t, const Segment& seg, double& f_ell, cplx& lambda) {
    const cplx z = cfg.zeta(t, seg.pump), xi = cfg.xi(t, seg.pump);
    const double ap = std::abs(v[0]);
    f_ell = std::real(z * std::conj(v[0]) * v[1]) / (ap * ap);
    lambda = xi * ap + std::conj(xi) * v[0] * std::conj(v[1]) / ap;
  };
  auto make_rhs = [&cfg, branch, &terms](const Segment& seg) -> OdeRhs {
    const double w = cfg.mode_frequency(branch, seg.atom);
    return [&cfg, &terms, w, seg](const OdeState& v, OdeState& dv, double t) {
      const cplx z = cfg.zeta(t, seg.pump), xi = cfg.xi(t, seg.pump);
      double f_ell;
      cplx lambda;
      terms(v, t, seg, f_ell, lambda);
      const double big_omega = w + 2.0 * f_ell;
      dv[0] = -kI * w * v[0] - 2.0 * kI * z * v[1];
      dv[1] = kI * w * v[1] + 2.0 * kI * std::conj(z) * v[0];
      dv[2] = -kI * w * v[2] - 2.0 * kI * z * std::conj(v[2]) - kI * xi;
      dv[3] = -kI * (big_omega * v[3] + lambda);
      dv[4] = big_omega;
      dv[5] = -(f_ell + std::real(lambda * std::conj(v[3])));
      dv[6] = 2.0 * std::imag(std::conj(v[3]) * lambda);
    };
  };
  auto renorm = [](OdeState& v, double) {
    const double s = 1.0 / std::sqrt(std::norm(v[0]) - std::norm(v[1]));
    v[0] *= s;
    v[1] *= s;
    for (int k = 4; k < 7; ++k) v[k] = v[k].real();
  };
  const std::vector<double> grid = sorted_unique(times);
  const auto states = integrate_timeline(cfg, make_rhs, y, cfg.t0, grid, opts, renorm);

  BranchEvolution ev{branch, {}};
  for (std::size_t k = 0; k < states.size(); ++k) {
    const OdeState& v = states[k];
    BranchSample s;
    s.t = grid[k];
    s.mu = v[0];
    s.nu = std::conj(v[1]);
    s.c = v[2];
    s.r = std::asinh(std::abs(v[1]));
    const double eta = cfg.eta_at(s.t);
    s.phi = std::abs(v[1]) > 0.0 ? std::arg(v[0] * std::conj(v[1])) : eta - 0.5 * std::numbers::pi;
    s.delta = wrap_angle(s.phi - eta);
    s.theta = v[3];
    s.beta = v[4].real();
    s.global_phase = v[5].real();
    s.f = v[6].real();
    const Segment seg{s.t, s.t, cfg.atom_inside(s.t), cfg.pump_on(s.t)};
    terms(v, s.t, seg, s.f_ell, s.lambda_ell);
    s.omega_ell = cfg.mode_frequency(branch, seg.atom) + 2.0 * s.f_ell;
    ev.samples.push_back(s);
  }
  return ev;
}

EvolutionOperator compose_evolution(const BranchEvolution& ev, double t_i, double t) {
  return EvolutionOperator(ev.at(t).unitary(), ev.at(t_i).unitary());
}

FockState evolve_chained(const BranchEvolution& ev, const DriveConfig& cfg, const FockState& initial) {
  FockState s = compose_evolution(ev, cfg.t0, cfg.t1).apply(initial);
  s = compose_evolution(ev, cfg.t1, cfg.t2).apply(s);
  return compose_evolution(ev, cfg.t2, cfg.t_end).apply(s);
}

double invariant_expectation(const BranchSample& s, const FockState& state) {
  const FockState v = apply_displacement(apply_squeeze(state, -std::polar(s.r, s.phi)), -s.theta);
  return moments(v).n + (s.f - std::norm(s.theta));
}

std::vector<FockState> schrodinger_oracle(const DriveConfig& cfg, Branch branch, const FockState& initial,
                                          double t_start, const std::vector<double>& times, const OdeOptions& opts) {
  cfg.validate();
  const int n = initial.dim();
  const CVector& a0 = initial.amplitudes();
  OdeState x(a0.data(), a0.data() + n);
  auto make_rhs = [&cfg, branch, n](const Segment& seg) -> OdeRhs {
    const double w = cfg.mode_frequency(branch, seg.atom);
    return [&cfg, w, n, seg](const OdeState& v, OdeState& dv, double t) {
      apply_minus_i_h(v.data(), dv.data(), n, w, cfg.zeta(t, seg.pump), cfg.xi(t, seg.pump), 0.0);
    };
  };
  const auto states = integrate_timeline(cfg, make_rhs, x, t_start, times, opts);
  std::vector<FockState> out;
  for (const OdeState& s : states) {
    check_unit_norm(s, "schrodinger_oracle");
    out.emplace_back(Eigen::Map<const CVector>(s.data(), n), initial.tail_tolerance());
  }
  return out;
}

void ProtocolConfig::validate() const {
  const double norm = std::norm(c1) + std::norm(c2);
  if (std::abs(norm - 1.0) > 1e-12) throw PreconditionError("atomic amplitudes must satisfy |c1|^2+|c2|^2=1");
  if (detected_state != 1 && detected_state != 2) throw PreconditionError("detected_state must be 1 or 2");
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) throw PreconditionError("alpha must be finite");
}

FockState atom_field_oracle(const DriveConfig& cfg, const ProtocolConfig& protocol, int n_max, double tail_tol,
                            const OdeOptions& opts) {
  cfg.validate();
  protocol.validate();
  const CVector field = coherent_state(protocol.alpha, n_max, tail_tol).amplitudes();
  // Blocks |1>, |2> with energies -omega0/2 and +omega0/2 on top of H_ell.
  const double half = 0.5 * cfg.omega0;
  const cplx amp1 = protocol.c1 * std::polar(1.0, half * cfg.t0);
  const cplx amp2 = protocol.c2 * std::polar(1.0, -half * cfg.t0);
  OdeState x(2 * n_max);
  for (int k = 0; k < n_max; ++k) {
    x[k] = amp1 * field[k];
    x[n_max + k] = amp2 * field[k];
  }
  auto make_rhs = [&cfg, n_max, half](const Segment& seg) -> OdeRhs {
    const double w1 = cfg.mode_frequency(Branch::one, seg.atom), w2 = cfg.mode_frequency(Branch::two, seg.atom);
    return [&cfg, w1, w2, n_max, half, seg](const OdeState& v, OdeState& dv, double t) {
      const cplx z = cfg.zeta(t, seg.pump), xi = cfg.xi(t, seg.pump);
      apply_minus_i_h(v.data(), dv.data(), n_max, w1, z, xi, -half);
      apply_minus_i_h(v.data() + n_max, dv.data() + n_max, n_max, w2, z, xi, half);
    };
  };
  const auto states = integrate_timeline(cfg, make_rhs, x, cfg.t0, {cfg.t_end}, opts);
  const OdeState& v = states.back();
  check_unit_norm(v, "atom_field_oracle");
  // Second Ramsey pulse |1> -> (|1>+|2>)/sqrt2, |2> -> (|2>-|1>)/sqrt2, then projection.
  CVector out(n_max);
  for (int k = 0; k < n_max; ++k) {
    out[k] = protocol.detected_state == 2 ? v[k] + v[n_max + k] : v[n_max + k] - v[k];
  }
  if (out.norm() < 1e-12) throw DegenerateState("detection outcome has zero probability");
  return FockState(out, tail_tol);
}

BranchExtent branch_extent(const DriveConfig& cfg, const ProtocolConfig& protocol, const OdeOptions& opts) {
  BranchExtent e;
  for (Branch b : {Branch::one, Branch::two}) {
    const BranchSample s = evolve_branch(cfg, b, {cfg.t_end}, opts).samples.back();
    e.r_max = std::max(e.r_max, s.r);
    e.amplitude = std::max(e.amplitude, std::abs(protocol.alpha * std::polar(1.0, -s.beta) + s.theta));
  }
  return e;
}

CatResult prepare_cat(const DriveConfig& cfg, const ProtocolConfig& protocol, const PrepareOptions& opts) {
  cfg.validate();
  protocol.validate();
  std::array<BranchEvolution, 2> ev{evolve_branch(cfg, Branch::one, {cfg.t2, cfg.t_end}, opts.ode),
                                    evolve_branch(cfg, Branch::two, {cfg.t2, cfg.t_end}, opts.ode)};
  int n = opts.n_max;
  if (n == 0) {
    double r_max = 0.0, amp = 0.0;
    for (const auto& e : ev) {
      const BranchSample& s = e.at(cfg.t_end);
      r_max = std::max(r_max, s.r);
      amp = std::max(amp, std::abs(protocol.alpha * std::polar(1.0, -s.beta) + s.theta));
    }
    n = auto_n_max(amp, r_max);
  }
  const FockState start = coherent_state(protocol.alpha, n, opts.tail_tol);
  std::array<FockState, 2> branch{apply_unitary(ev[0].at(cfg.t_end).unitary(), start),
                                  apply_unitary(ev[1].at(cfg.t_end).unitary(), start)};
  const double half = 0.5 * cfg.omega0 * cfg.t_end;
  const CVector mix = protocol.sign() * std::polar(1.0, half) * protocol.c1 * branch[0].amplitudes() +
                      std::polar(1.0, -half) * protocol.c2 * branch[1].amplitudes();
  const double norm = mix.norm();
  if (norm < 1e-10) throw DegenerateState("branch contributions cancel; the detection outcome has zero weight");
  FockState cat(mix, opts.tail_tol);

  const BranchSample& b1 = ev[0].at(cfg.t2);
  const BranchSample& b2 = ev[1].at(cfg.t2);
  CatResult res{cat,
                branch,
                {b1, b2},
                {ev[0].at(cfg.t_end), ev[1].at(cfg.t_end)},
                wrap_angle(b1.phi - b2.phi),
                moments(cat).n,
                phase_space_distance(branch[0], branch[1]),
                1.0 / norm,
                cfg.chi == 0.0 || cfg.t2 == cfg.t1,
                n};
  return res;
}

FockState squeezed_cat(cplx alpha, double r, double phi1, double phi2, double sign, int n_max, double tail_tol) {
  const FockState plus = apply_squeeze(coherent_state(alpha, n_max, tail_tol), std::polar(r, phi1));
  const FockState minus = apply_squeeze(coherent_state(-alpha, n_max, tail_tol), std::polar(r, phi2));
  const CVector v = plus.amplitudes() + sign * minus.amplitudes();
  if (v.norm() < 1e-10) throw DegenerateState("cat components cancel");
  return FockState(v, tail_tol);
}

}  // namespace catfield
