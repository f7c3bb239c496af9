#include "catfield/dissipation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "catfield/reservoir_optimizer.hpp"
#include "catfield/state_engineering.hpp"

namespace catfield {

ReservoirParams ReservoirParams::from_squeeze(double tau_R, double r_tilde, double phi_tilde) {
  ReservoirParams res;
  res.tau_R = tau_R;
  res.r_tilde = r_tilde;
  res.phi_tilde = phi_tilde;
  const double s = std::sinh(r_tilde);
  res.N = s * s;
  res.M = -std::polar(0.5 * std::sinh(2.0 * r_tilde), phi_tilde);
  res.minimal = true;
  res.validate();
  return res;
}

ReservoirParams ReservoirParams::from_general(double tau_R, double N, cplx M) {
  ReservoirParams res;
  res.tau_R = tau_R;
  res.N = N;
  res.M = M;
  const double bound = N * (N + 1.0);
  const double tol = 1e-12 * std::max(1.0, bound);
  res.minimal = std::abs(std::norm(M) - bound) <= tol;
  res.validate();
  if (res.minimal) {
    res.r_tilde = std::asinh(std::sqrt(N));
    res.phi_tilde = std::abs(M) > 0.0 ? std::arg(-M) : 0.0;
  }
  return res;
}

void ReservoirParams::validate() const {
  if (!(tau_R > 0.0) || !std::isfinite(tau_R)) throw InvalidReservoir("tau_R must be positive and finite");
  if (!(N >= 0.0) || !std::isfinite(N)) throw InvalidReservoir("N must be non-negative and finite");
  if (!std::isfinite(M.real()) || !std::isfinite(M.imag())) throw InvalidReservoir("M must be finite");
  const double bound = N * (N + 1.0);
  if (std::norm(M) > bound + 1e-12 * std::max(1.0, bound)) {
    throw InvalidReservoir("|M|^2 = " + std::to_string(std::norm(M)) + " exceeds N(N+1) = " + std::to_string(bound));
  }
}

namespace {

// Truncated ladder-operator products written out entry by entry; a a^dag
// loses its top level exactly as the matrix product does.
struct LindbladOps {
  int d;
  std::vector<double> sq;  // sq[k] = sqrt(k)

  explicit LindbladOps(int n) : d(n), sq(n + 2) {
    for (int k = 0; k < n + 2; ++k) sq[k] = std::sqrt(double(k));
  }
};

template <class Rho>
void apply_lindblad(const LindbladOps& op, const ReservoirParams& res, const Rho& rho, CMatrix& out) {
  const int d = op.d;
  const double g = res.gamma();
  const double c_down = g * (res.N + 1.0);
  const double c_up = g * res.N;
  const cplx c_m = g * res.M;
  const cplx c_mc = g * std::conj(res.M);
  const bool anomalous = res.M != cplx(0.0);
  const auto& sq = op.sq;
  out.resize(d, d);
  for (int n = 0; n < d; ++n) {
    const double aad_n = n + 1 < d ? n + 1.0 : 0.0;
    for (int m = 0; m < d; ++m) {
      const double aad_m = m + 1 < d ? m + 1.0 : 0.0;
      cplx v = -0.5 * (c_down * (m + n) + c_up * (aad_m + aad_n)) * rho(m, n);
      if (m + 1 < d && n + 1 < d) v += c_down * sq[m + 1] * sq[n + 1] * rho(m + 1, n + 1);
      if (m > 0 && n > 0) v += c_up * sq[m] * sq[n] * rho(m - 1, n - 1);
      if (anomalous) {
        cplx t = 0.0;
        if (m > 0 && n + 1 < d) t += sq[m] * sq[n + 1] * rho(m - 1, n + 1);
        if (m > 1) t -= 0.5 * sq[m] * sq[m - 1] * rho(m - 2, n);
        if (n + 2 < d) t -= 0.5 * sq[n + 1] * sq[n + 2] * rho(m, n + 2);
        cplx u = 0.0;
        if (m + 1 < d && n > 0) u += sq[m + 1] * sq[n] * rho(m + 1, n - 1);
        if (m + 2 < d) u -= 0.5 * sq[m + 1] * sq[m + 2] * rho(m + 2, n);
        if (n > 1) u -= 0.5 * sq[n] * sq[n - 1] * rho(m, n - 2);
        v += c_m * t + c_mc * u;
      }
      out(m, n) = v;
    }
  }
}

}  // namespace

CMatrix lindblad_rhs(const CMatrix& rho, const ReservoirParams& res) {
  if (rho.rows() != rho.cols() || rho.rows() < 2) throw InvalidDimension("density matrix must be square, dim >= 2");
  res.validate();
  const LindbladOps op(static_cast<int>(rho.rows()));
  CMatrix out;
  apply_lindblad(op, res, rho, out);
  return out;
}

CMatrix lindblad_rhs(const DensityMatrix& rho, const ReservoirParams& res) {
  return lindblad_rhs(rho.elements(), res);
}

MasterResult evolve_master(const DensityMatrix& rho0, const ReservoirParams& res, double horizon, int samples,
                           const MasterOptions& opts) {
  res.validate();
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw PreconditionError("horizon must be non-negative");
  if (samples < 1) throw PreconditionError("need at least one sample interval");
  const int n = rho0.dim();
  const LindbladOps op(n);

  OdeState x0(rho0.elements().data(), rho0.elements().data() + static_cast<std::ptrdiff_t>(n) * n);
  CMatrix work(n, n);
  const OdeRhs rhs = [&](const OdeState& x, OdeState& dx, double) {
    const Eigen::Map<const CMatrix> rho(x.data(), n, n);
    apply_lindblad(op, res, rho, work);
    dx.assign(work.data(), work.data() + static_cast<std::ptrdiff_t>(n) * n);
  };
  const OdePostStep hermitize = [n](OdeState& x, double) {
    Eigen::Map<CMatrix> rho(x.data(), n, n);
    const CMatrix sym = 0.5 * (rho + rho.adjoint());
    rho = sym;
  };

  std::vector<double> times(static_cast<std::size_t>(samples) + 1);
  for (int k = 0; k <= samples; ++k) times[k] = horizon * k / samples;
  std::vector<OdeState> states;
  if (horizon > 0.0) {
    std::vector<double> targets(times.begin() + 1, times.end());
    states = integrate_to_times(rhs, x0, 0.0, targets, opts.ode, hermitize);
  }
  states.insert(states.begin(), x0);

  MasterResult out{{}, {}, {}, {}, {}, rho0};
  for (std::size_t k = 0; k < states.size(); ++k) {
    const Eigen::Map<const CMatrix> rho(states[k].data(), n, n);
    const CMatrix sym = 0.5 * (rho + CMatrix(rho.adjoint()));
    const double tr = sym.trace().real();
    if (std::abs(tr - 1.0) > opts.trace_tol) {
      throw IntegrationError("trace drifted to " + std::to_string(tr) + " at t = " + std::to_string(times[k]));
    }
    const double min_eig = Eigen::SelfAdjointEigenSolver<CMatrix>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (min_eig < -opts.positivity_tol) {
      throw IntegrationError("density matrix lost positivity (eigenvalue " + std::to_string(min_eig) +
                             ") at t = " + std::to_string(times[k]));
    }
    double tail = 0.0;
    for (int i = std::max(0, n - kTailLevels); i < n; ++i) tail += sym(i, i).real();
    if (tail > opts.tail_tol) throw TruncationError("reservoir populated the truncation edge", tail);

    out.times.push_back(times[k]);
    out.trace.push_back(tr);
    out.purity.push_back((sym * sym).trace().real());
    out.min_eigenvalue.push_back(min_eig);
    if (opts.keep_snapshots || k + 1 == states.size()) {
      DensityMatrix snap(sym / tr, Validate::no);
      if (opts.keep_snapshots) out.snapshots.push_back(snap);
      if (k + 1 == states.size()) out.final_state = snap;
    }
  }
  return out;
}

MasterResult evolve_master_rotated(const FockState& state, const ReservoirParams& res, double horizon, int samples,
                                   const MasterOptions& opts) {
  res.validate();
  if (!res.minimal) throw InvalidReservoir("rotated-frame evolution needs a minimal reservoir |M|^2 = N(N+1)");
  const FockState rotated = apply_squeeze(state, -std::polar(res.r_tilde, res.phi_tilde));
  const CVector& c = rotated.amplitudes();
  int top = rotated.dim();
  double dropped = 0.0;
  while (top > 1 && dropped + std::norm(c[top - 1]) <= 1e-14) dropped += std::norm(c[--top]);
  const int dim = top + kTailLevels + 2;
  CVector padded = CVector::Zero(dim);
  const int keep = std::min(dim, rotated.dim());
  padded.head(keep) = c.head(keep);
  const ReservoirParams plain = ReservoirParams::from_squeeze(res.tau_R, 0.0, 0.0);
  return evolve_master(DensityMatrix::pure(FockState(padded, 1.0)), plain, horizon, samples, opts);
}

double purity_rate_factor(const Moments& m, const ReservoirParams& res) {
  const cplx ad = std::conj(m.a);
  const cplx ad2 = std::conj(m.a2);
  return (2.0 * res.N + 1.0) * (std::norm(m.a) - m.n) + 2.0 * (res.M * (ad * ad - ad2)).real() - res.N;
}

namespace {

constexpr double kPointerThreshold = 1e-10;

DecoherenceTime from_rate(double rate, double tau_R) {
  DecoherenceTime out;
  out.rate = rate;
  // rate = 2 gamma X, so the pointer test on X reads |rate| tau_R / 2 <= threshold.
  if (std::abs(rate) * tau_R * 0.5 <= kPointerThreshold || rate > 0.0) {
    out.tau = std::numeric_limits<double>::infinity();
    out.pointer_state = true;
  } else {
    out.tau = -1.0 / rate;
    out.pointer_state = false;
  }
  return out;
}

}  // namespace

DecoherenceTime decoherence_time_analytic(const Moments& m, const ReservoirParams& res) {
  res.validate();
  const double x = purity_rate_factor(m, res);
  DecoherenceTime out = from_rate(2.0 * res.gamma() * x, res.tau_R);
  if (!out.pointer_state) out.tau = res.tau_R / (2.0 * std::abs(x));
  return out;
}

DecoherenceTime decoherence_time_numeric(const DensityMatrix& rho0, const ReservoirParams& res) {
  const double p = purity(rho0);
  if (std::abs(p - 1.0) > 1e-10) throw NonPureState("decoherence time needs a pure state, purity " + std::to_string(p));
  const CMatrix l = lindblad_rhs(rho0, res);
  const double rate = 2.0 * (rho0.elements().cwiseProduct(l.transpose())).sum().real();
  return from_rate(rate, res.tau_R);
}

DecoherenceTime decoherence_time_numeric(const FockState& state, const ReservoirParams& res) {
  const CVector& c = state.amplitudes();
  int top = state.dim();
  while (top > 1 && std::norm(c[top - 1]) <= 1e-32) --top;
  // Two spare levels keep the truncated a^dag^2 exact on the support.
  const int dim = std::min(state.dim(), std::max(2, top + 2));
  const CVector v = c.head(dim);
  return decoherence_time_numeric(DensityMatrix(v * v.adjoint(), Validate::no), res);
}

DecoherenceReport decoherence_report(const FockState& state, const ReservoirParams& res, double horizon, int samples,
                                     const MasterOptions& opts) {
  DecoherenceReport out;
  out.moments = moments(state);
  out.analytic = decoherence_time_analytic(out.moments, res);
  out.numeric = decoherence_time_numeric(state, res);
  if (out.analytic.pointer_state || out.numeric.pointer_state) {
    out.relative_deviation = out.analytic.pointer_state == out.numeric.pointer_state ? 0.0 : 1.0;
  } else {
    out.relative_deviation = std::abs(out.numeric.tau - out.analytic.tau) / out.analytic.tau;
  }
  if (horizon > 0.0 && samples > 0) {
    const MasterResult traj = evolve_master(DensityMatrix::pure(state), res, horizon, samples, opts);
    out.purity_times = traj.times;
    out.purity = traj.purity;
  }
  return out;
}

AsymptoticReport asymptotic_report(const AsymptoticInputs& in) {
  if (!(in.alpha > 0.0) || !(in.r >= 0.0) || !(in.tau_R > 0.0)) {
    throw PreconditionError("asymptotic report needs alpha > 0, r >= 0, tau_R > 0");
  }
  const int n = in.n_max > 0 ? in.n_max : auto_n_max(in.alpha, in.r);
  const FockState cat = squeezed_cat(in.alpha, in.r, in.phi, in.phi, 1.0, n);
  const FockState plain = squeezed_cat(in.alpha, 0.0, 0.0, 0.0, 1.0, n);
  const Moments m = moments(cat);
  const Moments m_ns = moments(plain);

  AsymptoticReport out;
  const OptimizationResult best = maximize_tau(m, in.tau_R);
  out.tau = best.tau_opt;
  out.r_tilde = best.r_tilde_opt;
  out.phi_tilde = best.phi_tilde_opt;
  out.tau_formula = in.tau_R / in.alpha;
  out.tau_i = maximize_tau(m_ns, in.tau_R).tau_opt;
  out.tau_ii = decoherence_time_analytic(m_ns, ReservoirParams::from_squeeze(in.tau_R, 0.0, 0.0)).tau;

  out.mean_n = m.n;
  out.mean_n_ns = m_ns.n;
  out.mean_n_formula = in.alpha * in.alpha * std::exp(2.0 * in.r);
  const auto squeezed = [&](double sign) {
    return apply_squeeze(coherent_state(sign * in.alpha, n), std::polar(in.r, in.phi));
  };
  out.distance = phase_space_distance(squeezed(1.0), squeezed(-1.0));
  out.distance_ns = phase_space_distance(coherent_state(in.alpha, n), coherent_state(-in.alpha, n));
  out.distance_formula = 2.0 * in.alpha * std::exp(in.r);

  out.ratio_mean_n = out.mean_n / out.mean_n_ns;
  out.ratio_distance = out.distance / out.distance_ns;
  out.ratio_tau_ii = out.tau / out.tau_ii;
  out.ratio_tau_i = out.tau / out.tau_i;
  return out;
}

}  // namespace catfield
