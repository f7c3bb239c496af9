#pragma once

// Cavity damping by a squeezed-vacuum reservoir: master equation, purity loss
// and the idempotency-defect decoherence time.

#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "catfield/fock.hpp"
#include "catfield/ode.hpp"

namespace catfield {

/// Reservoir with occupation N and anomalous correlation M; gamma = 1/tau_R.
struct ReservoirParams {
  double tau_R = 1.0;
  double r_tilde = 0.0;
  double phi_tilde = 0.0;
  double N = 0.0;
  cplx M;
  bool minimal = true;  // |M|^2 = N(N+1)

  /// N = sinh^2 r, M = -e^{i phi} sinh(2r)/2.
  static ReservoirParams from_squeeze(double tau_R, double r_tilde, double phi_tilde);
  /// Any |M|^2 <= N(N+1); anything else throws InvalidReservoir.
  static ReservoirParams from_general(double tau_R, double N, cplx M);

  double gamma() const { return 1.0 / tau_R; }
  void validate() const;
};

/// drho/dt = gamma(N+1) D[a] + gamma N D[a^dag]
///         + gamma M [a^dag rho a^dag - {a^dag^2, rho}/2] + gamma M^* [a rho a - {a^2, rho}/2].
/// The pure squeezed reservoir equals gamma D[c] with c = cosh(r) a - e^{i phi} sinh(r) a^dag,
/// whose stationary state is S(r e^{i phi})|0>.
CMatrix lindblad_rhs(const CMatrix& rho, const ReservoirParams& res);
CMatrix lindblad_rhs(const DensityMatrix& rho, const ReservoirParams& res);

struct MasterOptions {
  OdeOptions ode{1e-10, 1e-10};
  double positivity_tol = 1e-8;
  double trace_tol = 1e-9;
  double tail_tol = kDefaultTailTolerance;
  bool keep_snapshots = false;
};

struct MasterResult {
  std::vector<double> times;
  std::vector<double> purity;
  std::vector<double> trace;
  std::vector<double> min_eigenvalue;
  std::vector<DensityMatrix> snapshots;  // filled when requested
  DensityMatrix final_state;
};

/// Integrate the master equation over [0, horizon] and sample on `samples` + 1
/// uniform points. Hermiticity is restored after every step.
MasterResult evolve_master(const DensityMatrix& rho0, const ReservoirParams& res, double horizon, int samples,
                           const MasterOptions& opts = {});

/// Same purity, trace and spectrum as evolve_master for a minimal reservoir,
/// computed as plain damping of S(eps)^dag |psi> with eps = r_tilde e^{i phi_tilde}.
/// Snapshots and final_state live in that rotated frame.
MasterResult evolve_master_rotated(const FockState& state, const ReservoirParams& res, double horizon, int samples,
                                   const MasterOptions& opts = {});

/// (2N+1)(|<a>|^2 - <n>) + 2 Re[M(<a^dag>^2 - <a^dag^2>)] - N, so that
/// d Tr rho^2/dt = 2 gamma X at a pure state.
double purity_rate_factor(const Moments& m, const ReservoirParams& res);

struct DecoherenceTime {
  double tau = std::numeric_limits<double>::infinity();
  bool pointer_state = true;
  double rate = 0.0;  // d Tr rho^2/dt at t = 0
};

/// tau = tau_R / (2 |X|); +inf (pointer state) when |X| <= 1e-10.
DecoherenceTime decoherence_time_analytic(const Moments& m, const ReservoirParams& res);

/// tau = -1/(d Tr rho^2/dt) with the derivative taken as 2 Tr(rho L(rho)). Rejects mixed input.
DecoherenceTime decoherence_time_numeric(const DensityMatrix& rho0, const ReservoirParams& res);
DecoherenceTime decoherence_time_numeric(const FockState& state, const ReservoirParams& res);

struct DecoherenceReport {
  DecoherenceTime analytic;
  DecoherenceTime numeric;
  Moments moments;
  double relative_deviation = 0.0;
  std::vector<double> purity_times;
  std::vector<double> purity;
};

DecoherenceReport decoherence_report(const FockState& state, const ReservoirParams& res, double horizon = 0.0,
                                     int samples = 0, const MasterOptions& opts = {});

struct AsymptoticInputs {
  double alpha = std::numbers::sqrt2;
  double r = 2.0;
  double phi = 0.0;  // squeeze phase of both components
  double tau_R = 1.0;
  int n_max = 0;     // 0 selects auto_n_max
};

/// Decoherence and distance figures of a squeezed even cat next to the
/// non-squeezed baselines (even cat in the optimal and in the plain reservoir).
struct AsymptoticReport {
  double tau = 0.0;             // squeezed cat, best reservoir
  double tau_formula = 0.0;     // tau_R / alpha
  double r_tilde = 0.0, phi_tilde = 0.0;
  double tau_i = 0.0;           // non-squeezed cat, best reservoir
  double tau_ii = 0.0;          // non-squeezed cat, plain vacuum reservoir
  double mean_n = 0.0, mean_n_formula = 0.0, mean_n_ns = 0.0;
  double distance = 0.0, distance_formula = 0.0, distance_ns = 0.0;
  double ratio_mean_n = 0.0;    // <n>/<n>_NS
  double ratio_distance = 0.0;  // D/D_NS
  double ratio_tau_ii = 0.0;    // tau/tau_ii
  double ratio_tau_i = 0.0;     // tau/tau_i
};

AsymptoticReport asymptotic_report(const AsymptoticInputs& in);

}  // namespace catfield
