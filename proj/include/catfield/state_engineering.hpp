#pragma once

// Branch evolution operators, the three-step cat protocol and the direct
// Fock-basis integration used as ground truth.

#include <array>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "catfield/fock.hpp"
#include "catfield/ode.hpp"
#include "catfield/squeeze_dynamics.hpp"

namespace catfield {

struct BranchCoefficientSample {
  double t = 0.0;
  double omega_ell = 0.0;  // Omega_ell
  cplx lambda_ell;         // Lambda_ell
  double f_ell = 0.0;      // F_ell (scalar term of the transformed Hamiltonian)
};

struct BranchCoefficients {
  Branch branch = Branch::one;
  std::vector<BranchCoefficientSample> samples;
};

/// Coefficients of the transformed Hamiltonian along a squeeze trajectory.
BranchCoefficients branch_coefficients(const DriveConfig& cfg, const SqueezeTrajectory& traj);

struct DisplacementSample {
  double t = 0.0;
  cplx theta;
  double f = 0.0;  // integral of 2 Im(conj(theta) Lambda) = |theta|^2 up to a constant
};

/// Solve i dtheta/dt = Omega theta + Lambda together with df/dt = 2 Im(conj(theta) Lambda).
std::vector<DisplacementSample> displacement_trajectory(const std::function<double(double)>& omega,
                                                        const std::function<cplx(double)>& lambda, cplx theta0,
                                                        double t_start, const std::vector<double>& times,
                                                        const OdeOptions& opts = {});

/// Parameters of e^{i phase} S(epsilon) D(theta) R(beta).
struct UnitaryParams {
  cplx epsilon;
  cplx theta;
  double beta = 0.0;
  double phase = 0.0;
};

FockState apply_unitary(const UnitaryParams& u, const FockState& state);
FockState apply_unitary_adjoint(const UnitaryParams& u, const FockState& state);
CMatrix unitary_matrix(const UnitaryParams& u, int n_max);

struct BranchSample {
  double t = 0.0;
  double r = 0.0;
  double phi = 0.0;
  double delta = 0.0;
  cplx theta;
  double beta = 0.0;          // integral of Omega_ell
  double global_phase = 0.0;  // integral of -(F_ell + Re(Lambda_ell conj(theta)))
  double f = 0.0;
  cplx mu, nu, c;             // Heisenberg map a -> mu a + nu a^dag + c
  double omega_ell = 0.0;
  cplx lambda_ell;
  double f_ell = 0.0;

  UnitaryParams unitary() const { return {std::polar(r, phi), theta, beta, global_phase}; }
  /// theta and beta recovered from the Bogoliubov map instead of their own equations.
  cplx theta_from_map() const;
  double beta_from_map() const;
};

/// U_ell(t) with U_ell(t0) = 1, sampled at `times` (each >= t0).
struct BranchEvolution {
  Branch branch = Branch::one;
  std::vector<BranchSample> samples;

  const BranchSample& at(double t) const;
};

BranchEvolution evolve_branch(const DriveConfig& cfg, Branch branch, const std::vector<double>& times,
                              const OdeOptions& opts = {});

/// U(t) U^dag(t_i) built from one branch evolution.
class EvolutionOperator {
 public:
  EvolutionOperator(UnitaryParams at_t, UnitaryParams at_ti) : u_(at_t), ui_(at_ti) {}
  FockState apply(const FockState& state) const { return apply_unitary(u_, apply_unitary_adjoint(ui_, state)); }
  CMatrix matrix(int n_max) const { return unitary_matrix(u_, n_max) * unitary_matrix(ui_, n_max).adjoint(); }

 private:
  UnitaryParams u_, ui_;
};

EvolutionOperator compose_evolution(const BranchEvolution& ev, double t_i, double t);

/// U(t, t2) U_ell(t2, t1) U(t1, t0) applied segment by segment.
FockState evolve_chained(const BranchEvolution& ev, const DriveConfig& cfg, const FockState& initial);

/// Lewis-Riesenfeld invariant S D a^dag a D^dag S^dag + (f - |theta|^2), evaluated on a state.
double invariant_expectation(const BranchSample& s, const FockState& state);

/// Direct integration of i dx/dt = H_ell x in the Fock basis of the working frame.
std::vector<FockState> schrodinger_oracle(const DriveConfig& cfg, Branch branch, const FockState& initial,
                                          double t_start, const std::vector<double>& times,
                                          const OdeOptions& opts = {});

struct ProtocolConfig {
  cplx alpha;
  cplx c1{1.0 / std::numbers::sqrt2, 0.0};
  cplx c2{1.0 / std::numbers::sqrt2, 0.0};
  int detected_state = 2;  // 2 selects +, 1 selects -
  double target_theta = 0.0;

  void validate() const;
  double sign() const { return detected_state == 2 ? 1.0 : -1.0; }
};

/// Atom plus field evolved together from c1|1>|alpha> + c2|2>|alpha>, then the
/// second Ramsey pulse and detection of `protocol.detected_state`.
FockState atom_field_oracle(const DriveConfig& cfg, const ProtocolConfig& protocol, int n_max,
                            double tail_tol = kDefaultTailTolerance, const OdeOptions& opts = {});

struct PrepareOptions {
  int n_max = 0;  // 0 selects auto_n_max from the branch squeeze
  double tail_tol = kDefaultTailTolerance;
  OdeOptions ode{};
};

struct CatResult {
  FockState state;
  std::array<FockState, 2> branch_states;     // U_ell(t, t0)|alpha>
  std::array<BranchSample, 2> at_t2;          // branch data when the atom leaves
  std::array<BranchSample, 2> at_end;         // branch data at t_end
  double theta_angle = 0.0;                   // phi_1(t2) - phi_2(t2), wrapped
  double mean_n = 0.0;
  double distance = 0.0;                      // between the two branch components
  double normalization = 1.0;                 // N_pm
  bool degenerate_branches = false;
  int n_max = 0;
};

CatResult prepare_cat(const DriveConfig& cfg, const ProtocolConfig& protocol, const PrepareOptions& opts = {});

/// Largest squeeze factor and displacement reached by either branch at t_end.
struct BranchExtent {
  double r_max = 0.0;
  double amplitude = 0.0;
};
BranchExtent branch_extent(const DriveConfig& cfg, const ProtocolConfig& protocol, const OdeOptions& opts = {});

/// N[S(r e^{i phi1})|alpha> + sign S(r e^{i phi2})|-alpha>].
FockState squeezed_cat(cplx alpha, double r, double phi1, double phi2, double sign, int n_max,
                       double tail_tol = kDefaultTailTolerance);

/// SI preset: |P| = 0.1, alpha = sqrt(2), t2 = t_end = 2e-4 s. The residence
/// time is the one nearest 1e-4 s that aligns both squeezing directions.
DriveConfig headline_drive();
ProtocolConfig headline_protocol();

struct SearchTargets {
  double theta = 0.0;
  double mean_n = 0.0;  // <= 0 skips the excitation step
};

struct SearchOptions {
  double tau_min = 0.0;  // residence times <= tau_min are not considered
  double tau_max = 0.0;  // 0: tau_min plus two periods of the slower branch oscillation
  int scan_points = 4000;
  double theta_tol = 1e-3;
  double mean_n_rel_tol = 0.02;
  PrepareOptions prepare{};
};

struct SearchResult {
  DriveConfig drive;
  ProtocolConfig protocol;
  double theta_achieved = 0.0;
  double mean_n_achieved = 0.0;
  double theta_envelope_lo = 0.0;
  double theta_envelope_hi = 0.0;
};

/// Step 1 adjusts t2 so Theta hits the target (weak-coupling closed form), step 2
/// adjusts t_end for the photon number, step 3 keeps the atomic amplitudes.
SearchResult protocol_search(const DriveConfig& cfg, const ProtocolConfig& protocol, const SearchTargets& targets,
                             const SearchOptions& opts = {});

}  // namespace catfield
