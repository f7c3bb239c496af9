#pragma once

// Squeeze-parameter dynamics of the driven cavity: characteristic equations,
// their closed-form resonant and weak-coupling solutions, and regimes.

#include <vector>

#include "catfield/fock.hpp"
#include "catfield/ode.hpp"

namespace catfield {

/// Frame in which states and phases are expressed. `drive` rotates at -eta_slope/2
/// so the parametric pump is static; `lab` is the frame of the Hamiltonian as written.
enum class Frame { drive, lab };

/// Atomic branch: ell = 1 shifts the cavity by -chi, ell = 2 by +chi.
enum class Branch { one = 1, two = 2 };

inline int branch_sign(Branch b) { return b == Branch::one ? -1 : 1; }

struct DriveConfig {
  double omega = 0.0;         // cavity frequency
  double omega0 = 0.0;        // atomic splitting
  double chi = 0.0;           // dispersive shift while the atom is inside
  double kappa = 0.0;         // parametric amplitude, on over [t0, t_end]
  double eta_slope = 0.0;     // eta(t) = eta_offset + eta_slope t
  double eta_offset = 0.0;
  double varkappa = 0.0;      // linear amplitude
  double varpi_slope = 0.0;   // varpi(t) = varpi_offset + varpi_slope t
  double varpi_offset = 0.0;
  double t0 = 0.0, t1 = 0.0, t2 = 0.0, t_end = 0.0;
  Frame frame = Frame::drive;
  bool dispersive_valid = true;  // caller's assertion that detuning >> dipole coupling

  void validate() const;
  double frame_frequency() const { return frame == Frame::drive ? -0.5 * eta_slope : 0.0; }
  bool atom_inside(double t) const { return t >= t1 && t < t2; }
  bool pump_on(double t) const { return t >= t0 && t < t_end; }

  /// Mode frequency of a branch in the working frame.
  double mode_frequency(Branch b, bool atom) const {
    return frame == Frame::drive ? detuning(b, atom) : omega + (atom ? branch_sign(b) * chi : 0.0);
  }
  /// Pump phase eta and linear-drive phase varpi in the working frame.
  double eta_at(double t) const { return eta_offset + (eta_slope + 2.0 * frame_frequency()) * t; }
  double varpi_at(double t) const { return varpi_offset + (varpi_slope + frame_frequency()) * t; }
  cplx zeta(double t, bool pump) const { return pump ? std::polar(kappa, eta_at(t)) : cplx(0.0); }
  cplx xi(double t, bool pump) const { return pump ? std::polar(varkappa, varpi_at(t)) : cplx(0.0); }

  /// omega + eta_slope/2 + (-1)^ell chi: detuning of the branch mode from half the pump frequency.
  double detuning(Branch b, bool atom) const {
    return omega + 0.5 * eta_slope + (atom ? branch_sign(b) * chi : 0.0);
  }
};

/// Interval of the timeline on which chi and the drives are constant in form.
struct Segment {
  double from = 0.0;
  double to = 0.0;
  bool atom = false;
  bool pump = false;
};

/// Split [from, to] (either direction) at t0, t1, t2 and t_end.
std::vector<Segment> timeline_segments(const DriveConfig& cfg, double from, double to);

/// Integrate a system whose right-hand side depends on the segment flags, reporting at `times`.
using SegmentRhsFactory = std::function<OdeRhs(const Segment&)>;
std::vector<OdeState> integrate_timeline(const DriveConfig& cfg, const SegmentRhsFactory& make_rhs, OdeState x0,
                                         double t_from, const std::vector<double>& times,
                                         const OdeOptions& opts = {}, const OdePostStep& post = {});

struct SqueezeSample {
  double t = 0.0;
  double r = 0.0;
  double phi = 0.0;    // squeeze phase in the working frame
  double delta = 0.0;  // phi - eta, wrapped to (-pi, pi]
};

struct SqueezeTrajectory {
  Branch branch = Branch::one;
  std::vector<SqueezeSample> samples;
};

enum class RegimeClass { resonant, weak, critical, strong };

struct CouplingRegime {
  double p_ell = 0.0;  // 2 kappa / detuning, signed
  RegimeClass regime = RegimeClass::resonant;
};

const char* regime_name(RegimeClass c);

/// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

/// C_i = cos(phi - eta) sinh(2r).
double resonant_constant(double r, double delta);
/// C_1 = cosh(2r) + P cos(phi - eta) sinh(2r).
double dispersive_constant(double p_ell, double r, double delta);

CouplingRegime classify_regime(const DriveConfig& cfg, Branch branch);

/// Closed form on a segment without the atom: cosh 2r = K cosh(A + u), K = sqrt(1 + C_i^2),
/// u = 4 kappa (t - t_i). The phase follows from C_i and the sign of dr/dt.
SqueezeSample resonant_solution(const DriveConfig& cfg, double r_i, double phi_i, double t_i, double t);

/// Bounded oscillation of cosh 2r while the atom is inside and |P| < 1.
class WeakCouplingSolution {
 public:
  WeakCouplingSolution(const DriveConfig& cfg, Branch branch, double r1, double phi1, double t_start);

  SqueezeSample at(double t) const;
  double constant() const { return c1_; }
  double p_ell() const { return p_; }
  /// Angular frequency of the cosh 2r oscillation.
  double frequency() const { return rate_; }
  double period() const;
  /// [min, max] of cosh 2r.
  double envelope_lo() const { return center_ - radius_; }
  double envelope_hi() const { return center_ + radius_; }

 private:
  DriveConfig cfg_;
  double t_start_, r1_, delta1_, detuning_;
  double p_ = 0.0, c1_ = 0.0, rate_ = 0.0, center_ = 0.0, radius_ = 0.0, psi0_ = 0.0, sigma_ = 1.0;
};

/// Weak-coupling solution started at cfg.t1.
SqueezeSample dispersive_weak_solution(const DriveConfig& cfg, Branch branch, double r1, double phi1, double t);

struct SqueezeInitial {
  double t = 0.0;
  double r = 0.0;
  double phi = 0.0;
};

/// Numeric solution of the characteristic equations through Bogoliubov coefficients.
/// Works in every regime; chi switches on inside [t1, t2).
SqueezeTrajectory integrate_characteristic(const DriveConfig& cfg, Branch branch, const SqueezeInitial& init,
                                           const std::vector<double>& times, const OdeOptions& opts = {});

/// Squeeze parameters at t following the segment structure of the timeline:
/// resonant closed form outside the cavity, weak-coupling form inside.
/// Throws UnsupportedBranch where the weak-coupling form does not apply.
SqueezeSample analytic_trajectory_point(const DriveConfig& cfg, Branch branch, double t);

}  // namespace catfield
