#pragma once

// Reservoir squeeze parameters that maximize the decoherence time.

#include <functional>
#include <limits>

#include "catfield/dissipation.hpp"

namespace catfield {

enum class ReservoirCase { A, B };

struct ClosedFormReservoir {
  ReservoirCase which = ReservoirCase::A;
  double r_tilde = 0.0;
  double phi_tilde = 0.0;
  bool clamped_infeasible = false;  // case B asked for r_tilde < 0; clamped to 0
};

/// A: r + ln(1+4 alpha^2)/4 with phi = 0. B: r - ln(1+4 alpha^2)/4 with phi = pi.
ClosedFormReservoir optimal_reservoir_closed_form(double alpha, double r, ReservoirCase which);

/// Case matching components S(r e^{i phi})|+-alpha> with real alpha: A near phi = 0, B near phi = pi.
ReservoirCase case_for_squeeze_phase(double phi);

struct OptimizeSearch {
  double r_max = 6.0;
  double r_step = 0.05;
  int phi_points = 720;
  double rel_tol = 1e-8;
  int max_iterations = 4000;
};

enum class OptimizationMethod { closed_form, grid, refined };
const char* method_name(OptimizationMethod m);

struct OptimizationResult {
  double r_tilde_opt = 0.0;
  double phi_tilde_opt = 0.0;
  double tau_opt = 0.0;
  OptimizationMethod method = OptimizationMethod::grid;
  double grid_r_tilde = 0.0;
  double grid_phi_tilde = 0.0;
  double grid_tau = 0.0;
  bool plateau = false;  // tau is infinite at the optimum (pointer state)
  int iterations = 0;
  // Filled by compare_with_closed_form; NaN otherwise.
  double closed_form_r_residual = std::numeric_limits<double>::quiet_NaN();
  double closed_form_phi_residual = std::numeric_limits<double>::quiet_NaN();
};

/// Records r_opt - r_closed and the wrapped phi difference.
void compare_with_closed_form(OptimizationResult& result, const ClosedFormReservoir& closed);

/// Decoherence time as a function of the reservoir squeeze parameters.
double tau_objective(const Moments& m, double tau_R, double r_tilde, double phi_tilde);

/// Grid over [0, r_max] x [0, 2 pi), then Nelder-Mead refinement.
OptimizationResult maximize_tau(const Moments& m, double tau_R, const OptimizeSearch& search = {});

/// Minimal Nelder-Mead on R^2; returns the best vertex.
struct NelderMeadResult {
  double x = 0.0, y = 0.0, f = 0.0;
  int iterations = 0;
};
NelderMeadResult nelder_mead_2d(const std::function<double(double, double)>& f, double x0, double y0, double hx,
                                double hy, double rel_tol, int max_iterations);

}  // namespace catfield
