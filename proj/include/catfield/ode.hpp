#pragma once

// Adaptive integration of complex ODE systems (Runge-Kutta-Fehlberg 7(8)).

#include <functional>
#include <vector>

#include "catfield/fock.hpp"

namespace catfield {

using OdeState = std::vector<cplx>;
using OdeRhs = std::function<void(const OdeState& x, OdeState& dxdt, double t)>;
/// Called after every accepted step; may modify the state (renormalization, projections).
using OdePostStep = std::function<void(OdeState& x, double t)>;

struct OdeOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double initial_step = 0.0;  // 0 picks span/100
  long max_steps = 20'000'000;
  /// Steps shorter than this fraction of the span count as underflow.
  double min_step_fraction = 1e-15;
};

/// Integrate from (t0, x0) through the monotone sequence `times` and return the
/// state at each of them. `breakpoints` are visited exactly (the right-hand side
/// may jump there) but not reported. Integration may run backwards in time.
std::vector<OdeState> integrate_to_times(const OdeRhs& rhs, OdeState x0, double t0,
                                         const std::vector<double>& times, const OdeOptions& opts = {},
                                         const OdePostStep& post = {},
                                         const std::vector<double>& breakpoints = {});

}  // namespace catfield
