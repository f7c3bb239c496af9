#include "catfield/reservoir_optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace catfield {

ClosedFormReservoir optimal_reservoir_closed_form(double alpha, double r, ReservoirCase which) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha) || !std::isfinite(r)) {
    throw PreconditionError("closed-form reservoir needs finite alpha >= 0 and r");
  }
  const double shift = 0.25 * std::log1p(4.0 * alpha * alpha);
  ClosedFormReservoir out;
  out.which = which;
  if (which == ReservoirCase::A) {
    out.r_tilde = r + shift;
    out.phi_tilde = 0.0;
  } else {
    out.r_tilde = r - shift;
    out.phi_tilde = std::numbers::pi;
  }
  if (out.r_tilde < 0.0) {
    out.r_tilde = 0.0;
    out.clamped_infeasible = true;
  }
  return out;
}

ReservoirCase case_for_squeeze_phase(double phi) {
  const double w = std::remainder(phi, 2.0 * std::numbers::pi);
  return std::abs(w) <= 0.5 * std::numbers::pi ? ReservoirCase::A : ReservoirCase::B;
}

const char* method_name(OptimizationMethod m) {
  switch (m) {
    case OptimizationMethod::closed_form: return "closed_form";
    case OptimizationMethod::grid: return "grid";
    case OptimizationMethod::refined: return "refined";
  }
  return "unknown";
}

namespace {

// |X| as a function of the reservoir squeeze; negative r_tilde continues to phi + pi.
double abs_factor(const Moments& m, double r_tilde, double phi_tilde) {
  const double s = std::sinh(r_tilde);
  const double n = s * s;
  const cplx mm = -std::polar(0.5 * std::sinh(2.0 * r_tilde), phi_tilde);
  const cplx ad = std::conj(m.a);
  const double x = (2.0 * n + 1.0) * (std::norm(m.a) - m.n) + 2.0 * (mm * (ad * ad - std::conj(m.a2))).real() - n;
  return std::abs(x);
}

double tau_from_factor(double x, double tau_R) {
  return x <= 1e-10 ? std::numeric_limits<double>::infinity() : tau_R / (2.0 * x);
}

}  // namespace

void compare_with_closed_form(OptimizationResult& result, const ClosedFormReservoir& closed) {
  result.closed_form_r_residual = result.r_tilde_opt - closed.r_tilde;
  result.closed_form_phi_residual = std::remainder(result.phi_tilde_opt - closed.phi_tilde, 2.0 * std::numbers::pi);
}

double tau_objective(const Moments& m, double tau_R, double r_tilde, double phi_tilde) {
  return tau_from_factor(abs_factor(m, r_tilde, phi_tilde), tau_R);
}

NelderMeadResult nelder_mead_2d(const std::function<double(double, double)>& f, double x0, double y0, double hx,
                                double hy, double rel_tol, int max_iterations) {
  struct Vertex {
    double x, y, f;
  };
  std::array<Vertex, 3> s{Vertex{x0, y0, f(x0, y0)}, Vertex{x0 + hx, y0, f(x0 + hx, y0)},
                          Vertex{x0, y0 + hy, f(x0, y0 + hy)}};
  const auto order = [&s] { std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; }); };
  int it = 0;
  for (; it < max_iterations; ++it) {
    order();
    const double spread = std::abs(s[2].f - s[0].f);
    const double size = std::max({std::abs(s[1].x - s[0].x), std::abs(s[2].x - s[0].x), std::abs(s[1].y - s[0].y),
                                  std::abs(s[2].y - s[0].y)});
    if (spread <= rel_tol * std::abs(s[0].f) + 1e-300 && size <= rel_tol * (1.0 + std::abs(s[0].x) + std::abs(s[0].y))) {
      break;
    }
    const double cx = 0.5 * (s[0].x + s[1].x);
    const double cy = 0.5 * (s[0].y + s[1].y);
    const auto at = [&](double t) {
      const double x = cx + t * (s[2].x - cx);
      const double y = cy + t * (s[2].y - cy);
      return Vertex{x, y, f(x, y)};
    };
    const Vertex refl = at(-1.0);
    if (refl.f < s[0].f) {
      const Vertex exp = at(-2.0);
      s[2] = exp.f < refl.f ? exp : refl;
    } else if (refl.f < s[1].f) {
      s[2] = refl;
    } else {
      const Vertex con = refl.f < s[2].f ? at(-0.5) : at(0.5);
      if (con.f < std::min(refl.f, s[2].f)) {
        s[2] = con;
      } else {
        for (int k = 1; k < 3; ++k) {
          s[k].x = s[0].x + 0.5 * (s[k].x - s[0].x);
          s[k].y = s[0].y + 0.5 * (s[k].y - s[0].y);
          s[k].f = f(s[k].x, s[k].y);
        }
      }
    }
  }
  order();
  return {s[0].x, s[0].y, s[0].f, it};
}

OptimizationResult maximize_tau(const Moments& m, double tau_R, const OptimizeSearch& search) {
  if (!(tau_R > 0.0)) throw PreconditionError("tau_R must be positive");
  if (!(search.r_step > 0.0) || !(search.r_max >= 0.0) || search.phi_points < 1) {
    throw PreconditionError("optimizer grid needs r_step > 0, r_max >= 0 and phi_points >= 1");
  }
  const int nr = static_cast<int>(std::floor(search.r_max / search.r_step + 1e-9)) + 1;
  OptimizationResult out;
  double best_x = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nr; ++i) {
    const double r = i * search.r_step;
    for (int j = 0; j < search.phi_points; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / search.phi_points;
      const double x = abs_factor(m, r, phi);
      if (x < best_x) {
        best_x = x;
        out.grid_r_tilde = r;
        out.grid_phi_tilde = phi;
      }
    }
  }
  out.grid_tau = tau_from_factor(best_x, tau_R);
  out.r_tilde_opt = out.grid_r_tilde;
  out.phi_tilde_opt = out.grid_phi_tilde;
  out.tau_opt = out.grid_tau;
  out.method = OptimizationMethod::grid;
  if (std::isinf(out.grid_tau)) {
    out.plateau = true;
    return out;
  }

  const double dphi = 2.0 * std::numbers::pi / search.phi_points;
  const NelderMeadResult nm = nelder_mead_2d([&m](double r, double phi) { return abs_factor(m, r, phi); },
                                             out.grid_r_tilde, out.grid_phi_tilde, 0.5 * search.r_step, 0.5 * dphi,
                                             search.rel_tol, search.max_iterations);
  out.iterations = nm.iterations;
  if (nm.f <= best_x) {
    double r = nm.x, phi = nm.y;
    if (r < 0.0) {
      r = -r;
      phi += std::numbers::pi;
    }
    phi = std::fmod(phi, 2.0 * std::numbers::pi);
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    out.r_tilde_opt = r;
    out.phi_tilde_opt = phi;
    out.tau_opt = tau_from_factor(nm.f, tau_R);
    out.method = OptimizationMethod::refined;
    out.plateau = std::isinf(out.tau_opt);
  }
  return out;
}

}  // namespace catfield
