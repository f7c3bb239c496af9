#include <algorithm>
#include <cmath>
#include <numbers>

#include "catfield/fock.hpp"

namespace catfield {

namespace {

// Displaced parity D(g) Pi D(g)^dag = D(2g) Pi. Matrix elements of D(b) along
// the diagonal n = m + d are e^{i d arg b} f_m with the normalized Laguerre
// functions f_m = sqrt(m!/(m+d)!) x^{d/2} e^{-x/2} L_m^{(d)}(x), x = |b|^2,
// generated by their three-term recurrence in m. The recurrence is run on a
// rescaled value to stay inside the double range.
template <class Entry>
cplx parity_trace(cplx gamma, int dim, const Entry& rho) {
  const cplx b = 2.0 * gamma;
  const double x = std::norm(b);
  cplx tr = 0.0;
  if (x == 0.0) {
    for (int m = 0; m < dim; ++m) tr += (m % 2 ? -1.0 : 1.0) * rho(m, m);
    return tr;
  }
  const double theta = std::arg(b);
  const double log_x = std::log(x);
  constexpr double kBig = 1e150;
  const double log_big = std::log(kBig);
  for (int d = 0; d < dim; ++d) {
    double scale = 0.5 * d * log_x - 0.5 * x - 0.5 * std::lgamma(d + 1.0);
    double g_prev = 0.0, g = 1.0;
    cplx upper = 0.0, lower = 0.0;  // n = m + d and n = m - d sums
    for (int m = 0; m + d < dim; ++m) {
      if (m > 0) {
        const double next = ((2.0 * (m - 1) + 1.0 + d - x) * g - std::sqrt((m - 1.0) * (m - 1.0 + d)) * g_prev) /
                            std::sqrt(double(m) * (m + d));
        g_prev = g;
        g = next;
        if (std::abs(g) > kBig) {
          g /= kBig;
          g_prev /= kBig;
          scale += log_big;
        }
      }
      const double f = g * std::exp(scale);
      const double sign = m % 2 ? -1.0 : 1.0;
      upper += sign * f * rho(m, m + d);
      if (d > 0) lower += sign * f * rho(m + d, m);
    }
    tr += std::polar(1.0, d * theta) * upper + std::polar(1.0, -d * theta) * lower;
  }
  return tr;
}

int support(const CVector& v, bool amplitudes) {
  int top = static_cast<int>(v.size());
  while (top > 1) {
    const cplx c = v[top - 1];
    const double p = amplitudes ? std::norm(c) : std::abs(c.real());
    if (p > 1e-32) break;
    --top;
  }
  return top;
}

}  // namespace

double WignerGrid::cell_area() const {
  const double dx = nx > 1 ? (x_max - x_min) / (nx - 1) : 1.0;
  const double dy = ny > 1 ? (y_max - y_min) / (ny - 1) : 1.0;
  return dx * dy;
}

double WignerValues::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.cell_area();
}

double wigner_point(const DensityMatrix& rho, cplx gamma) {
  const CMatrix& r = rho.elements();
  const int dim = support(CVector(r.diagonal()), false);
  const cplx tr = parity_trace(gamma, dim, [&r](int i, int j) { return r(i, j); });
  return 2.0 / std::numbers::pi * tr.real();
}

double wigner_point(const FockState& state, cplx gamma) {
  const CVector& c = state.amplitudes();
  const int dim = support(c, true);
  const cplx tr = parity_trace(gamma, dim, [&c](int i, int j) { return c[i] * std::conj(c[j]); });
  return 2.0 / std::numbers::pi * tr.real();
}

namespace {

template <class State>
WignerValues wigner_grid(const State& s, const WignerGrid& grid) {
  if (grid.nx < 1 || grid.ny < 1) throw PreconditionError("Wigner grid needs at least one point per axis");
  WignerValues out{grid, std::vector<double>(static_cast<std::size_t>(grid.nx) * grid.ny)};
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      out.values[static_cast<std::size_t>(j) * grid.nx + i] = wigner_point(s, cplx(grid.x(i), grid.y(j)));
    }
  }
  return out;
}

}  // namespace

WignerValues wigner(const DensityMatrix& rho, const WignerGrid& grid) { return wigner_grid(rho, grid); }
WignerValues wigner(const FockState& state, const WignerGrid& grid) { return wigner_grid(state, grid); }

}  // namespace catfield
