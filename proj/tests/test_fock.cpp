#include <cmath>
#include <numbers>

#include "doctest.h"

#include "catfield/fock.hpp"

using namespace catfield;
using std::numbers::pi;

namespace {

// Wigner function of N(|a> + |-a>), real a.
double even_cat_wigner(double a, double x, double y) {
  const double n2 = 1.0 / (2.0 * (1.0 + std::exp(-2.0 * a * a)));
  return 2.0 / pi * n2 *
         (std::exp(-2.0 * ((x - a) * (x - a) + y * y)) + std::exp(-2.0 * ((x + a) * (x + a) + y * y)) +
          2.0 * std::exp(-2.0 * (x * x + y * y)) * std::cos(4.0 * a * y));
}

FockState even_cat(double a, int n_max) {
  return FockState(coherent_state(a, n_max).amplitudes() + coherent_state(-a, n_max).amplitudes());
}

}  // namespace

TEST_CASE("annihilation matrix entries") {
  const CMatrix a2 = annihilation_matrix(2);
  CHECK(a2(0, 0) == cplx(0.0));
  CHECK(a2(0, 1) == cplx(1.0));
  CHECK(a2(1, 0) == cplx(0.0));
  CHECK(a2(1, 1) == cplx(0.0));
  CHECK_THROWS_AS(annihilation_matrix(1), InvalidDimension);

  const int n = 12;
  const CMatrix a = annihilation_matrix(n);
  const CMatrix comm = a * a.adjoint() - a.adjoint() * a;
  const CMatrix block = comm.topLeftCorner(n - 1, n - 1) - CMatrix::Identity(n - 1, n - 1);
  CHECK(block.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("coherent state is an eigenvector of a") {
  const cplx alpha(std::sqrt(2.0), 0.0);
  const FockState s = coherent_state(alpha, 64);
  const CVector av = annihilation_op(64) * s.amplitudes();
  CHECK((av - alpha * s.amplitudes()).norm() < 1e-8);
  CHECK(expectation(s, number_op(64)).real() == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(std::abs(coherent_state(0.0, 16)[0] - 1.0) < 1e-15);
}

TEST_CASE("coherent overlap") {
  const cplx a(1.0, 0.0), b(1.0, 1.0);
  const double f = coherent_state(a, 64).fidelity(coherent_state(b, 64));
  CHECK(std::abs(f - std::exp(-std::norm(a - b))) < 1e-8);
}

TEST_CASE("truncation is reported with the tail mass") {
  try {
    coherent_state(4.0, 20);
    FAIL("expected truncation error");
  } catch (const TruncationError& e) {
    CHECK(e.tail_mass() > 1e-10);
  }
}

TEST_CASE("squeezed vacuum photon number and variance") {
  const int n = 96;
  const FockState vac = FockState::vacuum(n);
  CHECK(apply_squeeze(vac, 0.0).fidelity(vac) == doctest::Approx(1.0));
  const FockState sv = apply_squeeze(vac, 1.0);
  CHECK(std::abs(sv.norm() - 1.0) < 1e-10);
  CHECK(std::abs(expectation(sv, number_op(n)).real() - std::sinh(1.0) * std::sinh(1.0)) < 1e-6);

  // X = (a + a^dag)/2 is the squeezed quadrature for phi = pi.
  const FockState sq = apply_squeeze(vac, std::polar(1.0, pi));
  const CMatrix a = annihilation_matrix(n);
  const CMatrix x = 0.5 * (a + a.adjoint());
  const double var = (expectation(sq, CMatrix(x * x)) - std::pow(expectation(sq, x), 2)).real();
  CHECK(std::abs(var - std::exp(-2.0) / 4.0) < 1e-6);
}

TEST_CASE("second moment of squeezed vacuum in the S(eps) convention") {
  const int n = 96;
  const double r = 0.8;
  const FockState s0 = apply_squeeze(FockState::vacuum(n), r);
  const FockState spi = apply_squeeze(FockState::vacuum(n), std::polar(r, pi));
  CHECK(std::abs(moments(s0).a2 - cplx(std::sinh(r) * std::cosh(r))) < 1e-6);
  CHECK(std::abs(moments(spi).a2 + std::sinh(r) * std::cosh(r)) < 1e-6);
  const CMatrix a = annihilation_matrix(n);
  CHECK(std::abs(expectation(spi, CMatrix(a * a)) + std::sinh(r) * std::cosh(r)) < 1e-6);
}

TEST_CASE("squeeze inverse and dense exponential agree") {
  const int n = 64;
  const FockState c = coherent_state(cplx(0.7, -0.3), n);
  const cplx eps = std::polar(0.6, 0.4);
  const FockState back = apply_squeeze(apply_squeeze(c, eps), -eps);
  CHECK(back.fidelity(c) > 1 - 1e-8);
  const CVector dense = squeeze_matrix(eps, n) * c.amplitudes();
  CHECK((dense - apply_squeeze(c, eps).amplitudes()).norm() < 1e-9);
  const CVector ddense = displacement_matrix(cplx(0.4, 0.2), n) * c.amplitudes();
  CHECK((ddense - apply_displacement(c, cplx(0.4, 0.2)).amplitudes()).norm() < 1e-9);
}

TEST_CASE("displacement builds coherent states and composes") {
  const int n = 64;
  const FockState vac = FockState::vacuum(n);
  CHECK(apply_displacement(vac, 0.0).fidelity(vac) == doctest::Approx(1.0));
  const cplx alpha(std::sqrt(2.0), 0.0);
  CHECK(apply_displacement(vac, alpha).fidelity(coherent_state(alpha, n)) >= 1 - 1e-10);

  const cplx t1(0.5, 0.3), t2(-0.2, 0.7);
  const FockState start = coherent_state(cplx(0.3, 0.1), n);
  const FockState two = apply_displacement(apply_displacement(start, t2), t1);
  const FockState one = apply_displacement(start, t1 + t2);
  const cplx phase = std::polar(1.0, std::imag(t1 * std::conj(t2)));
  CHECK((two.amplitudes() - phase * one.amplitudes()).norm() < 1e-8);
}

TEST_CASE("rotation") {
  const int n = 48;
  const cplx alpha(1.1, 0.4);
  const FockState c = coherent_state(alpha, n);
  CHECK(apply_rotation(c, 0.0).fidelity(c) == doctest::Approx(1.0));
  CHECK((apply_rotation(c, 2.0 * pi).amplitudes() - c.amplitudes()).norm() < 1e-12);
  const double beta = 0.9;
  CHECK(apply_rotation(c, beta).fidelity(coherent_state(alpha * std::polar(1.0, -beta), n)) >= 1 - 1e-10);
}

TEST_CASE("expectation values") {
  const int n = 32;
  CHECK(std::abs(expectation(FockState::vacuum(n), number_op(n))) == 0.0);
  CHECK(std::abs(expectation(coherent_state(1.0, n), annihilation_op(n)) - 1.0) < 1e-10);
  const FockState s = apply_squeeze(coherent_state(cplx(0.5, 0.2), n), std::polar(0.3, 1.0));
  const CMatrix op = CMatrix::Random(n, n);
  CHECK(std::abs(expectation(s, CMatrix(op.adjoint())) - std::conj(expectation(s, op))) < 1e-12);
  const DensityMatrix rho = DensityMatrix::pure(s);
  CHECK(std::abs(expectation(rho, op) - expectation(s, op)) < 1e-12);
  CHECK(std::abs(expectation(rho, creation_op(n)) - std::conj(moments(s).a)) < 1e-12);
  const Moments m1 = moments(s), m2 = moments(rho);
  CHECK(std::abs(m1.a2 - m2.a2) < 1e-12);
  CHECK(std::abs(m1.n - m2.n) < 1e-12);
}

TEST_CASE("purity") {
  const int n = 64;
  CHECK(purity(DensityMatrix::pure(coherent_state(1.2, n))) == doctest::Approx(1.0).epsilon(1e-10));
  const int d = 5;
  CHECK(purity(DensityMatrix(CMatrix::Identity(d, d) / double(d))) == doctest::Approx(1.0 / d));
  const double a = 2.0;
  const CVector p = coherent_state(a, n).amplitudes(), m = coherent_state(-a, n).amplitudes();
  const DensityMatrix mix(0.5 * (p * p.adjoint() + m * m.adjoint()));
  CHECK(std::abs(purity(mix) - 0.5 * (1.0 + std::exp(-4.0 * a * a))) < 1e-8);
}

TEST_CASE("density matrix validation") {
  CMatrix bad = CMatrix::Identity(3, 3);
  CHECK_THROWS_AS(DensityMatrix{bad}, PreconditionError);
  CMatrix neg = CMatrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityMatrix{neg}, PreconditionError);
}

TEST_CASE("phase space distance") {
  const int n = 256;
  const double a = std::sqrt(2.0);
  const FockState p = coherent_state(a, n), m = coherent_state(-a, n);
  CHECK(phase_space_distance(p, p) == doctest::Approx(0.0));
  CHECK(phase_space_distance(p, m) == doctest::Approx(2.0 * a).epsilon(1e-12));
  const double r = 1.0;
  // Components stretched along the displacement (phi = 0) and compressed (phi = pi).
  CHECK(std::abs(phase_space_distance(apply_squeeze(p, r), apply_squeeze(m, r)) - 2 * a * std::exp(r)) < 1e-4);
  CHECK(std::abs(phase_space_distance(apply_squeeze(p, std::polar(r, pi)), apply_squeeze(m, std::polar(r, pi))) -
                 2 * a * std::exp(-r)) < 1e-4);
}

TEST_CASE("maximal variance axis follows phi/2") {
  const FockState s = apply_squeeze(coherent_state(cplx(0.4, 0.2), 96), std::polar(0.9, 1.2));
  CHECK(max_variance_axis(s) == doctest::Approx(0.6).epsilon(1e-8));
}

TEST_CASE("wigner of vacuum, coherent and cat states") {
  const int n = 64;
  CHECK(std::abs(wigner_point(FockState::vacuum(n), 0.0) - 2.0 / pi) < 1e-6);
  const cplx alpha(1.0, -0.5);
  const FockState c = coherent_state(alpha, n);
  const cplx g(0.3, 0.8);
  CHECK(std::abs(wigner_point(c, g) - 2.0 / pi * std::exp(-2.0 * std::norm(g - alpha))) < 1e-10);

  const FockState cat = even_cat(2.0, n);
  WignerGrid grid{-1.0, 1.0, 9, -1.0, 1.0, 9};
  const WignerValues w = wigner(cat, grid);
  double max_err = 0.0, min_w = 1.0;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      max_err = std::max(max_err, std::abs(w.at(i, j) - even_cat_wigner(2.0, grid.x(i), grid.y(j))));
      min_w = std::min(min_w, w.at(i, j));
    }
  }
  CHECK(max_err < 1e-10);
  CHECK(min_w < 0.0);
}

TEST_CASE("wigner recurrence against dense displaced parity") {
  const int n = 40;
  const FockState s = apply_squeeze(coherent_state(cplx(0.5, 0.3), n), std::polar(0.3, 0.7));
  const DensityMatrix rho = DensityMatrix::pure(s);
  const cplx g(-0.4, 0.6);
  const int big = 140;  // displaced parity built in a larger space, then cut
  const CMatrix d = displacement_matrix(g, big);
  CMatrix parity = CMatrix::Zero(big, big);
  for (int k = 0; k < big; ++k) parity(k, k) = (k % 2) ? -1.0 : 1.0;
  const CMatrix p = (d * parity * d.adjoint()).topLeftCorner(n, n);
  const double brute = 2.0 / pi * (rho.elements() * p).trace().real();
  CHECK(std::abs(wigner_point(rho, g) - brute) < 1e-10);
  CHECK(std::abs(wigner_point(s, g) - brute) < 1e-10);
}

TEST_CASE("wigner integrates to one") {
  const FockState cat = even_cat(2.0, 64);
  WignerGrid grid{-6.0, 6.0, 121, -6.0, 6.0, 121};
  CHECK(std::abs(wigner(DensityMatrix::pure(cat), grid).integral() - 1.0) < 1e-3);
  const FockState sq = apply_squeeze(coherent_state(1.0, 64), 0.5);
  WignerGrid wide{-9.0, 9.0, 181, -9.0, 9.0, 181};
  CHECK(std::abs(wigner(sq, wide).integral() - 1.0) < 1e-3);
}

TEST_CASE("automatic cutoff holds the squeezed tail") {
  const double a = std::sqrt(2.0), r = 1.2;
  const int n = auto_n_max(a, r);
  CHECK((n & (n - 1)) == 0);
  const FockState s = apply_squeeze(coherent_state(a, n), r);
  CHECK(s.tail_mass() < 1e-10);
}
