#pragma once

// Truncated single-mode Fock space: states, operators and phase-space readouts.

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "catfield/errors.hpp"

namespace catfield {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using SparseOp = Eigen::SparseMatrix<cplx>;

inline constexpr double kDefaultTailTolerance = 1e-10;
/// Number of top levels whose population counts as truncation tail.
inline constexpr int kTailLevels = 8;

/// Population in the last kTailLevels levels of an amplitude vector.
double tail_mass(const CVector& amplitudes);

/// Normalized amplitude vector over |0>..|n_max-1>.
///
/// Every constructor normalizes and checks the tail population against the
/// tolerance carried by the state; a violation throws TruncationError.
class FockState {
 public:
  FockState(CVector amplitudes, double tail_tol = kDefaultTailTolerance);

  static FockState vacuum(int n_max, double tail_tol = kDefaultTailTolerance);
  static FockState number(int n, int n_max, double tail_tol = kDefaultTailTolerance);

  const CVector& amplitudes() const noexcept { return amps_; }
  cplx operator[](int n) const { return amps_[n]; }
  int dim() const noexcept { return static_cast<int>(amps_.size()); }
  double tail_tolerance() const noexcept { return tail_tol_; }
  double tail_mass() const { return catfield::tail_mass(amps_); }
  double norm() const { return amps_.norm(); }

  /// <this|other>
  cplx overlap(const FockState& other) const;
  double fidelity(const FockState& other) const { return std::norm(overlap(other)); }

  /// Same state multiplied by a global phase; never fails.
  FockState with_phase(double phase) const;

 private:
  struct Unchecked {};
  FockState(CVector amplitudes, double tail_tol, Unchecked);

  CVector amps_;
  double tail_tol_;
};

enum class Validate { yes, no };

/// Dense density matrix. Validation checks Hermiticity (1e-12), unit trace
/// (1e-10) and eigenvalues >= -1e-10.
class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix elements, Validate validate = Validate::yes);
  static DensityMatrix pure(const FockState& state);

  const CMatrix& elements() const noexcept { return rho_; }
  int dim() const noexcept { return static_cast<int>(rho_.rows()); }
  double trace() const { return rho_.trace().real(); }
  double min_eigenvalue() const;

 private:
  CMatrix rho_;
};

struct Quadratures {
  double x = 0.0;
  double y = 0.0;
};

// Operators. a has (a)_{n,n+1} = sqrt(n+1).
SparseOp annihilation_op(int n_max);
SparseOp creation_op(int n_max);
SparseOp number_op(int n_max);
SparseOp parity_op(int n_max);
CMatrix annihilation_matrix(int n_max);

/// |alpha> = exp(-|alpha|^2/2) sum alpha^n/sqrt(n!) |n>, renormalized after truncation.
FockState coherent_state(cplx alpha, int n_max, double tail_tol = kDefaultTailTolerance);

/// S(eps) = exp[(eps a^dag^2 - eps^* a^2)/2] applied through the exponential of the truncated generator.
FockState apply_squeeze(const FockState& state, cplx epsilon);
/// D(theta) = exp[theta a^dag - theta^* a].
FockState apply_displacement(const FockState& state, cplx theta);
/// R(beta) = exp[-i beta a^dag a]: c_n -> exp(-i n beta) c_n.
FockState apply_rotation(const FockState& state, double beta);

/// Dense exp of the truncated generators; used for operator-level checks.
CMatrix squeeze_matrix(cplx epsilon, int n_max);
CMatrix displacement_matrix(cplx theta, int n_max);

/// exp(G) v for a sparse generator (scaling plus truncated Taylor series).
CVector expm_action(const SparseOp& generator, const CVector& v);

cplx expectation(const FockState& state, const SparseOp& op);
cplx expectation(const FockState& state, const CMatrix& op);
cplx expectation(const DensityMatrix& rho, const SparseOp& op);
cplx expectation(const DensityMatrix& rho, const CMatrix& op);

double purity(const DensityMatrix& rho);

/// <X>, <Y> with X = (a^dag + a)/2 and Y = (a - a^dag)/2i.
Quadratures quadrature_means(const FockState& state);
Quadratures quadrature_means(const DensityMatrix& rho);

/// Euclidean distance between the quadrature centers of two states.
double phase_space_distance(const FockState& first, const FockState& second);

/// Angle (radians, in (-pi/2, pi/2]) of the quadrature of maximal variance.
double max_variance_axis(const FockState& state);

/// Moments entering the decoherence estimate.
struct Moments {
  cplx a;       // <a>
  double n;     // <a^dag a>
  cplx a2;      // <a^2>
};
Moments moments(const FockState& state);
Moments moments(const DensityMatrix& rho);

struct WignerGrid {
  double x_min = -4.0;
  double x_max = 4.0;
  int nx = 81;
  double y_min = -4.0;
  double y_max = 4.0;
  int ny = 81;

  double x(int i) const { return nx == 1 ? x_min : x_min + (x_max - x_min) * i / (nx - 1); }
  double y(int j) const { return ny == 1 ? y_min : y_min + (y_max - y_min) * j / (ny - 1); }
  double cell_area() const;
};

/// Row-major values, index [j * nx + i] for point (x(i), y(j)).
struct WignerValues {
  WignerGrid grid;
  std::vector<double> values;

  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * grid.nx + i]; }
  /// Riemann sum over the grid.
  double integral() const;
};

/// W(gamma) = (2/pi) Tr[rho D(gamma) Pi D^dag(gamma)], gamma = x + i y.
double wigner_point(const DensityMatrix& rho, cplx gamma);
double wigner_point(const FockState& state, cplx gamma);
WignerValues wigner(const DensityMatrix& rho, const WignerGrid& grid);
WignerValues wigner(const FockState& state, const WignerGrid& grid);

/// Smallest power of two that holds |alpha| e^{r_max} with room for the squeezed tail.
int auto_n_max(double alpha_abs, double r_max);

}  // namespace catfield
