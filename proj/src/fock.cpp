#include "catfield/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace catfield {

namespace {

void require_dim(int n_max) {
  if (n_max < 2) {
    throw InvalidDimension("Fock cutoff must be >= 2, got " + std::to_string(n_max));
  }
}

void check_tail(const CVector& v, double tol, const char* where) {
  const double tail = tail_mass(v);
  if (!(tail < tol)) {
    throw TruncationError(std::string(where) + ": tail population " + std::to_string(tail) +
                              " exceeds tolerance " + std::to_string(tol) +
                              " (increase n_max)",
                          tail);
  }
}

SparseOp squeeze_generator(cplx epsilon, int n) {
  // (eps a^dag^2 - eps^* a^2)/2; (a^dag^2)_{k+2,k} = sqrt((k+1)(k+2)).
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(2 * n);
  for (int k = 0; k + 2 < n; ++k) {
    const double s = std::sqrt((k + 1.0) * (k + 2.0));
    trip.emplace_back(k + 2, k, 0.5 * epsilon * s);
    trip.emplace_back(k, k + 2, -0.5 * std::conj(epsilon) * s);
  }
  SparseOp g(n, n);
  g.setFromTriplets(trip.begin(), trip.end());
  return g;
}

SparseOp displacement_generator(cplx theta, int n) {
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(2 * n);
  for (int k = 0; k + 1 < n; ++k) {
    const double s = std::sqrt(k + 1.0);
    trip.emplace_back(k + 1, k, theta * s);
    trip.emplace_back(k, k + 1, -std::conj(theta) * s);
  }
  SparseOp g(n, n);
  g.setFromTriplets(trip.begin(), trip.end());
  return g;
}

FockState unitary_result(const FockState& in, CVector out, const char* where) {
  const double drift = std::abs(out.norm() - 1.0);
  if (drift > 1e-10) {
    throw TruncationError(std::string(where) + ": norm drift " + std::to_string(drift),
                          tail_mass(out));
  }
  return FockState(std::move(out), in.tail_tolerance());
}

}  // namespace

double tail_mass(const CVector& amplitudes) {
  const int n = static_cast<int>(amplitudes.size());
  const int start = std::max(0, n - kTailLevels);
  double mass = 0.0;
  for (int k = start; k < n; ++k) mass += std::norm(amplitudes[k]);
  return mass;
}

FockState::FockState(CVector amplitudes, double tail_tol) : amps_(std::move(amplitudes)), tail_tol_(tail_tol) {
  require_dim(static_cast<int>(amps_.size()));
  const double nrm = amps_.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) {
    throw DegenerateState("state vector has zero or non-finite norm");
  }
  amps_ /= nrm;
  check_tail(amps_, tail_tol_, "FockState");
}

FockState::FockState(CVector amplitudes, double tail_tol, Unchecked)
    : amps_(std::move(amplitudes)), tail_tol_(tail_tol) {}

FockState FockState::vacuum(int n_max, double tail_tol) { return number(0, n_max, tail_tol); }

FockState FockState::number(int n, int n_max, double tail_tol) {
  require_dim(n_max);
  if (n < 0 || n >= n_max) throw InvalidDimension("number state outside the truncated basis");
  CVector v = CVector::Zero(n_max);
  v[n] = 1.0;
  return FockState(std::move(v), tail_tol);
}

cplx FockState::overlap(const FockState& other) const {
  if (other.dim() != dim()) throw InvalidDimension("overlap between states of different cutoff");
  return amps_.dot(other.amps_);  // Eigen's dot conjugates the left operand
}

FockState FockState::with_phase(double phase) const {
  return FockState(amps_ * std::polar(1.0, phase), tail_tol_, Unchecked{});
}

DensityMatrix::DensityMatrix(CMatrix elements, Validate validate) : rho_(std::move(elements)) {
  if (rho_.rows() != rho_.cols()) throw InvalidDimension("density matrix must be square");
  require_dim(static_cast<int>(rho_.rows()));
  if (validate == Validate::no) return;
  const double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-12) throw PreconditionError("density matrix not Hermitian: " + std::to_string(herm));
  const double tr = trace();
  if (std::abs(tr - 1.0) > 1e-10) throw PreconditionError("density matrix trace " + std::to_string(tr));
  const double lmin = min_eigenvalue();
  if (lmin < -1e-10) throw PreconditionError("density matrix eigenvalue " + std::to_string(lmin));
}

DensityMatrix DensityMatrix::pure(const FockState& state) {
  const CVector& c = state.amplitudes();
  return DensityMatrix(c * c.adjoint(), Validate::no);
}

double DensityMatrix::min_eigenvalue() const {
  const CMatrix h = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

SparseOp annihilation_op(int n_max) {
  require_dim(n_max);
  SparseOp a(n_max, n_max);
  a.reserve(Eigen::VectorXi::Constant(n_max, 1));
  for (int k = 0; k + 1 < n_max; ++k) a.insert(k, k + 1) = std::sqrt(k + 1.0);
  a.makeCompressed();
  return a;
}

SparseOp creation_op(int n_max) { return SparseOp(annihilation_op(n_max).adjoint()); }

SparseOp number_op(int n_max) {
  require_dim(n_max);
  SparseOp n(n_max, n_max);
  n.reserve(Eigen::VectorXi::Constant(n_max, 1));
  for (int k = 0; k < n_max; ++k) n.insert(k, k) = static_cast<double>(k);
  n.makeCompressed();
  return n;
}

SparseOp parity_op(int n_max) {
  require_dim(n_max);
  SparseOp p(n_max, n_max);
  p.reserve(Eigen::VectorXi::Constant(n_max, 1));
  for (int k = 0; k < n_max; ++k) p.insert(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  p.makeCompressed();
  return p;
}

CMatrix annihilation_matrix(int n_max) { return CMatrix(annihilation_op(n_max)); }

FockState coherent_state(cplx alpha, int n_max, double tail_tol) {
  require_dim(n_max);
  CVector v(n_max);
  v[0] = std::exp(-0.5 * std::norm(alpha));
  for (int k = 1; k < n_max; ++k) v[k] = v[k - 1] * alpha / std::sqrt(static_cast<double>(k));
  return FockState(std::move(v), tail_tol);
}

CVector expm_action(const SparseOp& generator, const CVector& v) {
  // Column-sum norm of the generator sets the number of substeps.
  double norm1 = 0.0;
  for (int k = 0; k < generator.outerSize(); ++k) {
    double col = 0.0;
    for (SparseOp::InnerIterator it(generator, k); it; ++it) col += std::abs(it.value());
    norm1 = std::max(norm1, col);
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(norm1 / 2.0)));
  const double h = 1.0 / steps;
  CVector out = v;
  CVector term(v.size());
  for (int s = 0; s < steps; ++s) {
    term = out;
    CVector sum = out;
    for (int k = 1; k < 80; ++k) {
      term = (generator * term) * (h / k);
      sum += term;
      if (term.lpNorm<Eigen::Infinity>() <= 1e-17 * sum.lpNorm<Eigen::Infinity>()) break;
    }
    out = std::move(sum);
  }
  return out;
}

FockState apply_squeeze(const FockState& state, cplx epsilon) {
  if (epsilon == cplx(0.0)) return state;
  return unitary_result(state, expm_action(squeeze_generator(epsilon, state.dim()), state.amplitudes()),
                        "apply_squeeze");
}

FockState apply_displacement(const FockState& state, cplx theta) {
  if (theta == cplx(0.0)) return state;
  return unitary_result(state,
                        expm_action(displacement_generator(theta, state.dim()), state.amplitudes()),
                        "apply_displacement");
}

FockState apply_rotation(const FockState& state, double beta) {
  CVector v = state.amplitudes();
  for (int k = 0; k < v.size(); ++k) v[k] *= std::polar(1.0, -beta * k);
  return FockState(std::move(v), state.tail_tolerance());
}

CMatrix squeeze_matrix(cplx epsilon, int n_max) {
  require_dim(n_max);
  return CMatrix(squeeze_generator(epsilon, n_max)).exp();
}

CMatrix displacement_matrix(cplx theta, int n_max) {
  require_dim(n_max);
  return CMatrix(displacement_generator(theta, n_max)).exp();
}

cplx expectation(const FockState& state, const SparseOp& op) {
  if (op.rows() != state.dim()) throw InvalidDimension("operator/state dimension mismatch");
  const CVector& c = state.amplitudes();
  return c.dot(op * c);
}

cplx expectation(const FockState& state, const CMatrix& op) {
  if (op.rows() != state.dim()) throw InvalidDimension("operator/state dimension mismatch");
  const CVector& c = state.amplitudes();
  return c.dot(op * c);
}

cplx expectation(const DensityMatrix& rho, const SparseOp& op) {
  if (op.rows() != rho.dim()) throw InvalidDimension("operator/state dimension mismatch");
  const CMatrix& r = rho.elements();
  cplx tr = 0.0;
  // Tr(rho O) = sum_{ij} rho_{ij} O_{ji}
  for (int k = 0; k < op.outerSize(); ++k) {
    for (SparseOp::InnerIterator it(op, k); it; ++it) tr += r(it.col(), it.row()) * it.value();
  }
  return tr;
}

cplx expectation(const DensityMatrix& rho, const CMatrix& op) {
  if (op.rows() != rho.dim()) throw InvalidDimension("operator/state dimension mismatch");
  return (rho.elements() * op).trace();
}

double purity(const DensityMatrix& rho) {
  const CMatrix& r = rho.elements();
  return r.cwiseProduct(r.transpose()).sum().real();
}

Quadratures quadrature_means(const FockState& state) {
  const cplx a = expectation(state, annihilation_op(state.dim()));
  return {a.real(), a.imag()};
}

Quadratures quadrature_means(const DensityMatrix& rho) {
  const cplx a = expectation(rho, annihilation_op(rho.dim()));
  return {a.real(), a.imag()};
}

double phase_space_distance(const FockState& first, const FockState& second) {
  const Quadratures q1 = quadrature_means(first);
  const Quadratures q2 = quadrature_means(second);
  return std::hypot(q2.x - q1.x, q2.y - q1.y);
}

double max_variance_axis(const FockState& state) {
  const Moments m = moments(state);
  return 0.5 * std::arg(m.a2 - m.a * m.a);
}

Moments moments(const FockState& state) {
  const CVector& c = state.amplitudes();
  const int n = state.dim();
  cplx a = 0.0, a2 = 0.0;
  double num = 0.0;
  for (int k = 0; k < n; ++k) {
    num += k * std::norm(c[k]);
    if (k + 1 < n) a += std::conj(c[k]) * c[k + 1] * std::sqrt(k + 1.0);
    if (k + 2 < n) a2 += std::conj(c[k]) * c[k + 2] * std::sqrt((k + 1.0) * (k + 2.0));
  }
  return {a, num, a2};
}

Moments moments(const DensityMatrix& rho) {
  const CMatrix& r = rho.elements();
  const int n = rho.dim();
  cplx a = 0.0, a2 = 0.0;
  double num = 0.0;
  for (int k = 0; k < n; ++k) {
    num += k * r(k, k).real();
    if (k + 1 < n) a += r(k + 1, k) * std::sqrt(k + 1.0);
    if (k + 2 < n) a2 += r(k + 2, k) * std::sqrt((k + 1.0) * (k + 2.0));
  }
  return {a, num, a2};
}

int auto_n_max(double alpha_abs, double r_max) {
  const double amp = alpha_abs * std::exp(r_max);
  const double m = amp + 5.0 * std::sqrt(amp + 1.0) + 10.0;
  double need = m * m;
  if (r_max > 0.0) {
    const double decay = -std::log(std::tanh(r_max));
    need = std::max(need, 40.0 / decay + 2.0 * amp * amp);
  }
  int n = 16;
  while (n < need) n *= 2;
  return n;
}

}  // namespace catfield
