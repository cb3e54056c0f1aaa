#pragma once

// Truncated Fock-space primitives: ladder operators, coherent states and
// dense eigendecompositions of Hermitian and unitary matrices.

#include <Eigen/Dense>

#include <complex>

namespace kpo {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Lowering operator a on the first `dim` Fock levels: <n-1|a|n> = sqrt(n).
ComplexMatrix annihilation(Index dim);
ComplexMatrix creation(Index dim);
ComplexMatrix number_operator(Index dim);

/// Diagonal of exp(i pi a^dag a), i.e. (+1, -1, +1, ...).
RealVector parity_diagonal(Index dim);

struct CoherentState {
  StateVector state;
  /// |alpha|^2 > dim/4: the tail of the Poisson distribution is cut off.
  bool truncation_warning = false;
};

/// Normalized |alpha> truncated to `dim` levels.
CoherentState coherent_state(Complex alpha, Index dim);

/// Coherent-state amplitude for quadratures (q, p) with alpha = (q + i p)/sqrt(2).
inline Complex quadrature_alpha(double q, double p) {
  return Complex(q, p) / std::sqrt(2.0);
}

struct HermitianEigen {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // columns, phase-fixed
};

struct UnitaryEigen {
  RealVector phases;      // eigenvalue e^{i phase}, phase in [0, 2pi), ascending
  ComplexMatrix vectors;  // orthonormal columns, phase-fixed
};

/// Throws ContractViolation unless max|H - H^dag| < 1e-10 max(1, max|H|).
HermitianEigen hermitian_eig(const ComplexMatrix& h);

/// Eigendecomposition of a unitary through its complex Schur form. For a
/// normal matrix the Schur vectors are an orthonormal eigenbasis, which keeps
/// (near-)degenerate eigenspaces orthonormal as well.
UnitaryEigen unitary_eig(const ComplexMatrix& u);

/// V exp(scalar * Lambda) V^dag for Hermitian H = V Lambda V^dag.
ComplexMatrix expm_hermitian_times(const ComplexMatrix& h, Complex scalar);

/// Rotate `v` so that its largest-magnitude amplitude is real and positive.
void fix_phase(Eigen::Ref<StateVector> v);

double hermiticity_residual(const ComplexMatrix& m);
double unitarity_residual(const ComplexMatrix& m);

/// Wrap an angle into [0, 2pi).
double wrap_phase(double phase);

/// x mod period, in [0, period).
double positive_mod(double x, double period);

}  // namespace kpo
