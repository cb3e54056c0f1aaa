#include "kpo/fock.hpp"

#include "kpo/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace kpo {

namespace {

void require_dim(Index dim) {
  if (dim < 2) {
    throw InvalidDimension("Fock dimension must be >= 2, got " + std::to_string(dim));
  }
}

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

ComplexMatrix annihilation(Index dim) {
  require_dim(dim);
  ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
  for (Index n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

ComplexMatrix creation(Index dim) { return annihilation(dim).adjoint(); }

ComplexMatrix number_operator(Index dim) {
  require_dim(dim);
  ComplexMatrix n = ComplexMatrix::Zero(dim, dim);
  for (Index k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

RealVector parity_diagonal(Index dim) {
  require_dim(dim);
  RealVector p(dim);
  for (Index k = 0; k < dim; ++k) p(k) = (k % 2 == 0) ? 1.0 : -1.0;
  return p;
}

CoherentState coherent_state(Complex alpha, Index dim) {
  require_dim(dim);
  CoherentState out;
  out.state.resize(dim);
  const double mean = std::norm(alpha);
  out.state(0) = std::exp(-0.5 * mean);
  for (Index n = 1; n < dim; ++n) {
    out.state(n) = out.state(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  }
  out.state.normalize();
  out.truncation_warning = mean > static_cast<double>(dim) / 4.0;
  return out;
}

double hermiticity_residual(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double unitarity_residual(const ComplexMatrix& m) {
  const ComplexMatrix g = m.adjoint() * m;
  return (g - ComplexMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

double wrap_phase(double phase) { return positive_mod(phase, kTwoPi); }

double positive_mod(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  // fmod of a tiny negative number can round up to exactly `period`.
  if (r >= period) r -= period;
  return r;
}

void fix_phase(Eigen::Ref<StateVector> v) {
  Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const double mag = std::abs(v(imax));
  if (mag == 0.0) return;
  v *= std::conj(v(imax)) / mag;
  v(imax) = Complex(v(imax).real(), 0.0);
}

HermitianEigen hermitian_eig(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) throw ContractViolation("hermitian_eig: matrix is not square");
  const double scale = std::max(1.0, max_abs(h));
  const double res = hermiticity_residual(h);
  if (res >= 1e-10 * scale) {
    throw ContractViolation("hermitian_eig: matrix is not Hermitian (residual " +
                            std::to_string(res) + ")");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("hermitian_eig: eigensolver did not converge");
  }
  HermitianEigen out{solver.eigenvalues(), solver.eigenvectors()};
  for (Index k = 0; k < out.vectors.cols(); ++k) fix_phase(out.vectors.col(k));
  return out;
}

UnitaryEigen unitary_eig(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) throw ContractViolation("unitary_eig: matrix is not square");
  const double res = unitarity_residual(u);
  if (res >= 1e-6) {
    throw ContractViolation("unitary_eig: matrix is not unitary (residual " +
                            std::to_string(res) + ")");
  }
  Eigen::ComplexSchur<ComplexMatrix> schur(u, true);
  if (schur.info() != Eigen::Success) {
    throw ConvergenceFailure("unitary_eig: Schur decomposition did not converge");
  }
  const ComplexMatrix& t = schur.matrixT();
  const ComplexMatrix& q = schur.matrixU();
  const Index n = u.rows();

  std::vector<double> phases(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    const Complex lambda = t(k, k);
    if (std::abs(std::abs(lambda) - 1.0) >= 1e-6) {
      throw ContractViolation("unitary_eig: eigenvalue off the unit circle");
    }
    phases[static_cast<std::size_t>(k)] = wrap_phase(std::arg(lambda));
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return phases[static_cast<std::size_t>(a)] < phases[static_cast<std::size_t>(b)];
  });

  UnitaryEigen out;
  out.phases.resize(n);
  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.phases(k) = phases[static_cast<std::size_t>(src)];
    out.vectors.col(k) = q.col(src);
    fix_phase(out.vectors.col(k));
  }
  return out;
}

ComplexMatrix expm_hermitian_times(const ComplexMatrix& h, Complex scalar) {
  const HermitianEigen eig = hermitian_eig(h);
  Eigen::VectorXcd factors(eig.values.size());
  for (Index k = 0; k < factors.size(); ++k) factors(k) = std::exp(scalar * eig.values(k));
  return eig.vectors * factors.asDiagonal() * eig.vectors.adjoint();
}

}  // namespace kpo
