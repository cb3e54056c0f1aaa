#pragma once

// Stroboscopic propagator over tau = 4 pi / omega_d in the rotating frame,
// Floquet modes, quasienergies and the scaled quasienergies
//   eps~ = [(eps - eps0) mod (omega_d/2)] / K.

#include "kpo/fock.hpp"
#include "kpo/hamiltonians.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kpo {

inline constexpr int kMinSteps = 256;
inline constexpr int kDefaultSteps = 4096;
inline constexpr double kDefaultOccupationCap = 30.0;

/// tau = 4 pi / omega_d.
double stroboscopic_period(double omega_d);

/// U(tau) as the ordered product of midpoint exponentials
/// exp(-i H_rot(t_j + dt/2) dt), dt = tau / n_steps.
///
/// H_rot(t + T) = P H_rot(t) P with T = tau/2 and P the parity operator, so
/// U(tau) = (P U(T))^2 exactly, also for the discretized product when
/// n_steps is even. Only the first half period is integrated.
ComplexMatrix propagator(const HamiltonianSpec& spec, int n_steps = kDefaultSteps);

/// W = P U(T) with U(tau) = W^2. Its eigenvectors are Floquet modes; it
/// separates the two members of a cat doublet, which U(tau) leaves
/// (numerically) degenerate.
ComplexMatrix half_period_map(const HamiltonianSpec& spec, int n_steps = kDefaultSteps);

/// Generic midpoint product for an arbitrary Hamiltonian over [0, t_end].
/// Dense; used to cross-check frames.
ComplexMatrix propagator_generic(const std::function<ComplexMatrix(double)>& h, double t_end,
                                 int n_steps);

struct FloquetSpectrum {
  RealVector quasienergies;  // folded into [0, omega_d/2)
  RealVector raw_phases;     // eigenphase theta of U(tau) in [0, 2 pi)
  ComplexMatrix modes;       // columns, orthonormal
  RealVector occupations;
  RealVector parities;       // <exp(i pi n)>
  RealVector scaled;         // empty until scale_quasienergies
  Index eps0_index = -1;
  int steps_used = 0;
  double omega_d = 0.0;
  double kerr = 0.0;

  Index size() const { return quasienergies.size(); }
};

/// eps_k = (theta_k / tau) mod (omega_d/2), theta_k the eigenphases of U.
FloquetSpectrum floquet_spectrum(const ComplexMatrix& u, double omega_d);

/// Same spectrum from W = P U(T): mu_k eigenvalues of W, theta_k = 2 arg mu_k.
FloquetSpectrum floquet_spectrum_from_half_map(const ComplexMatrix& w, double omega_d);

/// Convenience: half-period map plus diagonalization, steps recorded.
FloquetSpectrum compute_floquet(const HamiltonianSpec& spec, int n_steps = kDefaultSteps);

double occupation(const StateVector& mode);
double parity_expectation(const StateVector& mode);

enum class ReferenceRule {
  /// Lowest occupation among modes below the cap.
  lowest_occupation,
  /// Largest weight in the effective-static ground doublet (cap applies).
  effective_ground,
};

struct ScalingOptions {
  double occupation_cap = kDefaultOccupationCap;
  ReferenceRule rule = ReferenceRule::effective_ground;
};

/// Index of the reference mode. `ground_doublet` (two columns) is required
/// for ReferenceRule::effective_ground. Throws ReferenceUndefined if no mode
/// lies below the cap.
Index reference_mode(const FloquetSpectrum& spectrum, const ScalingOptions& opts,
                     const ComplexMatrix* ground_doublet = nullptr);

/// Fills spectrum.scaled and spectrum.eps0_index.
void scale_quasienergies(FloquetSpectrum& spectrum, double kerr, const ScalingOptions& opts = {},
                         const ComplexMatrix* ground_doublet = nullptr);

/// Scaled quasienergies for an explicit reference index.
RealVector scaled_from_reference(const FloquetSpectrum& spectrum, Index ref, double kerr);

/// Two highest levels of the static effective Hamiltonian (the cat doublet).
ComplexMatrix effective_ground_doublet(const HamiltonianSpec& rotating_spec);

/// Mode indices ordered by ascending occupation.
std::vector<Index> order_by_occupation(const FloquetSpectrum& spectrum);

struct SpectrumRecord {
  Index index;
  double quasienergy;
  double raw_phase;
  double scaled;
  double occupation;
  double parity;
};

std::vector<SpectrumRecord> export_records(const FloquetSpectrum& spectrum);

}  // namespace kpo
