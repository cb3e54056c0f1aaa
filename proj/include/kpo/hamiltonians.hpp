#pragma once

// Matrix realizations of the driven Kerr oscillator: the lab-frame
// Hamiltonian, the displaced rotating-frame Hamiltonian (frame rotating at
// omega_d/2) and the second-order static effective Hamiltonian.

#include "kpo/fock.hpp"
#include "kpo/model.hpp"

#include <vector>

namespace kpo {

enum class Frame { lab, rotating, effective_static };

struct HamiltonianSpec {
  Frame frame = Frame::rotating;
  ModelParams params;
  DerivedParams derived;
  Index dim = 200;
  /// Extra Fock levels used while building polynomial terms; cropped away.
  Index margin = 20;

  /// Derives the constants from `params` and validates the combination.
  static HamiltonianSpec make(Frame frame, const ModelParams& params, Index dim,
                              Index margin = 20);
};

/// H_rot(t) = sum_k C_k exp(i k omega_d t / 2), k = -8..8.
///
/// The components come from multiplying out the four-term sum
/// (a e^{-i w t/2} + a^dag e^{i w t/2} + Pi e^{-i w t} + Pi* e^{i w t})
/// factor by factor, so operator ordering is exactly that of the m-fold
/// product. C_{-k} = C_k^dag.
class RotatingHarmonics {
 public:
  static constexpr int kMaxHarmonic = 8;

  explicit RotatingHarmonics(const HamiltonianSpec& spec);

  const ComplexMatrix& component(int k) const;
  ComplexMatrix at(double t) const;
  /// One-period average, i.e. C_0.
  const ComplexMatrix& average() const { return component(0); }
  double drive_frequency() const { return omega_d_; }
  Index dim() const { return dim_; }

 private:
  std::vector<ComplexMatrix> components_;  // index k + kMaxHarmonic
  double omega_d_ = 0.0;
  Index dim_ = 0;
};

ComplexMatrix h_lab(double t, const HamiltonianSpec& spec);

/// Built directly as the m-th matrix power of X(t), independent of
/// RotatingHarmonics.
ComplexMatrix h_rotating(double t, const HamiltonianSpec& spec);

/// epsilon_2 (a^dag^2 + a^2) - K a^dag^2 a^2.
ComplexMatrix h_effective_static(const HamiltonianSpec& spec);

/// Eigenstates of the static effective Hamiltonian ordered from the top of
/// its spectrum downwards, i.e. by excitation energy (E_top - E)/K. The
/// double-well (cat) states sit at the top of the spectrum of
/// epsilon_2 (a^dag^2 + a^2) - K a^dag^2 a^2; measuring excitations downwards
/// makes them the ground doublet of the sign-reversed generator, which is the
/// ordering the Floquet scaled quasienergies follow.
struct EffectiveLevels {
  RealVector excitation;  // ascending, units of K, excitation(0) == 0
  ComplexMatrix vectors;  // columns in the same order
  RealVector parity;      // <exp(i pi n)> per level, +-1 up to rounding
  double top_energy = 0.0;
};

EffectiveLevels effective_levels(const HamiltonianSpec& spec);

/// First `n_levels` excitation energies; n_levels must not exceed dim/2.
RealVector effective_excitation_spectrum(const HamiltonianSpec& spec, Index n_levels);

}  // namespace kpo
