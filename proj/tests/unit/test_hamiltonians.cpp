#include "kpo/errors.hpp"
#include "kpo/hamiltonians.hpp"

#include <gtest/gtest.h>

using namespace kpo;

namespace {
HamiltonianSpec spec_at(double gamma, Index dim = 40, Frame f = Frame::rotating) {
  return HamiltonianSpec::make(f, with_gamma(reference_device(), gamma), dim);
}
}  // namespace

TEST(Hamiltonians, InvalidDimension) {
  EXPECT_THROW(HamiltonianSpec::make(Frame::rotating, reference_device(), 1), Error);
}

TEST(Hamiltonians, HarmonicsMatchDirectPowers) {
  const HamiltonianSpec s = spec_at(12.0);
  const RotatingHarmonics h(s);
  for (double t : {0.0, 0.37, 2.1, 5.9}) {
    const double diff = (h.at(t) - h_rotating(t, s)).cwiseAbs().maxCoeff();
    EXPECT_LT(diff, 1e-11) << "t = " << t;
  }
  EXPECT_LT(hermiticity_residual(h.at(1.3)), 1e-14);
}

TEST(Hamiltonians, HarmonicsAreAdjointPairs) {
  const RotatingHarmonics h(spec_at(7.0));
  for (int k = 1; k <= RotatingHarmonics::kMaxHarmonic; ++k) {
    EXPECT_LT((h.component(-k) - h.component(k).adjoint()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Hamiltonians, HalfPeriodParitySymmetry) {
  const HamiltonianSpec s = spec_at(10.0);
  const double half = 2.0 * kPi / s.params.drive_frequency;
  const RealVector par = parity_diagonal(s.dim);
  const ComplexMatrix a = h_rotating(0.4, s);
  const ComplexMatrix b = h_rotating(0.4 + half, s);
  const ComplexMatrix pap = par.asDiagonal() * a * par.asDiagonal();
  EXPECT_LT((pap - b).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Hamiltonians, LabFrameIsHermitian) {
  const HamiltonianSpec s = spec_at(10.0, 30, Frame::lab);
  EXPECT_LT(hermiticity_residual(h_lab(0.8, s)), 1e-13);
}

TEST(Hamiltonians, EffectiveUndrivenLevels) {
  // Gamma = 0: -K n(n-1), excitation from the top is n(n-1).
  const EffectiveLevels l = effective_levels(spec_at(0.0, 30, Frame::effective_static));
  EXPECT_NEAR(l.excitation(0), 0.0, 1e-12);
  EXPECT_NEAR(l.excitation(1), 0.0, 1e-12);
  EXPECT_NEAR(l.excitation(2), 2.0, 1e-10);
  EXPECT_NEAR(l.excitation(3), 6.0, 1e-10);
  EXPECT_NEAR(l.excitation(4), 12.0, 1e-10);
}

TEST(Hamiltonians, EffectiveLevelsHaveDefiniteParity) {
  const EffectiveLevels l = effective_levels(spec_at(8.0, 80, Frame::effective_static));
  for (Index k = 0; k < 20; ++k) EXPECT_NEAR(std::abs(l.parity(k)), 1.0, 1e-12);
  // Ground doublet splitting of the double well is exponentially small.
  EXPECT_LT(l.excitation(1), 1e-6);
  EXPECT_THROW(effective_excitation_spectrum(spec_at(8.0, 20, Frame::effective_static), 11),
               Error);
}

TEST(Hamiltonians, EffectiveMatrixMatchesFormula) {
  const HamiltonianSpec s = spec_at(4.0, 10, Frame::effective_static);
  const ComplexMatrix h = h_effective_static(s);
  const double k = s.derived.kerr, e2 = s.derived.squeezing;
  EXPECT_NEAR(h(3, 3).real(), -k * 3.0 * 2.0, 1e-15);
  EXPECT_NEAR(h(5, 3).real(), e2 * std::sqrt(4.0 * 5.0), 1e-15);
  EXPECT_NEAR(h(3, 5).real(), e2 * std::sqrt(4.0 * 5.0), 1e-15);
}
