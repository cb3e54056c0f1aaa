#include "kpo/hamiltonians.hpp"

#include "kpo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace kpo {

namespace {

constexpr int kTerms = 2 * RotatingHarmonics::kMaxHarmonic + 1;

void require_frame(const HamiltonianSpec& spec, Frame frame, const char* op) {
  if (spec.frame != frame) throw ContractViolation(std::string(op) + ": wrong frame in spec");
}

ComplexMatrix hermitize(const ComplexMatrix& m) {
  ComplexMatrix h = 0.5 * (m + m.adjoint());
  return h;
}

}  // namespace

HamiltonianSpec HamiltonianSpec::make(Frame frame, const ModelParams& params, Index dim,
                                      Index margin) {
  if (dim < 2) throw InvalidDimension("Hamiltonian dimension must be >= 2");
  if (margin < 0) throw ContractViolation("truncation margin must be >= 0");
  HamiltonianSpec spec;
  spec.frame = frame;
  spec.params = params;
  spec.derived = derive(params);
  spec.dim = dim;
  spec.margin = margin;
  return spec;
}

RotatingHarmonics::RotatingHarmonics(const HamiltonianSpec& spec)
    : omega_d_(spec.params.drive_frequency), dim_(spec.dim) {
  require_frame(spec, Frame::rotating, "RotatingHarmonics");
  const Index work = spec.dim + spec.margin;
  const ComplexMatrix a = annihilation(work);
  const ComplexMatrix ad = a.adjoint();
  const Complex pi_amp(spec.derived.displacement, 0.0);
  const ComplexMatrix zero = ComplexMatrix::Zero(work, work);

  // Polynomial in z = exp(i omega_d t/2) with matrix coefficients.
  using Poly = std::vector<ComplexMatrix>;
  auto times_sum = [&](const Poly& p) {
    Poly out(kTerms, zero);
    for (int j = 0; j < kTerms; ++j) {
      if (p[j].isZero(0.0)) continue;
      const int k = j - kMaxHarmonic;
      // p_k z^k (a z^-1 + a^dag z + Pi z^-2 + Pi* z^2)
      if (k - 1 >= -kMaxHarmonic) out[j - 1] += p[j] * a;
      if (k + 1 <= kMaxHarmonic) out[j + 1] += p[j] * ad;
      if (k - 2 >= -kMaxHarmonic) out[j - 2] += pi_amp * p[j];
      if (k + 2 <= kMaxHarmonic) out[j + 2] += std::conj(pi_amp) * p[j];
    }
    return out;
  };

  Poly power(kTerms, zero);
  power[kMaxHarmonic] = ComplexMatrix::Identity(work, work);
  power = times_sum(power);  // X
  power = times_sum(power);  // X^2
  power = times_sum(power);  // X^3
  Poly cubic = power;
  power = times_sum(power);  // X^4

  const double c3 = spec.params.g3 / 3.0;
  const double c4 = spec.params.g4 / 4.0;
  components_.resize(kTerms);
  for (int j = 0; j < kTerms; ++j) {
    ComplexMatrix full = c3 * cubic[j] + c4 * power[j];
    components_[j] = full.topLeftCorner(dim_, dim_);
  }
  for (Index n = 0; n < dim_; ++n) {
    components_[kMaxHarmonic](n, n) -= spec.derived.detuning * static_cast<double>(n);
  }
  // Enforce C_{-k} = C_k^dag exactly.
  for (int k = 0; k <= kMaxHarmonic; ++k) {
    ComplexMatrix sym = 0.5 * (components_[kMaxHarmonic + k] +
                               components_[kMaxHarmonic - k].adjoint());
    components_[kMaxHarmonic - k] = sym.adjoint();
    components_[kMaxHarmonic + k] = std::move(sym);
  }
}

const ComplexMatrix& RotatingHarmonics::component(int k) const {
  if (k < -kMaxHarmonic || k > kMaxHarmonic) {
    throw ContractViolation("RotatingHarmonics: harmonic out of range");
  }
  return components_[static_cast<std::size_t>(k + kMaxHarmonic)];
}

ComplexMatrix RotatingHarmonics::at(double t) const {
  const double theta = 0.5 * omega_d_ * t;
  ComplexMatrix h = components_[kMaxHarmonic];
  for (int k = 1; k <= kMaxHarmonic; ++k) {
    const Complex z = std::polar(1.0, k * theta);
    h += z * components_[kMaxHarmonic + k] + std::conj(z) * components_[kMaxHarmonic - k];
  }
  return hermitize(h);
}

ComplexMatrix h_lab(double t, const HamiltonianSpec& spec) {
  require_frame(spec, Frame::lab, "h_lab");
  const Index work = spec.dim + spec.margin;
  const ComplexMatrix a = annihilation(work);
  const ComplexMatrix ad = a.adjoint();
  const ComplexMatrix x = a + ad;
  const ComplexMatrix x2 = x * x;
  const ComplexMatrix x3 = x2 * x;
  const ComplexMatrix x4 = x3 * x;
  const ModelParams& p = spec.params;
  ComplexMatrix h = p.omega0 * (ad * a) + (p.g3 / 3.0) * x3 + (p.g4 / 4.0) * x4 -
                    Complex(0.0, p.drive_amplitude * std::cos(p.drive_frequency * t)) * (a - ad);
  return hermitize(h.topLeftCorner(spec.dim, spec.dim));
}

ComplexMatrix h_rotating(double t, const HamiltonianSpec& spec) {
  require_frame(spec, Frame::rotating, "h_rotating");
  const Index work = spec.dim + spec.margin;
  const ComplexMatrix a = annihilation(work);
  const double wd = spec.params.drive_frequency;
  const Complex half = std::polar(1.0, -0.5 * wd * t);
  const Complex full = std::polar(1.0, -wd * t);
  const Complex pi_amp(spec.derived.displacement, 0.0);
  ComplexMatrix x = half * a + std::conj(half) * a.adjoint();
  x.diagonal().array() += pi_amp * full + std::conj(pi_amp) * std::conj(full);
  const ComplexMatrix x2 = x * x;
  const ComplexMatrix x3 = x2 * x;
  const ComplexMatrix x4 = x3 * x;
  ComplexMatrix h = (spec.params.g3 / 3.0) * x3 + (spec.params.g4 / 4.0) * x4;
  for (Index n = 0; n < work; ++n) h(n, n) -= spec.derived.detuning * static_cast<double>(n);
  return hermitize(h.topLeftCorner(spec.dim, spec.dim));
}

ComplexMatrix h_effective_static(const HamiltonianSpec& spec) {
  const Index n = spec.dim;
  if (n < 2) throw InvalidDimension("h_effective_static: dim must be >= 2");
  const double eps2 = spec.derived.squeezing;
  const double k = spec.derived.kerr;
  ComplexMatrix h = ComplexMatrix::Zero(n, n);
  for (Index m = 0; m < n; ++m) {
    const double md = static_cast<double>(m);
    h(m, m) = -k * md * (md - 1.0);
    if (m + 2 < n) {
      const double amp = eps2 * std::sqrt((md + 1.0) * (md + 2.0));
      h(m, m + 2) = amp;  // a^2
      h(m + 2, m) = amp;  // a^dag^2
    }
  }
  return h;
}

EffectiveLevels effective_levels(const HamiltonianSpec& spec) {
  const ComplexMatrix h = h_effective_static(spec);
  const Index n = spec.dim;

  struct Level {
    double energy;
    double parity;
    StateVector vec;
  };
  std::vector<Level> levels;
  levels.reserve(static_cast<std::size_t>(n));

  // Parity is conserved: diagonalize even and odd Fock sectors separately so
  // each eigenvector carries exact parity even inside degenerate doublets.
  for (int sector = 0; sector < 2; ++sector) {
    std::vector<Index> idx;
    for (Index m = sector; m < n; m += 2) idx.push_back(m);
    const Index b = static_cast<Index>(idx.size());
    if (b == 0) continue;
    ComplexMatrix block(b, b);
    for (Index i = 0; i < b; ++i)
      for (Index j = 0; j < b; ++j) block(i, j) = h(idx[i], idx[j]);
    if (b == 1) {
      StateVector v = StateVector::Zero(n);
      v(idx[0]) = 1.0;
      levels.push_back({block(0, 0).real(), sector == 0 ? 1.0 : -1.0, v});
      continue;
    }
    const HermitianEigen eig = hermitian_eig(block);
    for (Index c = 0; c < b; ++c) {
      StateVector v = StateVector::Zero(n);
      for (Index i = 0; i < b; ++i) v(idx[i]) = eig.vectors(i, c);
      levels.push_back({eig.values(c), sector == 0 ? 1.0 : -1.0, std::move(v)});
    }
  }
  std::stable_sort(levels.begin(), levels.end(), [](const Level& x, const Level& y) {
    if (x.energy != y.energy) return x.energy > y.energy;
    return x.parity > y.parity;
  });

  EffectiveLevels out;
  out.top_energy = levels.front().energy;
  out.excitation.resize(n);
  out.parity.resize(n);
  out.vectors.resize(n, n);
  const double k = spec.derived.kerr;
  for (Index i = 0; i < n; ++i) {
    const Level& lv = levels[static_cast<std::size_t>(i)];
    out.excitation(i) = (out.top_energy - lv.energy) / k;
    out.parity(i) = lv.parity;
    out.vectors.col(i) = lv.vec;
  }
  return out;
}

RealVector effective_excitation_spectrum(const HamiltonianSpec& spec, Index n_levels) {
  if (n_levels < 1 || 2 * n_levels > spec.dim) {
    throw ContractViolation("effective_excitation_spectrum: n_levels " +
                            std::to_string(n_levels) + " outside the truncation-safe range [1, " +
                            std::to_string(spec.dim / 2) + "]");
  }
  return effective_levels(spec).excitation.head(n_levels);
}

}  // namespace kpo
