#include "kpo/floquet.hpp"

#include "kpo/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

namespace kpo {

namespace {

constexpr int kBand = 4;
constexpr int kDiagonals = 2 * kBand + 1;
constexpr int kMaxTaylorTerms = 80;

// Band storage: diag[d + kBand](i) = H(r0 + i, r0 + i + d), r0 = max(0, -d).
using Bands = std::array<StateVector, kDiagonals>;

Bands extract_bands(const ComplexMatrix& m) {
  const Index n = m.rows();
  Bands b;
  for (int d = -kBand; d <= kBand; ++d) {
    const Index len = n - std::abs(d);
    StateVector v(std::max<Index>(len, 0));
    const Index r0 = d < 0 ? -d : 0;
    for (Index i = 0; i < len; ++i) v(i) = m(r0 + i, r0 + i + d);
    b[static_cast<std::size_t>(d + kBand)] = std::move(v);
  }
  return b;
}

// y = h * x for a banded h.
void band_multiply(const Bands& h, const ComplexMatrix& x, ComplexMatrix& y) {
  const Index n = x.rows();
  y.setZero(n, x.cols());
  for (int d = -kBand; d <= kBand; ++d) {
    const Index len = n - std::abs(d);
    if (len <= 0) continue;
    const StateVector& diag = h[static_cast<std::size_t>(d + kBand)];
    if (d >= 0) {
      y.topRows(len).noalias() += diag.asDiagonal() * x.bottomRows(len);
    } else {
      y.bottomRows(len).noalias() += diag.asDiagonal() * x.topRows(len);
    }
  }
}

// x <- exp(-i h dt) x by a Taylor series truncated at double precision.
void apply_step(const Bands& h, double dt, ComplexMatrix& x, ComplexMatrix& term,
                ComplexMatrix& scratch) {
  const double floor = 1e-17 * std::sqrt(static_cast<double>(x.size()));
  term = x;
  for (int m = 1; m <= kMaxTaylorTerms; ++m) {
    band_multiply(h, term, scratch);
    term = Complex(0.0, -dt / m) * scratch;
    x += term;
    if (term.norm() <= floor) return;
  }
  throw ConvergenceFailure("propagator: Taylor series did not converge; reduce the step");
}

class BandedHarmonics {
 public:
  explicit BandedHarmonics(const RotatingHarmonics& rh) : omega_d_(rh.drive_frequency()) {
    for (int k = -RotatingHarmonics::kMaxHarmonic; k <= RotatingHarmonics::kMaxHarmonic; ++k) {
      const ComplexMatrix& c = rh.component(k);
      const ComplexMatrix outside = c - banded_part(c);
      if (outside.size() > 0 && outside.cwiseAbs().maxCoeff() > 0.0) {
        throw ContractViolation("propagator: harmonic component wider than the band");
      }
      bands_.push_back(extract_bands(c));
    }
  }

  Bands at(double t) const {
    const double theta = 0.5 * omega_d_ * t;
    Bands out = bands_[RotatingHarmonics::kMaxHarmonic];
    for (int k = 1; k <= RotatingHarmonics::kMaxHarmonic; ++k) {
      const Complex z = std::polar(1.0, k * theta);
      const Bands& pos = bands_[static_cast<std::size_t>(RotatingHarmonics::kMaxHarmonic + k)];
      const Bands& neg = bands_[static_cast<std::size_t>(RotatingHarmonics::kMaxHarmonic - k)];
      for (std::size_t d = 0; d < out.size(); ++d) out[d] += z * pos[d] + std::conj(z) * neg[d];
    }
    return out;
  }

 private:
  static ComplexMatrix banded_part(const ComplexMatrix& c) {
    ComplexMatrix b = ComplexMatrix::Zero(c.rows(), c.cols());
    for (Index i = 0; i < c.rows(); ++i) {
      for (Index j = std::max<Index>(0, i - kBand); j <= std::min<Index>(c.cols() - 1, i + kBand);
           ++j) {
        b(i, j) = c(i, j);
      }
    }
    return b;
  }

  std::vector<Bands> bands_;
  double omega_d_;
};

void check_steps(int n_steps) {
  if (n_steps < kMinSteps) {
    throw ContractViolation("propagator: n_steps must be >= " + std::to_string(kMinSteps));
  }
  if (n_steps % 2 != 0) throw ContractViolation("propagator: n_steps must be even");
}

void check_unitary(const ComplexMatrix& u, const char* where) {
  const double res = unitarity_residual(u);
  if (!(res < 1e-6)) {
    throw IntegratorFailure(std::string(where) + ": unitarity residual " + std::to_string(res),
                            res);
  }
}

void apply_parity(ComplexMatrix& m) {
  for (Index r = 1; r < m.rows(); r += 2) m.row(r) *= -1.0;
}

FloquetSpectrum assemble(const UnitaryEigen& eig, const RealVector& theta, double omega_d) {
  const Index n = theta.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return theta(a) < theta(b); });

  const double tau = stroboscopic_period(omega_d);
  const double branch = 0.5 * omega_d;
  FloquetSpectrum s;
  s.omega_d = omega_d;
  s.quasienergies.resize(n);
  s.raw_phases.resize(n);
  s.modes.resize(n, n);
  s.occupations.resize(n);
  s.parities.resize(n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    s.raw_phases(k) = theta(src);
    s.quasienergies(k) = positive_mod(theta(src) / tau, branch);
    s.modes.col(k) = eig.vectors.col(src);
    s.occupations(k) = occupation(s.modes.col(k));
    s.parities(k) = parity_expectation(s.modes.col(k));
  }
  return s;
}

}  // namespace

double stroboscopic_period(double omega_d) {
  if (!(omega_d > 0.0)) throw ContractViolation("omega_d must be positive");
  return 2.0 * kTwoPi / omega_d;
}

ComplexMatrix half_period_map(const HamiltonianSpec& spec, int n_steps) {
  if (spec.frame != Frame::rotating) {
    throw ContractViolation("propagator: spec frame must be rotating");
  }
  check_steps(n_steps);
  const RotatingHarmonics rh(spec);
  const BandedHarmonics banded(rh);
  const double tau = stroboscopic_period(spec.params.drive_frequency);
  const double dt = tau / n_steps;
  const Index n = spec.dim;

  ComplexMatrix u = ComplexMatrix::Identity(n, n);
  ComplexMatrix term(n, n);
  ComplexMatrix scratch(n, n);
  for (int j = 0; j < n_steps / 2; ++j) {
    const Bands h = banded.at((j + 0.5) * dt);
    apply_step(h, dt, u, term, scratch);
  }
  apply_parity(u);
  check_unitary(u, "propagator");
  return u;
}

ComplexMatrix propagator(const HamiltonianSpec& spec, int n_steps) {
  const ComplexMatrix w = half_period_map(spec, n_steps);
  ComplexMatrix u = w * w;
  check_unitary(u, "propagator");
  return u;
}

ComplexMatrix propagator_generic(const std::function<ComplexMatrix(double)>& h, double t_end,
                                 int n_steps) {
  if (n_steps < 1) throw ContractViolation("propagator_generic: n_steps must be >= 1");
  const double dt = t_end / n_steps;
  ComplexMatrix u;
  for (int j = 0; j < n_steps; ++j) {
    const ComplexMatrix hj = h((j + 0.5) * dt);
    const ComplexMatrix step = expm_hermitian_times(hj, Complex(0.0, -dt));
    u = (j == 0) ? step : ComplexMatrix(step * u);
  }
  check_unitary(u, "propagator_generic");
  return u;
}

FloquetSpectrum floquet_spectrum(const ComplexMatrix& u, double omega_d) {
  const UnitaryEigen eig = unitary_eig(u);
  return assemble(eig, eig.phases, omega_d);
}

FloquetSpectrum floquet_spectrum_from_half_map(const ComplexMatrix& w, double omega_d) {
  const UnitaryEigen eig = unitary_eig(w);
  RealVector theta(eig.phases.size());
  for (Index k = 0; k < theta.size(); ++k) theta(k) = wrap_phase(2.0 * eig.phases(k));
  return assemble(eig, theta, omega_d);
}

FloquetSpectrum compute_floquet(const HamiltonianSpec& spec, int n_steps) {
  FloquetSpectrum s =
      floquet_spectrum_from_half_map(half_period_map(spec, n_steps), spec.params.drive_frequency);
  s.steps_used = n_steps;
  s.kerr = spec.derived.kerr;
  return s;
}

double occupation(const StateVector& mode) {
  double sum = 0.0;
  for (Index n = 0; n < mode.size(); ++n) sum += static_cast<double>(n) * std::norm(mode(n));
  return sum;
}

double parity_expectation(const StateVector& mode) {
  double sum = 0.0;
  for (Index n = 0; n < mode.size(); ++n) sum += (n % 2 == 0 ? 1.0 : -1.0) * std::norm(mode(n));
  return sum;
}

Index reference_mode(const FloquetSpectrum& spectrum, const ScalingOptions& opts,
                     const ComplexMatrix* ground_doublet) {
  const Index n = spectrum.size();
  const double branch = 0.5 * spectrum.omega_d;
  std::vector<Index> allowed;
  for (Index k = 0; k < n; ++k) {
    if (spectrum.occupations(k) < opts.occupation_cap) allowed.push_back(k);
  }
  if (allowed.empty()) {
    throw ReferenceUndefined("no Floquet mode with occupation below " +
                             std::to_string(opts.occupation_cap));
  }

  if (opts.rule == ReferenceRule::lowest_occupation) {
    double best = spectrum.occupations(allowed.front());
    for (Index k : allowed) best = std::min(best, spectrum.occupations(k));
    // Near-equal occupations (cat partners): the lower quasienergy wins.
    Index pick = -1;
    for (Index k : allowed) {
      if (spectrum.occupations(k) - best > 1e-6 * std::max(1.0, best)) continue;
      if (pick < 0 || spectrum.quasienergies(k) < spectrum.quasienergies(pick)) pick = k;
    }
    return pick;
  }

  if (ground_doublet == nullptr || ground_doublet->rows() != spectrum.modes.rows()) {
    throw ContractViolation("reference_mode: effective_ground rule needs the ground doublet");
  }
  const RealVector weight =
      (ground_doublet->adjoint() * spectrum.modes).cwiseAbs2().colwise().sum().transpose();
  std::vector<Index> ranked = allowed;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](Index a, Index b) { return weight(a) > weight(b); });
  const Index first = ranked.front();
  if (ranked.size() < 2 || weight(ranked[1]) < 0.5 * weight(first)) return first;
  const Index second = ranked[1];
  // Take the member of the doublet from which the partner lies a short step
  // upwards in the folded branch.
  const double up = positive_mod(spectrum.quasienergies(second) - spectrum.quasienergies(first),
                                 branch);
  return up <= 0.5 * branch ? first : second;
}

RealVector scaled_from_reference(const FloquetSpectrum& spectrum, Index ref, double kerr) {
  if (ref < 0 || ref >= spectrum.size()) throw ContractViolation("reference index out of range");
  if (!(kerr > 0.0)) throw ContractViolation("K must be positive");
  const double branch = 0.5 * spectrum.omega_d;
  RealVector out(spectrum.size());
  const double e0 = spectrum.quasienergies(ref);
  for (Index k = 0; k < spectrum.size(); ++k) {
    out(k) = positive_mod(spectrum.quasienergies(k) - e0, branch) / kerr;
  }
  out(ref) = 0.0;
  return out;
}

void scale_quasienergies(FloquetSpectrum& spectrum, double kerr, const ScalingOptions& opts,
                         const ComplexMatrix* ground_doublet) {
  const Index ref = reference_mode(spectrum, opts, ground_doublet);
  spectrum.scaled = scaled_from_reference(spectrum, ref, kerr);
  spectrum.eps0_index = ref;
  spectrum.kerr = kerr;
}

ComplexMatrix effective_ground_doublet(const HamiltonianSpec& rotating_spec) {
  HamiltonianSpec eff = rotating_spec;
  eff.frame = Frame::effective_static;
  const EffectiveLevels lv = effective_levels(eff);
  return lv.vectors.leftCols(2);
}

std::vector<Index> order_by_occupation(const FloquetSpectrum& spectrum) {
  std::vector<Index> idx(static_cast<std::size_t>(spectrum.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    return spectrum.occupations(a) < spectrum.occupations(b);
  });
  return idx;
}

std::vector<SpectrumRecord> export_records(const FloquetSpectrum& spectrum) {
  std::vector<SpectrumRecord> out;
  out.reserve(static_cast<std::size_t>(spectrum.size()));
  for (Index k = 0; k < spectrum.size(); ++k) {
    const double scaled = spectrum.scaled.size() == spectrum.size() ? spectrum.scaled(k) : NAN;
    out.push_back({k, spectrum.quasienergies(k), spectrum.raw_phases(k), scaled,
                   spectrum.occupations(k), spectrum.parities(k)});
  }
  return out;
}

}  // namespace kpo
