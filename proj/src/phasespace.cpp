#include "kpo/phasespace.hpp"

#include "kpo/errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace kpo {

namespace {

void require_normalized(const StateVector& state, const char* where) {
  if (std::abs(state.norm() - 1.0) > 1e-8) {
    throw ContractViolation(std::string(where) + ": state is not normalized");
  }
}

}  // namespace

RealVector uniform_grid(double lo, double hi, Index n) {
  if (n < 2 || !(hi > lo)) throw ContractViolation("uniform_grid: need n >= 2 and hi > lo");
  return RealVector::LinSpaced(n, lo, hi);
}

double default_half_width(double gamma) {
  return std::max(12.0, 2.0 * std::sqrt(2.0 * std::max(gamma, 0.0)) + 4.0);
}

HusimiField husimi(const StateVector& state, const RealVector& q_grid, const RealVector& p_grid) {
  require_normalized(state, "husimi");
  if (q_grid.size() < 2 || p_grid.size() < 2) throw ContractViolation("husimi: grid too small");
  const Index dim = state.size();
  std::vector<double> half_log_fact(static_cast<std::size_t>(dim));
  for (Index n = 0; n < dim; ++n) {
    half_log_fact[static_cast<std::size_t>(n)] = 0.5 * std::lgamma(static_cast<double>(n) + 1.0);
  }

  HusimiField f;
  f.q_grid = q_grid;
  f.p_grid = p_grid;
  f.values.resize(q_grid.size(), p_grid.size());
  const double dq = (q_grid(q_grid.size() - 1) - q_grid(0)) / static_cast<double>(q_grid.size() - 1);
  const double dp = (p_grid(p_grid.size() - 1) - p_grid(0)) / static_cast<double>(p_grid.size() - 1);
  f.cell_area = dq * dp;

  // <alpha|psi> = sum_n exp(-|alpha|^2/2) conj(alpha)^n / sqrt(n!) psi_n,
  // evaluated in log-magnitude form to stay finite far from the origin.
  for (Index i = 0; i < q_grid.size(); ++i) {
    for (Index j = 0; j < p_grid.size(); ++j) {
      const Complex alpha = quadrature_alpha(q_grid(i), p_grid(j));
      const double r2 = std::norm(alpha);
      Complex amp(0.0, 0.0);
      if (r2 == 0.0) {
        amp = state(0);
      } else {
        const double log_r = 0.5 * std::log(r2);
        const double phase = -std::arg(alpha);
        for (Index n = 0; n < dim; ++n) {
          const double nd = static_cast<double>(n);
          const double mag =
              std::exp(-0.5 * r2 + nd * log_r - half_log_fact[static_cast<std::size_t>(n)]);
          if (mag == 0.0) continue;
          amp += std::polar(mag, nd * phase) * state(n);
        }
      }
      f.values(i, j) = std::norm(amp) / kPi;
    }
  }
  // Q integrates to 2 over dq dp (d^2 alpha = dq dp / 2).
  f.mass = 0.5 * f.values.sum() * f.cell_area;
  f.max_value = f.values.maxCoeff();
  if (f.mass < 0.99) {
    throw DomainTooSmall("husimi: grid captures only " + std::to_string(f.mass) + " of the mass",
                         f.mass);
  }
  return f;
}

HusimiField husimi_default(const StateVector& state, double gamma, Index points) {
  const double w = default_half_width(gamma);
  const RealVector g = uniform_grid(-w, w, points);
  return husimi(state, g, g);
}

double husimi_ipr(const HusimiField& field) {
  return field.values.array().square().sum() * field.cell_area;
}

HusimiField husimi_adaptive(const StateVector& state, double gamma, Index points) {
  try {
    return husimi_default(state, gamma, points);
  } catch (const DomainTooSmall&) {
    const double w = std::sqrt(2.0 * static_cast<double>(state.size())) + 6.0;
    const RealVector grid = uniform_grid(-w, w, points);
    return husimi(state, grid, grid);
  }
}

double husimi_ipr_adaptive(const StateVector& state, double gamma, Index points) {
  return husimi_ipr(husimi_adaptive(state, gamma, points));
}

double husimi_ipr(const StateVector& state, const RealVector& q_grid, const RealVector& p_grid) {
  return husimi_ipr(husimi(state, q_grid, p_grid));
}

StateVector origin_packet(const HamiltonianSpec& spec, int us_order) {
  const Index dim = spec.dim;
  StateVector vac = StateVector::Zero(dim);
  vac(0) = 1.0;
  if (us_order == 0) return vac;
  if (us_order != 1) {
    throw ContractViolation("origin_packet: unsupported order " + std::to_string(us_order));
  }
  HamiltonianSpec cubic = spec;
  cubic.frame = Frame::rotating;
  cubic.params.g4 = 0.0;
  const RotatingHarmonics rh(cubic);
  const double half = 0.5 * spec.params.drive_frequency;
  ComplexMatrix s1 = ComplexMatrix::Zero(dim, dim);
  for (int k = 1; k <= RotatingHarmonics::kMaxHarmonic; ++k) {
    const ComplexMatrix& ck = rh.component(k);
    s1 += (ck - ck.adjoint()) / Complex(0.0, k * half);
  }
  s1 = 0.5 * (s1 + s1.adjoint()).eval();
  StateVector out = expm_hermitian_times(s1, Complex(0.0, -1.0)) * vac;
  out.normalize();
  return out;
}

RealVector packet_weights(const StateVector& packet, const FloquetSpectrum& spectrum) {
  if (packet.size() != spectrum.modes.rows()) {
    throw ContractViolation("packet and spectrum dimensions differ");
  }
  return (spectrum.modes.adjoint() * packet).cwiseAbs2();
}

double floquet_basis_ipr(const StateVector& packet, const FloquetSpectrum& spectrum) {
  require_normalized(packet, "floquet_basis_ipr");
  return packet_weights(packet, spectrum).array().square().sum();
}

}  // namespace kpo
