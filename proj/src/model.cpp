#include "kpo/model.hpp"

#include "kpo/errors.hpp"

#include <cmath>
#include <sstream>

namespace kpo {

namespace {

void validate(const ModelParams& p) {
  if (!(p.omega0 > 0.0) || !std::isfinite(p.omega0)) {
    throw ContractViolation("omega0 must be positive and finite");
  }
  if (!std::isfinite(p.g3) || !std::isfinite(p.g4) || !std::isfinite(p.drive_amplitude)) {
    throw ContractViolation("g3, g4 and Omega_d must be finite");
  }
  if (!(p.drive_frequency > 0.0) || !std::isfinite(p.drive_frequency)) {
    throw ContractViolation("omega_d must be positive and finite");
  }
  if (std::abs(p.drive_frequency - p.omega0) <= 1e-12 * p.omega0) {
    throw ContractViolation("omega_d must differ from omega0 (linear response diverges)");
  }
}

}  // namespace

double kerr_coefficient(const ModelParams& p) {
  return -1.5 * p.g4 + 10.0 * p.g3 * p.g3 / (3.0 * p.omega0);
}

double squeezing_amplitude(const ModelParams& p) {
  return p.g3 * 2.0 * p.drive_amplitude / (3.0 * p.omega0);
}

double shifted_frequency(const ModelParams& p) {
  const double w = p.omega0;
  const double stark = 2.0 * p.drive_amplitude / (3.0 * w);
  return w + 3.0 * p.g4 - 20.0 * p.g3 * p.g3 / (3.0 * w) +
         (6.0 * p.g4 + 9.0 * p.g3 * p.g3 / w) * stark * stark;
}

double linear_response_displacement(const ModelParams& p) {
  const double wd = p.drive_frequency;
  return p.drive_amplitude * wd / (wd * wd - p.omega0 * p.omega0);
}

double displacement_approximate(const ModelParams& p) {
  return 2.0 * p.drive_amplitude / (3.0 * p.drive_frequency);
}

std::vector<std::string> parameter_warnings(const ModelParams& p) {
  std::vector<std::string> out;
  if (std::abs(p.g3) > 0.1 * p.omega0) out.emplace_back("g3 exceeds 0.1 omega0; second-order constants unreliable");
  if (std::abs(p.g4) > 0.1 * p.omega0) out.emplace_back("g4 exceeds 0.1 omega0; second-order constants unreliable");
  return out;
}

DerivedParams derive(const ModelParams& p) {
  validate(p);
  DerivedParams d;
  d.kerr = kerr_coefficient(p);
  if (!(d.kerr > 0.0)) {
    std::ostringstream msg;
    msg << "unsupported regime: K = " << d.kerr << " <= 0, Gamma undefined";
    throw UnsupportedRegime(msg.str());
  }
  d.squeezing = squeezing_amplitude(p);
  d.displacement = linear_response_displacement(p);
  d.gamma = d.squeezing / d.kerr;
  d.shifted_frequency = shifted_frequency(p);
  d.detuning = 0.5 * p.drive_frequency - p.omega0;
  d.kappa = d.kerr / p.omega0;
  return d;
}

double drive_for_gamma(double gamma, const ModelParams& p) {
  if (p.g3 == 0.0) throw NoSolution("drive_for_gamma: g3 = 0, squeezing cannot be generated");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ContractViolation("drive_for_gamma: Gamma must be finite and >= 0");
  }
  const double k = kerr_coefficient(p);
  if (!(k > 0.0)) throw UnsupportedRegime("drive_for_gamma: K <= 0");
  return 3.0 * p.omega0 * k * gamma / (2.0 * p.g3);
}

double chaos_boundary_gamma(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw ContractViolation("chaos_boundary_gamma: kappa must be positive");
  }
  return kChaosBoundaryProduct / kappa;
}

double chaos_boundary_product(const ModelParams& p) {
  const double wd = p.drive_frequency;
  const double w0 = p.omega0;
  return p.g3 * p.drive_amplitude * wd / (w0 * (wd * wd - w0 * w0));
}

double resonant_drive_frequency(const ModelParams& p) {
  ModelParams q = p;
  double wd = 2.0 * q.omega0;
  for (int iter = 0; iter < 100; ++iter) {
    q.drive_frequency = wd;
    const double next = 2.0 * shifted_frequency(q);
    if (std::abs(next - wd) <= 1e-10 * std::abs(next)) return next;
    wd = next;
  }
  throw ConvergenceFailure("resonant_drive_frequency: no convergence after 100 iterations");
}

ModelParams device_for_kappa(double kappa, double omega0) {
  if (!(kappa > 0.0)) throw ContractViolation("device_for_kappa: kappa must be positive");
  ModelParams p;
  p.omega0 = omega0;
  p.g4 = kappa * omega0 / 10.0;
  p.g3 = omega0 * std::sqrt(69.0 * kappa / 200.0);
  p.drive_amplitude = 0.0;
  p.drive_frequency = 2.0 * omega0;
  return p;
}

ModelParams reference_device() {
  ModelParams p;
  p.g3 = 0.01695;
  p.g4 = 8.33e-5;
  return p;
}

ModelParams with_gamma(ModelParams device, double gamma, std::optional<double> drive_frequency) {
  device.drive_amplitude = drive_for_gamma(gamma, device);
  device.drive_frequency =
      drive_frequency ? *drive_frequency : resonant_drive_frequency(device);
  return device;
}

}  // namespace kpo
