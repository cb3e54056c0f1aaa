#pragma once

// Parameter algebra of the squeeze-driven Kerr oscillator. All frequencies
// are expressed in units of the bare oscillator frequency unless the caller
// sets omega0 explicitly; every formula is homogeneous in the frequencies.

#include <optional>
#include <string>
#include <vector>

namespace kpo {

/// Raw device parameters of the lab-frame Hamiltonian.
struct ModelParams {
  double omega0 = 1.0;           // bare frequency
  double g3 = 0.0;               // third-rank nonlinearity
  double g4 = 0.0;               // fourth-rank nonlinearity
  double drive_amplitude = 0.0;  // Omega_d
  double drive_frequency = 2.0;  // omega_d
};

/// Second-order constants derived from ModelParams.
struct DerivedParams {
  double kerr = 0.0;            // K
  double squeezing = 0.0;       // epsilon_2
  double displacement = 0.0;    // Pi, exact linear response
  double gamma = 0.0;           // epsilon_2 / K
  double shifted_frequency = 0.0;  // omega_a, Lamb and Stark shifted
  double detuning = 0.0;        // delta = omega_d/2 - omega0
  double kappa = 0.0;           // K / omega0
};

/// Gamma * kappa on the line where local chaos at the hyperbolic point merges
/// with the chaos surrounding the double well.
inline constexpr double kChaosBoundaryProduct = 0.03347;

double kerr_coefficient(const ModelParams& p);
double squeezing_amplitude(const ModelParams& p);
double shifted_frequency(const ModelParams& p);

/// Exact linear-response displacement Omega_d omega_d / (omega_d^2 - omega0^2).
double linear_response_displacement(const ModelParams& p);

/// Approximate displacement 2 Omega_d / (3 omega_d). Kept for comparison; not
/// used by any computation in the library.
double displacement_approximate(const ModelParams& p);

/// Validates the parameters and returns the derived constants. Throws
/// UnsupportedRegime when K <= 0 and ContractViolation for invalid input.
DerivedParams derive(const ModelParams& p);

/// Non-fatal diagnostics (e.g. g3 or g4 above 0.1 omega0).
std::vector<std::string> parameter_warnings(const ModelParams& p);

/// Omega_d that realizes the requested Gamma; ignores p.drive_amplitude.
double drive_for_gamma(double gamma, const ModelParams& p);

/// Gamma* = 0.03347 / kappa.
double chaos_boundary_gamma(double kappa);

/// g3 Omega_d omega_d / (omega0 (omega_d^2 - omega0^2)); equals Gamma K/omega0
/// on the chaos boundary.
double chaos_boundary_product(const ModelParams& p);

/// omega_d = 2 omega_a, iterated to a relative change below 1e-10.
double resonant_drive_frequency(const ModelParams& p);

/// The device family with K = 10 g4: g4 = kappa omega0 / 10 and
/// g3 = omega0 sqrt(69 kappa / 200). This is the ratio embedded in the
/// classical Hamiltonian coefficients (sqrt(69)/15, 1/10, 20/sqrt(69)).
ModelParams device_for_kappa(double kappa, double omega0 = 1.0);

/// g3 = 0.01695, g4 = 8.33e-5 (units of omega0), no drive.
ModelParams reference_device();

/// Device with drive amplitude set for `gamma` and omega_d either given or
/// resonant (omega_d = 2 omega_a) when `drive_frequency` is empty.
ModelParams with_gamma(ModelParams device, double gamma,
                       std::optional<double> drive_frequency = std::nullopt);

}  // namespace kpo
