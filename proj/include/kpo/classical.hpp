#pragma once

// Classical limit of the driven oscillator in the lab frame,
//   H/omega0 = (q^2 + p^2)/2 + (sqrt(69 kappa)/15) q^3 + (kappa/10) q^4
//              + D p cos(omega_d t),
//   D = (20 Gamma sqrt(kappa)/sqrt(69)) (w - 1/w),  w = omega_d/omega0,
// with time in units of 1/omega0. Stroboscopic samples are taken every
// tau = 4 pi / omega_d.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace kpo {

struct ClassicalParams {
  double kappa = 0.0;
  double gamma = 0.0;
  double omega_d_ratio = 2.0;
};

/// omega_d / omega0 = 2 omega_a / omega0 for the device family with K = 10 g4.
double classical_resonant_ratio(double kappa, double gamma);

/// Parameters with omega_d_ratio set to the resonant value.
ClassicalParams resonant_params(double kappa, double gamma);

struct PhasePoint {
  double q = 0.0;
  double p = 0.0;
};

double drive_coefficient(const ClassicalParams& params);
double classical_period(const ClassicalParams& params);  // tau
double classical_hamiltonian(double t, PhasePoint s, const ClassicalParams& params);
PhasePoint eom(double t, PhasePoint s, const ClassicalParams& params);

struct IntegrationSettings {
  int steps_per_period = 200;   // dt = tau / steps_per_period, at least 200
  double escape_radius = 1e300;
};

struct TrajectoryResult {
  PhasePoint initial;
  std::vector<PhasePoint> strobe_points;  // t = n tau, n = 1..periods
  double lyapunov = 0.0;                  // max(estimate, 0); 0 if not computed
  double lyapunov_time = 0.0;             // lyapunov * t_total
  bool escaped = false;
  bool regular = true;
};

/// Fixed-step RK4; strobe points only.
TrajectoryResult integrate(PhasePoint initial, const ClassicalParams& params, int periods,
                           const IntegrationSettings& settings = {});

/// One RK4 step of size dt from time t (exposed for convergence tests).
PhasePoint rk4_step(double t, PhasePoint s, double dt, const ClassicalParams& params);

/// Regular iff lyapunov * t_total < ln(1e3) and the orbit stayed bounded.
inline constexpr double kLyapunovGrowthLimit = 6.907755278982137;  // ln 1000
inline constexpr int kMinLyapunovPeriods = 2000;

/// Benettin tangent-vector method, renormalized every tau; strobe points are
/// recorded along the way. periods >= 2000.
TrajectoryResult lyapunov(PhasePoint initial, const ClassicalParams& params, int periods,
                          const IntegrationSettings& settings = {});

/// tau-map and its Jacobian.
struct StrobeMap {
  PhasePoint image;
  std::array<double, 4> jacobian;  // row-major d(q',p')/d(q,p)
};
StrobeMap strobe_map(PhasePoint s, const ClassicalParams& params, int steps_per_period = 400,
                     double duration_periods = 1.0);

struct Wells {
  PhasePoint first;
  PhasePoint second;  // image of `first` under half a stroboscopic period
  double half_distance = 0.0;
  /// Classical half-distance divided by sqrt(2 Gamma): the quadrature scale s.
  double scale = 0.0;
};

/// Stable fixed points of the tau-map near the double-well minima; the pair is
/// a period-two orbit of the drive-period map. Throws NoSolution if Newton
/// iteration fails.
Wells locate_wells(const ClassicalParams& params);

struct AreaScanConfig {
  int seeds = 400;
  double seed_span = 1.5;       // in units of the inter-well distance
  int grid = 512;               // raster cells per side
  double box_padding = 0.2;
  int periods = 2000;
  int steps_per_period = 200;
  double escape_factor = 10.0;  // escape radius in inter-well distances
  /// Morphological closing radius in units of the seed spacing (0 disables).
  double closing_radius = 3.0;
  unsigned threads = 1;
};

struct AreaEstimate {
  double area = 0.0;
  double grid_cell = 0.0;
  std::int64_t n_regular_cells = 0;
  int regular_seeds = 0;
  int chaotic_seeds = 0;
  int escaped_seeds = 0;
  bool all_chaotic = false;
  ClassicalParams params;
  Wells wells;
  std::vector<TrajectoryResult> trajectories;  // filled when requested
};

AreaEstimate doublewell_area(const ClassicalParams& params, const AreaScanConfig& config = {},
                             bool keep_trajectories = false);

struct VanishingResult {
  double gamma = 0.0;
  double area_floor = 0.0;
  double scale = 0.0;  // s used for the floor
  std::vector<std::pair<double, double>> trace;  // (Gamma, area) evaluations
};

/// Bisection over Gamma at fixed kappa for area(Gamma) = area_floor. When
/// area_floor is empty the floor is 2 pi s^2 with s from locate_wells at
/// gamma_lo. omega_d is resonant at each Gamma. Throws NoSolution if the
/// bracket [gamma_lo, gamma_hi] does not straddle the floor.
VanishingResult island_vanishing_gamma(double kappa, double gamma_lo, double gamma_hi,
                                       const AreaScanConfig& config = {},
                                       std::optional<double> area_floor = std::nullopt,
                                       double gamma_tol = 0.25);

}  // namespace kpo
