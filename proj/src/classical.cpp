#include "kpo/classical.hpp"

#include "kpo/errors.hpp"
#include "kpo/fock.hpp"
#include "kpo/model.hpp"
#include "kpo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kpo {

namespace {

struct Tangent {
  double q, p, dq, dp;
};

double cubic_force(const ClassicalParams& c) { return std::sqrt(69.0 * c.kappa) / 5.0; }
double quartic_force(const ClassicalParams& c) { return 2.0 * c.kappa / 5.0; }

void validate(const ClassicalParams& c) {
  if (!(c.kappa > 0.0) || !std::isfinite(c.kappa)) {
    throw ContractViolation("classical: kappa must be positive");
  }
  if (!(c.gamma >= 0.0) || !std::isfinite(c.gamma)) {
    throw ContractViolation("classical: Gamma must be >= 0");
  }
  if (!(c.omega_d_ratio > 0.0) || c.omega_d_ratio == 1.0) {
    throw ContractViolation("classical: omega_d/omega0 must be positive and != 1");
  }
}

struct Rhs {
  double c3, c4, drive, wd;
  explicit Rhs(const ClassicalParams& c)
      : c3(cubic_force(c)), c4(quartic_force(c)), drive(drive_coefficient(c)),
        wd(c.omega_d_ratio) {}

  PhasePoint f(double t, double q, double p) const {
    return {p + drive * std::cos(wd * t), -q - c3 * q * q - c4 * q * q * q};
  }
  Tangent f(double t, const Tangent& s) const {
    const double curvature = 1.0 + 2.0 * c3 * s.q + 3.0 * c4 * s.q * s.q;
    return {s.p + drive * std::cos(wd * t), -s.q - c3 * s.q * s.q - c4 * s.q * s.q * s.q, s.dp,
            -curvature * s.dq};
  }
};

Tangent axpy(const Tangent& s, double h, const Tangent& k) {
  return {s.q + h * k.q, s.p + h * k.p, s.dq + h * k.dq, s.dp + h * k.dp};
}

Tangent rk4(const Rhs& r, double t, const Tangent& s, double dt) {
  const Tangent k1 = r.f(t, s);
  const Tangent k2 = r.f(t + 0.5 * dt, axpy(s, 0.5 * dt, k1));
  const Tangent k3 = r.f(t + 0.5 * dt, axpy(s, 0.5 * dt, k2));
  const Tangent k4 = r.f(t + dt, axpy(s, dt, k3));
  return {s.q + dt / 6.0 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q),
          s.p + dt / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p),
          s.dq + dt / 6.0 * (k1.dq + 2 * k2.dq + 2 * k3.dq + k4.dq),
          s.dp + dt / 6.0 * (k1.dp + 2 * k2.dp + 2 * k3.dp + k4.dp)};
}

void check_settings(const IntegrationSettings& s) {
  if (s.steps_per_period < 200) {
    throw ContractViolation("classical: dt must be <= tau/200 (steps_per_period >= 200)");
  }
}

double distance(PhasePoint a, PhasePoint b) { return std::hypot(a.q - b.q, a.p - b.p); }

// Newton iteration for a fixed point of the tau-map.
std::optional<StrobeMap> newton_fixed_point(PhasePoint x, const ClassicalParams& params,
                                            double scale, PhasePoint* out) {
  for (int iter = 0; iter < 40; ++iter) {
    const StrobeMap m = strobe_map(x, params);
    const double rq = m.image.q - x.q;
    const double rp = m.image.p - x.p;
    const double a = m.jacobian[0] - 1.0, b = m.jacobian[1];
    const double c = m.jacobian[2], d = m.jacobian[3] - 1.0;
    const double det = a * d - b * c;
    if (!std::isfinite(det) || std::abs(det) < 1e-14) return std::nullopt;
    const double sq = (d * rq - b * rp) / det;
    const double sp = (-c * rq + a * rp) / det;
    x.q -= sq;
    x.p -= sp;
    if (!std::isfinite(x.q) || !std::isfinite(x.p)) return std::nullopt;
    if (std::hypot(sq, sp) < 1e-11 * std::max(1.0, scale)) {
      *out = x;
      return strobe_map(x, params);
    }
  }
  return std::nullopt;
}

}  // namespace

double classical_resonant_ratio(double kappa, double gamma) {
  return resonant_drive_frequency(with_gamma(device_for_kappa(kappa), gamma, 2.0));
}

ClassicalParams resonant_params(double kappa, double gamma) {
  return {kappa, gamma, classical_resonant_ratio(kappa, gamma)};
}

double drive_coefficient(const ClassicalParams& c) {
  const double w = c.omega_d_ratio;
  return 20.0 * c.gamma * std::sqrt(c.kappa) / std::sqrt(69.0) * (w - 1.0 / w);
}

double classical_period(const ClassicalParams& c) { return 2.0 * kTwoPi / c.omega_d_ratio; }

double classical_hamiltonian(double t, PhasePoint s, const ClassicalParams& c) {
  const double q = s.q;
  return 0.5 * (q * q + s.p * s.p) + std::sqrt(69.0 * c.kappa) / 15.0 * q * q * q +
         c.kappa / 10.0 * q * q * q * q + drive_coefficient(c) * s.p * std::cos(c.omega_d_ratio * t);
}

PhasePoint eom(double t, PhasePoint s, const ClassicalParams& params) {
  return Rhs(params).f(t, s.q, s.p);
}

PhasePoint rk4_step(double t, PhasePoint s, double dt, const ClassicalParams& params) {
  const Tangent out = rk4(Rhs(params), t, {s.q, s.p, 0.0, 0.0}, dt);
  return {out.q, out.p};
}

TrajectoryResult integrate(PhasePoint initial, const ClassicalParams& params, int periods,
                           const IntegrationSettings& settings) {
  validate(params);
  check_settings(settings);
  const Rhs rhs(params);
  const double dt = classical_period(params) / settings.steps_per_period;
  TrajectoryResult out;
  out.initial = initial;
  out.strobe_points.reserve(static_cast<std::size_t>(std::max(periods, 0)));
  Tangent s{initial.q, initial.p, 0.0, 0.0};
  for (int n = 0; n < periods; ++n) {
    for (int j = 0; j < settings.steps_per_period; ++j) {
      const double t = (static_cast<double>(n) * settings.steps_per_period + j) * dt;
      s = rk4(rhs, t, s, dt);
    }
    out.strobe_points.push_back({s.q, s.p});
    if (!(std::hypot(s.q, s.p) <= settings.escape_radius)) {
      out.escaped = true;
      out.regular = false;
      break;
    }
  }
  return out;
}

TrajectoryResult lyapunov(PhasePoint initial, const ClassicalParams& params, int periods,
                          const IntegrationSettings& settings) {
  validate(params);
  check_settings(settings);
  if (periods < kMinLyapunovPeriods) {
    throw ContractViolation("lyapunov: t_total must be at least 2000 tau");
  }
  const Rhs rhs(params);
  const double tau = classical_period(params);
  const double dt = tau / settings.steps_per_period;
  TrajectoryResult out;
  out.initial = initial;
  out.strobe_points.reserve(static_cast<std::size_t>(periods));
  Tangent s{initial.q, initial.p, 1.0, 0.0};
  double log_sum = 0.0;
  int done = 0;
  for (int n = 0; n < periods; ++n) {
    for (int j = 0; j < settings.steps_per_period; ++j) {
      const double t = (static_cast<double>(n) * settings.steps_per_period + j) * dt;
      s = rk4(rhs, t, s, dt);
    }
    const double norm = std::hypot(s.dq, s.dp);
    log_sum += std::log(norm);
    s.dq /= norm;
    s.dp /= norm;
    ++done;
    out.strobe_points.push_back({s.q, s.p});
    if (!(std::hypot(s.q, s.p) <= settings.escape_radius) || !std::isfinite(norm)) {
      out.escaped = true;
      break;
    }
  }
  const double t_total = done * tau;
  const double estimate = log_sum / t_total;
  out.lyapunov = std::max(estimate, 0.0);
  out.lyapunov_time = out.lyapunov * t_total;
  out.regular = !out.escaped && out.lyapunov_time < kLyapunovGrowthLimit;
  return out;
}

StrobeMap strobe_map(PhasePoint s, const ClassicalParams& params, int steps_per_period,
                     double duration_periods) {
  validate(params);
  const Rhs rhs(params);
  const double tau = classical_period(params);
  const int steps = std::max(1, static_cast<int>(std::lround(steps_per_period * duration_periods)));
  const double dt = tau * duration_periods / steps;
  Tangent a{s.q, s.p, 1.0, 0.0};
  Tangent b{s.q, s.p, 0.0, 1.0};
  for (int j = 0; j < steps; ++j) {
    const double t = j * dt;
    a = rk4(rhs, t, a, dt);
    b = rk4(rhs, t, b, dt);
  }
  StrobeMap m;
  m.image = {a.q, a.p};
  m.jacobian = {a.dq, b.dq, a.dp, b.dp};
  return m;
}

Wells locate_wells(const ClassicalParams& params) {
  validate(params);
  if (params.gamma <= 0.0) throw NoSolution("locate_wells: no double well at Gamma = 0");
  const double r0 = std::sqrt(2.0 * params.gamma);
  // Coarse search for small tau-map displacement on a disk around the origin.
  struct Guess {
    PhasePoint x;
    double residual;
  };
  std::vector<Guess> guesses;
  const int n = 41;
  const double half = 2.0 * r0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const PhasePoint x{-half + 2.0 * half * i / (n - 1), -half + 2.0 * half * j / (n - 1)};
      const double r = std::hypot(x.q, x.p);
      if (r < 0.4 * r0 || r > 1.8 * r0) continue;
      const StrobeMap m = strobe_map(x, params, 200);
      guesses.push_back({x, distance(m.image, x)});
    }
  }
  std::sort(guesses.begin(), guesses.end(),
            [](const Guess& a, const Guess& b) { return a.residual < b.residual; });

  std::optional<PhasePoint> best;
  double best_score = std::numeric_limits<double>::infinity();
  const std::size_t tries = std::min<std::size_t>(guesses.size(), 24);
  for (std::size_t k = 0; k < tries; ++k) {
    PhasePoint fp;
    const auto m = newton_fixed_point(guesses[k].x, params, r0, &fp);
    if (!m) continue;
    const double trace = m->jacobian[0] + m->jacobian[3];
    if (!(std::abs(trace) < 2.0)) continue;  // hyperbolic
    const double r = std::hypot(fp.q, fp.p);
    if (r < 0.3 * r0 || r > 2.0 * r0) continue;
    const double score = std::abs(r - r0);
    if (score < best_score) {
      best_score = score;
      best = fp;
    }
  }
  if (!best) {
    std::ostringstream msg;
    msg << "locate_wells: no elliptic fixed point near the double well (kappa=" << params.kappa
        << ", Gamma=" << params.gamma << ")";
    throw NoSolution(msg.str());
  }
  Wells w;
  w.first = *best;
  w.second = strobe_map(*best, params, 400, 0.5).image;
  w.half_distance = 0.5 * distance(w.first, w.second);
  w.scale = w.half_distance / r0;
  return w;
}

AreaEstimate doublewell_area(const ClassicalParams& params, const AreaScanConfig& cfg,
                             bool keep_trajectories) {
  validate(params);
  if (cfg.seeds < 2 || cfg.grid < 8 || !(cfg.seed_span > 0.0)) {
    throw ContractViolation("doublewell_area: invalid scan configuration");
  }
  AreaEstimate est;
  est.params = params;
  est.wells = locate_wells(params);
  const PhasePoint a = est.wells.first;
  const PhasePoint b = est.wells.second;
  const double d = distance(a, b);
  const PhasePoint c{0.5 * (a.q + b.q), 0.5 * (a.p + b.p)};
  const PhasePoint u{(b.q - a.q) / d, (b.p - a.p) / d};
  const double span = cfg.seed_span * d;
  const double spacing = span / cfg.seeds;

  IntegrationSettings settings;
  settings.steps_per_period = cfg.steps_per_period;
  settings.escape_radius = cfg.escape_factor * d + std::hypot(c.q, c.p);

  std::vector<TrajectoryResult> runs(static_cast<std::size_t>(cfg.seeds));
  parallel_for(runs.size(), cfg.threads, [&](std::size_t i) {
    const double s = -0.5 * span + spacing * (static_cast<double>(i) + 0.5);
    runs[i] = lyapunov({c.q + s * u.q, c.p + s * u.p}, params, cfg.periods, settings);
  });

  double qmin = std::numeric_limits<double>::infinity(), qmax = -qmin;
  double pmin = qmin, pmax = -qmin;
  for (const TrajectoryResult& r : runs) {
    if (r.escaped) ++est.escaped_seeds;
    if (!r.regular) {
      ++est.chaotic_seeds;
      continue;
    }
    ++est.regular_seeds;
    for (const PhasePoint& x : r.strobe_points) {
      qmin = std::min(qmin, x.q);
      qmax = std::max(qmax, x.q);
      pmin = std::min(pmin, x.p);
      pmax = std::max(pmax, x.p);
    }
  }
  if (est.regular_seeds == 0) {
    est.all_chaotic = true;
    if (keep_trajectories) est.trajectories = std::move(runs);
    return est;
  }
  const double wq = std::max(qmax - qmin, spacing);
  const double wp = std::max(pmax - pmin, spacing);
  qmin -= cfg.box_padding * wq;
  pmin -= cfg.box_padding * wp;
  const double cq = wq * (1.0 + 2.0 * cfg.box_padding) / cfg.grid;
  const double cp = wp * (1.0 + 2.0 * cfg.box_padding) / cfg.grid;
  est.grid_cell = cq * cp;

  const int g = cfg.grid;
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(g) * g, 0);
  for (const TrajectoryResult& r : runs) {
    if (!r.regular) continue;
    for (const PhasePoint& x : r.strobe_points) {
      const int i = std::clamp(static_cast<int>((x.q - qmin) / cq), 0, g - 1);
      const int j = std::clamp(static_cast<int>((x.p - pmin) / cp), 0, g - 1);
      hit[static_cast<std::size_t>(i) * g + j] = 1;
    }
  }

  if (cfg.closing_radius > 0.0) {
    // Closing with an elliptical (in cells) disk of physical radius rho.
    const double rho = cfg.closing_radius * spacing;
    const int rq = static_cast<int>(std::floor(rho / cq));
    const int rp = static_cast<int>(std::floor(rho / cp));
    std::vector<std::pair<int, int>> disk;
    for (int di = -rq; di <= rq; ++di) {
      for (int dj = -rp; dj <= rp; ++dj) {
        const double x = di * cq, y = dj * cp;
        if (x * x + y * y <= rho * rho) disk.emplace_back(di, dj);
      }
    }
    std::vector<std::uint8_t> dil(hit.size(), 0);
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        if (!hit[static_cast<std::size_t>(i) * g + j]) continue;
        for (auto [di, dj] : disk) {
          const int ii = i + di, jj = j + dj;
          if (ii >= 0 && ii < g && jj >= 0 && jj < g) dil[static_cast<std::size_t>(ii) * g + jj] = 1;
        }
      }
    std::vector<std::uint8_t> ero(hit.size(), 0);
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        bool keep = true;
        for (auto [di, dj] : disk) {
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || ii >= g || jj < 0 || jj >= g ||
              !dil[static_cast<std::size_t>(ii) * g + jj]) {
            keep = false;
            break;
          }
        }
        ero[static_cast<std::size_t>(i) * g + j] = keep ? 1 : 0;
      }
    for (std::size_t k = 0; k < hit.size(); ++k) hit[k] = hit[k] | ero[k];
  }

  for (std::uint8_t v : hit) est.n_regular_cells += v;
  est.area = static_cast<double>(est.n_regular_cells) * est.grid_cell;
  if (keep_trajectories) est.trajectories = std::move(runs);
  return est;
}

VanishingResult island_vanishing_gamma(double kappa, double gamma_lo, double gamma_hi,
                                       const AreaScanConfig& config,
                                       std::optional<double> area_floor, double gamma_tol) {
  if (!(gamma_hi > gamma_lo) || !(gamma_lo > 0.0)) {
    throw ContractViolation("island_vanishing_gamma: need 0 < gamma_lo < gamma_hi");
  }
  VanishingResult out;
  auto area_at = [&](double gamma) {
    double a = 0.0;
    try {
      a = doublewell_area(resonant_params(kappa, gamma), config).area;
    } catch (const NoSolution&) {
      a = 0.0;  // no elliptic fixed point left: no islands around the minima
    }
    out.trace.emplace_back(gamma, a);
    return a;
  };
  if (area_floor) {
    out.area_floor = *area_floor;
  } else {
    out.scale = locate_wells(resonant_params(kappa, gamma_lo)).scale;
    out.area_floor = kTwoPi * out.scale * out.scale;
  }
  if (!(out.area_floor > 0.0)) throw ContractViolation("island_vanishing_gamma: area_floor <= 0");

  double lo = gamma_lo, hi = gamma_hi;
  const double a_lo = area_at(lo);
  const double a_hi = area_at(hi);
  if (!(a_lo > out.area_floor) || !(a_hi < out.area_floor)) {
    std::ostringstream msg;
    msg << "island_vanishing_gamma: bracket does not straddle the floor " << out.area_floor
        << " (area(" << lo << ")=" << a_lo << ", area(" << hi << ")=" << a_hi << ")";
    throw NoSolution(msg.str());
  }
  while (hi - lo > gamma_tol) {
    const double mid = 0.5 * (lo + hi);
    if (area_at(mid) > out.area_floor) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.gamma = 0.5 * (lo + hi);
  return out;
}

}  // namespace kpo
