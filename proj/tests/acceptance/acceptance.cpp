// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 3 5        run criteria 3 and 5
//
// Exit code 0 only if every selected criterion passes.

#include "cli.hpp"

#include "kpo/classical.hpp"
#include "kpo/errors.hpp"
#include "kpo/floquet.hpp"
#include "kpo/io.hpp"
#include "kpo/model.hpp"
#include "kpo/parallel.hpp"
#include "kpo/phasespace.hpp"
#include "kpo/tracking.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace kpo;

namespace {

// ---- pinned tolerances ----------------------------------------------------
constexpr double kBoundaryValue = 0.03347;
constexpr double kBoundaryTol = 0.5e-5;  // 4 significant figures

constexpr Index kDeviceDim = 200;
constexpr int kSteps = kDefaultSteps;
constexpr double kSpectrumMatchTol = 0.02;  // units of K
constexpr int kSpectrumLevels = 10;

constexpr double kKissingGamma = 20.0;
constexpr int kKissingCount = 10;
constexpr double kKissingPairTol = 1e-2;

constexpr double kIprKappa = 0.0009;
constexpr Index kIprDim = 250;
constexpr double kIprStartMin = 0.8;
constexpr double kPlateauLo = 0.35, kPlateauHi = 0.65;
constexpr double kPlateauFrom = 10.0, kPlateauTo = 35.0;
constexpr double kDropBelow = 0.15;
constexpr double kDropBy = 45.0;
constexpr double kDropCenter = 40.0, kDropHalfWidth = 5.0;

constexpr double kCoherentIprTol = 1e-3;
constexpr double kCatIprTol = 1e-2;
constexpr double kCatAlpha = 4.0;

constexpr double kAreaScalingTol = 0.05;

constexpr double kFminKappa = 0.003;
constexpr Index kFminDim = 500;
constexpr double kFminLobedMin = 0.2;  // pi * I_psi
constexpr double kFminSpreadFactor = 2.0;

constexpr double kTraceGammaMax = 70.0;
constexpr double kTraceGammaStep = 0.5;
constexpr int kTraceSteps = 1024;
constexpr double kTracePlateau = 0.4, kTracePlateauTol = 0.15;
constexpr double kTracePlateauOffset = 5.0;  // plateau starts this far past the peak
constexpr double kTraceDropFraction = 0.5;   // drop = falls below half the plateau
constexpr double kTraceSwapTol = 0.5;  // K; a lost point this close to the line's
                                       // extrapolation is a doublet-partner swap

constexpr double kUnitarityTol = 1e-8;
constexpr double kPropagatorOrder = 2.0, kClassicalOrder = 4.0, kOrderTol = 0.3;
constexpr double kGaugeTol = 1e-6;  // units of K

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
  return buf;
}

// Largest distance from a phase in `a` to its nearest phase in `b` (circular).
double max_phase_distance(const RealVector& a, const RealVector& b) {
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    double best = kTwoPi;
    for (Index j = 0; j < b.size(); ++j) {
      const double d = wrap_phase(a(i) - b(j));
      best = std::min(best, std::min(d, kTwoPi - d));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

// ---- 1 ----------------------------------------------------------------------
Outcome chaos_boundary_constant() {
  const ModelParams dev = reference_device();
  const double kappa = kerr_coefficient(dev) / dev.omega0;
  const double gamma_star = chaos_boundary_gamma(kappa);
  const ModelParams p = with_gamma(dev, gamma_star, 2.0 * dev.omega0);
  const DerivedParams d = derive(p);
  const double route_a = d.gamma * d.kerr / p.omega0;
  const double route_b = p.g3 * p.drive_amplitude * p.drive_frequency /
                         (p.omega0 * (p.drive_frequency * p.drive_frequency - p.omega0 * p.omega0));
  const bool pass = std::abs(route_a - kBoundaryValue) < kBoundaryTol &&
                    std::abs(route_b - kBoundaryValue) < kBoundaryTol;
  return {pass, "Gamma*K/omega0: derived " + fmt(route_a, 7) + ", symbolic form " + fmt(route_b, 7) +
                    " (Gamma* = " + fmt(gamma_star, 5) + ", Omega_d = " + fmt(p.drive_amplitude, 5) + ")"};
}

// ---- 2 ----------------------------------------------------------------------
Outcome effective_vs_floquet() {
  const ModelParams dev = reference_device();
  const GammaSample s = make_sample(dev, 5.0, kDeviceDim, kSteps);
  const std::vector<Index> order = order_by_occupation(s.spectrum);
  std::vector<double> floq;
  for (int k = 0; k < kSpectrumLevels; ++k) floq.push_back(s.spectrum.scaled(order[k]));
  std::sort(floq.begin(), floq.end());
  double worst = 0.0;
  int worst_at = 0;
  std::string row;
  for (int k = 0; k < kSpectrumLevels; ++k) {
    const double dev_k = std::abs(floq[k] - s.effective.excitation(k));
    if (dev_k > worst) {
      worst = dev_k;
      worst_at = k;
    }
    row += (k ? " " : "") + fmt(floq[k] - s.effective.excitation(k), 3);
  }
  return {worst < kSpectrumMatchTol, "max |eps~ - E_eff/K| = " + fmt(worst) + " K at level " +
                                         std::to_string(worst_at) + " (tol " + fmt(kSpectrumMatchTol) +
                                         "); deviations: " + row};
}

// ---- 3 ----------------------------------------------------------------------
Outcome kissing_count() {
  const ModelParams dev = reference_device();
  const GammaSample s = make_sample(dev, kKissingGamma, kDeviceDim, kSteps);
  const HamiltonianSpec spec =
      HamiltonianSpec::make(Frame::rotating, with_gamma(dev, kKissingGamma), kDeviceDim);
  const StateVector packet = origin_packet(spec, 0);
  const KissingReport r = detect_kissing(s.spectrum, kKissingGamma, packet, kKissingPairTol);
  std::string sens;
  for (double tol : {1e-3, 1e-2, 1e-1}) {
    const KissingReport t = detect_kissing(s.spectrum, kKissingGamma, packet, tol);
    sens += " tol " + fmt(tol, 1) + ": states " + std::to_string(t.below_esqpt_count) + ", pairs " +
            std::to_string(t.pair_count) + ";";
  }
  return {r.below_esqpt_count == kKissingCount && !r.extrapolated,
          "below-ESQPT states = " + std::to_string(r.below_esqpt_count) + " (expected " +
              std::to_string(kKissingCount) + "), ESQPT eps~ = " + fmt(r.esqpt_scaled_energy) +
              " K; sensitivity:" + sens};
}

// ---- 4 ----------------------------------------------------------------------
Outcome ipr_cliff() {
  std::vector<double> gammas;
  for (double g = 5.0; g <= 60.0 + 1e-9; g += 5.0) gammas.push_back(g);
  std::vector<double> ipr(gammas.size());
  const ModelParams dev = device_for_kappa(kIprKappa);
  parallel_for(gammas.size(), 0, [&](std::size_t i) {
    const HamiltonianSpec spec =
        HamiltonianSpec::make(Frame::rotating, with_gamma(dev, gammas[i]), kIprDim);
    ipr[i] = floquet_basis_ipr(origin_packet(spec, 0), compute_floquet(spec, kSteps));
  });
  bool plateau_ok = true;
  double drop_gamma = -1.0;
  std::string series;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    series += (i ? " " : "") + fmt(gammas[i], 3) + ":" + fmt(ipr[i], 3);
    if (gammas[i] >= kPlateauFrom && gammas[i] <= kPlateauTo &&
        (ipr[i] < kPlateauLo || ipr[i] > kPlateauHi)) {
      plateau_ok = false;
    }
    if (drop_gamma < 0.0 && ipr[i] < kDropBelow) drop_gamma = gammas[i];
  }
  const bool start_ok = ipr.front() > kIprStartMin;
  const bool drop_ok = drop_gamma > 0.0 && drop_gamma <= kDropBy &&
                       std::abs(drop_gamma - kDropCenter) <= kDropHalfWidth;
  std::string verdicts = std::string("start>") + fmt(kIprStartMin) + (start_ok ? " ok" : " FAIL") +
                         ", plateau" + (plateau_ok ? " ok" : " FAIL") + ", drop<" + fmt(kDropBelow) +
                         " at " + (drop_gamma > 0 ? fmt(drop_gamma) : std::string("none")) +
                         (drop_ok ? " ok" : " FAIL");
  return {start_ok && plateau_ok && drop_ok, verdicts + "; I_G: " + series};
}

// ---- 5 ----------------------------------------------------------------------
Outcome husimi_oracle() {
  const Index dim = 100;
  const RealVector grid = uniform_grid(-12.0, 12.0, 301);
  const StateVector coh = coherent_state(quadrature_alpha(2.0, -1.0), dim).state;
  const double i_coh = husimi_ipr(coh, grid, grid);
  const StateVector cat = (coherent_state(Complex(kCatAlpha, 0.0), dim).state +
                           coherent_state(Complex(-kCatAlpha, 0.0), dim).state)
                              .normalized();
  const double i_cat = husimi_ipr(cat, grid, grid);
  const double e1 = std::abs(i_coh - 1.0 / kPi), e2 = std::abs(i_cat - 1.0 / (2.0 * kPi));
  return {e1 < kCoherentIprTol && e2 < kCatIprTol,
          "coherent " + fmt(i_coh, 7) + " (1/pi, err " + fmt(e1, 2) + "), cat " + fmt(i_cat, 7) +
              " (1/(2pi), err " + fmt(e2, 2) + ")"};
}

// ---- 6 ----------------------------------------------------------------------
Outcome classical_classification() {
  const ClassicalParams reg = resonant_params(1.0 / 1500.0, 25.0);
  const Wells w1 = locate_wells(reg);
  const PhasePoint in_well{w1.first.q + 0.1 * w1.half_distance, w1.first.p};
  const TrajectoryResult a = lyapunov(in_well, reg, kMinLyapunovPeriods);

  const ClassicalParams cha = resonant_params(10.375 / 6000.0, 25.0);
  const Wells w2 = locate_wells(cha);
  const PhasePoint between{0.5 * (w2.first.q + w2.second.q), 0.5 * (w2.first.p + w2.second.p)};
  const TrajectoryResult b = lyapunov(between, cha, kMinLyapunovPeriods);
  return {a.regular && !b.regular,
          "well seed lambda*t = " + fmt(a.lyapunov_time) + (a.regular ? " regular" : " chaotic") +
              "; midpoint seed lambda*t = " + fmt(b.lyapunov_time) + (b.escaped ? " (escaped)" : "") +
              (b.regular ? " regular" : " chaotic") + " (limit ln 1000)"};
}

// ---- 7 ----------------------------------------------------------------------
Outcome area_scaling() {
  const ClassicalParams base = resonant_params(1.0 / 1500.0, 25.0);
  const double a0 = doublewell_area(base).area;
  bool pass = true;
  std::string detail = "A(1/1500, 25) = " + fmt(a0);
  for (double eta2 : {0.5, 2.0}) {
    const ClassicalParams p{base.kappa / eta2, base.gamma * eta2, base.omega_d_ratio};
    const double a = doublewell_area(p).area;
    const double rel = std::abs(a / (eta2 * a0) - 1.0);
    pass = pass && rel <= kAreaScalingTol;
    detail += "; eta^2 = " + fmt(eta2) + ": A = " + fmt(a) + ", rel err " + fmt(rel, 3);
  }
  return {pass, detail};
}

// ---- 8 ----------------------------------------------------------------------
double fmin_normalized_ipr(double gamma) {
  const HamiltonianSpec spec = HamiltonianSpec::make(
      Frame::rotating, with_gamma(device_for_kappa(kFminKappa), gamma), kFminDim);
  const FloquetSpectrum s = compute_floquet(spec, kSteps);
  const Index fmin = order_by_occupation(s).front();
  return kPi * husimi_ipr_adaptive(s.modes.col(fmin), gamma);
}

Outcome islands_outlive_chaos() {
  bool pass = true;
  std::string detail;
  for (double kappa : {0.0009, 0.003}) {
    const double chaos = chaos_boundary_gamma(kappa);
    const VanishingResult v = island_vanishing_gamma(kappa, 0.5 * chaos, 4.0 * chaos);
    pass = pass && v.gamma > chaos;
    detail += "kappa " + fmt(kappa) + ": Gamma_vanish " + fmt(v.gamma) + " vs Gamma* " + fmt(chaos) +
              " (floor " + fmt(v.area_floor, 3) + "); ";
  }
  const double i20 = fmin_normalized_ipr(20.0);
  const double i30 = fmin_normalized_ipr(30.0);
  const bool lobed = i20 > kFminLobedMin;
  const bool spread = i20 >= kFminSpreadFactor * i30;
  pass = pass && lobed && spread;
  detail += "F_min pi*I at kappa 0.003: Gamma 20 " + fmt(i20) + (lobed ? " ok" : " FAIL") +
            ", Gamma 30 " + fmt(i30) + " (ratio " + fmt(i20 / i30, 3) + (spread ? " ok" : " FAIL") + ")";
  return {pass, detail};
}

// ---- 9 ----------------------------------------------------------------------
Outcome trace_plateau() {
  const ModelParams dev = reference_device();
  const double chaos = chaos_boundary_gamma(kerr_coefficient(dev) / dev.omega0);
  std::vector<double> gammas;
  for (double g = 0.0; g <= kTraceGammaMax + 1e-9; g += kTraceGammaStep) gammas.push_back(g);
  std::vector<GammaSample> samples(gammas.size());
  parallel_for(gammas.size(), 0, [&](std::size_t i) {
    samples[i] = make_sample(dev, gammas[i], kDeviceDim, kTraceSteps);
  });
  bool pass = true;
  std::string detail;
  for (Index anchor : {Index(6), Index(8), Index(10)}) {
    TraceConstraints tc;
    tc.stop_when_empty = true;
    TracedLine line = trace_line(samples, label_of(samples.front().effective, anchor),
                                 TraceScheme::combined, tc);
    attach_husimi_ipr(line, samples);
    const std::vector<double> n = normalized_ipr(line);
    const auto peak = static_cast<std::size_t>(std::max_element(n.begin(), n.end()) - n.begin());
    const double g_peak = line.points[peak].gamma;
    std::vector<double> plateau;
    for (std::size_t i = peak; i < n.size(); ++i) {
      const double g = line.points[i].gamma;
      if (g >= g_peak + kTracePlateauOffset && g <= chaos) plateau.push_back(n[i]);
    }
    double level = 0.0;
    if (!plateau.empty()) {
      std::nth_element(plateau.begin(), plateau.begin() + plateau.size() / 2, plateau.end());
      level = plateau[plateau.size() / 2];
    }
    double g_drop = -1.0;
    for (std::size_t i = peak; i < n.size() && !plateau.empty(); ++i) {
      if (line.points[i].gamma >= g_peak + kTracePlateauOffset && n[i] < kTraceDropFraction * level) {
        g_drop = line.points[i].gamma;
        break;
      }
    }
    // The plateau and the drop must belong to one continuously traced state;
    // losing the trace after the drop is expected in the chaotic region.
    const double g_check = g_drop > 0 ? g_drop : kTraceGammaMax;
    // At a narrow avoided crossing with high-occupation states the line can
    // step onto its near-degenerate doublet partner (overlap zero by symmetry);
    // that keeps the traced doublet. Any other loss before the drop breaks it.
    double first_lost = -1.0;
    int swaps = 0;
    for (std::size_t i = 1; i < line.points.size(); ++i) {
      const TracePoint& p = line.points[i];
      if (!p.lost) continue;
      if (i < 2) {
        first_lost = p.gamma;
        break;
      }
      const TracePoint& a = line.points[i - 2];
      const TracePoint& b = line.points[i - 1];
      const double predicted =
          b.scaled_energy + (b.scaled_energy - a.scaled_energy) * (p.gamma - b.gamma) / (b.gamma - a.gamma);
      if (std::abs(p.scaled_energy - predicted) < kTraceSwapTol) {
        ++swaps;
        continue;
      }
      first_lost = p.gamma;
      break;
    }
    const bool continuous = first_lost < 0 || first_lost >= g_check;
    const bool level_ok = !plateau.empty() && std::abs(level - kTracePlateau) <= kTracePlateauTol;
    const bool drop_ok = g_drop > chaos;
    pass = pass && level_ok && drop_ok && continuous;
    detail += "line " + std::to_string(anchor) + ": peak at " + fmt(g_peak) + ", plateau " + fmt(level, 3) +
              (level_ok ? " ok" : " FAIL") + ", drop at " + (g_drop > 0 ? fmt(g_drop) : std::string("none")) +
              (drop_ok ? " ok" : " FAIL");
    if (swaps > 0) detail += ", " + std::to_string(swaps) + " partner swaps";
    if (first_lost >= 0) detail += ", lost from " + fmt(first_lost) + (continuous ? "" : " FAIL");
    if (line.ended_at) detail += ", window empty at " + fmt(*line.ended_at);
    detail += "; ";
  }
  detail += "Gamma* = " + fmt(chaos);
  return {pass, detail};
}

// ---- 10 ---------------------------------------------------------------------
Outcome numerical_hygiene() {
  std::string detail;
  bool pass = true;

  const ModelParams dev = reference_device();
  const HamiltonianSpec big = HamiltonianSpec::make(Frame::rotating, with_gamma(dev, 20.0), kDeviceDim);
  const ComplexMatrix w = half_period_map(big, kSteps);
  const double unit = unitarity_residual(w * w);
  pass = pass && unit < kUnitarityTol;
  detail += "unitarity " + fmt(unit, 2);
  {
    // Informational: step doubling at the acceptance parameters, modes below the cap.
    FloquetSpectrum a = floquet_spectrum_from_half_map(w, big.params.drive_frequency);
    FloquetSpectrum b = compute_floquet(big, 2 * kSteps);
    double worst = 0.0;
    for (Index k = 0; k < a.size(); ++k) {
      if (a.occupations(k) >= kDefaultOccupationCap) continue;
      double best = kTwoPi;
      for (Index j = 0; j < b.size(); ++j) {
        const double d = wrap_phase(a.raw_phases(k) - b.raw_phases(j));
        best = std::min(best, std::min(d, kTwoPi - d));
      }
      worst = std::max(worst, best);
    }
    const double tau = stroboscopic_period(big.params.drive_frequency);
    detail += ", step doubling max |d eps|/omega_d " + fmt(worst / tau / big.params.drive_frequency, 2);
  }

  const HamiltonianSpec small = HamiltonianSpec::make(Frame::rotating, with_gamma(dev, 10.0), 60);
  // Below ~2048 steps the dim-60 error sequence is not yet asymptotic.
  const RealVector ref = compute_floquet(small, 32768).raw_phases;
  const double e1 = max_phase_distance(compute_floquet(small, 2048).raw_phases, ref);
  const double e2 = max_phase_distance(compute_floquet(small, 4096).raw_phases, ref);
  const double q_order = std::log2(e1 / e2);
  pass = pass && std::abs(q_order - kPropagatorOrder) <= kOrderTol;
  detail += ", propagator order " + fmt(q_order, 3);

  const ClassicalParams cp = resonant_params(1.0 / 1500.0, 25.0);
  const PhasePoint seed{2.0, 3.0};
  const PhasePoint cref = strobe_map(seed, cp, 12800).image;
  auto cerr = [&](int steps) {
    const PhasePoint x = strobe_map(seed, cp, steps).image;
    return std::hypot(x.q - cref.q, x.p - cref.p);
  };
  const double c_order = std::log2(cerr(200) / cerr(400));
  pass = pass && std::abs(c_order - kClassicalOrder) <= kOrderTol;
  detail += ", classical order " + fmt(c_order, 3);

  {
    const double wd = big.params.drive_frequency, k = big.derived.kerr;
    FloquetSpectrum a = floquet_spectrum(w * w, wd);
    FloquetSpectrum b = floquet_spectrum(w * w * std::polar(1.0, 2.345), wd);
    ScalingOptions opt;
    opt.rule = ReferenceRule::lowest_occupation;
    scale_quasienergies(a, k, opt);
    scale_quasienergies(b, k, opt);
    const double branch = 0.5 * wd / k;
    double worst = 0.0;
    for (Index i = 0; i < a.size(); ++i) {
      double best = branch;
      for (Index j = 0; j < b.size(); ++j) {
        const double d = std::abs(a.scaled(i) - b.scaled(j));
        best = std::min(best, std::min(d, branch - d));
      }
      worst = std::max(worst, best);
    }
    const StateVector packet = origin_packet(big, 0);
    const KissingReport ra = detect_kissing(a, 20.0, packet);
    const KissingReport rb = detect_kissing(b, 20.0, packet);
    const bool same = ra.below_esqpt_count == rb.below_esqpt_count && ra.pair_count == rb.pair_count;
    pass = pass && worst < kGaugeTol && same;
    detail += ", gauge shift max d eps~ " + fmt(worst, 2) + " K" + (same ? "" : " (kissing changed)");
  }

  {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "kpo_acceptance_digest";
    fs::remove_all(root);
    fs::create_directories(root / "a");
    fs::create_directories(root / "b");
    write_text(root / "run.cfg", "gamma = 4,12\nkappa = 0.002\n");
    const std::vector<std::string> common = {"--config", (root / "run.cfg").string(), "--dim", "60",
                                             "--steps", "512"};
    auto with = [&](const char* threads, const fs::path& out) {
      std::vector<std::string> args{"spectrum"};
      args.insert(args.end(), common.begin(), common.end());
      args.insert(args.end(), {"--threads", threads, "--out", out.string()});
      return kpo::cli::run(args);
    };
    const int ra = with("1", root / "a"), rb = with("2", root / "b");
    bool same = ra == 0 && rb == 0;
    for (const char* f : {"spectrum_gamma_4.csv", "spectrum_gamma_12.csv", "kissing.csv", "metadata.json"}) {
      same = same && file_digest(root / "a" / f) == file_digest(root / "b" / f);
    }
    pass = pass && same;
    detail += std::string(", digests ") + (same ? "identical" : "DIFFER");
    fs::remove_all(root);
  }
  return {pass, detail};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "chaos boundary constant", chaos_boundary_constant},
      {2, "effective vs Floquet spectrum", effective_vs_floquet},
      {3, "spectral kissing count", kissing_count},
      {4, "coherent-state IPR cliff", ipr_cliff},
      {5, "Husimi IPR oracle", husimi_oracle},
      {6, "classical regular/chaotic classification", classical_classification},
      {7, "double-well area scaling", area_scaling},
      {8, "islands outlive chaos", islands_outlive_chaos},
      {9, "traced-line plateau and late break", trace_plateau},
      {10, "numerical hygiene", numerical_hygiene},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  bool all_pass = true;
  for (const Criterion& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all_pass = all_pass && o.pass;
    std::cout << "criterion " << c.id << " (" << c.name << "): " << (o.pass ? "PASS" : "FAIL") << " -- "
              << o.detail << " [" << fmt(secs, 3) << " s]" << std::endl;
  }
  return all_pass ? 0 : 1;
}
