#include "cli.hpp"

#include "kpo/classical.hpp"
#include "kpo/errors.hpp"
#include "kpo/floquet.hpp"
#include "kpo/io.hpp"
#include "kpo/model.hpp"
#include "kpo/parallel.hpp"
#include "kpo/phasespace.hpp"
#include "kpo/tracking.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace kpo::cli {

namespace {

constexpr const char* kVersion = "1.0.0";

struct Globals {
  std::string config;
  std::string out = ".";
  unsigned threads = 0;
  long long dim = -1;
  long long steps = -1;
};

struct Output {
  fs::path dir;
  std::vector<fs::path> files;

  fs::path file(const std::string& name) {
    files.push_back(dir / name);
    return files.back();
  }
};

const std::set<std::string> kModelKeys = {"g3", "g4", "omega0", "kappa", "omega_d", "dim", "steps"};

std::set<std::string> keys_with(std::initializer_list<const char*> extra,
                                const std::set<std::string>& base = kModelKeys) {
  std::set<std::string> k = base;
  for (const char* e : extra) k.insert(e);
  return k;
}

Config load_config(const Globals& g, const std::set<std::string>& allowed) {
  Config c = g.config.empty() ? Config::parse("", allowed) : Config::load(g.config, allowed);
  if (g.dim >= 0) c.set("dim", std::to_string(g.dim));
  if (g.steps >= 0) c.set("steps", std::to_string(g.steps));
  return c;
}

std::string label_gamma(double gamma) { return "gamma_" + format_double(gamma); }

// Device parameters: either an explicit kappa (device family K = 10 g4) or
// g3/g4, defaulting to the reference device.
ModelParams resolve_device(Config& c) {
  if (c.has("kappa") && (c.has("g3") || c.has("g4"))) {
    throw ConfigError("give either kappa or g3/g4, not both");
  }
  ModelParams dev;
  if (c.has("kappa")) {
    dev = device_for_kappa(c.get_double("kappa", 0.0), c.get_double("omega0", 1.0));
  } else {
    dev = reference_device();
    dev.omega0 = c.get_double("omega0", 1.0);
    dev.g3 = c.get_double("g3", dev.g3);
    dev.g4 = c.get_double("g4", dev.g4);
    c.set("g3", format_double(dev.g3));
    c.set("g4", format_double(dev.g4));
  }
  c.set("omega0", format_double(dev.omega0));
  return dev;
}

std::optional<double> resolve_omega_d(Config& c) {
  const std::string v = c.get_string("omega_d", "resonant");
  c.set("omega_d", v);
  if (v == "resonant") return std::nullopt;
  const double w = c.get_double("omega_d", 0.0);
  if (!(w > 0.0)) throw ConfigError("omega_d must be positive or 'resonant'");
  return w;
}

Index resolve_dim(Config& c) {
  const long long d = c.get_int("dim", 200);
  if (d < 2) throw ConfigError("dim must be >= 2");
  c.set("dim", std::to_string(d));
  return static_cast<Index>(d);
}

int resolve_steps(Config& c) {
  const long long s = c.get_int("steps", kDefaultSteps);
  if (s < kMinSteps || s % 2 != 0) {
    throw ConfigError("steps must be even and >= " + std::to_string(kMinSteps));
  }
  c.set("steps", std::to_string(s));
  return static_cast<int>(s);
}

std::vector<double> resolve_grid(Config& c, const std::string& key,
                                 const std::vector<double>& fallback, bool nonneg = true) {
  std::vector<double> g = c.get_grid(key, fallback);
  if (g.empty()) throw ConfigError(key + ": empty grid");
  for (double v : g) {
    if (!std::isfinite(v) || (nonneg && v < 0.0)) throw ConfigError(key + ": invalid value");
  }
  std::string text;
  for (std::size_t i = 0; i < g.size(); ++i) text += (i ? "," : "") + format_double(g[i]);
  c.set(key, text);
  return g;
}

double resolve_double(Config& c, const std::string& key, double fallback) {
  const double v = c.get_double(key, fallback);
  c.set(key, format_double(v));
  return v;
}

long long resolve_int(Config& c, const std::string& key, long long fallback) {
  const long long v = c.get_int(key, fallback);
  c.set(key, std::to_string(v));
  return v;
}

std::string resolve_string(Config& c, const std::string& key, const std::string& fallback) {
  const std::string v = c.get_string(key, fallback);
  c.set(key, v);
  return v;
}

ScalingOptions resolve_scaling(Config& c) {
  ScalingOptions s;
  s.occupation_cap = resolve_double(c, "occupation_cap", kDefaultOccupationCap);
  if (!(s.occupation_cap > 0.0)) throw ConfigError("occupation_cap must be positive");
  const std::string rule = resolve_string(c, "reference", "effective_ground");
  if (rule == "effective_ground") {
    s.rule = ReferenceRule::effective_ground;
  } else if (rule == "lowest_occupation") {
    s.rule = ReferenceRule::lowest_occupation;
  } else {
    throw ConfigError("reference must be effective_ground or lowest_occupation");
  }
  return s;
}

// Checks every Gamma against the model preconditions before any work.
void validate_points(const ModelParams& dev, const std::vector<double>& gammas,
                     std::optional<double> omega_d) {
  try {
    for (double g : gammas) derive(with_gamma(dev, g, omega_d));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid parameters: ") + e.what());
  }
}

void write_husimi(const fs::path& path, const HusimiField& f) {
  std::string text = "q_min,q_max,p_min,p_max,nq,np\n";
  text += format_double(f.q_grid(0)) + "," + format_double(f.q_grid(f.q_grid.size() - 1)) + "," +
          format_double(f.p_grid(0)) + "," + format_double(f.p_grid(f.p_grid.size() - 1)) + "," +
          format_int(f.q_grid.size()) + "," + format_int(f.p_grid.size()) + "\n";
  for (Index i = 0; i < f.values.rows(); ++i) {
    for (Index j = 0; j < f.values.cols(); ++j) {
      if (j) text += ',';
      text += format_double(f.values(i, j));
    }
    text += '\n';
  }
  write_text(path, text);
}

void finish(Output& out, const std::string& command, const Config& cfg, const json& extra) {
  const fs::path resolved = out.dir / "resolved.cfg";
  write_text(resolved, cfg.dump());
  json meta;
  meta["command"] = command;
  meta["version"] = kVersion;
  meta["parameters"] = cfg.values();
  meta["tolerances"] = {{"unitarity", 1e-6},
                        {"esqpt_min_overlap", kEsqptMinOverlap},
                        {"lyapunov_growth_limit", kLyapunovGrowthLimit}};
  for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
  json files = json::array();
  for (const fs::path& f : out.files) {
    files.push_back({{"file", f.filename().string()}, {"digest", file_digest(f)}});
  }
  meta["outputs"] = files;
  write_text(out.dir / "metadata.json", meta.dump(2) + "\n");
}

// ---------------------------------------------------------------- spectrum

void cmd_spectrum(const Globals& g) {
  Config c = load_config(g, keys_with({"gamma", "occupation_cap", "pair_tol", "reference",
                                       "us_order", "husimi_states", "husimi_points"}));
  const ModelParams dev = resolve_device(c);
  const auto omega_d = resolve_omega_d(c);
  const Index dim = resolve_dim(c);
  const int steps = resolve_steps(c);
  const std::vector<double> gammas = resolve_grid(c, "gamma", {});
  const ScalingOptions scaling = resolve_scaling(c);
  const double pair_tol = resolve_double(c, "pair_tol", kDefaultPairTol);
  const int us_order = static_cast<int>(resolve_int(c, "us_order", 0));
  const std::string husimi_states = resolve_string(c, "husimi_states", "");
  const Index husimi_points = resolve_int(c, "husimi_points", kDefaultHusimiPoints);
  if (!(pair_tol > 0.0)) throw ConfigError("pair_tol must be positive");
  if (us_order != 0 && us_order != 1) throw ConfigError("us_order must be 0 or 1");
  std::vector<std::string> husimi_which;
  if (!husimi_states.empty()) {
    std::stringstream ss(husimi_states);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item != "fmin" && item != "esqpt") throw ConfigError("husimi_states: fmin or esqpt");
      husimi_which.push_back(item);
    }
  }
  validate_points(dev, gammas, omega_d);

  Output out{g.out, {}};
  std::vector<GammaSample> samples(gammas.size());
  parallel_for(gammas.size(), g.threads, [&](std::size_t i) {
    samples[i] = make_sample(dev, gammas[i], dim, steps, scaling, omega_d);
  });

  CsvWriter kiss(out.file("kissing.csv"),
                 {"gamma", "pair_count", "below_esqpt_count",
                  "esqpt_scaled_energy", "esqpt_mode_index", "extrapolated",
                  "degenerate_by_construction"});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const GammaSample& s = samples[i];
    const HamiltonianSpec spec =
        HamiltonianSpec::make(Frame::rotating, with_gamma(dev, s.gamma, omega_d), dim);
    const StateVector packet = origin_packet(spec, us_order);
    const RealVector w = packet_weights(packet, s.spectrum);
    const std::string tag = label_gamma(s.gamma);

    CsvWriter csv(out.file("spectrum_" + tag + ".csv"),
                  {"index", "quasienergy", "raw_phase", "scaled", "occupation", "parity",
                   "origin_overlap", "is_reference"});
    for (const SpectrumRecord& r : export_records(s.spectrum)) {
      csv.row({format_int(r.index), format_double(r.quasienergy), format_double(r.raw_phase),
               format_double(r.scaled), format_double(r.occupation), format_double(r.parity),
               format_double(w(r.index)), r.index == s.spectrum.eps0_index ? "1" : "0"});
    }
    CsvWriter eff(out.file("effective_" + tag + ".csv"), {"index", "excitation", "parity"});
    for (Index k = 0; k < s.effective.excitation.size(); ++k) {
      eff.row({format_int(k), format_double(s.effective.excitation(k)),
                format_double(s.effective.parity(k))});
    }
    const KissingReport rep = detect_kissing(s.spectrum, s.gamma, packet, pair_tol,
                                             scaling.occupation_cap);
    kiss.row({format_double(rep.gamma), format_int(rep.pair_count),
              format_int(rep.below_esqpt_count),
              format_double(rep.esqpt_scaled_energy), format_int(rep.esqpt_mode_index),
              rep.extrapolated ? "1" : "0", rep.degenerate_by_construction ? "1" : "0"});
    for (const std::string& which : husimi_which) {
      Index mode = s.spectrum.eps0_index;
      if (which == "esqpt") mode = find_esqpt_state(s.spectrum, packet).index;
      const HusimiField f = husimi_adaptive(s.spectrum.modes.col(mode), s.gamma, husimi_points);
      write_husimi(out.file("husimi_" + tag + "_" + which + ".csv"), f);
    }
  }
  finish(out, "spectrum", c, json::object());
}

// ---------------------------------------------------------------- ipr-scan

void cmd_ipr_scan(const Globals& g) {
  Config c = load_config(g, {"kappa", "gamma", "omega_d", "dim", "steps", "us_order"});
  const auto omega_d = resolve_omega_d(c);
  const Index dim = resolve_dim(c);
  const int steps = resolve_steps(c);
  const std::vector<double> kappas = resolve_grid(c, "kappa", {0.0009});
  const std::vector<double> gammas = resolve_grid(c, "gamma", {});
  const int us_order = static_cast<int>(resolve_int(c, "us_order", 0));
  if (us_order != 0 && us_order != 1) throw ConfigError("us_order must be 0 or 1");
  for (double k : kappas) {
    if (!(k > 0.0)) throw ConfigError("kappa must be positive");
    validate_points(device_for_kappa(k), gammas, omega_d);
  }

  struct Point {
    double kappa, gamma, ipr, overlap;
    Index index;
    bool found;
  };
  std::vector<Point> pts;
  for (double k : kappas)
    for (double gm : gammas) pts.push_back({k, gm, 0.0, 0.0, -1, false});
  parallel_for(pts.size(), g.threads, [&](std::size_t i) {
    Point& p = pts[i];
    const HamiltonianSpec spec = HamiltonianSpec::make(
        Frame::rotating, with_gamma(device_for_kappa(p.kappa), p.gamma, omega_d), dim);
    const FloquetSpectrum s = compute_floquet(spec, steps);
    const StateVector packet = origin_packet(spec, us_order);
    p.ipr = floquet_basis_ipr(packet, s);
    const EsqptState e = find_esqpt_state(s, packet);
    p.overlap = e.overlap;
    p.index = e.index;
    p.found = e.found;
  });

  Output out{g.out, {}};
  CsvWriter csv(out.file("ipr_scan.csv"),
                {"gamma", "kappa", "I_G", "esqpt_overlap", "esqpt_index", "esqpt_found",
                 "gamma_kappa", "chaos_boundary", "beyond_boundary"});
  for (const Point& p : pts) {
    const double prod = p.gamma * p.kappa;
    csv.row({format_double(p.gamma), format_double(p.kappa), format_double(p.ipr),
             format_double(p.overlap), format_int(p.index), p.found ? "1" : "0",
             format_double(prod), format_double(kChaosBoundaryProduct),
             prod > kChaosBoundaryProduct ? "1" : "0"});
  }
  finish(out, "ipr-scan", c, json::object());
}

// ---------------------------------------------------------------- classical

void cmd_classical(const Globals& g) {
  Config c = load_config(
      g, {"kappa", "gamma", "omega_d", "seeds", "seed_span", "raster", "box_padding", "periods",
          "steps_per_period", "closing_radius", "escape_factor", "poincare_seeds",
          "poincare_stride", "vanish", "vanish_lo", "vanish_hi", "area_floor", "gamma_tol",
          "eta2"});
  const std::vector<double> kappas = resolve_grid(c, "kappa", {1.0 / 1500.0});
  const std::vector<double> gammas = resolve_grid(c, "gamma", {25.0});
  const auto omega_d = resolve_omega_d(c);
  AreaScanConfig scan;
  scan.seeds = static_cast<int>(resolve_int(c, "seeds", scan.seeds));
  scan.seed_span = resolve_double(c, "seed_span", scan.seed_span);
  scan.grid = static_cast<int>(resolve_int(c, "raster", scan.grid));
  scan.box_padding = resolve_double(c, "box_padding", scan.box_padding);
  scan.periods = static_cast<int>(resolve_int(c, "periods", scan.periods));
  scan.steps_per_period = static_cast<int>(resolve_int(c, "steps_per_period", scan.steps_per_period));
  scan.closing_radius = resolve_double(c, "closing_radius", scan.closing_radius);
  scan.escape_factor = resolve_double(c, "escape_factor", scan.escape_factor);
  scan.threads = g.threads;
  const long long poincare_seeds = resolve_int(c, "poincare_seeds", 40);
  const long long poincare_stride = resolve_int(c, "poincare_stride", 5);
  const bool vanish = resolve_int(c, "vanish", 0) != 0;
  const double gamma_tol = resolve_double(c, "gamma_tol", 0.25);
  const std::vector<double> eta2 = resolve_grid(c, "eta2", {0.5, 1.0, 2.0});
  if (scan.seeds < 2 || scan.grid < 8 || scan.periods < kMinLyapunovPeriods ||
      scan.steps_per_period < 200 || poincare_seeds < 0 || poincare_stride < 1) {
    throw ConfigError("classical: seeds >= 2, raster >= 8, periods >= 2000, "
                      "steps_per_period >= 200, poincare_stride >= 1");
  }
  for (double k : kappas)
    if (!(k > 0.0)) throw ConfigError("kappa must be positive");
  for (double e : eta2)
    if (!(e > 0.0)) throw ConfigError("eta2 values must be positive");

  auto params_for = [&](double kappa, double gamma) {
    return omega_d ? ClassicalParams{kappa, gamma, *omega_d} : resonant_params(kappa, gamma);
  };

  Output out{g.out, {}};
  CsvWriter area_csv(out.file("area_map.csv"),
                     {"kappa", "gamma", "area", "n_regular_cells", "grid_cell", "omega_d_ratio",
                      "regular_seeds", "chaotic_seeds", "escaped_seeds", "all_chaotic"});
  CsvWriter lyap_csv(out.file("lyapunov_map.csv"),
                     {"kappa", "gamma", "traj_id", "q0", "p0", "lyapunov", "lyapunov_time",
                      "classified", "escaped"});
  for (double kappa : kappas) {
    for (double gamma : gammas) {
      const ClassicalParams p = params_for(kappa, gamma);
      AreaEstimate a;
      try {
        a = doublewell_area(p, scan, true);
      } catch (const NoSolution&) {
        a.params = p;
        a.all_chaotic = true;
      }
      area_csv.row({format_double(kappa), format_double(gamma), format_double(a.area),
                    format_int(a.n_regular_cells), format_double(a.grid_cell),
                    format_double(p.omega_d_ratio), format_int(a.regular_seeds),
                    format_int(a.chaotic_seeds), format_int(a.escaped_seeds),
                    a.all_chaotic ? "1" : "0"});
      const std::string tag = "kappa_" + format_double(kappa) + "_" + label_gamma(gamma);
      std::optional<CsvWriter> poincare;
      if (poincare_seeds > 0 && !a.trajectories.empty()) {
        poincare.emplace(out.file("poincare_" + tag + ".csv"),
                         std::vector<std::string>{"traj_id", "q0", "n", "q", "p", "lyapunov",
                                                  "classified"});
      }
      const std::size_t n = a.trajectories.size();
      const std::size_t every =
          poincare_seeds > 0 ? std::max<std::size_t>(1, n / static_cast<std::size_t>(poincare_seeds)) : 0;
      for (std::size_t t = 0; t < n; ++t) {
        const TrajectoryResult& r = a.trajectories[t];
        const char* cls = r.regular ? "regular" : "chaotic";
        lyap_csv.row({format_double(kappa), format_double(gamma), format_int(static_cast<long long>(t)),
                      format_double(r.initial.q), format_double(r.initial.p),
                      format_double(r.lyapunov), format_double(r.lyapunov_time), cls,
                      r.escaped ? "1" : "0"});
        if (!poincare || t % every != 0) continue;
        for (std::size_t k = 0; k < r.strobe_points.size();
             k += static_cast<std::size_t>(poincare_stride)) {
          poincare->row({format_int(static_cast<long long>(t)), format_double(r.initial.q),
                         format_int(static_cast<long long>(k + 1)),
                         format_double(r.strobe_points[k].q), format_double(r.strobe_points[k].p),
                         format_double(r.lyapunov), cls});
        }
      }
    }
  }

  // Rescaling audit around the first grid point, omega_d held fixed.
  {
    const double k0 = kappas.front(), g0 = gammas.front();
    const ClassicalParams base = params_for(k0, g0);
    CsvWriter sc(out.file("area_scaling.csv"),
                 {"eta2", "kappa", "gamma", "omega_d_ratio", "area", "expected", "rel_error",
                  "verdict"});
    const double a0 = doublewell_area(base, scan).area;
    for (double e : eta2) {
      const ClassicalParams p{k0 / e, g0 * e, base.omega_d_ratio};
      const double a = e == 1.0 ? a0 : doublewell_area(p, scan).area;
      const double expected = e * a0;
      const double rel = std::abs(a - expected) / expected;
      sc.row({format_double(e), format_double(p.kappa), format_double(p.gamma),
              format_double(p.omega_d_ratio), format_double(a), format_double(expected),
              format_double(rel), rel <= 0.05 ? "pass" : "fail"});
    }
  }

  if (vanish) {
    CsvWriter vc(out.file("vanishing.csv"),
                 {"kappa", "gamma_vanish", "area_floor", "scale", "chaos_gamma",
                  "outlives_chaos"});
    for (double kappa : kappas) {
      const double chaos = chaos_boundary_gamma(kappa);
      const double lo = c.has("vanish_lo") ? c.get_double("vanish_lo", 0.0) : 0.5 * chaos;
      const double hi = c.has("vanish_hi") ? c.get_double("vanish_hi", 0.0) : 8.0 * chaos;
      std::optional<double> floor;
      if (c.has("area_floor")) floor = c.get_double("area_floor", 0.0);
      const VanishingResult v = island_vanishing_gamma(kappa, lo, hi, scan, floor, gamma_tol);
      vc.row({format_double(kappa), format_double(v.gamma), format_double(v.area_floor),
              format_double(v.scale), format_double(chaos), v.gamma > chaos ? "1" : "0"});
    }
  }
  finish(out, "classical", c, json::object());
}

// ---------------------------------------------------------------- trace

void cmd_trace(const Globals& g) {
  Config c = load_config(g, keys_with({"gamma", "anchors", "scheme", "window", "occupation_cap",
                                       "reanchor_every", "lost_threshold", "husimi_points",
                                       "reference", "on_empty"}));
  const ModelParams dev = resolve_device(c);
  const auto omega_d = resolve_omega_d(c);
  const Index dim = resolve_dim(c);
  const int steps = resolve_steps(c);
  const std::vector<double> gammas = resolve_grid(c, "gamma", {});
  const std::vector<double> anchors_raw = resolve_grid(c, "anchors", {0.0});
  const std::string scheme_name = resolve_string(c, "scheme", "combined");
  TraceConstraints tc;
  tc.window_half_width = resolve_double(c, "window", tc.window_half_width);
  tc.reanchor_every = static_cast<int>(resolve_int(c, "reanchor_every", tc.reanchor_every));
  tc.lost_threshold = resolve_double(c, "lost_threshold", tc.lost_threshold);
  const std::string on_empty = resolve_string(c, "on_empty", "error");
  if (on_empty != "error" && on_empty != "stop") throw ConfigError("on_empty must be error or stop");
  tc.stop_when_empty = on_empty == "stop";
  const ScalingOptions scaling = resolve_scaling(c);
  tc.occupation_cap = scaling.occupation_cap;
  const Index husimi_points = resolve_int(c, "husimi_points", kDefaultHusimiPoints);

  TraceScheme scheme = TraceScheme::combined;
  if (scheme_name == "overlap") {
    scheme = TraceScheme::overlap;
  } else if (scheme_name == "anchor") {
    scheme = TraceScheme::anchor;
  } else if (scheme_name != "combined") {
    throw ConfigError("scheme must be overlap, anchor or combined");
  }
  for (std::size_t i = 1; i < gammas.size(); ++i) {
    if (!(gammas[i] > gammas[i - 1])) throw ConfigError("gamma grid must be ascending");
  }
  std::vector<Index> anchors;
  for (double a : anchors_raw) {
    const Index idx = static_cast<Index>(a);
    if (static_cast<double>(idx) != a || idx < 0 || 2 * idx >= dim) {
      throw ConfigError("anchor index " + format_double(a) + " does not exist (0 <= index < " +
                        std::to_string(dim / 2) + ")");
    }
    anchors.push_back(idx);
  }
  validate_points(dev, gammas, omega_d);

  std::vector<GammaSample> samples(gammas.size());
  parallel_for(gammas.size(), g.threads, [&](std::size_t i) {
    samples[i] = make_sample(dev, gammas[i], dim, steps, scaling, omega_d);
  });

  Output out{g.out, {}};
  for (Index a : anchors) {
    const LevelLabel label = label_of(samples.front().effective, a);
    TracedLine line = trace_line(samples, label, scheme, tc);
    if (line.ended_at) {
      std::cerr << "trace: anchor " << a << " ended at Gamma=" << format_double(*line.ended_at)
                << " (empty window)\n";
    }
    attach_husimi_ipr(line, samples, husimi_points);
    const std::vector<double> norm = normalized_ipr(line);
    CsvWriter csv(out.file("trace_anchor_" + std::to_string(a) + ".csv"),
                  {"gamma", "mode_index", "scaled_energy", "occupation", "overlap_prev",
                   "anchor_overlap", "husimi_ipr", "normalized_ipr", "status"});
    for (std::size_t i = 0; i < line.points.size(); ++i) {
      const TracePoint& p = line.points[i];
      csv.row({format_double(p.gamma), format_int(p.mode_index), format_double(p.scaled_energy),
               format_double(p.occupation), format_double(p.overlap_prev),
               format_double(p.anchor_overlap), format_double(p.husimi_ipr),
               format_double(norm[i]), p.lost ? "lost" : "ok"});
    }
  }
  finish(out, "trace", c, json::object());
}

// ---------------------------------------------------------------- params

void cmd_params(const Globals& g) {
  Config c = load_config(g, keys_with({"gamma"}));
  const ModelParams dev = resolve_device(c);
  const auto omega_d = resolve_omega_d(c);
  const std::vector<double> gammas = resolve_grid(c, "gamma", {0.0});
  validate_points(dev, gammas, omega_d);
  json rows = json::array();
  for (double gm : gammas) {
    const ModelParams p = with_gamma(dev, gm, omega_d);
    const DerivedParams d = derive(p);
    rows.push_back({{"gamma", gm},
                    {"g3", p.g3},
                    {"g4", p.g4},
                    {"omega0", p.omega0},
                    {"drive_amplitude", p.drive_amplitude},
                    {"drive_frequency", p.drive_frequency},
                    {"kerr", d.kerr},
                    {"squeezing", d.squeezing},
                    {"displacement", d.displacement},
                    {"shifted_frequency", d.shifted_frequency},
                    {"detuning", d.detuning},
                    {"kappa", d.kappa},
                    {"chaos_boundary_gamma", chaos_boundary_gamma(d.kappa)},
                    {"chaos_boundary_product", chaos_boundary_product(p)},
                    {"warnings", parameter_warnings(p)}});
  }
  Output out{g.out, {}};
  const fs::path path = out.file("params.json");
  write_text(path, rows.dump(2) + "\n");
  std::cout << rows.dump(2) << "\n";
  finish(out, "params", c, json::object());
}

void write_error(const Globals& g, const char* kind, const std::string& message) {
  json rec = {{"error", kind}, {"message", message}};
  std::cerr << rec.dump() << "\n";
  std::error_code ec;
  if (fs::is_directory(g.out, ec)) {
    try {
      write_text(fs::path(g.out) / "error.json", rec.dump(2) + "\n");
    } catch (...) {
    }
  }
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Floquet and classical diagnostics of the squeeze-driven Kerr oscillator", "kpo"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "key = value parameter file");
  app.add_option("--out", g.out, "output directory (created if missing)");
  app.add_option("--threads", g.threads, "worker threads (0 = available parallelism)");
  app.add_option("--dim", g.dim, "Fock-space dimension")->check(CLI::Range(2LL, 100000LL));
  app.add_option("--steps", g.steps, "propagator time steps per stroboscopic period");

  std::string chosen;
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"spectrum", "Floquet spectra, scaled quasienergies and kissing reports over a Gamma grid"},
      {"ipr-scan", "coherent-state IPR I_G over a (Gamma, K/omega0) grid"},
      {"classical", "Poincare sections, Lyapunov maps, double-well areas, island vanishing"},
      {"trace", "trace cat-state lines across Gamma with Husimi IPR"},
      {"params", "echo the derived constants"}};
  for (const auto& [name, help] : subs) {
    app.add_subcommand(name, help)->callback([&chosen, n = name] { chosen = n; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    std::error_code ec;
    fs::create_directories(g.out, ec);
    if (ec) throw ConfigError("cannot create output directory " + g.out);
    if (chosen == "spectrum") cmd_spectrum(g);
    else if (chosen == "ipr-scan") cmd_ipr_scan(g);
    else if (chosen == "classical") cmd_classical(g);
    else if (chosen == "trace") cmd_trace(g);
    else if (chosen == "params") cmd_params(g);
  } catch (const ConfigError& e) {
    write_error(g, "config", e.what());
    return 2;
  } catch (const Error& e) {
    write_error(g, "computation", e.what());
    return 1;
  } catch (const std::exception& e) {
    write_error(g, "internal", e.what());
    return 1;
  }
  return 0;
}

}  // namespace kpo::cli
