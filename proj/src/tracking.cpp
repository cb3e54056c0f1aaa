#include "kpo/tracking.hpp"

#include "kpo/errors.hpp"
#include "kpo/phasespace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kpo {

namespace {

double branch_in_k(const FloquetSpectrum& s) { return 0.5 * s.omega_d / s.kerr; }

double cyclic_distance(double a, double b, double period) {
  const double d = positive_mod(a - b, period);
  return std::min(d, period - d);
}

void require_scaled(const FloquetSpectrum& s) {
  if (s.scaled.size() != s.size()) {
    throw ContractViolation("spectrum has no scaled quasienergies; call scale_quasienergies");
  }
}

KissingReport pair_up(std::vector<double> levels, double esqpt, double gamma, double pair_tol) {
  std::sort(levels.begin(), levels.end());
  KissingReport r;
  r.gamma = gamma;
  r.esqpt_scaled_energy = esqpt;
  std::size_t i = 0;
  while (i + 1 < levels.size()) {
    if (levels[i + 1] - levels[i] < pair_tol) {
      ++r.pair_count;
      i += 2;
    } else {
      ++i;
    }
  }
  r.below_esqpt_count = static_cast<int>(levels.size());
  r.degenerate_by_construction = gamma == 0.0;
  return r;
}

struct Candidate {
  Index index = -1;
  double score = -1.0;
};

// Offset of the current gauge relative to the previous one: the current
// scaled energy of the previous reference mode's continuation. Zero when the
// reference rule picked the same line again; 0 if the continuation is unclear.
double gauge_shift(const FloquetSpectrum& prev, const FloquetSpectrum& cur, double threshold) {
  if (prev.eps0_index < 0 || cur.eps0_index < 0) return 0.0;
  const RealVector w = (cur.modes.adjoint() * prev.modes.col(prev.eps0_index)).cwiseAbs2();
  Index k = 0;
  if (w.maxCoeff(&k) < threshold) return 0.0;
  const double period = branch_in_k(cur);
  double d = positive_mod(cur.scaled(k), period);
  if (d > 0.5 * period) d -= period;
  return d;
}

Candidate best_in_window(const FloquetSpectrum& s, const StateVector& target, double center,
                         const TraceConstraints& c, double gamma) {
  const double period = branch_in_k(s);
  const RealVector w = (s.modes.adjoint() * target).cwiseAbs2();
  Candidate best;
  int in_window = 0;
  for (Index k = 0; k < s.size(); ++k) {
    if (s.occupations(k) >= c.occupation_cap) continue;
    if (cyclic_distance(s.scaled(k), center, period) > c.window_half_width) continue;
    ++in_window;
    if (w(k) > best.score) best = {k, w(k)};
  }
  if (in_window == 0) {
    if (c.stop_when_empty) return best;
    std::ostringstream msg;
    msg << "trace: empty window at Gamma=" << gamma << " (center " << center << " K, half width "
        << c.window_half_width << " K, occupation cap " << c.occupation_cap << ")";
    throw ContractViolation(msg.str());
  }
  return best;
}

TracePoint make_point(const GammaSample& g, Index mode, const StateVector* prev,
                      const StateVector& anchor_vec) {
  const FloquetSpectrum& s = g.spectrum;
  TracePoint p;
  p.gamma = g.gamma;
  p.mode_index = mode;
  p.scaled_energy = s.scaled(mode);
  p.occupation = s.occupations(mode);
  p.overlap_prev = prev ? std::norm(prev->dot(s.modes.col(mode))) : 1.0;
  p.anchor_overlap = std::norm(anchor_vec.dot(s.modes.col(mode)));
  return p;
}

}  // namespace

EsqptState find_esqpt_state(const FloquetSpectrum& spectrum, const StateVector& packet,
                            double min_overlap) {
  const RealVector w = packet_weights(packet, spectrum);
  EsqptState out;
  out.overlap = w.maxCoeff(&out.index);
  out.found = out.overlap >= min_overlap;
  return out;
}

KissingReport detect_kissing(const FloquetSpectrum& spectrum, double gamma,
                             const StateVector& packet, double pair_tol, double occupation_cap) {
  require_scaled(spectrum);
  if (!(pair_tol > 0.0)) throw ContractViolation("detect_kissing: pair_tol must be positive");
  const EsqptState es = find_esqpt_state(spectrum, packet);
  double esqpt = gamma * gamma;
  bool extrapolated = true;
  if (es.found) {
    esqpt = spectrum.scaled(es.index);
    extrapolated = false;
  }
  std::vector<double> below;
  for (Index k = 0; k < spectrum.size(); ++k) {
    if (spectrum.occupations(k) >= occupation_cap) continue;
    if (es.found && k == es.index) continue;
    if (spectrum.scaled(k) < esqpt) below.push_back(spectrum.scaled(k));
  }
  KissingReport r = pair_up(std::move(below), esqpt, gamma, pair_tol);
  r.esqpt_mode_index = es.found ? es.index : -1;
  r.extrapolated = extrapolated;
  return r;
}

KissingReport count_pairs(const RealVector& excitations, double esqpt_energy, double gamma,
                          double pair_tol) {
  std::vector<double> below;
  for (Index k = 0; k < excitations.size(); ++k) {
    if (excitations(k) < esqpt_energy) below.push_back(excitations(k));
  }
  return pair_up(std::move(below), esqpt_energy, gamma, pair_tol);
}

std::string LevelLabel::str() const {
  return std::string(parity > 0 ? "even" : "odd") + ":" + std::to_string(rank);
}

LevelLabel label_of(const EffectiveLevels& levels, Index index) {
  if (index < 0 || index >= levels.excitation.size()) {
    throw ContractViolation("anchor index " + std::to_string(index) + " out of range");
  }
  LevelLabel l;
  l.parity = levels.parity(index) > 0.0 ? 1 : -1;
  l.rank = 0;
  for (Index k = 0; k < index; ++k) {
    if ((levels.parity(k) > 0.0 ? 1 : -1) == l.parity) ++l.rank;
  }
  return l;
}

Index index_of(const EffectiveLevels& levels, const LevelLabel& label) {
  Index seen = 0;
  for (Index k = 0; k < levels.excitation.size(); ++k) {
    if ((levels.parity(k) > 0.0 ? 1 : -1) != label.parity) continue;
    if (seen == label.rank) return k;
    ++seen;
  }
  throw ContractViolation("no effective level with label " + label.str());
}

bool TracedLine::any_lost() const {
  return std::any_of(points.begin(), points.end(), [](const TracePoint& p) { return p.lost; });
}

TracedLine trace_line(const std::vector<GammaSample>& samples, const LevelLabel& anchor,
                      TraceScheme scheme, const TraceConstraints& c) {
  if (samples.empty()) throw ContractViolation("trace: empty Gamma grid");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].gamma > samples[i - 1].gamma)) {
      throw ContractViolation("trace: Gamma grid must be strictly ascending");
    }
  }
  for (const GammaSample& g : samples) require_scaled(g.spectrum);

  TracedLine line;
  line.anchor = anchor;
  StateVector prev;
  double prev_energy = 0.0;
  double prev_eff = 0.0;
  double prev_gamma = 0.0;
  double slope = 0.0;  // d(scaled energy)/dGamma within one gauge
  bool have_slope = false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const GammaSample& g = samples[i];
    const Index a = index_of(g.effective, anchor);
    const StateVector anchor_vec = g.effective.vectors.col(a);
    const double eff = g.effective.excitation(a);

    const bool by_anchor =
        i == 0 || scheme == TraceScheme::anchor ||
        (scheme == TraceScheme::combined && c.reanchor_every > 0 &&
         i % static_cast<std::size_t>(c.reanchor_every) == 0);
    // Window center. Anchor scheme and first point: the effective energy,
    // rescaled by the Floquet/effective ratio seen at the previous step (the
    // Floquet ladder is slightly compressed). Otherwise the line's own linear
    // extrapolation once two points exist; near the ESQPT the effective levels
    // bunch differently from the Floquet ones, so their shift is a poor guide.
    const double ratio = (i > 0 && prev_eff > 1.0) ? prev_energy / prev_eff : 1.0;
    // The reference mode can change between steps (far past the chaos line
    // the cat doublet dissolves); predictions are moved into the new gauge.
    const double shift =
        i > 0 ? gauge_shift(samples[i - 1].spectrum, g.spectrum, c.lost_threshold) : 0.0;
    double center = eff * ratio;
    if (i > 0 && scheme != TraceScheme::anchor) {
      center = have_slope ? prev_energy + shift + slope * (g.gamma - prev_gamma)
                          : prev_energy + shift + (eff - prev_eff) * ratio;
    }
    Candidate pick = best_in_window(g.spectrum, by_anchor ? anchor_vec : prev, center, c, g.gamma);
    // A re-anchoring step keeps the overlap pick when no mode in the window
    // resembles the anchor any more.
    if (pick.index >= 0 && i > 0 && by_anchor && scheme == TraceScheme::combined &&
        pick.score < c.lost_threshold) {
      pick = best_in_window(g.spectrum, prev, center, c, g.gamma);
    }
    if (pick.index < 0) {
      line.ended_at = g.gamma;
      break;
    }
    TracePoint p = make_point(g, pick.index, i == 0 ? nullptr : &prev, anchor_vec);
    p.lost = i > 0 && p.overlap_prev < c.lost_threshold;
    line.points.push_back(p);

    if (i > 0) {
      slope = (p.scaled_energy - prev_energy - shift) / (g.gamma - prev_gamma);
      have_slope = true;
    }
    prev = g.spectrum.modes.col(pick.index);
    prev_energy = p.scaled_energy;
    prev_eff = eff;
    prev_gamma = g.gamma;
  }
  return line;
}

TracedLine trace_line_overlap(const std::vector<GammaSample>& samples, const LevelLabel& anchor,
                              const TraceConstraints& constraints) {
  return trace_line(samples, anchor, TraceScheme::overlap, constraints);
}

TracedLine trace_line_anchor(const std::vector<GammaSample>& samples, const LevelLabel& anchor,
                             const TraceConstraints& constraints) {
  return trace_line(samples, anchor, TraceScheme::anchor, constraints);
}

void attach_husimi_ipr(TracedLine& line, const std::vector<GammaSample>& samples, Index points) {
  for (TracePoint& p : line.points) {
    const auto it = std::find_if(samples.begin(), samples.end(),
                                 [&](const GammaSample& g) { return g.gamma == p.gamma; });
    if (it == samples.end()) throw ContractViolation("attach_husimi_ipr: Gamma not sampled");
    p.husimi_ipr = husimi_ipr_adaptive(it->spectrum.modes.col(p.mode_index), p.gamma, points);
  }
}

std::vector<double> normalized_ipr(const TracedLine& line) {
  double peak = 0.0;
  for (const TracePoint& p : line.points) peak = std::max(peak, p.husimi_ipr);
  std::vector<double> out;
  out.reserve(line.points.size());
  for (const TracePoint& p : line.points) out.push_back(peak > 0.0 ? p.husimi_ipr / peak : 0.0);
  return out;
}

GammaSample make_sample(const ModelParams& device, double gamma, Index dim, int n_steps,
                        const ScalingOptions& scaling, std::optional<double> omega_d) {
  GammaSample g;
  g.gamma = gamma;
  const ModelParams p = with_gamma(device, gamma, omega_d);
  const HamiltonianSpec spec = HamiltonianSpec::make(Frame::rotating, p, dim);
  g.spectrum = compute_floquet(spec, n_steps);
  const ComplexMatrix doublet = effective_ground_doublet(spec);
  scale_quasienergies(g.spectrum, spec.derived.kerr, scaling, &doublet);
  HamiltonianSpec eff = spec;
  eff.frame = Frame::effective_static;
  g.effective = effective_levels(eff);
  return g;
}

}  // namespace kpo
