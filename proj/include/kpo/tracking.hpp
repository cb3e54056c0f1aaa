#pragma once

// ESQPT-state identification, spectral-kissing counts and tracing of
// cat-state lines through a sequence of Floquet spectra.

#include "kpo/floquet.hpp"
#include "kpo/hamiltonians.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kpo {

inline constexpr double kEsqptMinOverlap = 0.05;
inline constexpr double kDefaultPairTol = 1e-2;

struct EsqptState {
  Index index = -1;
  double overlap = 0.0;
  bool found = false;  // false when the best overlap is below kEsqptMinOverlap
};

/// Mode with the largest |<phi_j|packet>|^2.
EsqptState find_esqpt_state(const FloquetSpectrum& spectrum, const StateVector& packet,
                            double min_overlap = kEsqptMinOverlap);

struct KissingReport {
  double gamma = 0.0;
  int pair_count = 0;
  /// All states (below the occupation cap) with eps~ under the ESQPT energy,
  /// each quasi-degenerate pair counted as two.
  int below_esqpt_count = 0;
  double esqpt_scaled_energy = 0.0;
  Index esqpt_mode_index = -1;
  bool extrapolated = false;               // ESQPT energy taken as Gamma^2
  bool degenerate_by_construction = false;  // Gamma == 0
};

/// Requires spectrum.scaled. Modes above `occupation_cap` are ignored.
/// Adjacent levels (ascending eps~) below the ESQPT state are paired greedily
/// when their gap is below pair_tol (units of K).
KissingReport detect_kissing(const FloquetSpectrum& spectrum, double gamma,
                             const StateVector& packet, double pair_tol = kDefaultPairTol,
                             double occupation_cap = kDefaultOccupationCap);

/// Same pairing rule applied to a list of excitation energies (units of K)
/// with a known separatrix energy; used for the static effective spectrum.
KissingReport count_pairs(const RealVector& excitations, double esqpt_energy, double gamma,
                          double pair_tol = kDefaultPairTol);

/// Everything the tracer needs at one Gamma.
struct GammaSample {
  double gamma = 0.0;
  FloquetSpectrum spectrum;  // scaled
  EffectiveLevels effective;
};

/// Label of a static effective eigenstate that survives level crossings
/// between the parity sectors: parity and rank inside that sector.
struct LevelLabel {
  int parity = 1;
  Index rank = 0;
  std::string str() const;
};

LevelLabel label_of(const EffectiveLevels& levels, Index index);
/// Position of `label` in `levels`; throws ContractViolation if absent.
Index index_of(const EffectiveLevels& levels, const LevelLabel& label);

struct TraceConstraints {
  double window_half_width = 5.0;  // units of K around the window center
  double occupation_cap = kDefaultOccupationCap;
  double lost_threshold = 0.5;
  int reanchor_every = 10;  // combined scheme only
  // An empty window throws unless set; then the line ends there and
  // TracedLine::ended_at records the Gamma.
  bool stop_when_empty = false;
};

struct TracePoint {
  double gamma = 0.0;
  Index mode_index = -1;
  double scaled_energy = 0.0;
  double occupation = 0.0;
  double overlap_prev = 1.0;    // |<phi(G_i)|phi(G_{i-1})>|^2
  double anchor_overlap = 0.0;  // with the local effective eigenstate of the label
  double husimi_ipr = 0.0;      // filled by attach_husimi_ipr
  bool lost = false;
};

struct TracedLine {
  LevelLabel anchor;
  std::vector<TracePoint> points;
  std::optional<double> ended_at;  // first Gamma with an empty window

  bool any_lost() const;
};

enum class TraceScheme { overlap, anchor, combined };

/// Scheme "overlap": follow the largest overlap with the previous step's
/// mode inside a window centered on the previous scaled energy.
/// Scheme "anchor": at each Gamma take the mode with the largest overlap with
/// the local effective eigenstate of the anchor label, window centered on
/// that eigenstate's excitation energy.
/// Scheme "combined": overlap scheme, re-anchored every reanchor_every steps.
/// Throws ContractViolation with window diagnostics if a window is empty.
TracedLine trace_line(const std::vector<GammaSample>& samples, const LevelLabel& anchor,
                      TraceScheme scheme, const TraceConstraints& constraints = {});

TracedLine trace_line_overlap(const std::vector<GammaSample>& samples, const LevelLabel& anchor,
                              const TraceConstraints& constraints = {});
TracedLine trace_line_anchor(const std::vector<GammaSample>& samples, const LevelLabel& anchor,
                             const TraceConstraints& constraints = {});

/// Husimi IPR of every traced mode on the default grid for its Gamma.
void attach_husimi_ipr(TracedLine& line, const std::vector<GammaSample>& samples,
                       Index points = 201);

/// I_psi divided by the line's peak value.
std::vector<double> normalized_ipr(const TracedLine& line);

/// Builds the sample at one Gamma: Floquet spectrum, scaling and the static
/// effective levels. omega_d empty means resonant drive.
GammaSample make_sample(const ModelParams& device, double gamma, Index dim, int n_steps,
                        const ScalingOptions& scaling = {},
                        std::optional<double> omega_d = std::nullopt);

}  // namespace kpo
