#pragma once

// Seeded simulation of coincidence-count series for the measurement campaign.
// Every record draws from its own substream derived from the master seed and
// the record's coordinates, so records can be regenerated in isolation and
// in any order.

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "lossyphase/detection.hpp"
#include "lossyphase/imperfections.hpp"
#include "lossyphase/labels.hpp"
#include "lossyphase/prep_network.hpp"

namespace lossyphase {

enum class ProbeKind { optimal, noon };

std::string_view probe_name(ProbeKind k);
std::optional<ProbeKind> parse_probe(std::string_view s);

/// How the mean event number is shared between the two settings.
enum class EventsScope { joint, per_setting };

inline constexpr std::uint64_t kDefaultSeed = 20090615;

/// 15 phases from -0.14 to 0.14 rad in steps of 0.02.
std::vector<double> default_phase_list();

struct ExperimentConfig {
  std::vector<double> eta_list = {0.2, 0.361, 0.4, 0.547};
  std::vector<ProbeKind> probe_kinds = {ProbeKind::optimal, ProbeKind::noon};
  std::vector<double> phase_list = default_phase_list();
  int series_count = 300;
  /// Mean number of two-fold events drawn per series.
  int events_per_series = 2000;
  std::uint64_t master_seed = kDefaultSeed;
  ImperfectionParams imperfections;
  bool poissonize_m = true;
  /// joint: one draw of M split between settings; per_setting: each setting
  /// draws its own M.
  EventsScope events_scope = EventsScope::joint;
  /// Share of a joint draw given to the QUARTER setting.
  double quarter_fraction = 0.5;
  QuarterTuning quarter_tuning = QuarterTuning::fixed_phase;
  /// Estimation options carried with the campaign.
  bool include_cc = true;
  bool joint_normalization = false;

  /// Throws DomainError when a field is out of range.
  void validate() const;
};

struct EventRecord {
  double eta = 0.0;
  ProbeKind probe = ProbeKind::optimal;
  double phi_true = 0.0;
  Setting setting = Setting::quarter;
  int series_id = 0;
  /// Postselected, and thinned when coupler thinning is enabled.
  LabelCounts counts{};
  /// Events drawn for this setting before postselection.
  std::int64_t drawn = 0;
  std::uint64_t seed_used = 0;
};

struct EventDataset {
  /// Ordered by probe, eta, phase, series, setting (QUARTER before HALF).
  std::vector<EventRecord> records;
};

/// Counter-based substream seed: a pure function of the coordinates.
/// `stream` 0/1 are the QUARTER/HALF sampling streams, 2 the event-number
/// stream.
std::uint64_t substream_seed(std::uint64_t master_seed, int probe_index, int eta_index,
                             int phi_index, int series_id, int stream);

/// Multinomial draw of `m` events over the labels by sequential binomials.
LabelCounts sample_counts(const LabelProbs& distribution, std::int64_t m,
                          std::mt19937_64& rng);

/// N00N: theta1 = 1/2, theta2 = 1. Optimal: solve_prep(optimize_weights(eta)).
PrepConfig probe_prep(ProbeKind kind, double eta);

/// QFI of the ideal probe of this kind after loss.
double reference_qfi(ProbeKind kind, double eta);

ModelPair campaign_models(ProbeKind kind, double eta, const ExperimentConfig& config);

/// Regenerates one record from its coordinates.
EventRecord simulate_record(const ExperimentConfig& config, const ModelPair& models,
                            int probe_index, int eta_index, int phi_index, int series_id,
                            Setting setting);

/// Full campaign. `threads` = 0 picks the hardware concurrency; output does
/// not depend on it.
EventDataset run_campaign(const ExperimentConfig& config, unsigned threads = 0);

}  // namespace lossyphase
