#pragma once

// Maximum-likelihood phase estimation from the counts of one series, and the
// statistics built on top of many series.

#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "lossyphase/detection.hpp"
#include "lossyphase/labels.hpp"
#include "lossyphase/montecarlo.hpp"

namespace lossyphase {

struct LikelihoodOptions {
  /// Score CC counts of the HALF setting.
  bool include_cc = true;
  /// Score each label against the merged distribution instead of
  /// renormalizing within each setting's postselected labels.
  bool joint_normalization = false;
};

/// Counts of one series: one record per setting.
struct SeriesCounts {
  LabelCounts quarter{};
  LabelCounts half{};
};

/// sum_k n_k ln p_k(phi). Returns -infinity when a label with counts has zero
/// probability.
double log_likelihood(const SeriesCounts& counts, const LabelProbs& quarter,
                      const LabelProbs& half, const LikelihoodOptions& options = {});
double log_likelihood(const SeriesCounts& counts, double phi, const ModelPair& models,
                      const LikelihoodOptions& options = {});

/// Coincidences entering the likelihood.
std::int64_t scored_coincidences(const SeriesCounts& counts, const LikelihoodOptions& options);

inline constexpr double kGridStep = 1e-3;
inline constexpr double kSearchLow = -std::numbers::pi / 2.0;
inline constexpr double kSearchHigh = std::numbers::pi / 2.0;

/// Model probabilities tabulated on the search grid, shared by all series of
/// one (probe, eta).
class LikelihoodTable {
 public:
  LikelihoodTable(const ModelPair& models, LikelihoodOptions options = {},
                  double low = kSearchLow, double high = kSearchHigh, double step = kGridStep);

  std::size_t size() const { return phases_.size(); }
  double phase(std::size_t i) const { return phases_[i]; }
  double low() const { return low_; }
  double high() const { return high_; }
  double log_likelihood_at(std::size_t i, const SeriesCounts& counts) const;
  /// Exact evaluation off the grid.
  double log_likelihood(const SeriesCounts& counts, double phi) const;
  const LikelihoodOptions& options() const { return options_; }

 private:
  const ModelPair* models_;
  LikelihoodOptions options_;
  double low_;
  double high_;
  std::vector<double> phases_;
  std::vector<LabelProbs> quarter_;
  std::vector<LabelProbs> half_;
};

struct Estimate {
  double phi_hat = 0.0;
  double log_likelihood_max = 0.0;
  std::int64_t n_coincidences = 0;
};

/// Grid search with parabolic refinement. Nullopt when the likelihood is flat
/// over the interval.
std::optional<Estimate> ml_estimate(const SeriesCounts& counts, const LikelihoodTable& table);

struct SeriesKey {
  double eta = 0.0;
  ProbeKind probe = ProbeKind::optimal;
  double phi_true = 0.0;
  int series_id = 0;
};

struct SeriesEstimate {
  SeriesKey key;
  /// Nullopt for a degenerate series.
  std::optional<Estimate> estimate;
};

/// Pairs QUARTER and HALF records of each series, in dataset order.
std::vector<std::pair<SeriesKey, SeriesCounts>> group_series(const EventDataset& dataset);

/// Estimates every series of the dataset with models built from `config`
/// (the eta values and probes are taken from the dataset).
std::vector<SeriesEstimate> estimate_dataset(const EventDataset& dataset,
                                             const ExperimentConfig& config,
                                             unsigned threads = 0);

struct ReportRow {
  double eta = 0.0;
  ProbeKind probe = ProbeKind::optimal;
  double phi_true = 0.0;
  double mean = 0.0;
  double sigma = 0.0;
  double m_bar = 0.0;
  double sigma_scaled = 0.0;
  double crb = 0.0;
  std::size_t estimates = 0;
};

/// One row per (probe, eta, phi_true) in order of first appearance. Degenerate
/// series are skipped; a group with fewer than two estimates throws
/// DomainError.
std::vector<ReportRow> analyze(std::span<const SeriesEstimate> estimates);

struct Histogram {
  double low = 0.0;
  double bin_width = 0.0;
  std::vector<std::int64_t> counts;
  std::int64_t underflow = 0;
  std::int64_t overflow = 0;

  double bin_low(std::size_t i) const { return low + bin_width * static_cast<double>(i); }
};

/// Fixed-width left-closed bins covering [low, high).
Histogram histogram(std::span<const double> values, double bin_width, double low, double high);

struct NormalFit {
  double mean = 0.0;
  double sigma = 0.0;
};

/// Maximum-likelihood normal fit.
NormalFit fit_normal(std::span<const double> values);

/// sum_i min(p_i, q_i) over bins of two histograms sharing a binning, each
/// normalized to its total count (including under/overflow).
double overlap_coefficient(const Histogram& a, const Histogram& b);

}  // namespace lossyphase
