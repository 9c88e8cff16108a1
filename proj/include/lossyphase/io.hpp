#pragma once

// Text formats: key=value run configuration, CSV tables and JSON manifests.
// Numbers are printed with 12 significant digits; lines end in LF.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lossyphase/bounds.hpp"
#include "lossyphase/detection.hpp"
#include "lossyphase/estimator.hpp"
#include "lossyphase/montecarlo.hpp"

#include "json.hpp"

namespace lossyphase {

std::string format_number(double x);

/// Parses key=value lines with '#' comments over `base`; keys not given keep
/// its values. Syntax errors throw InputError prefixed with "source:line:";
/// range errors surface later from ExperimentConfig::validate.
ExperimentConfig parse_config(std::istream& in, std::string_view source = "<config>",
                              ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Inverse of parse_config for every key it understands.
std::string config_to_text(const ExperimentConfig& config);

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Environment variable consulted for the seed when neither the command line
/// nor the config file sets one.
inline constexpr const char* kSeedEnvVar = "LOSSYPHASE_SEED";
std::optional<std::uint64_t> seed_from_env();

inline const std::vector<std::string> kBoundsColumns = {
    "eta", "dphi_optimal", "dphi_noon", "dphi_sil", "x0", "x1", "x2", "prep_success_p"};
inline const std::vector<std::string> kFringeColumns = {"phi", "setting", "AA", "AB",
                                                        "BB",  "AC",      "BC", "CC"};
inline const std::vector<std::string> kDatasetColumns = {
    "eta",  "probe", "phi_true", "setting", "series_id", "n_AA",
    "n_AB", "n_BB",  "n_AC",     "n_BC",    "n_CC",      "seed_used"};
inline const std::vector<std::string> kEstimateColumns = {
    "eta", "probe", "phi_true", "series_id", "phi_hat", "loglik", "n_coinc"};
inline const std::vector<std::string> kReportColumns = {
    "eta", "probe", "phi_true", "mean", "sigma", "m_bar", "sigma_scaled", "crb"};
inline const std::vector<std::string> kHistogramColumns = {"eta",     "probe", "phi_true",
                                                           "bin_low", "bin_high", "count"};

struct BoundsRow {
  PrecisionPoint point;
  double prep_success_p = 0.0;
};

void write_bounds_csv(std::ostream& out, std::span<const BoundsRow> rows);
/// `scale` multiplies the probabilities (1 for plain probabilities).
void write_fringes_csv(std::ostream& out, std::span<const FringeRow> rows, double scale = 1.0);
void write_fringe_counts_csv(std::ostream& out, std::span<const double> phis,
                             std::span<const LabelCounts> quarter,
                             std::span<const LabelCounts> half);
void write_dataset_csv(std::ostream& out, const EventDataset& dataset);
/// Degenerate series leave phi_hat and loglik empty.
void write_estimates_csv(std::ostream& out, std::span<const SeriesEstimate> estimates);
void write_report_csv(std::ostream& out, std::span<const ReportRow> rows);

/// Throws InputError naming the offending column or line.
EventDataset read_dataset_csv(std::istream& in, std::string_view source = "<dataset>");

}  // namespace lossyphase
