#pragma once

// Measurement stage: loss routed to counter C, the unknown phase plus a
// conditional phase on the sensing arm, a final splitter of transmission
// theta_D feeding counters A and B. The adaptive measurement is emulated by
// two fixed settings: QUARTER (pi/4) scored on the no-loss labels and HALF
// (pi/2, balanced splitter) scored on the one- and two-loss labels.

#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "lossyphase/fock.hpp"
#include "lossyphase/imperfections.hpp"
#include "lossyphase/labels.hpp"
#include "lossyphase/prep_network.hpp"

namespace lossyphase {

enum class Setting { quarter, half };

std::string_view setting_name(Setting s);
std::optional<Setting> parse_setting(std::string_view s);

inline constexpr double kQuarterPhase = std::numbers::pi / 4.0;
inline constexpr double kHalfPhase = std::numbers::pi / 2.0;

class DetectionConfig {
 public:
  /// `conditional_phase` other than pi/4 is only produced by
  /// optimize_quarter_trimmed.
  static DetectionConfig quarter(double theta_d, double conditional_phase = kQuarterPhase);
  static DetectionConfig half();

  Setting setting() const { return setting_; }
  double theta_d() const { return theta_d_; }
  double conditional_phase() const { return phase_; }

 private:
  DetectionConfig(Setting s, double theta_d, double phase)
      : setting_(s), theta_d_(theta_d), phase_(phase) {}
  Setting setting_;
  double theta_d_;
  double phase_;
};

/// Labels kept by a setting's postselection.
bool scored_by(Setting s, Label l);
bool no_loss_label(Label l);
bool loss_label(Label l);

/// Probabilities of the six labels for a two-photon probe on (sensing,
/// reference). `single_photon_visibility` < 1 mixes the one-loss labels with
/// their dephased (path-incoherent) values.
LabelProbs outcome_distribution(const FockState& probe, double eta, double phi,
                                const DetectionConfig& config,
                                double single_photon_visibility = 1.0);

/// Map from the unknown phase to label probabilities for one setting.
class OutcomeModel {
 public:
  /// Ideal model for an arbitrary normalized two-photon probe.
  OutcomeModel(FockState probe, double eta, DetectionConfig config);
  /// Probe produced by the preparation network from the fibre output, with
  /// the remaining imperfections applied at evaluation.
  OutcomeModel(const PrepConfig& prep, double eta, DetectionConfig config,
               const ImperfectionParams& imperfections);

  LabelProbs operator()(double phi) const;

  const FockState& probe() const { return probe_; }
  double eta() const { return eta_; }
  const DetectionConfig& config() const { return config_; }

 private:
  FockState probe_;
  double eta_;
  DetectionConfig config_;
  ImperfectionParams imperfections_;
  std::optional<PrepConfig> prep_;
};

/// The QUARTER and HALF models of one probe.
struct ModelPair {
  OutcomeModel quarter;
  OutcomeModel half;

  const OutcomeModel& operator[](Setting s) const {
    return s == Setting::quarter ? quarter : half;
  }
  /// No-loss labels from QUARTER, one- and two-loss labels from HALF.
  LabelProbs merged(double phi) const;
};

/// theta_D maximizing the no-loss Fisher information at phi = 0 with the
/// conditional phase held at pi/4; 1/2 when the probe has no |11> component.
DetectionConfig optimize_theta_d(const FockState& probe, double eta);

/// Joint optimization of theta_D and the QUARTER conditional phase, started
/// from optimize_theta_d. With the phase pinned at pi/4 the no-loss
/// information of probes containing |11> falls short of p0 F(psi0) by about
/// 1e-3 relative; trimming the phase by a few degrees closes the gap.
DetectionConfig optimize_quarter_trimmed(const FockState& probe, double eta);

enum class QuarterTuning { fixed_phase, trimmed_phase };

ModelPair make_model_pair(const FockState& probe, double eta,
                          QuarterTuning tuning = QuarterTuning::fixed_phase);
/// The QUARTER setting is tuned for the ideal prepared probe.
ModelPair make_model_pair(const PrepConfig& prep, double eta,
                          const ImperfectionParams& imperfections,
                          QuarterTuning tuning = QuarterTuning::fixed_phase);

struct FisherInformation {
  double value = 0.0;
  /// Some label had vanishing probability with non-vanishing slope.
  bool singular = false;
};

inline constexpr double kDerivativeStep = 1e-5;

/// sum_k (dp_k/dphi)^2 / p_k by central differences, restricted to the
/// labels for which `include(label)` holds (all labels by default).
FisherInformation classical_fisher(const OutcomeModel& model, double phi,
                                   bool (*include)(Label) = nullptr);

/// Fisher information of the emulated adaptive measurement: no-loss labels
/// of QUARTER plus the remaining labels of HALF.
FisherInformation combined_fisher(const ModelPair& models, double phi);

struct FringeRow {
  double phi = 0.0;
  LabelProbs quarter{};
  LabelProbs half{};
  /// Postselected combination as reported in the coincidence fringes.
  LabelProbs merged{};
};

std::vector<FringeRow> fringe_scan(const ModelPair& models, std::span<const double> phi_grid);

}  // namespace lossyphase
