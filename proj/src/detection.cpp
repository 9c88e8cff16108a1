#include "lossyphase/detection.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "lossyphase/bounds.hpp"
#include "lossyphase/errors.hpp"
#include "lossyphase/optimize.hpp"

namespace lossyphase {
namespace {

constexpr double kVanishingProbability = 1e-12;
constexpr double kVanishingSlope = 1e-6;
constexpr double kThetaDTolerance = 1e-8;
constexpr int kThetaDScanPoints = 201;

ModeTransform readout(double total_phase, double theta_d) {
  return phase_shift(total_phase, kSensingMode, 2)
      .then(beam_splitter(theta_d, kSensingMode, kReferenceMode, 2));
}

// Adds the labels of a detected branch with `lost` photons at C.
void accumulate(LabelProbs& out, int lost, double weight, const FockState& detected) {
  for (const auto& [occ, amp] : detected.terms()) {
    const double p = weight * std::norm(amp);
    if (lost == 0) {
      const Label l = occ[0] == 2 ? Label::AA : (occ[1] == 2 ? Label::BB : Label::AB);
      out[index(l)] += p;
    } else {
      out[index(occ[0] == 1 ? Label::AC : Label::BC)] += p;
    }
  }
}

}  // namespace

bool no_loss_label(Label l) { return lost_photons(l) == 0; }
bool loss_label(Label l) { return lost_photons(l) > 0; }

std::string_view setting_name(Setting s) {
  return s == Setting::quarter ? "quarter" : "half";
}

std::optional<Setting> parse_setting(std::string_view s) {
  if (s == "quarter") return Setting::quarter;
  if (s == "half") return Setting::half;
  return std::nullopt;
}

DetectionConfig DetectionConfig::quarter(double theta_d, double conditional_phase) {
  if (!(theta_d >= 0.0 && theta_d <= 1.0)) {
    throw DomainError("DetectionConfig: theta_d must lie in [0, 1]");
  }
  if (!std::isfinite(conditional_phase)) {
    throw DomainError("DetectionConfig: conditional phase must be finite");
  }
  return {Setting::quarter, theta_d, conditional_phase};
}

DetectionConfig DetectionConfig::half() { return {Setting::half, 0.5, kHalfPhase}; }

bool scored_by(Setting s, Label l) {
  return s == Setting::quarter ? no_loss_label(l) : loss_label(l);
}

LabelProbs outcome_distribution(const FockState& probe, double eta, double phi,
                                const DetectionConfig& config,
                                double single_photon_visibility) {
  if (probe.mode_count() != 2 || !probe.has_fixed_photon_number(2)) {
    throw DomainError("outcome_distribution: probe must be a two-photon two-mode state");
  }
  const ModeTransform stage = readout(phi + config.conditional_phase(), config.theta_d());
  LabelProbs out{};
  for (const auto& branch : apply_loss(probe, kSensingMode, eta)) {
    if (!branch.state) continue;
    if (branch.lost_count == 2) {
      out[index(Label::CC)] += branch.probability;
      continue;
    }
    const double v = branch.lost_count == 1 ? single_photon_visibility : 1.0;
    if (v > 0.0) {
      accumulate(out, branch.lost_count, branch.probability * v,
                 apply_transform(*branch.state, stage));
    }
    if (v < 1.0) {
      // Each path component detected on its own: no single-photon fringe.
      for (const auto& [occ, amp] : branch.state->terms()) {
        const FockState path(2, 2, {{occ, 1.0}});
        accumulate(out, branch.lost_count, branch.probability * (1.0 - v) * std::norm(amp),
                   apply_transform(path, stage));
      }
    }
  }
  return out;
}

OutcomeModel::OutcomeModel(FockState probe, double eta, DetectionConfig config)
    : probe_(std::move(probe)), eta_(eta), config_(config) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("OutcomeModel: eta outside [0, 1]");
  if (probe_.normalization() != Normalization::normalized) {
    throw DomainError("OutcomeModel: probe must be normalized");
  }
}

OutcomeModel::OutcomeModel(const PrepConfig& prep, double eta, DetectionConfig config,
                           const ImperfectionParams& imperfections)
    : OutcomeModel(prepare(fibre_input(imperfections.epsilon, imperfections.delta),
                           prep.theta1, prep.theta2, prep.attenuated_arm)
                       .state.normalized(),
                   eta, config) {
  imperfections.validate();
  imperfections_ = imperfections;
  prep_ = prep;
}

LabelProbs OutcomeModel::operator()(double phi) const {
  LabelProbs p = outcome_distribution(probe_, eta_, phi, config_, imperfections_.v_classical);
  if (prep_ && imperfections_.lambda_hom < 1.0) {
    const LabelProbs d = distinguishable_distribution(
        *prep_, eta_, phi + config_.conditional_phase(), config_.theta_d());
    p = degrade_distribution(p, d, imperfections_.lambda_hom);
  }
  return p;
}

LabelProbs ModelPair::merged(double phi) const {
  const LabelProbs q = quarter(phi);
  const LabelProbs h = half(phi);
  LabelProbs out{};
  for (Label l : kAllLabels) out[index(l)] = no_loss_label(l) ? q[index(l)] : h[index(l)];
  return out;
}

DetectionConfig optimize_theta_d(const FockState& probe, double eta) {
  if (std::norm(probe.amplitude({1, 1})) < kVanishingProbability) {
    return DetectionConfig::quarter(0.5);
  }
  auto no_loss_fisher = [&](double theta_d) {
    const OutcomeModel m(probe, eta, DetectionConfig::quarter(theta_d));
    return classical_fisher(m, 0.0, no_loss_label).value;
  };
  const ScalarOptimum best =
      scan_then_golden_maximize(no_loss_fisher, 0.0, 1.0, kThetaDScanPoints, kThetaDTolerance);
  return DetectionConfig::quarter(best.x);
}

DetectionConfig optimize_quarter_trimmed(const FockState& probe, double eta) {
  const DetectionConfig start = optimize_theta_d(probe, eta);
  if (std::norm(probe.amplitude({1, 1})) < kVanishingProbability) return start;
  auto objective = [&](const std::vector<double>& x) {
    if (!(x[1] > 0.0 && x[1] < 1.0)) return std::numeric_limits<double>::infinity();
    const OutcomeModel m(probe, eta, DetectionConfig::quarter(x[1], x[0]));
    return -classical_fisher(m, 0.0, no_loss_label).value;
  };
  NelderMeadOptions opts;
  opts.value_tolerance = 1e-14;
  opts.size_tolerance = 1e-9;
  const VectorOptimum best = nelder_mead_minimize(
      objective, {start.conditional_phase(), start.theta_d()}, opts, {0.02, 0.02});
  return DetectionConfig::quarter(best.x[1], best.x[0]);
}

namespace {

DetectionConfig tune_quarter(const FockState& probe, double eta, QuarterTuning tuning) {
  return tuning == QuarterTuning::fixed_phase ? optimize_theta_d(probe, eta)
                                              : optimize_quarter_trimmed(probe, eta);
}

}  // namespace

ModelPair make_model_pair(const FockState& probe, double eta, QuarterTuning tuning) {
  return {OutcomeModel(probe, eta, tune_quarter(probe, eta, tuning)),
          OutcomeModel(probe, eta, DetectionConfig::half())};
}

ModelPair make_model_pair(const PrepConfig& prep, double eta,
                          const ImperfectionParams& imperfections, QuarterTuning tuning) {
  const DetectionConfig quarter = tune_quarter(prepared_probe(prep), eta, tuning);
  return {OutcomeModel(prep, eta, quarter, imperfections),
          OutcomeModel(prep, eta, DetectionConfig::half(), imperfections)};
}

FisherInformation classical_fisher(const OutcomeModel& model, double phi,
                                   bool (*include)(Label)) {
  const LabelProbs p = model(phi);
  const LabelProbs up = model(phi + kDerivativeStep);
  const LabelProbs down = model(phi - kDerivativeStep);
  FisherInformation f;
  for (Label l : kAllLabels) {
    if (include && !include(l)) continue;
    const std::size_t k = index(l);
    const double slope = (up[k] - down[k]) / (2.0 * kDerivativeStep);
    if (p[k] < kVanishingProbability) {
      if (std::abs(slope) > kVanishingSlope) f.singular = true;
      continue;
    }
    f.value += slope * slope / p[k];
  }
  return f;
}

FisherInformation combined_fisher(const ModelPair& models, double phi) {
  const FisherInformation q = classical_fisher(models.quarter, phi, no_loss_label);
  const FisherInformation h = classical_fisher(models.half, phi, loss_label);
  return {q.value + h.value, q.singular || h.singular};
}

std::vector<FringeRow> fringe_scan(const ModelPair& models, std::span<const double> phi_grid) {
  if (phi_grid.empty()) throw DomainError("fringe_scan: empty phase grid");
  std::vector<FringeRow> rows;
  rows.reserve(phi_grid.size());
  for (double phi : phi_grid) {
    FringeRow r;
    r.phi = phi;
    r.quarter = models.quarter(phi);
    r.half = models.half(phi);
    for (Label l : kAllLabels) {
      r.merged[index(l)] = no_loss_label(l) ? r.quarter[index(l)] : r.half[index(l)];
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace lossyphase
