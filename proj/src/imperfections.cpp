#include "lossyphase/imperfections.hpp"

#include <cmath>

#include "lossyphase/errors.hpp"

namespace lossyphase {
namespace {

constexpr double kDistributionTolerance = 1e-9;

// Two copies of (sensing, reference): photon from the sensing input lives in
// modes 0/1, photon from the reference input in modes 2/3.
constexpr int kCopyModes = 4;

ModeTransform on_both_copies(const ModeTransform& two_mode) {
  std::vector<Amplitude> m(kCopyModes * kCopyModes);
  for (int copy = 0; copy < 2; ++copy) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        m[static_cast<std::size_t>((2 * copy + i) * kCopyModes + 2 * copy + j)] = two_mode(i, j);
      }
    }
  }
  return ModeTransform(kCopyModes, std::move(m));
}

struct WeightedState {
  double weight;
  FockState state;
};

}  // namespace

void ImperfectionParams::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in [0, 1]");
  if (!std::isfinite(delta)) throw DomainError("delta must be finite");
  if (!(lambda_hom >= 0.0 && lambda_hom <= 1.0)) throw DomainError("lambda_hom must lie in [0, 1]");
  if (!(v_classical >= 0.0 && v_classical <= 1.0)) throw DomainError("v_classical must lie in [0, 1]");
}

FockState fibre_input(double epsilon, double delta) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("fibre_input: epsilon must lie in [0, 1]");
  const Amplitude side = std::polar(std::sqrt(epsilon / 2.0), delta);
  return FockState(2, 2, {{{1, 1}, std::sqrt(1.0 - epsilon)}, {{2, 0}, side}, {{0, 2}, side}});
}

LabelProbs degrade_distribution(const LabelProbs& ideal,
                                const LabelProbs& distinguishable, double lambda_hom) {
  if (!(lambda_hom >= 0.0 && lambda_hom <= 1.0)) {
    throw DomainError("degrade_distribution: lambda must lie in [0, 1]");
  }
  if (std::abs(total(ideal) - 1.0) > kDistributionTolerance ||
      std::abs(total(distinguishable) - 1.0) > kDistributionTolerance) {
    throw DomainError("degrade_distribution: inputs must be normalized");
  }
  if (lambda_hom == 1.0) return ideal;
  LabelProbs out{};
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    out[k] = lambda_hom * ideal[k] + (1.0 - lambda_hom) * distinguishable[k];
  }
  return out;
}

LabelProbs distinguishable_distribution(const PrepConfig& prep, double eta,
                                        double total_phase, double theta_d) {
  const FockState input(kCopyModes, 2, {{{1, 0, 0, 1}, 1.0}});
  FockState state = apply_transform(
      input, on_both_copies(beam_splitter(prep.theta1, kSensingMode, kReferenceMode, 2)));

  // Postselect on both photons passing the attenuator.
  const int arm = prep.attenuated_arm == Arm::reference ? kReferenceMode : kSensingMode;
  for (int copy = 0; copy < 2; ++copy) {
    const auto branches = apply_loss(state, 2 * copy + arm, prep.theta2);
    if (!branches.front().state) {
      throw DomainError("distinguishable_distribution: postselection probability is zero");
    }
    state = *branches.front().state;
  }

  std::vector<std::pair<int, WeightedState>> by_lost;
  for (const auto& b1 : apply_loss(state, 0, eta)) {
    if (!b1.state) continue;
    for (const auto& b2 : apply_loss(*b1.state, 2, eta)) {
      if (!b2.state) continue;
      by_lost.push_back({b1.lost_count + b2.lost_count,
                         {b1.probability * b2.probability, *b2.state}});
    }
  }

  const ModeTransform readout =
      on_both_copies(phase_shift(total_phase, kSensingMode, 2))
          .then(on_both_copies(beam_splitter(theta_d, kSensingMode, kReferenceMode, 2)));
  LabelProbs out{};
  for (const auto& [lost, ws] : by_lost) {
    if (lost == 2) {
      out[index(Label::CC)] += ws.weight;
      continue;
    }
    const FockState detected = apply_transform(ws.state, readout);
    for (const auto& [occ, amp] : detected.terms()) {
      const double p = ws.weight * std::norm(amp);
      const int at_a = occ[0] + occ[2];
      if (lost == 0) {
        const Label l = at_a == 2 ? Label::AA : (at_a == 0 ? Label::BB : Label::AB);
        out[index(l)] += p;
      } else {
        out[index(at_a == 1 ? Label::AC : Label::BC)] += p;
      }
    }
  }
  return out;
}

LabelCounts apply_coupler_thinning(const LabelCounts& counts, std::mt19937_64& rng) {
  LabelCounts out{};
  for (Label l : kAllLabels) {
    const auto n = counts[index(l)];
    if (n < 0) throw DomainError("apply_coupler_thinning: negative count");
    // AA, BB, CC: half lost in the couplers. AB, AC, BC: half removed to match.
    std::binomial_distribution<std::int64_t> keep(n, ImperfectionParams::kCouplerFactor);
    out[index(l)] = n == 0 ? 0 : keep(rng);
  }
  return out;
}

}  // namespace lossyphase
