#include "lossyphase/prep_network.hpp"

#include <cmath>

#include "lossyphase/errors.hpp"

namespace lossyphase {
namespace {

void require_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace

FockState photon_pair() {
  return FockState(2, 2, {{{1, 1}, 1.0}});
}

PreparedState prepare(double theta1, double theta2, Arm attenuated_arm) {
  return prepare(photon_pair(), theta1, theta2, attenuated_arm);
}

PreparedState prepare(const FockState& input, double theta1, double theta2,
                      Arm attenuated_arm) {
  require_unit(theta1, "prepare: theta1");
  require_unit(theta2, "prepare: theta2");
  if (input.mode_count() != 2) throw DomainError("prepare: input must have two modes");
  const FockState split =
      apply_transform(input, beam_splitter(theta1, kSensingMode, kReferenceMode, 2));
  const int arm = attenuated_arm == Arm::reference ? kReferenceMode : kSensingMode;
  const auto branches = apply_loss(split, arm, theta2);
  const ConditionalBranch& kept = branches.front();
  if (!kept.state || !(kept.probability > 0.0)) {
    throw DomainError("prepare: postselection probability is zero");
  }
  return {kept.state->scaled(std::sqrt(kept.probability)), kept.probability};
}

FockState prepared_probe(const PrepConfig& config) {
  return prepare(config.theta1, config.theta2, config.attenuated_arm).state.normalized();
}

PrepConfig solve_prep(const ProbeWeights& target) {
  const double x0 = target.x0();
  const double x1 = target.x1();
  const double x2 = target.x2();
  if (!(x2 > 0.0)) {
    throw DomainError("solve_prep: targets with x2 = 0 are not reachable by this network");
  }
  PrepConfig c;
  c.attenuated_arm = x0 <= x2 ? Arm::reference : Arm::sensing;
  const double hi = std::max(x0, x2);
  const double lo = std::min(x0, x2);
  c.theta2 = std::sqrt(lo / hi);
  if (x1 > 0.0) {
    if (!(c.theta2 > 0.0)) {
      throw DomainError("solve_prep: |11> weight requires both |20> and |02> to be present");
    }
    // theta2 (2t - 1)^2 / (2 t (1 - t)) = x1 / hi with u = 2t - 1 gives
    // u^2 = r / (2 + r), r = x1 / (hi theta2).
    const double r = x1 / (hi * c.theta2);
    const double u = std::sqrt(r / (2.0 + r));
    c.theta1 = 0.5 * (1.0 + u);
    if (!(c.theta1 >= 0.5 && c.theta1 <= 1.0)) {
      throw DomainError("solve_prep: no splitter setting reaches the target");
    }
  } else {
    c.theta1 = 0.5;
  }
  const double t = c.theta1;
  const double cross = 2.0 * t * (1.0 - t);
  c.success_prob = cross + c.theta2 * (2.0 * t - 1.0) * (2.0 * t - 1.0) +
                   c.theta2 * c.theta2 * cross;
  return c;
}

}  // namespace lossyphase
