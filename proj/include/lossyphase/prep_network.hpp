#pragma once

// Two-beam-splitter preparation network: a photon pair |11> meets a splitter
// of transmission theta1; a second splitter of transmission theta2 in one arm
// reweights |20> against |02>, postselected on both photons being transmitted.

#include "lossyphase/bounds.hpp"
#include "lossyphase/fock.hpp"

namespace lossyphase {

/// Arm carrying the theta2 attenuator.
enum class Arm { sensing, reference };

struct PrepConfig {
  double theta1 = 0.5;
  double theta2 = 1.0;
  Arm attenuated_arm = Arm::reference;
  /// Probability that both photons pass the attenuator.
  double success_prob = 1.0;
};

struct PreparedState {
  /// sqrt(p) |psi>, tagged unnormalized.
  FockState state;
  double success_prob = 0.0;
};

/// |11> input.
FockState photon_pair();

/// Runs `input` (a normalized two-mode state) through the network. With the
/// default photon-pair input and the reference arm attenuated this yields
///   sqrt(2 t1 (1-t1)) |20> + sqrt(t2) (2 t1 - 1) |11> - t2 sqrt(2 t1 (1-t1)) |02>.
/// Throws DomainError when the postselection probability vanishes.
PreparedState prepare(double theta1, double theta2, Arm attenuated_arm = Arm::reference);
PreparedState prepare(const FockState& input, double theta1, double theta2,
                      Arm attenuated_arm = Arm::reference);

/// Normalized probe produced by a configuration (photon-pair input).
FockState prepared_probe(const PrepConfig& config);

/// Splitter settings producing `target` (up to normalization). Requires
/// x2 > 0; the arm with the larger of x0, x2 stays unattenuated and theta1 is
/// taken on the >= 1/2 branch.
PrepConfig solve_prep(const ProbeWeights& target);

}  // namespace lossyphase
