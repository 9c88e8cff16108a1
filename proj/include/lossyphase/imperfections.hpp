#pragma once

// Parametric stand-in for experimental non-idealities: admixture picked up in
// the delivery fibre, partial photon distinguishability, reduced
// single-photon fringe contrast, and the multimode-coupler detection loss
// with its numerical compensation.

#include <random>

#include "lossyphase/fock.hpp"
#include "lossyphase/labels.hpp"
#include "lossyphase/prep_network.hpp"

namespace lossyphase {

struct ImperfectionParams {
  /// Weight of the (|20> + |02>) admixture in the fibre output.
  double epsilon = 0.0;
  /// Phase of that admixture, radians.
  double delta = 0.0;
  /// Two-photon indistinguishability; 1 is ideal.
  double lambda_hom = 1.0;
  /// Contrast of the single-photon (one photon lost) fringes; 1 is ideal.
  double v_classical = 1.0;
  /// Apply coupler losses and the compensating random removal to counts.
  bool coupler_thinning = false;

  static constexpr double kCouplerFactor = 0.5;

  /// Throws DomainError on out-of-range values.
  void validate() const;
  bool ideal() const {
    return epsilon == 0.0 && lambda_hom == 1.0 && v_classical == 1.0 && !coupler_thinning;
  }
};

/// sqrt(1 - eps)|11> + exp(i delta) sqrt(eps / 2) (|20> + |02>).
FockState fibre_input(double epsilon, double delta);

/// lambda * ideal + (1 - lambda) * distinguishable. Both inputs must sum to
/// one within 1e-9.
LabelProbs degrade_distribution(const LabelProbs& ideal,
                                const LabelProbs& distinguishable, double lambda_hom);

/// Label probabilities when the two photons of the pair are fully
/// distinguishable: each photon still interferes with itself, but there is
/// no two-photon interference. `total_phase` is the sensing-arm phase
/// including the conditional shift. The photons carry separate copies of the
/// two spatial modes, so the same Fock machinery applies.
LabelProbs distinguishable_distribution(const PrepConfig& prep, double eta,
                                        double total_phase, double theta_d);

/// Coupler loss on AA/BB/CC followed by compensating removal of AB/AC/BC:
/// every event survives with probability 1/2, drawn from `rng`.
LabelCounts apply_coupler_thinning(const LabelCounts& counts, std::mt19937_64& rng);

}  // namespace lossyphase
