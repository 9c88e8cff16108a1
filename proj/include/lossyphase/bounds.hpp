#pragma once

// Quantum Fisher information of two-photon probes, loss-optimal probe
// weights, and the optimal / N00N / standard-interferometric-limit precision
// curves.

#include <span>
#include <vector>

#include "lossyphase/fock.hpp"

namespace lossyphase {

/// Interferometer arm carrying the phase and the loss.
inline constexpr int kSensingMode = 0;
/// Auxiliary arm.
inline constexpr int kReferenceMode = 1;

/// Default transmissions of the measurement campaign.
inline constexpr double kExperimentalEtas[] = {0.2, 0.361, 0.4, 0.547};

/// Weights (x0, x1, x2) of sqrt(x2)|20> + sqrt(x1)|11> - sqrt(x0)|02>.
class ProbeWeights {
 public:
  /// Throws DomainError unless all weights are >= 0 and sum to 1 within 1e-12.
  ProbeWeights(double x0, double x1, double x2);

  static ProbeWeights noon() { return {0.5, 0.0, 0.5}; }

  double x0() const { return x0_; }
  double x1() const { return x1_; }
  double x2() const { return x2_; }

 private:
  double x0_;
  double x1_;
  double x2_;
};

/// The two-mode probe state for the given weights (modes: sensing, reference).
FockState probe_state(const ProbeWeights& w);

/// Weights read back from a two-photon two-mode state (renormalized).
ProbeWeights weights_of(const FockState& state);

/// 4 Var(n) of the photon number in `sensing_mode`.
double qfi_pure(const FockState& state, int sensing_mode = kSensingMode);

/// QFI of the probe after loss `eta` in the sensing arm, summed over the
/// photon-number-distinguishable loss branches: sum_l p_l F(|psi_l>).
double qfi_lossy(const ProbeWeights& w, double eta);

/// Same quantity from the closed-form branch amplitudes; used for the dense
/// simplex scan where the Fock route would dominate run time.
double qfi_lossy_closed_form(double x0, double x1, double x2, double eta);

struct OptimalProbe {
  ProbeWeights weights;
  double qfi = 0.0;
};

/// Simplex maximizer of qfi_lossy: scan at step 1e-3, then Nelder-Mead
/// polish. eta must lie in (0, 1].
OptimalProbe optimize_weights(double eta);

/// 8 eta^2 / (1 + eta^2), the N00N-state QFI under loss.
double noon_qfi(double eta);
/// 1 / sqrt(noon_qfi(eta)).
double noon_precision(double eta);

/// Standard interferometric limit for N photons through a lossy arm:
/// (1 + sqrt(eta)) / (2 sqrt(eta N)).
double sil_precision(double eta, double n_photons);

/// Numeric counterpart of sil_precision: maximizes the coherent-light Fisher
/// information 4N / (1/(eta tau) + 1/(1 - tau)) over the splitting ratio tau
/// by golden-section search.
double sil_precision_numeric(double eta, double n_photons, double tolerance = 1e-10);

struct PrecisionPoint {
  double eta = 0.0;
  double dphi_optimal = 0.0;
  double dphi_noon = 0.0;
  double dphi_sil = 0.0;
  ProbeWeights weights = ProbeWeights::noon();
  /// dphi_optimal < min(dphi_noon, dphi_sil)
  bool non_classical = false;
};

/// Precision per photon pair for each eta (N = 2 for the SIL).
std::vector<PrecisionPoint> precision_curve(std::span<const double> eta_grid);

/// 0.01, 0.02, ..., 1 merged with the campaign transmissions.
std::vector<double> default_eta_grid();

}  // namespace lossyphase
