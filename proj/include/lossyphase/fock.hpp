#pragma once

// Few-photon Fock-space simulation on a handful of optical modes.
//
// A state is stored sparsely as a map from occupation vectors to complex
// amplitudes. Linear-optical elements are represented by their action on
// creation operators (a ModeTransform); loss is a beam splitter to a
// transient environment mode followed by projection on the environment
// photon number.

#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <vector>

namespace lossyphase {

using Amplitude = std::complex<double>;
using Occupation = std::vector<int>;
using TermMap = std::map<Occupation, Amplitude>;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kCompositionTolerance = 1e-10;

enum class Normalization { normalized, unnormalized };

class FockState {
 public:
  /// Validates the occupation vectors against mode_count and photon_cutoff
  /// and the squared norm against the normalization flag. Exactly-zero
  /// amplitudes are dropped.
  FockState(int mode_count, int photon_cutoff, TermMap terms,
            Normalization normalization = Normalization::normalized);

  int mode_count() const { return mode_count_; }
  int photon_cutoff() const { return photon_cutoff_; }
  Normalization normalization() const { return normalization_; }
  const TermMap& terms() const { return terms_; }

  /// Zero when the pattern is absent.
  Amplitude amplitude(const Occupation& pattern) const;
  double squared_norm() const;
  /// Largest total photon number over the stored terms.
  int max_photon_number() const;
  bool has_fixed_photon_number(int n) const;

  /// Rescales to unit norm.
  FockState normalized() const;
  /// Multiplies every amplitude by `factor` and tags the result unnormalized.
  /// Used to carry postselected branches of the form sqrt(p) |psi>.
  FockState scaled(double factor) const;

 private:
  int mode_count_;
  int photon_cutoff_;
  TermMap terms_;
  Normalization normalization_;
};

/// Action of a passive linear network on creation operators:
/// a_k^dagger -> sum_j matrix(j, k) a_j^dagger. Column k is the image of mode k.
class ModeTransform {
 public:
  /// Throws DomainError unless the matrix is unitary within kNormTolerance.
  ModeTransform(int dimension, std::vector<Amplitude> row_major);

  static ModeTransform identity(int dimension);

  int dimension() const { return dimension_; }
  Amplitude operator()(int row, int col) const {
    return matrix_[static_cast<std::size_t>(row * dimension_ + col)];
  }
  const std::vector<Amplitude>& matrix() const { return matrix_; }

  /// Transform of "this, then `next`", i.e. next * this.
  ModeTransform then(const ModeTransform& next) const;

 private:
  int dimension_;
  std::vector<Amplitude> matrix_;
};

/// Beam splitter with intensity transmission `transmission` between modes i
/// and j. Convention:
///   a_i^dagger -> sqrt(t) a_i^dagger - sqrt(1-t) a_j^dagger
///   a_j^dagger -> sqrt(1-t) a_i^dagger + sqrt(t) a_j^dagger
/// With this choice |11> maps to sqrt(2t(1-t)) (|20> - |02>) + (2t-1) |11>.
ModeTransform beam_splitter(double transmission, int mode_i, int mode_j,
                            int mode_count);

/// exp(i phase) on `mode`, identity elsewhere.
ModeTransform phase_shift(double phase, int mode, int mode_count);

/// Multi-photon action of a mode transform on a state.
FockState apply_transform(const FockState& state, const ModeTransform& transform);

/// Outcome of losing `lost_count` photons from one mode.
struct ConditionalBranch {
  int lost_count = 0;
  double probability = 0.0;
  /// Normalized conditional state; empty when probability is zero.
  std::optional<FockState> state;
};

/// Loss with power transmission `transmission` on `mode`. Returns branches
/// l = 0 .. L, where L is the largest number of photons lost with nonzero
/// probability. Branch amplitudes carry the real non-negative loss factors
/// sqrt(C(n,l) t^(n-l) (1-t)^l) so no extra signs are introduced.
std::vector<ConditionalBranch> apply_loss(const FockState& state, int mode,
                                          double transmission);

/// |amplitude(pattern)|^2.
double outcome_probability(const FockState& state, const Occupation& pattern);

}  // namespace lossyphase
