#include "lossyphase/fock.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "lossyphase/errors.hpp"

namespace lossyphase {
namespace {

int total_photons(const Occupation& n) {
  return std::accumulate(n.begin(), n.end(), 0);
}

double sqrt_factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= static_cast<double>(k);
  return std::sqrt(f);
}

void check_mode(int mode, int mode_count, const char* what) {
  if (mode < 0 || mode >= mode_count) {
    throw DomainError(std::string(what) + ": mode index " +
                      std::to_string(mode) + " out of range for " +
                      std::to_string(mode_count) + " modes");
  }
}

}  // namespace

FockState::FockState(int mode_count, int photon_cutoff, TermMap terms,
                     Normalization normalization)
    : mode_count_(mode_count),
      photon_cutoff_(photon_cutoff),
      normalization_(normalization) {
  if (mode_count <= 0) throw DomainError("FockState: mode_count must be positive");
  if (photon_cutoff < 0) throw DomainError("FockState: negative photon cutoff");
  for (auto& [occ, amp] : terms) {
    if (static_cast<int>(occ.size()) != mode_count) {
      throw DomainError("FockState: occupation vector length mismatch");
    }
    for (int n : occ) {
      if (n < 0) throw DomainError("FockState: negative occupation");
    }
    if (total_photons(occ) > photon_cutoff) {
      throw DomainError("FockState: occupation exceeds photon cutoff");
    }
    if (amp != Amplitude{0.0, 0.0}) terms_.emplace(occ, amp);
  }
  const double norm = squared_norm();
  if (normalization == Normalization::normalized) {
    if (std::abs(norm - 1.0) > kNormTolerance) {
      throw DomainError("FockState: normalized state has squared norm " +
                        std::to_string(norm));
    }
  } else if (!(norm > 0.0) || norm > 1.0 + kNormTolerance) {
    throw DomainError("FockState: unnormalized state must have squared norm in (0, 1]");
  }
}

Amplitude FockState::amplitude(const Occupation& pattern) const {
  auto it = terms_.find(pattern);
  return it == terms_.end() ? Amplitude{} : it->second;
}

double FockState::squared_norm() const {
  double s = 0.0;
  for (const auto& [occ, amp] : terms_) s += std::norm(amp);
  return s;
}

int FockState::max_photon_number() const {
  int m = 0;
  for (const auto& [occ, amp] : terms_) m = std::max(m, total_photons(occ));
  return m;
}

bool FockState::has_fixed_photon_number(int n) const {
  for (const auto& [occ, amp] : terms_) {
    if (total_photons(occ) != n) return false;
  }
  return true;
}

FockState FockState::normalized() const {
  const double scale = 1.0 / std::sqrt(squared_norm());
  TermMap out;
  for (const auto& [occ, amp] : terms_) out.emplace(occ, amp * scale);
  return FockState(mode_count_, photon_cutoff_, std::move(out),
                   Normalization::normalized);
}

FockState FockState::scaled(double factor) const {
  TermMap out;
  for (const auto& [occ, amp] : terms_) out.emplace(occ, amp * factor);
  return FockState(mode_count_, photon_cutoff_, std::move(out),
                   Normalization::unnormalized);
}

ModeTransform::ModeTransform(int dimension, std::vector<Amplitude> row_major)
    : dimension_(dimension), matrix_(std::move(row_major)) {
  if (dimension <= 0) throw DomainError("ModeTransform: dimension must be positive");
  if (matrix_.size() != static_cast<std::size_t>(dimension * dimension)) {
    throw DomainError("ModeTransform: matrix size does not match dimension");
  }
  // U U^dagger = 1
  for (int i = 0; i < dimension; ++i) {
    for (int j = 0; j < dimension; ++j) {
      Amplitude s{};
      for (int k = 0; k < dimension; ++k) s += (*this)(i, k) * std::conj((*this)(j, k));
      const double target = i == j ? 1.0 : 0.0;
      if (std::abs(s - target) > kNormTolerance) {
        throw DomainError("ModeTransform: matrix is not unitary");
      }
    }
  }
}

ModeTransform ModeTransform::identity(int dimension) {
  std::vector<Amplitude> m(static_cast<std::size_t>(dimension * dimension));
  for (int i = 0; i < dimension; ++i) m[static_cast<std::size_t>(i * dimension + i)] = 1.0;
  return ModeTransform(dimension, std::move(m));
}

ModeTransform ModeTransform::then(const ModeTransform& next) const {
  if (next.dimension_ != dimension_) {
    throw DomainError("ModeTransform::then: dimension mismatch");
  }
  std::vector<Amplitude> m(matrix_.size());
  for (int i = 0; i < dimension_; ++i) {
    for (int j = 0; j < dimension_; ++j) {
      Amplitude s{};
      for (int k = 0; k < dimension_; ++k) s += next(i, k) * (*this)(k, j);
      m[static_cast<std::size_t>(i * dimension_ + j)] = s;
    }
  }
  return ModeTransform(dimension_, std::move(m));
}

ModeTransform beam_splitter(double transmission, int mode_i, int mode_j,
                            int mode_count) {
  check_mode(mode_i, mode_count, "beam_splitter");
  check_mode(mode_j, mode_count, "beam_splitter");
  if (mode_i == mode_j) throw DomainError("beam_splitter: modes must differ");
  if (!(transmission >= 0.0 && transmission <= 1.0)) {
    throw DomainError("beam_splitter: transmission outside [0, 1]");
  }
  const double t = std::sqrt(transmission);
  const double r = std::sqrt(1.0 - transmission);
  std::vector<Amplitude> m(static_cast<std::size_t>(mode_count * mode_count));
  auto at = [&](int row, int col) -> Amplitude& {
    return m[static_cast<std::size_t>(row * mode_count + col)];
  };
  for (int k = 0; k < mode_count; ++k) at(k, k) = 1.0;
  at(mode_i, mode_i) = t;
  at(mode_j, mode_i) = -r;
  at(mode_i, mode_j) = r;
  at(mode_j, mode_j) = t;
  return ModeTransform(mode_count, std::move(m));
}

ModeTransform phase_shift(double phase, int mode, int mode_count) {
  check_mode(mode, mode_count, "phase_shift");
  std::vector<Amplitude> m(static_cast<std::size_t>(mode_count * mode_count));
  for (int k = 0; k < mode_count; ++k) m[static_cast<std::size_t>(k * mode_count + k)] = 1.0;
  m[static_cast<std::size_t>(mode * mode_count + mode)] = std::polar(1.0, phase);
  return ModeTransform(mode_count, std::move(m));
}

FockState apply_transform(const FockState& state, const ModeTransform& transform) {
  const int modes = state.mode_count();
  if (transform.dimension() != modes) {
    throw DomainError("apply_transform: transform dimension does not match state");
  }
  // Expand each basis term as a polynomial in creation operators, keyed by
  // monomial exponent vector, then convert monomials back to Fock amplitudes.
  TermMap out;
  for (const auto& [occ, amp] : state.terms()) {
    double inv_norm = 1.0;
    for (int n : occ) inv_norm /= sqrt_factorial(n);
    TermMap poly{{Occupation(static_cast<std::size_t>(modes), 0), amp * inv_norm}};
    for (int k = 0; k < modes; ++k) {
      for (int rep = 0; rep < occ[static_cast<std::size_t>(k)]; ++rep) {
        TermMap next;
        for (const auto& [mono, coef] : poly) {
          for (int j = 0; j < modes; ++j) {
            const Amplitude u = transform(j, k);
            if (u == Amplitude{}) continue;
            Occupation m = mono;
            ++m[static_cast<std::size_t>(j)];
            next[m] += coef * u;
          }
        }
        poly = std::move(next);
      }
    }
    for (const auto& [mono, coef] : poly) {
      double f = 1.0;
      for (int n : mono) f *= sqrt_factorial(n);
      out[mono] += coef * f;
    }
  }
  return FockState(modes, state.photon_cutoff(), std::move(out),
                   state.normalization());
}

std::vector<ConditionalBranch> apply_loss(const FockState& state, int mode,
                                          double transmission) {
  check_mode(mode, state.mode_count(), "apply_loss");
  if (!(transmission >= 0.0 && transmission <= 1.0)) {
    throw DomainError("apply_loss: transmission outside [0, 1]");
  }
  if (state.normalization() != Normalization::normalized) {
    throw DomainError("apply_loss: input state must be normalized");
  }
  const int modes = state.mode_count();
  const int env = modes;
  TermMap extended;
  for (const auto& [occ, amp] : state.terms()) {
    Occupation e = occ;
    e.push_back(0);
    extended.emplace(std::move(e), amp);
  }
  const FockState joint(modes + 1, state.photon_cutoff(), std::move(extended));
  // Environment as mode i, so the surviving mode picks up +sqrt(t) and the
  // environment +sqrt(1-t).
  const FockState mixed =
      apply_transform(joint, beam_splitter(transmission, env, mode, modes + 1));

  std::map<int, TermMap> by_lost;
  for (const auto& [occ, amp] : mixed.terms()) {
    const int l = occ.back();
    Occupation reduced(occ.begin(), occ.end() - 1);
    by_lost[l][std::move(reduced)] += amp;
  }
  const int max_lost = by_lost.empty() ? 0 : by_lost.rbegin()->first;
  std::vector<ConditionalBranch> branches;
  branches.reserve(static_cast<std::size_t>(max_lost + 1));
  for (int l = 0; l <= max_lost; ++l) {
    ConditionalBranch b;
    b.lost_count = l;
    auto it = by_lost.find(l);
    if (it != by_lost.end()) {
      double p = 0.0;
      for (const auto& [occ, amp] : it->second) p += std::norm(amp);
      b.probability = p;
      if (p > 0.0) {
        const double scale = 1.0 / std::sqrt(p);
        TermMap terms;
        for (const auto& [occ, amp] : it->second) terms.emplace(occ, amp * scale);
        b.state.emplace(modes, state.photon_cutoff(), std::move(terms));
      }
    }
    branches.push_back(std::move(b));
  }
  return branches;
}

double outcome_probability(const FockState& state, const Occupation& pattern) {
  if (static_cast<int>(pattern.size()) != state.mode_count()) {
    throw DomainError("outcome_probability: pattern length does not match mode count");
  }
  return std::norm(state.amplitude(pattern));
}

}  // namespace lossyphase
