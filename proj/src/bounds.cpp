#include "lossyphase/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lossyphase/errors.hpp"
#include "lossyphase/optimize.hpp"

namespace lossyphase {
namespace {

constexpr int kGridDivisions = 1000;

void require_eta(double eta, const char* what) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw DomainError(std::string(what) + ": eta must lie in (0, 1], got " +
                      std::to_string(eta));
  }
}

}  // namespace

ProbeWeights::ProbeWeights(double x0, double x1, double x2)
    : x0_(x0), x1_(x1), x2_(x2) {
  if (!(x0 >= 0.0 && x1 >= 0.0 && x2 >= 0.0)) {
    throw DomainError("ProbeWeights: weights must be non-negative");
  }
  if (std::abs(x0 + x1 + x2 - 1.0) > kNormTolerance) {
    throw DomainError("ProbeWeights: weights must sum to one");
  }
}

FockState probe_state(const ProbeWeights& w) {
  return FockState(2, 2,
                   {{{2, 0}, std::sqrt(w.x2())},
                    {{1, 1}, std::sqrt(w.x1())},
                    {{0, 2}, -std::sqrt(w.x0())}});
}

ProbeWeights weights_of(const FockState& state) {
  if (state.mode_count() != 2 || !state.has_fixed_photon_number(2)) {
    throw DomainError("weights_of: expected a two-photon two-mode state");
  }
  const double norm = state.squared_norm();
  const double x2 = std::norm(state.amplitude({2, 0})) / norm;
  const double x1 = std::norm(state.amplitude({1, 1})) / norm;
  // Absorb rounding so the triple sums to one exactly.
  const double x0 = std::max(0.0, 1.0 - x2 - x1);
  return {x0, x1, x2};
}

double qfi_pure(const FockState& state, int sensing_mode) {
  if (sensing_mode < 0 || sensing_mode >= state.mode_count()) {
    throw DomainError("qfi_pure: sensing mode out of range");
  }
  if (state.normalization() != Normalization::normalized) {
    throw DomainError("qfi_pure: state must be normalized");
  }
  double mean = 0.0;
  double second = 0.0;
  for (const auto& [occ, amp] : state.terms()) {
    const double n = occ[static_cast<std::size_t>(sensing_mode)];
    const double p = std::norm(amp);
    mean += p * n;
    second += p * n * n;
  }
  return 4.0 * (second - mean * mean);
}

double qfi_lossy(const ProbeWeights& w, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("qfi_lossy: eta outside [0, 1]");
  double f = 0.0;
  for (const auto& branch : apply_loss(probe_state(w), kSensingMode, eta)) {
    if (branch.state) f += branch.probability * qfi_pure(*branch.state, kSensingMode);
  }
  return f;
}

double qfi_lossy_closed_form(double x0, double x1, double x2, double eta) {
  // No photon lost: eta sqrt(x2)|20> + sqrt(eta x1)|11> - sqrt(x0)|02>
  const double p0 = eta * eta * x2 + eta * x1 + x0;
  double f = 0.0;
  if (p0 > 0.0) {
    const double m1 = 2.0 * eta * eta * x2 + eta * x1;
    const double m2 = 4.0 * eta * eta * x2 + eta * x1;
    f += 4.0 * (m2 - m1 * m1 / p0);
  }
  // One photon lost: components |10> and |01>
  const double a = 2.0 * eta * (1.0 - eta) * x2;
  const double b = (1.0 - eta) * x1;
  if (a + b > 0.0) f += 4.0 * a * b / (a + b);
  return f;
}

OptimalProbe optimize_weights(double eta) {
  require_eta(eta, "optimize_weights");
  int best2 = 0;
  int best1 = 0;
  double best = -1.0;
  for (int i2 = 0; i2 <= kGridDivisions; ++i2) {
    for (int i1 = 0; i1 + i2 <= kGridDivisions; ++i1) {
      const double x2 = static_cast<double>(i2) / kGridDivisions;
      const double x1 = static_cast<double>(i1) / kGridDivisions;
      const double x0 = static_cast<double>(kGridDivisions - i1 - i2) / kGridDivisions;
      const double f = qfi_lossy_closed_form(x0, x1, x2, eta);
      if (f > best) {
        best = f;
        best2 = i2;
        best1 = i1;
      }
    }
  }
  double x2 = static_cast<double>(best2) / kGridDivisions;
  double x1 = static_cast<double>(best1) / kGridDivisions;

  auto objective = [eta](const std::vector<double>& p) {
    const double x0 = 1.0 - p[0] - p[1];
    if (p[0] < 0.0 || p[1] < 0.0 || x0 < 0.0) return std::numeric_limits<double>::infinity();
    return -qfi_lossy_closed_form(x0, p[1], p[0], eta);
  };
  const double x0_grid = 1.0 - x2 - x1;
  const double step = x0_grid >= 1e-3 ? 1e-3 : -1e-3;
  NelderMeadOptions opts;
  opts.value_tolerance = 1e-15;
  opts.size_tolerance = 1e-11;
  const VectorOptimum polished = nelder_mead_minimize(objective, {x2, x1}, opts, {step, step});
  if (-polished.value > best) {
    x2 = polished.x[0];
    x1 = polished.x[1];
  }
  const ProbeWeights w(std::max(0.0, 1.0 - x2 - x1), x1, x2);
  return {w, qfi_lossy(w, eta)};
}

double noon_qfi(double eta) {
  return 8.0 * eta * eta / (1.0 + eta * eta);
}

double noon_precision(double eta) {
  require_eta(eta, "noon_precision");
  return 1.0 / std::sqrt(noon_qfi(eta));
}

double sil_precision(double eta, double n_photons) {
  require_eta(eta, "sil_precision");
  if (!(n_photons > 0.0)) throw DomainError("sil_precision: photon number must be positive");
  const double s = std::sqrt(eta);
  return (1.0 + s) / (2.0 * std::sqrt(eta * n_photons));
}

double sil_precision_numeric(double eta, double n_photons, double tolerance) {
  require_eta(eta, "sil_precision_numeric");
  if (!(n_photons > 0.0)) throw DomainError("sil_precision_numeric: photon number must be positive");
  auto fisher = [&](double tau) {
    if (tau <= 0.0 || tau >= 1.0) return 0.0;
    return 4.0 * n_photons / (1.0 / (eta * tau) + 1.0 / (1.0 - tau));
  };
  const ScalarOptimum opt = golden_section_maximize(fisher, 0.0, 1.0, tolerance);
  return 1.0 / std::sqrt(opt.value);
}

std::vector<PrecisionPoint> precision_curve(std::span<const double> eta_grid) {
  std::vector<PrecisionPoint> out;
  out.reserve(eta_grid.size());
  for (double eta : eta_grid) {
    const OptimalProbe opt = optimize_weights(eta);
    PrecisionPoint p;
    p.eta = eta;
    p.dphi_optimal = 1.0 / std::sqrt(opt.qfi);
    p.dphi_noon = noon_precision(eta);
    p.dphi_sil = sil_precision(eta, 2.0);
    p.weights = opt.weights;
    p.non_classical = p.dphi_optimal < std::min(p.dphi_noon, p.dphi_sil);
    out.push_back(p);
  }
  return out;
}

std::vector<double> default_eta_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 100; ++k) grid.push_back(k / 100.0);
  grid.insert(grid.end(), std::begin(kExperimentalEtas), std::end(kExperimentalEtas));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             grid.end());
  return grid;
}

}  // namespace lossyphase
