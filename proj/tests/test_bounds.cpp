#include <cmath>
#include <random>

#include "doctest.h"
#include "lossyphase/bounds.hpp"
#include "lossyphase/errors.hpp"
#include "oracles.hpp"

using namespace lossyphase;

TEST_CASE("pure-state QFI") {
  CHECK(qfi_pure(probe_state(ProbeWeights::noon())) == doctest::Approx(4.0));
  CHECK(qfi_pure(probe_state({0.0, 1.0, 0.0})) == doctest::Approx(0.0));
  CHECK(qfi_pure(probe_state({0.25, 0.5, 0.25})) == doctest::Approx(2.0));
}

TEST_CASE("N00N under loss") {
  CHECK(std::abs(qfi_lossy(ProbeWeights::noon(), 1.0) - 4.0) < 1e-12);
  CHECK(std::abs(noon_precision(1.0) - 0.5) < 1e-12);
  for (double eta : {0.05, 0.2, 0.361, 0.7}) {
    CHECK(qfi_lossy(ProbeWeights::noon(), eta) == doctest::Approx(noon_qfi(eta)).epsilon(1e-12));
  }
}

TEST_CASE("closed form matches the Fock route") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    double a = u(rng), b = u(rng), c = u(rng);
    const double s = a + b + c;
    const ProbeWeights w(a / s, b / s, 1.0 - a / s - b / s);
    const double eta = u(rng);
    CHECK(qfi_lossy_closed_form(w.x0(), w.x1(), w.x2(), eta) ==
          doctest::Approx(qfi_lossy(w, eta)).epsilon(1e-10));
  }
}

TEST_CASE("conditional states after loss") {
  const ProbeWeights w(0.2, 0.3, 0.5);
  const double eta = 0.4;
  const auto branches = apply_loss(probe_state(w), kSensingMode, eta);
  const double p0 = eta * eta * 0.5 + eta * 0.3 + 0.2;
  const double p1 = 2 * eta * (1 - eta) * 0.5 + (1 - eta) * 0.3;
  CHECK(branches[0].probability == doctest::Approx(p0).epsilon(1e-13));
  CHECK(branches[1].probability == doctest::Approx(p1).epsilon(1e-13));
  const double r0 = std::sqrt(p0);
  CHECK(branches[0].state->amplitude({2, 0}).real() * r0 ==
        doctest::Approx(eta * std::sqrt(0.5)).epsilon(1e-13));
  CHECK(branches[0].state->amplitude({1, 1}).real() * r0 ==
        doctest::Approx(std::sqrt(eta * 0.3)).epsilon(1e-13));
  CHECK(branches[0].state->amplitude({0, 2}).real() * r0 ==
        doctest::Approx(-std::sqrt(0.2)).epsilon(1e-13));
}

TEST_CASE("optimal weights against a brute-force simplex scan") {
  for (double eta : {0.1, 0.2, 0.361, 0.547, 0.8}) {
    const OptimalProbe best = optimize_weights(eta);
    const double brute = oracle::simplex_max_zoom(
        [&](double x0, double x1, double x2) { return qfi_lossy(ProbeWeights(x0, x1, x2), eta); });
    CHECK(std::abs(best.qfi - brute) < 1e-6);
  }
}

TEST_CASE("optimal weights at the experimental transmissions") {
  const OptimalProbe p = optimize_weights(0.361);
  CHECK(p.qfi == doctest::Approx(1.3057720831).epsilon(1e-9));
  CHECK(p.weights.x1() > 0.2);
  const OptimalProbe q = optimize_weights(0.547);
  CHECK(q.weights.x1() < 1e-9);
  CHECK(optimize_weights(1.0).qfi == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("optimize_weights rejects eta outside (0, 1]") {
  CHECK_THROWS_AS(optimize_weights(0.0), DomainError);
  CHECK_THROWS_AS(optimize_weights(1.5), DomainError);
}

TEST_CASE("SIL closed form against golden section") {
  for (double eta : {0.01, 0.1, 0.361, 0.9, 1.0}) {
    for (double n : {1.0, 2.0, 10.0}) {
      CHECK(std::abs(sil_precision(eta, n) - sil_precision_numeric(eta, n)) < 1e-8);
    }
  }
  CHECK(sil_precision(1.0, 2.0) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("precision curve ordering") {
  const auto grid = default_eta_grid();
  for (double eta : kExperimentalEtas) {
    CHECK(std::find(grid.begin(), grid.end(), eta) != grid.end());
  }
  for (const auto& p : precision_curve(grid)) {
    CHECK(p.dphi_optimal <= std::min(p.dphi_noon, p.dphi_sil) + 1e-9);
  }
}

TEST_CASE("invalid weights") {
  CHECK_THROWS_AS(ProbeWeights(0.5, 0.5, 0.5), DomainError);
  CHECK_THROWS_AS(ProbeWeights(-0.1, 0.6, 0.5), DomainError);
}
