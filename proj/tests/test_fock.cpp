#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lossyphase/errors.hpp"
#include "lossyphase/fock.hpp"
#include "oracles.hpp"

using namespace lossyphase;

namespace {

FockState random_state(std::mt19937_64& rng, int modes, int photons) {
  std::normal_distribution<double> g;
  TermMap terms;
  double norm = 0.0;
  for (const auto& occ : oracle::patterns(modes, photons)) {
    const Amplitude a(g(rng), g(rng));
    terms[occ] = a;
    norm += std::norm(a);
  }
  for (auto& [occ, a] : terms) a /= std::sqrt(norm);
  return FockState(modes, photons, terms);
}

ModeTransform random_network(std::mt19937_64& rng, int modes) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ModeTransform t = ModeTransform::identity(modes);
  for (int layer = 0; layer < 3; ++layer) {
    for (int i = 0; i < modes; ++i) {
      for (int j = i + 1; j < modes; ++j) {
        t = t.then(phase_shift(2 * std::numbers::pi * u(rng), i, modes))
                .then(beam_splitter(u(rng), i, j, modes));
      }
    }
  }
  return t;
}

}  // namespace

TEST_CASE("Hong-Ou-Mandel at a balanced splitter") {
  const FockState in(2, 2, {{{1, 1}, 1.0}});
  const FockState out = apply_transform(in, beam_splitter(0.5, 0, 1, 2));
  CHECK(std::abs(out.amplitude({1, 1})) < 1e-15);
  CHECK(std::abs(out.amplitude({2, 0}) - Amplitude(std::sqrt(0.5))) < 1e-15);
  CHECK(std::abs(out.amplitude({0, 2}) + Amplitude(std::sqrt(0.5))) < 1e-15);
}

TEST_CASE("beam splitter convention on |11>") {
  for (double t : {0.0, 0.1, 0.3, 0.5, 0.8, 1.0}) {
    const FockState out = apply_transform(FockState(2, 2, {{{1, 1}, 1.0}}),
                                          beam_splitter(t, 0, 1, 2));
    const double c = std::sqrt(2 * t * (1 - t));
    CHECK(out.amplitude({2, 0}).real() == doctest::Approx(c).epsilon(1e-14));
    CHECK(out.amplitude({0, 2}).real() == doctest::Approx(-c).epsilon(1e-14));
    CHECK(out.amplitude({1, 1}).real() == doctest::Approx(2 * t - 1).epsilon(1e-14));
  }
}

TEST_CASE("apply_transform agrees with the permanent oracle") {
  std::mt19937_64 rng(11);
  for (int modes : {2, 3, 4}) {
    for (int photons : {1, 2, 3}) {
      for (int trial = 0; trial < 5; ++trial) {
        const FockState s = random_state(rng, modes, photons);
        const ModeTransform u = random_network(rng, modes);
        const FockState out = apply_transform(s, u);
        for (const auto& [occ, expected] : oracle::evolve(s, u, photons)) {
          CHECK(std::abs(out.amplitude(occ) - expected) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("transforms are unitary and compose") {
  std::mt19937_64 rng(5);
  const ModeTransform a = random_network(rng, 3);
  const ModeTransform b = random_network(rng, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const FockState s = random_state(rng, 3, 2);
    const FockState step = apply_transform(apply_transform(s, a), b);
    const FockState joint = apply_transform(s, a.then(b));
    CHECK(step.squared_norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& occ : oracle::patterns(3, 2)) {
      CHECK(std::abs(step.amplitude(occ) - joint.amplitude(occ)) < kCompositionTolerance);
    }
  }
}

TEST_CASE("non-unitary matrices are rejected") {
  CHECK_THROWS_AS(ModeTransform(2, {1.0, 0.0, 0.0, 0.5}), DomainError);
  CHECK_THROWS_AS(beam_splitter(1.2, 0, 1, 2), DomainError);
  CHECK_THROWS_AS(beam_splitter(0.5, 0, 0, 2), DomainError);
}

TEST_CASE("state validation") {
  CHECK_THROWS_AS(FockState(2, 2, {{{1, 1}, 0.5}}), DomainError);
  CHECK_THROWS_AS(FockState(2, 2, {{{3, 0}, 1.0}}), DomainError);
  CHECK_THROWS_AS(FockState(2, 2, {{{1, 0, 0}, 1.0}}), DomainError);
  const FockState s(2, 2, {{{1, 1}, 0.5}}, Normalization::unnormalized);
  CHECK(s.normalized().squared_norm() == doctest::Approx(1.0));
  CHECK(s.amplitude({2, 0}) == Amplitude(0.0));
}

TEST_CASE("loss branches are complete") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const FockState s = random_state(rng, 2, 2);
    const double eta = u(rng);
    double total = 0.0;
    for (const auto& b : apply_loss(s, 0, eta)) {
      total += b.probability;
      if (b.state) {
        CHECK(b.state->squared_norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(b.state->has_fixed_photon_number(2 - b.lost_count));
      }
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("loss of a single-mode Fock state is binomial") {
  const FockState s(1, 3, {{{3}, 1.0}});
  const auto branches = apply_loss(s, 0, 0.3);
  REQUIRE(branches.size() == 4);
  for (int l = 0; l <= 3; ++l) {
    const double expected = std::tgamma(4.0) / (std::tgamma(l + 1.0) * std::tgamma(4.0 - l)) *
                            std::pow(0.3, 3 - l) * std::pow(0.7, l);
    CHECK(branches[l].probability == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("perfect transmission keeps the state") {
  const FockState s(2, 2, {{{2, 0}, std::sqrt(0.5)}, {{0, 2}, -std::sqrt(0.5)}});
  const auto branches = apply_loss(s, 0, 1.0);
  REQUIRE(branches.size() == 1);
  CHECK(branches[0].probability == doctest::Approx(1.0));
  CHECK(std::abs(branches[0].state->amplitude({0, 2}) + std::sqrt(0.5)) < 1e-15);
}

TEST_CASE("total loss empties the mode") {
  const FockState s(2, 2, {{{1, 1}, 1.0}});
  const auto branches = apply_loss(s, 0, 0.0);
  CHECK(branches[1].probability == doctest::Approx(1.0));
  CHECK(!branches[0].state);
  CHECK(branches[1].state->amplitude({0, 1}) == Amplitude(1.0));
}
