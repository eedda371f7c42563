#include <cmath>

#include "brute_force.hpp"
#include "doctest.h"
#include "spanlab/crf.hpp"
#include "spanlab/rng.hpp"

using namespace spanlab;
using namespace spanlab::testing;

namespace {

Potentials<double> zero_potentials(int n) {
  Potentials<double> p;
  p.emissions = EmissionMatrix<double>::Zero(n, kNumTags);
  return p;
}

}  // namespace

TEST_CASE("log partition of a single position") {
  CHECK(forward_log_z(zero_potentials(1), false) == doctest::Approx(std::log(5.0)));
  CHECK(forward_log_z(zero_potentials(1), true) == doctest::Approx(std::log(2.0)));
  CHECK(forward_backward(zero_potentials(1), true).log_z == doctest::Approx(std::log(2.0)));
}

TEST_CASE("forward-backward matches enumeration") {
  Rng rng(31337);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 6));
    const bool constrained = trial % 2 == 0;
    const Potentials<double> p = random_potentials(rng, n, 3.0, false);
    const BruteForce expected = brute_force(p, constrained);
    const ForwardBackward<double> fb = forward_backward(p, constrained);
    CHECK(std::abs(fb.log_z - expected.log_z) <= 1e-9);
    CHECK(std::abs(forward_log_z(p, constrained) - expected.log_z) <= 1e-9);
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int t = 0; t < kNumTags; ++t) {
        CHECK(std::abs(fb.marginals(i, t) - expected.marginals[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)]) <= 1e-9);
        row += fb.marginals(i, t);
      }
      CHECK(std::abs(row - 1.0) <= 1e-9);
    }
    // Pairwise marginals sum to n - 1 transitions.
    CHECK(fb.transition_marginals.sum() == doctest::Approx(n - 1.0));
  }
}

TEST_CASE("large potentials stay finite") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Potentials<double> p = random_potentials(rng, 6, 50.0, false);
    for (bool constrained : {false, true}) {
      const double log_z = forward_log_z(p, constrained);
      CHECK(std::isfinite(log_z));
      CHECK(std::abs(log_z - brute_force(p, constrained).log_z) <= 1e-9 * std::max(1.0, std::abs(log_z)));
    }
  }
}

TEST_CASE("viterbi matches enumeration including the tie-break") {
  Rng rng(4242);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 6));
    const bool constrained = trial % 2 == 1;
    const Potentials<double> p = random_potentials(rng, n, 1.0, true);
    const BruteForce expected = brute_force(p, constrained);
    const TagSequence best = viterbi(p, constrained);
    CHECK(brute_score(p, best) == expected.best_score);
    CHECK(best == expected.best);
    if (constrained) CHECK(is_admissible(best));
  }
}

TEST_CASE("viterbi on continuous potentials") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 6));
    const Potentials<double> p = random_potentials(rng, n, 5.0, false);
    for (bool constrained : {false, true}) {
      const BruteForce expected = brute_force(p, constrained);
      CHECK(std::abs(brute_score(p, viterbi(p, constrained)) - expected.best_score) <= 1e-12);
    }
  }
}

TEST_CASE("viterbi basics") {
  Potentials<double> p = zero_potentials(4);
  p.emissions.col(index(Tag5::Outside)).setConstant(10.0);
  CHECK(viterbi(p, true) == TagSequence(4, Tag5::Outside));
  // All-zero potentials: ties resolve towards Singleton.
  CHECK(viterbi(zero_potentials(3), true) == TagSequence(3, Tag5::Singleton));
  CHECK(viterbi(zero_potentials(3), false) == TagSequence(3, Tag5::Singleton));
  CHECK_THROWS_AS(viterbi(zero_potentials(0), true), std::invalid_argument);
}

TEST_CASE("forward-backward works for other scalar types") {
  Rng rng(3);
  const Potentials<double> p = random_potentials(rng, 5, 2.0, false);
  Potentials<long double> q;
  q.emissions = p.emissions.cast<long double>();
  q.transitions = p.transitions.cast<long double>();
  q.start = p.start.cast<long double>();
  q.end = p.end.cast<long double>();
  CHECK(static_cast<double>(forward_log_z(q, true)) == doctest::Approx(forward_log_z(p, true)).epsilon(1e-12));
  CHECK(viterbi(q, true) == viterbi(p, true));
}
