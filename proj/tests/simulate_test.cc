#include <gtest/gtest.h>

#include <cmath>

#include "rsp/builtins.h"
#include "rsp/errors.h"
#include "rsp/simulate.h"
#include "test_util.h"

namespace rsp {
namespace {

using testing::Rng;

TEST(CounterRng, AddressableDraws) {
  CounterRng a(CounterRng::derive_key(42, 0));
  CounterRng b(CounterRng::derive_key(42, 0));
  std::vector<std::uint64_t> seq;
  for (int i = 0; i < 100; ++i) seq.push_back(a.next());
  for (int i = 99; i >= 0; --i) EXPECT_EQ(b.at(static_cast<std::uint64_t>(i)), seq[static_cast<std::size_t>(i)]);
  EXPECT_NE(CounterRng::derive_key(42, 0), CounterRng::derive_key(42, 1));
  EXPECT_NE(CounterRng::derive_key(42, 0), CounterRng::derive_key(43, 0));
}

TEST(CounterRng, UniformMoments) {
  CounterRng r(CounterRng::derive_key(7, 0));
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 5 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sq / n, 1.0 / 3.0, 0.005);
}

TEST(ChiSquare, UpperTailKnownValues) {
  // P[chi2_1 >= 3.841459] = 0.05, P[chi2_3 >= 7.814728] = 0.05
  EXPECT_NEAR(chi_square_upper_tail(3.841458820694124, 1), 0.05, 1e-9);
  EXPECT_NEAR(chi_square_upper_tail(7.814727903251178, 3), 0.05, 1e-9);
  // Two degrees of freedom: exp(-x/2).
  EXPECT_NEAR(chi_square_upper_tail(4.0, 2), std::exp(-2.0), 1e-14);
}

TEST(Simulate, SameSeedReplaysExactly) {
  Protocol p = builtin_protocol(Builtin::teleportation_qubit);
  SimConfig c;
  c.runs = 5000;
  c.seed = 42;
  c.keep_sequence = true;
  SimReport a = simulate(p, c), b = simulate(p, c);
  EXPECT_EQ(a.sequence, b.sequence);
  EXPECT_EQ(a.counts, b.counts);
  c.seed = 43;
  EXPECT_NE(simulate(p, c).sequence, a.sequence);
}

TEST(Simulate, BatchCountDoesNotChangeResult) {
  Protocol p = builtin_protocol(Builtin::qutrit_block);
  SimConfig c;
  c.runs = 10007;
  c.seed = 5;
  c.keep_sequence = true;
  SimReport one = simulate(p, c);
  for (std::size_t batches : {2u, 3u, 8u}) {
    c.batches = batches;
    SimReport many = simulate(p, c);
    EXPECT_EQ(many.sequence, one.sequence) << batches;
    EXPECT_EQ(many.counts, one.counts);
    EXPECT_EQ(many.chi_square, one.chi_square);
  }
}

TEST(Simulate, TrivialProtocolSingleBranch) {
  SimConfig c;
  c.runs = 100;
  SimReport r = simulate(builtin_protocol(Builtin::trivial_1d), c);
  ASSERT_EQ(r.counts.size(), 1u);
  EXPECT_EQ(r.counts[0], 100u);
  EXPECT_EQ(r.frequencies[0], 1.0);
  EXPECT_NEAR(r.min_fidelity, 1.0, 1e-15);
}

TEST(Simulate, CountsSumToRunsAndFidelitiesAreExact) {
  for (Builtin b : {Builtin::teleportation_qubit, Builtin::equatorial_qubit, Builtin::qutrit_block}) {
    Protocol p = builtin_protocol(b);
    for (std::size_t t = 0; t < 3; ++t) {
      SimConfig c;
      c.runs = 2000;
      c.seed = t;
      c.target = t;
      SimReport r = simulate(p, c);
      std::size_t total = 0;
      for (std::size_t n : r.counts) total += n;
      EXPECT_EQ(total, c.runs);
      EXPECT_GE(r.min_fidelity, 1.0 - 1e-9);
      EXPECT_LE(r.mean_fidelity, 1.0 + 1e-12);
    }
  }
}

TEST(Simulate, ExplicitTargetForObliviousProtocol) {
  Rng rng(3);
  SimConfig c;
  c.runs = 1000;
  c.target = testing::random_state(2, rng);
  SimReport r = simulate(builtin_protocol(Builtin::teleportation_qubit), c);
  EXPECT_GE(r.min_fidelity, 1.0 - 1e-9);
  EXPECT_FALSE(r.target_index.has_value());
}

TEST(Simulate, RefusesUnverifiedUnlessSkipped) {
  Protocol p = builtin_protocol(Builtin::equatorial_qubit);
  p.outcomes[1].unitary = pauli::x();
  SimConfig c;
  c.runs = 100;
  EXPECT_THROW(simulate(p, c), PreconditionError);
  c.skip_verification = true;
  // Eigenstates are derived from the corrections, so the corrected states
  // still match; what breaks is completeness of the measurement.
  SimReport r = simulate(p, c);
  EXPECT_EQ(r.counts[0] + r.counts[1], c.runs);
  EXPECT_GT(check_measurement_validity(p).completeness_residual, 1e-3);
}

TEST(Simulate, FailureOutcomesAreCounted) {
  Protocol base = builtin_protocol(Builtin::equatorial_qubit);
  std::vector<Outcome> outcomes = base.outcomes;
  for (Outcome& o : outcomes) o.probability = 0.25;
  Outcome f;
  f.failure = true;
  outcomes.push_back(f);
  outcomes.push_back(f);
  Protocol p("with-failures", base.resource_state, MeasurementKind::povm, outcomes, base.ensemble);
  SimConfig c;
  c.runs = 20000;
  c.seed = 9;
  SimReport r = simulate(p, c);
  EXPECT_EQ(r.failures, r.counts[2] + r.counts[3]);
  EXPECT_NEAR(static_cast<double>(r.failures) / c.runs, 0.5, 4 * std::sqrt(0.25 / c.runs));
  EXPECT_GE(r.min_fidelity, 1.0 - 1e-9);
}

// |freq_m - p_m| <= 3 sqrt(p_m (1 - p_m) / runs) for at least 99 of 100
// seeds, per outcome.
TEST(Simulate, FrequenciesConvergeForBuiltins) {
  for (Builtin b : {Builtin::teleportation_qubit, Builtin::equatorial_qubit, Builtin::qutrit_block,
                    Builtin::trivial_1d}) {
    Protocol p = builtin_protocol(b);
    const std::size_t n_out = p.outcomes.size();
    std::vector<int> inside(n_out, 0);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      SimConfig c;
      c.runs = 10000;
      c.seed = seed;
      SimReport r = simulate(p, c);
      for (std::size_t m = 0; m < n_out; ++m) {
        const double pm = r.probabilities[m];
        const double bound = 3.0 * std::sqrt(pm * (1.0 - pm) / static_cast<double>(c.runs));
        if (std::abs(r.frequencies[m] - pm) <= bound + 1e-15) ++inside[m];
      }
    }
    for (std::size_t m = 0; m < n_out; ++m) EXPECT_GE(inside[m], 99) << builtin_name(b) << " outcome " << m;
  }
}

// Outcome counts for five targets, pooled into a contingency table; the
// homogeneity test at level 0.001 may reject in at most 1 of 100 seeds.
TEST(Simulate, ObliviousDistributionsAreTargetIndependent) {
  for (Builtin b : {Builtin::teleportation_qubit, Builtin::qutrit_block}) {
    Protocol p = builtin_protocol(b);
    int rejections = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::vector<std::vector<std::size_t>> rows;
      for (std::size_t t = 0; t < 5; ++t) {
        SimConfig c;
        c.runs = 10000;
        c.seed = seed * 16 + t;
        c.target = t * 7;
        rows.push_back(simulate(p, c).counts);
      }
      if (homogeneity_test(rows).p_value < 0.001) ++rejections;
    }
    EXPECT_LE(rejections, 1) << builtin_name(b);
  }
}

TEST(Homogeneity, DetectsDifferentDistributions) {
  std::vector<std::vector<std::size_t>> rows = {{500, 500}, {700, 300}};
  ContingencyResult r = homogeneity_test(rows);
  EXPECT_EQ(r.degrees_of_freedom, 1u);
  EXPECT_LT(r.p_value, 1e-10);
  // 2x2 statistic by hand: expected 600/400 per row.
  EXPECT_NEAR(r.statistic, 2 * (100.0 * 100.0 / 600.0 + 100.0 * 100.0 / 400.0), 1e-9);
}

}  // namespace
}  // namespace rsp
