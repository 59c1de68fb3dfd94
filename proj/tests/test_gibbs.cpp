#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bethelab/measure.hpp"
#include "bethelab/random_models.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bethelab;

TEST(Gibbs, TwoVariableEdge) {
  const auto t = gibbs_table(fixtures::g0());
  EXPECT_NEAR(t.Z, 3.0, 1e-12);
  const double expected[] = {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(t.mu[static_cast<std::size_t>(i)], expected[i], 1e-15);
}

TEST(Gibbs, EmptyGraphIsUniform) {
  const auto t = gibbs_table(fixtures::empty_graph(3));
  // Every configuration has weight 1 (empty product).
  EXPECT_NEAR(t.Z, 8.0, 1e-12);
  for (double p : t.mu.probs()) EXPECT_DOUBLE_EQ(p, 0.125);
}

TEST(Gibbs, MatchesBruteForceOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    ModelSpec spec = fixtures::potts_spec(6, 2.0, 3, 0.9, seed);
    if (seed % 3 == 0) {
      spec.k = 3;
      spec.family = ksat_family(3, 1.3);
    }
    const FactorGraph g = sample_graph(spec);
    const auto t = gibbs_table(g);
    const auto ref = oracle::gibbs(g);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(t.mu[i], ref[i], 1e-13);
  }
}

TEST(Gibbs, InvariantUnderConstraintPermutation) {
  const FactorGraph g = sample_graph(fixtures::potts_spec(7, 3.0, 2, 1.2, 11));
  std::vector<Constraint> reversed(g.constraints().rbegin(), g.constraints().rend());
  const FactorGraph h(g.num_variables(), g.omega(), reversed);
  const auto a = gibbs_table(g).mu;
  const auto b = gibbs_table(h).mu;
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
}

TEST(Gibbs, LargeBetaDoesNotUnderflow) {
  // 60 constraints at beta = 20 put exp(-1200) weights on frustrated states.
  const FactorGraph g = sample_graph(fixtures::potts_spec(10, 12.0, 2, 20.0, 3));
  const auto t = gibbs_table(g);
  EXPECT_TRUE(std::isfinite(t.log_Z));
  double total = 0.0;
  for (double p : t.mu.probs()) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Gibbs, BudgetIsEnforced) {
  const FactorGraph g = fixtures::empty_graph(12, 4);
  Budget b;
  b.max_configurations = 1000;
  EXPECT_THROW(gibbs_table(g, b), BudgetExceeded);
}

TEST(Marginals, Basic) {
  const auto mu = gibbs_table(fixtures::g0()).mu;
  const auto m1 = marginal(mu, std::vector<int>{0});
  EXPECT_NEAR(m1[0], 0.5, 1e-15);
  EXPECT_NEAR(m1[1], 0.5, 1e-15);
  const auto all = marginal(mu, std::vector<int>{0, 1});
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(all[i], mu[i]);
  const auto none = marginal(mu, std::vector<int>{});
  ASSERT_EQ(none.size(), 1u);
  EXPECT_DOUBLE_EQ(none[0], 1.0);
  EXPECT_THROW(marginal(mu, std::vector<int>{2}), std::invalid_argument);

  const auto u = DenseMeasure::uniform(4, SpinDomain(3));
  const auto um = marginal(u, std::vector<int>{3, 1});
  for (double p : um.probs()) EXPECT_NEAR(p, 1.0 / 9, 1e-15);
}

TEST(Marginals, MatchOracleAndSumToOne) {
  const FactorGraph g = sample_graph(fixtures::potts_spec(6, 2.0, 3, 1.0, 5));
  const auto mu = gibbs_table(g).mu;
  const std::vector<double> ref_mu(mu.probs().begin(), mu.probs().end());
  const std::vector<std::vector<int>> sets{{0}, {5, 2}, {1, 3, 4}, {4, 0}};
  for (const auto& I : sets) {
    const auto m = marginal(mu, I);
    const auto ref = oracle::marginal(ref_mu, 6, 3, I);
    double total = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      EXPECT_NEAR(m[i], ref[i], 1e-14);
      total += m[i];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Condition, Subcube) {
  const auto mu = gibbs_table(fixtures::g0()).mu;
  const auto c = condition(mu, SubcubeEvent{{0}, {0}});
  EXPECT_NEAR(c[0], 1.0 / 3, 1e-15);
  EXPECT_NEAR(c[1], 2.0 / 3, 1e-15);
  EXPECT_EQ(c[2], 0.0);
  EXPECT_EQ(c[3], 0.0);

  const auto full = condition(mu, full_cube());
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(full[i], mu[i]);
}

TEST(Condition, ZeroMassFallsBackToUniform) {
  const std::vector<int> c11{1, 1};
  const auto delta = DenseMeasure::point_mass(2, SpinDomain(2), c11);
  const auto c = condition(delta, SubcubeEvent{{0}, {0}});
  EXPECT_DOUBLE_EQ(c[0], 0.5);
  EXPECT_DOUBLE_EQ(c[1], 0.5);
  EXPECT_EQ(c[2], 0.0);

  const auto e = condition(delta, make_event_set({0, 2}));
  EXPECT_DOUBLE_EQ(e[0], 0.5);
  EXPECT_DOUBLE_EQ(e[2], 0.5);
  EXPECT_THROW(condition(delta, EventSet{}), std::invalid_argument);
}

TEST(Condition, GeneralEventSet) {
  const auto mu = gibbs_table(fixtures::g0()).mu;
  const auto c = condition(mu, make_event_set({3, 0, 1}));
  EXPECT_NEAR(c[0], (1.0 / 6) / (2.0 / 3), 1e-15);
  EXPECT_NEAR(c[1], (1.0 / 3) / (2.0 / 3), 1e-15);
  EXPECT_EQ(c[2], 0.0);
  EXPECT_NEAR(c[3], (1.0 / 6) / (2.0 / 3), 1e-15);
}

TEST(Condition, PinnedGraphMatchesConditional) {
  CounterRng rng(99, 0);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const FactorGraph g = sample_graph(fixtures::potts_spec(5, 2.0, 2, 1.5, seed));
    const int size = 1 + static_cast<int>(rng.below(5));
    const auto I = sample_subset(5, size, rng);
    std::vector<int> sigma;
    for (std::size_t t = 0; t < I.size(); ++t) sigma.push_back(static_cast<int>(rng.below(2)));
    const auto a = gibbs_table(pin_graph(g, I, sigma)).mu;
    const auto b = condition(gibbs_table(g).mu, SubcubeEvent{I, sigma});
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(Events, SubcubeEnumerationOrder) {
  const ConfigSpace space(3, 3);
  std::vector<std::size_t> seen;
  for_each_in_event(SubcubeEvent{{1}, {2}}, space, [&](std::size_t i) { seen.push_back(i); });
  ASSERT_EQ(seen.size(), 9u);
  EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
  for (std::size_t i : seen) EXPECT_EQ(space.spin(i, 1), 2);
  EXPECT_EQ(event_size(full_cube(), space), 27u);
  EXPECT_THROW(validate_event(SubcubeEvent{{1, 1}, {0, 0}}, space), std::invalid_argument);
}
