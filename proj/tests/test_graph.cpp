#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "bethelab/graph.hpp"
#include "bethelab/measure.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bethelab;
using fixtures::g0;
using fixtures::table;

TEST(Graph, BuildsTwoVariableEdge) {
  const FactorGraph g = g0();
  EXPECT_EQ(g.num_variables(), 2);
  EXPECT_EQ(g.num_constraints(), 1);
  EXPECT_EQ(g.q(), 2);
  ASSERT_EQ(g.variable_constraints(0).size(), 1u);
  EXPECT_EQ(g.num_incidences(), 2);
}

TEST(Graph, RejectsBadInput) {
  EXPECT_THROW(SpinDomain(1), std::invalid_argument);
  try {
    FactorGraph(3, SpinDomain(2), {{{0, 3}, table(2, 2, {1, 1, 1, 1})}});
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("index out of range"), std::string::npos);
  }
  try {
    FactorGraph(3, SpinDomain(2), {{{0, 1, 2}, table(2, 2, {1, 1, 1, 1})}});
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("arity mismatch"), std::string::npos);
  }
  try {
    table(2, 2, {1, 0, 1, 1});
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("non-positive weight"), std::string::npos);
  }
  EXPECT_THROW(build_graph(0, SpinDomain(2), {}), std::invalid_argument);
}

TEST(Graph, EmptyGraphHasInfiniteDistances) {
  const FactorGraph e3 = fixtures::empty_graph(3);
  const auto d = variable_distances(e3, 0);
  EXPECT_EQ(d[0], 0);
  EXPECT_EQ(d[1], -1);
  EXPECT_EQ(d[2], -1);
}

TEST(Graph, RepeatedNeighborsFormOneAdjacency) {
  const FactorGraph g(2, SpinDomain(2), {{{1, 1}, table(2, 2, {1, 2, 3, 4})}});
  ASSERT_EQ(g.constraint_variables(0).size(), 1u);
  EXPECT_EQ(g.constraint_variables(0)[0], 1);
  EXPECT_TRUE(is_acyclic(g));
  // Evaluation still uses the tuple: (1,1) picks the last entry.
  const auto mu = gibbs_table(g).mu;
  EXPECT_NEAR(mu[0], 1.0 / 10, 1e-15);
  EXPECT_NEAR(mu[1], 4.0 / 10, 1e-15);
}

TEST(Graph, InducedSubgraph) {
  const FactorGraph g = g0();
  const std::vector<int> one{0};
  const Subgraph s1 = induced_subgraph(g, one);
  EXPECT_EQ(s1.graph.num_variables(), 1);
  EXPECT_EQ(s1.graph.num_constraints(), 0);
  const std::vector<int> both{0, 1};
  const Subgraph s2 = induced_subgraph(g, both);
  EXPECT_EQ(s2.graph.num_constraints(), 1);
  EXPECT_EQ(s2.variable_map, both);

  const FactorGraph path = fixtures::potts_path(3, 1.0);
  const Subgraph s3 = induced_subgraph(path, both);
  EXPECT_EQ(s3.graph.num_variables(), 2);
  ASSERT_EQ(s3.constraint_map.size(), 1u);
  EXPECT_EQ(s3.constraint_map[0], 0);
  EXPECT_THROW(induced_subgraph(g, std::vector<int>{}), std::invalid_argument);
}

TEST(Graph, InducedOnAllVariablesReproducesGraph) {
  const FactorGraph g = fixtures::random_forest(7, 2, 1.0, potts_family(3, 0.7), 4);
  std::vector<int> all(7);
  std::iota(all.begin(), all.end(), 0);
  const Subgraph s = induced_subgraph(g, all);
  EXPECT_EQ(s.graph.num_constraints(), g.num_constraints());
  const auto a = gibbs_table(g).mu;
  const auto b = gibbs_table(s.graph).mu;
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_DOUBLE_EQ(a[i], b[i]);
}

TEST(Graph, Neighborhoods) {
  const FactorGraph g = g0();
  EXPECT_EQ(neighborhood(g, 0, 0), std::vector<int>({0}));
  EXPECT_EQ(neighborhood(g, 0, 1), std::vector<int>({0, 1}));
  const FactorGraph path = fixtures::potts_path(3, 1.0);
  EXPECT_EQ(neighborhood(path, 1, 1), std::vector<int>({0, 1, 2}));
  EXPECT_EQ(neighborhood(path, 0, 1), std::vector<int>({0, 1}));
  EXPECT_THROW(neighborhood(path, 0, -1), std::invalid_argument);
  EXPECT_THROW(neighborhood(path, 5, 1), std::invalid_argument);
}

TEST(Graph, NeighborhoodMonotoneAndStabilizes) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FactorGraph g = sample_graph(fixtures::potts_spec(12, 1.5, 2, 1.0, seed));
    const auto comp = variable_components(g);
    for (int u = 0; u < g.num_variables(); ++u) {
      std::vector<int> prev;
      for (int r = 0; r <= g.num_variables(); ++r) {
        const auto cur = neighborhood(g, u, r);
        EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
        prev = cur;
      }
      std::vector<int> component;
      for (int v = 0; v < g.num_variables(); ++v) {
        if (comp[static_cast<std::size_t>(v)] == comp[static_cast<std::size_t>(u)]) component.push_back(v);
      }
      EXPECT_EQ(prev, component);
    }
  }
}

TEST(Graph, AcyclicityAgreesWithCycleSearch) {
  int acyclic = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ModelSpec spec = fixtures::potts_spec(8, 0.3 + 0.01 * static_cast<double>(seed), 2, 1.0, seed);
    if (seed % 2 == 1) {
      spec.k = 3;
      spec.family = ksat_family(3, 1.0);
    }
    const FactorGraph g = sample_graph(spec);
    EXPECT_EQ(is_acyclic(g), oracle::forest(g)) << "seed " << seed;
    acyclic += is_acyclic(g) ? 1 : 0;
  }
  EXPECT_GT(acyclic, 10);
  EXPECT_LT(acyclic, 190);
}

TEST(Graph, PinnedGibbsEqualsConditional) {
  const FactorGraph g = g0();
  const std::vector<int> I{0};
  const std::vector<int> sigma{0};
  const auto pinned = gibbs_table(pin_graph(g, I, sigma)).mu;
  EXPECT_NEAR(pinned[0], 1.0 / 3, 1e-15);
  EXPECT_NEAR(pinned[1], 2.0 / 3, 1e-15);
  EXPECT_EQ(pinned[2], 0.0);
  EXPECT_EQ(pinned[3], 0.0);

  const FactorGraph unchanged = pin_graph(g, std::vector<int>{}, std::vector<int>{});
  EXPECT_EQ(unchanged.num_constraints(), 1);

  const FactorGraph e3 = fixtures::empty_graph(3);
  const std::vector<int> all{0, 1, 2};
  const std::vector<int> s010{0, 1, 0};
  const auto point = gibbs_table(pin_graph(e3, all, s010));
  EXPECT_DOUBLE_EQ(point.Z, 1.0);
  EXPECT_EQ(point.mu[2], 1.0);
  EXPECT_THROW(pin_graph(g, I, std::vector<int>{0, 1}), std::invalid_argument);
}

TEST(Graph, ConflictingPinsHaveZeroPartitionFunction) {
  const FactorGraph g = g0();
  const FactorGraph once = pin_graph(g, std::vector<int>{0}, std::vector<int>{0});
  const FactorGraph twice = pin_graph(once, std::vector<int>{0}, std::vector<int>{1});
  EXPECT_THROW(gibbs_table(twice), ZeroNormalizer);
}
