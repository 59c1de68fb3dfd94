#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "bethelab/cavity.hpp"
#include "bethelab/random_models.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bethelab;

namespace {

using Config = std::vector<int>;

// Literal CAV1-3 on the parent graph: builds G[U] by hand, then checks the
// three conditions in order.
CavityViolation literal_violation(const FactorGraph& g, const std::vector<int>& U) {
  std::vector<Constraint> inside;
  std::vector<int> index(static_cast<std::size_t>(g.num_variables()), -1);
  for (std::size_t t = 0; t < U.size(); ++t) index[static_cast<std::size_t>(U[t])] = static_cast<int>(t);
  for (const auto& c : g.constraints()) {
    bool all = true;
    for (int x : c.neighbors) all = all && oracle::contains(U, x);
    if (!all) continue;
    Constraint copy = c;
    for (int& x : copy.neighbors) x = index[static_cast<std::size_t>(x)];
    inside.push_back(copy);
  }
  if (!oracle::forest(FactorGraph(static_cast<int>(U.size()), g.omega(), inside))) return CavityViolation::cyclic;
  std::vector<std::set<int>> outside;
  for (const auto& c : g.constraints()) {
    std::set<int> in, out;
    for (int x : c.neighbors) (oracle::contains(U, x) ? in : out).insert(x);
    if (in.empty() || out.empty()) continue;
    if (in.size() > 1) return CavityViolation::multiple_anchors;
    outside.push_back(out);
  }
  for (std::size_t i = 0; i < outside.size(); ++i) {
    for (std::size_t j = i + 1; j < outside.size(); ++j) {
      for (int x : outside[i]) {
        if (outside[j].count(x)) return CavityViolation::shared_outside;
      }
    }
  }
  return CavityViolation::none;
}

// Components of G[U] by flood fill over shared internal constraints.
int literal_components(const FactorGraph& g, const std::vector<int>& U) {
  std::vector<int> label(U.size(), -1);
  int count = 0;
  for (std::size_t s = 0; s < U.size(); ++s) {
    if (label[s] != -1) continue;
    label[s] = count;
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& c : g.constraints()) {
        bool all = true, touches = false;
        for (int x : c.neighbors) {
          all = all && oracle::contains(U, x);
        }
        if (!all) continue;
        for (int x : c.neighbors) {
          const auto pos = static_cast<std::size_t>(std::find(U.begin(), U.end(), x) - U.begin());
          touches = touches || label[pos] == count;
        }
        if (!touches) continue;
        for (int x : c.neighbors) {
          const auto pos = static_cast<std::size_t>(std::find(U.begin(), U.end(), x) - U.begin());
          if (label[pos] != count) {
            label[pos] = count;
            grew = true;
          }
        }
      }
    }
    ++count;
  }
  return count;
}

// bar mu by brute force: internal constraints only, times messages obtained
// by deleting every other constraint at the anchor.
std::vector<double> literal_bar(const FactorGraph& g, const std::vector<int>& U,
                                const std::function<bool(const Config&)>& in_event) {
  const int q = g.q();
  const int l = static_cast<int>(U.size());
  auto internal = [&](int b) {
    for (int x : g.constraint(b).neighbors) {
      if (!oracle::contains(U, x)) return false;
    }
    return true;
  };
  const auto full = oracle::gibbs(g, internal);
  auto out = oracle::marginal(full, g.num_variables(), q, U);
  for (int a = 0; a < g.num_constraints(); ++a) {
    int anchor = -1;
    bool outside = false;
    for (int x : g.constraint(a).neighbors) {
      if (oracle::contains(U, x)) anchor = x;
      else outside = true;
    }
    if (anchor < 0 || !outside) continue;
    auto keep = [&](int b) {
      if (b == a) return true;
      return !oracle::contains(g.constraint(b).neighbors, anchor);
    };
    const auto msg = oracle::restricted_marginal(g, anchor, keep, in_event);
    const auto pos = static_cast<std::size_t>(std::find(U.begin(), U.end(), anchor) - U.begin());
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
      out[idx] *= msg[static_cast<std::size_t>(oracle::decode(idx, l, q)[pos])];
    }
  }
  return oracle::normalize(out);
}

std::vector<std::vector<int>> all_subsets(int n, int l) {
  std::vector<std::vector<int>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    if (std::popcount(mask) != l) continue;
    std::vector<int> U;
    for (int i = 0; i < n; ++i) {
      if (mask >> i & 1) U.push_back(i);
    }
    out.push_back(U);
  }
  std::sort(out.begin(), out.end());
  return out;
}

FactorGraph random_graph(int n, double d, std::uint64_t seed) {
  ModelSpec spec = fixtures::potts_spec(n, d, 2, 1.1, seed);
  if (seed % 2 == 1) {
    spec.k = 3;
    spec.family = ksat_family(3, 1.5);
  }
  return sample_graph(spec);
}

}  // namespace

TEST(Cavity, EmptyGraphExamples) {
  const auto e3 = fixtures::empty_graph(3);
  const auto two = enumerate_cavities(e3, 2, 2);
  ASSERT_EQ(two.cavities.size(), 3u);
  EXPECT_FALSE(two.sampled);
  EXPECT_EQ(two.cavities[0].U, (std::vector<int>{0, 1}));
  EXPECT_EQ(two.cavities[2].U, (std::vector<int>{1, 2}));
  EXPECT_TRUE(enumerate_cavities(e3, 2, 1).cavities.empty());
  EXPECT_THROW(enumerate_cavities(e3, 2, 3), std::invalid_argument);
  EXPECT_THROW(enumerate_cavities(e3, 4, 1), std::invalid_argument);
  EXPECT_THROW(enumerate_cavities(e3, 1, 0), std::invalid_argument);
}

TEST(Cavity, SingleEdge) {
  const auto check = is_cavity(fixtures::g0(), std::vector<int>{0});
  ASSERT_TRUE(check.spec);
  EXPECT_EQ(check.spec->boundary, (std::vector<int>{0}));
  EXPECT_EQ(check.spec->anchors, (std::vector<int>{0}));
  EXPECT_EQ(check.spec->components, 1);
  EXPECT_EQ(check.spec->Y, (std::vector<int>{1}));
}

TEST(Cavity, ViolationsAreNamed) {
  const auto t2 = fixtures::potts_table(2, 1.0);
  const FactorGraph shared(3, SpinDomain(2), {{{0, 2}, t2}, {{1, 2}, t2}});
  EXPECT_EQ(is_cavity(shared, std::vector<int>{0, 1}).violation, CavityViolation::shared_outside);

  const auto t3 = fixtures::table(2, 3, std::vector<double>(8, 1.0));
  const FactorGraph wide(3, SpinDomain(2), {{{0, 1, 2}, t3}});
  EXPECT_EQ(is_cavity(wide, std::vector<int>{0, 1}).violation, CavityViolation::multiple_anchors);

  const FactorGraph triangle(3, SpinDomain(2), {{{0, 1}, t2}, {{1, 2}, t2}, {{2, 0}, t2}});
  EXPECT_EQ(is_cavity(triangle, std::vector<int>{0, 1, 2}).violation, CavityViolation::cyclic);
  EXPECT_EQ(to_string(CavityViolation::cyclic), "CAV1");

  // Double edge between two variables: a cycle in the incidence graph.
  const FactorGraph twice(2, SpinDomain(2), {{{0, 1}, t2}, {{0, 1}, t2}});
  EXPECT_EQ(is_cavity(twice, std::vector<int>{0, 1}).violation, CavityViolation::cyclic);
}

TEST(Cavity, EnumerationMatchesLiteralDefinition) {
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    const FactorGraph g = random_graph(7, 2.0, seed);
    for (int l = 1; l <= 4; ++l) {
      for (int r = 1; r <= l; ++r) {
        std::vector<std::vector<int>> expected;
        for (const auto& U : all_subsets(7, l)) {
          const auto v = literal_violation(g, U);
          EXPECT_EQ(is_cavity(g, U).violation, v);
          if (v == CavityViolation::none && literal_components(g, U) == r) expected.push_back(U);
        }
        const auto got = enumerate_cavities(g, l, r);
        ASSERT_EQ(got.cavities.size(), expected.size()) << "seed " << seed << " l " << l << " r " << r;
        for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(got.cavities[i].U, expected[i]);
      }
    }
  }
}

TEST(Cavity, SamplingFallback) {
  const auto e = fixtures::empty_graph(8);
  const auto list = enumerate_cavities(e, 3, 3, 10, 4);
  EXPECT_TRUE(list.sampled);
  ASSERT_EQ(list.cavities.size(), 10u);
  for (const auto& c : list.cavities) {
    EXPECT_EQ(c.U.size(), 3u);
    EXPECT_EQ(c.components, 3);
  }
  // Exactly at the limit is still an exact enumeration.
  EXPECT_FALSE(enumerate_cavities(e, 3, 3, 56).sampled);
}

TEST(BetheLocal, Examples) {
  const auto g0 = fixtures::g0();
  const auto cav = *is_cavity(g0, std::vector<int>{0}).spec;
  const auto bar = bethe_local_measure(g0, cav, full_cube());
  EXPECT_NEAR(bar[0], 0.5, 1e-15);
  EXPECT_NEAR(bar[1], 0.5, 1e-15);

  const auto tree = fixtures::random_forest(6, 2, 1.5, potts_family(3, 1.0), 9);
  std::vector<int> all{0, 1, 2, 3, 4, 5};
  const auto whole = *is_cavity(tree, all).spec;
  EXPECT_TRUE(whole.boundary.empty());
  const auto bar_all = bethe_local_measure(tree, whole, full_cube());
  const auto mu = gibbs_table(tree).mu;
  for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_NEAR(bar_all[i], mu[i], 1e-13);

  const auto e3 = fixtures::empty_graph(3);
  const auto u = bethe_local_measure(e3, *is_cavity(e3, std::vector<int>{0, 2}).spec, full_cube());
  for (double p : u.probs()) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(BetheLocal, MatchesBruteForce) {
  CounterRng rng(5, 0);
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const FactorGraph g = random_graph(6, 1.5, 100 + seed);
    const auto I = sample_subset(6, 2, rng);
    const std::vector<int> sigma{static_cast<int>(rng.below(2)), static_cast<int>(rng.below(2))};
    const Event S = SubcubeEvent{I, sigma};
    auto in_event = [&](const Config& c) {
      return c[static_cast<std::size_t>(I[0])] == sigma[0] && c[static_cast<std::size_t>(I[1])] == sigma[1];
    };
    const auto messages = standard_messages(g, S);
    for (int l = 1; l <= 3; ++l) {
      for (int r = 1; r <= l; ++r) {
        for (const auto& cav : enumerate_cavities(g, l, r).cavities) {
          const auto bar = bethe_local_measure(g, cav, messages);
          const auto ref = literal_bar(g, cav.U, in_event);
          for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(bar[i], ref[i], 1e-12);
        }
      }
    }
  }
}

TEST(BetheDeviation, PathOfThree) {
  const auto path = fixtures::potts_path(3, 1.3);
  for (int l = 1; l <= 3; ++l) {
    const auto dev = bethe_deviation(path, l, 1, full_cube());
    ASSERT_TRUE(dev.deviation);
    EXPECT_NEAR(*dev.deviation, 0.0, 1e-12);
    for (const auto& cav : enumerate_cavities(path, l, 1).cavities) {
      EXPECT_NEAR(factorization_check(path, cav, full_cube()), 0.0, 1e-12);
    }
  }
  // {x1, x3}: the two anchors share the outside variable x2.
  EXPECT_FALSE(bethe_deviation(path, 2, 2, full_cube()).deviation);
}

TEST(BetheDeviation, ConnectedCavitiesOnForestsAreExact) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto fam = seed % 2 ? ksat_family(3, 1.2) : potts_family(2, 1.4);
    const FactorGraph g = fixtures::random_forest(9, seed % 2 ? 3 : 2, 1.5, fam, seed);
    const auto ctx = make_bethe_context(g, full_cube());
    for (int l = 1; l <= 5; ++l) {
      const auto dev = bethe_deviation(ctx, l, 1);
      if (dev.deviation) EXPECT_NEAR(*dev.deviation, 0.0, 1e-9);
    }
  }
}

TEST(BetheDeviation, SeparatedComponentsOnForestsAreExact) {
  // Components of U in different trees of G, or joined only through U.
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const FactorGraph g = fixtures::random_forest(9, 2, 1.5, potts_family(2, 1.4), 50 + seed);
    const auto ctx = make_bethe_context(g, full_cube());
    const auto label = variable_components(g);
    for (int l = 2; l <= 4; ++l) {
      for (int r = 2; r <= l; ++r) {
        for (const auto& cav : enumerate_cavities(g, l, r).cavities) {
          const auto sub = induced_subgraph(g, cav.U);
          const auto inner = variable_components(sub.graph);
          std::set<std::pair<int, int>> pairs;
          bool separated = true;
          for (std::size_t t = 0; t < cav.U.size(); ++t) {
            for (std::size_t s = 0; s < t; ++s) {
              if (inner[s] != inner[t] && label[static_cast<std::size_t>(cav.U[s])] ==
                                              label[static_cast<std::size_t>(cav.U[t])]) {
                separated = false;
              }
            }
          }
          if (!separated) continue;
          EXPECT_NEAR(cavity_deviation(ctx, cav), 0.0, 1e-9);
          EXPECT_NEAR(factorization_check(g, cav, full_cube()), 0.0, 1e-12);
        }
      }
    }
  }
}

TEST(BetheDeviation, TwoPiecesOfOneTreeAreCorrelated) {
  // x1 - x2 - x3 - x4 with U = {x1, x4}: a valid cavity whose two pieces
  // interact through x2 - x3, so neither the factorization nor the local
  // formula is exact even though the graph is a tree.
  const auto path = fixtures::potts_path(4, 1.5);
  const auto check = is_cavity(path, std::vector<int>{0, 3});
  ASSERT_TRUE(check.spec);
  EXPECT_EQ(check.spec->components, 2);
  EXPECT_EQ(check.spec->Y, (std::vector<int>{1, 2}));
  EXPECT_GT(factorization_check(path, *check.spec, full_cube()), 1e-3);
  const auto ctx = make_bethe_context(path, full_cube());
  EXPECT_GT(cavity_deviation(ctx, *check.spec), 1e-3);
}

TEST(BetheDeviation, TrivialCases) {
  const auto e = fixtures::empty_graph(4, 3);
  const auto ctx = make_bethe_context(e, full_cube());
  for (int l = 1; l <= 4; ++l) {
    for (int r = 1; r <= l; ++r) {
      const auto dev = bethe_deviation(ctx, l, r);
      if (r == l) {
        ASSERT_TRUE(dev.deviation);
        EXPECT_EQ(*dev.deviation, 0.0);
      } else {
        EXPECT_FALSE(dev.deviation);
        EXPECT_EQ(dev.n_cavities, 0u);
      }
    }
  }
  const auto rep = is_bethe_state(ctx, 1e-9, 3);
  EXPECT_TRUE(rep.is_bethe);
  EXPECT_EQ(rep.cells.size(), 6u);

  const auto g0 = fixtures::g0();
  const Event s00 = make_event_set({0});
  const auto dev = bethe_deviation(g0, 1, 1, s00);
  ASSERT_TRUE(dev.deviation);
  EXPECT_NEAR(*dev.deviation, 0.0, 1e-15);
  const auto pinned = fixtures::g0();
  EXPECT_THROW(make_bethe_context(pin_graph(pinned, std::vector<int>{0}, std::vector<int>{1}), s00),
               ZeroNormalizer);
}

TEST(Factorization, EmptyAndEmptyY) {
  const auto e = fixtures::empty_graph(4);
  for (const auto& cav : enumerate_cavities(e, 2, 2).cavities) {
    EXPECT_TRUE(cav.Y.empty());
    EXPECT_EQ(factorization_check(e, cav, full_cube()), 0.0);
  }
}

TEST(Factorization, ExactFactorizationGivesExactBetheMeasure) {
  // Pins are kept off U so that conditioning acts like outside unary factors.
  CounterRng rng(21, 0);
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FactorGraph g = random_graph(8, 1.0 + (seed % 3) * 0.5, 300 + seed);
    const auto I = sample_subset(8, 2, rng);
    const std::vector<int> sigma{static_cast<int>(rng.below(2)), static_cast<int>(rng.below(2))};
    const Event S = SubcubeEvent{I, sigma};
    const auto mu = gibbs_table(g).mu;
    if (!(event_mass(mu, S) > 0)) continue;
    const auto ctx = make_bethe_context(g, S);
    for (int l = 1; l <= 3; ++l) {
      for (int r = 1; r <= l; ++r) {
        for (const auto& cav : enumerate_cavities(g, l, r).cavities) {
          if (oracle::contains(cav.U, I[0]) || oracle::contains(cav.U, I[1])) continue;
          if (factorization_check(g, cav, S) >= 1e-9) continue;
          ++exact;
          EXPECT_LT(cavity_deviation(ctx, cav), 1e-6);
        }
      }
    }
  }
  EXPECT_GT(exact, 50);
}

TEST(PottsSuite, SingleEdge) {
  const auto g0 = fixtures::g0();
  const auto rep = potts_bethe_suite(g0, std::log(2.0), 0, full_cube());
  EXPECT_NEAR(rep.local_score, 0.0, 1e-12);
  // (1/4) * TV(mu_12, product) = (1/4) (1/6).
  EXPECT_NEAR(rep.pairwise_score, 1.0 / 24, 1e-14);
  EXPECT_EQ(rep.non_cavity, 0);

  const auto pinned = potts_bethe_suite(g0, std::log(2.0), 0, make_event_set({0}));
  EXPECT_NEAR(pinned.pairwise_score, 0.0, 1e-15);

  const auto e = potts_bethe_suite(fixtures::empty_graph(3), 1.0, 2, full_cube());
  EXPECT_EQ(e.local_score, 0.0);
  EXPECT_EQ(e.pairwise_score, 0.0);

  EXPECT_THROW(potts_bethe_suite(g0, 1.0, 0, full_cube()), std::invalid_argument);
  const auto t3 = fixtures::table(2, 3, std::vector<double>(8, 1.0));
  EXPECT_THROW(potts_bethe_suite(FactorGraph(3, SpinDomain(2), {{{0, 1, 2}, t3}}), 1.0, 0, full_cube()),
               std::invalid_argument);
}

TEST(PottsSuite, RadiusZeroUsesEdgeMessages) {
  // With r = 0 the local measure at u is the product over edges a = uw of
  // sum_t psi(s, t) mu_{w -> a}(t), up to normalization.
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const FactorGraph g = sample_graph(fixtures::potts_spec(6, 2.0, 3, 0.8, seed));
    const Event S = SubcubeEvent{{0}, {1}};
    const auto rep = potts_bethe_suite(g, 0.8, 0, S);
    const auto msgs = standard_messages(g, S);
    const auto cond = condition(gibbs_table(g).mu, S);
    for (int u = 0; u < 6; ++u) {
      std::vector<double> w(3, 1.0);
      for (int a : g.variable_constraints(u)) {
        const auto& nb = g.constraint(a).neighbors;
        if (nb[0] == nb[1]) continue;
        const int other = nb[0] == u ? nb[1] : nb[0];
        const auto m = msgs.to_constraint(static_cast<std::size_t>(msgs.find(other, a)));
        const auto psi = g.constraint(a).weight->values();
        for (int s = 0; s < 3; ++s) {
          double folded = 0.0;
          for (int t = 0; t < 3; ++t) folded += psi[static_cast<std::size_t>(s * 3 + t)] * m[static_cast<std::size_t>(t)];
          w[static_cast<std::size_t>(s)] *= folded;
        }
      }
      w = oracle::normalize(w);
      const auto truth = marginal(cond, std::vector<int>{u});
      const std::vector<double> t(truth.probs().begin(), truth.probs().end());
      EXPECT_NEAR(rep.per_vertex[static_cast<std::size_t>(u)], oracle::tv(w, t), 1e-12);
    }
  }
}

TEST(PottsSuite, TreesAreExactAtEveryRadius) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const FactorGraph g = fixtures::random_forest(8, 2, 1.6, potts_family(2, 1.2), 70 + seed);
    for (int r = 0; r <= 3; ++r) {
      const auto rep = potts_bethe_suite(g, 1.2, r, full_cube());
      EXPECT_NEAR(rep.local_score, 0.0, 1e-12);
    }
  }
}
