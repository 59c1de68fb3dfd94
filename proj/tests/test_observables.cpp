#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "bethelab/observables.hpp"
#include "bethelab/random_models.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace bethelab;

namespace {

// f evaluated literally on k configurations.
double literal_f(const IntensiveObservable& f, const std::vector<oracle::Config>& reps, int n) {
  const std::size_t l = f.index_sets.size();
  std::vector<std::size_t> pos(l, 0);
  double total = 0.0;
  for (;;) {
    double prod = 1.0;
    for (std::size_t j = 0; j < reps.size(); ++j) {
      for (std::size_t t = 0; t < l; ++t) {
        const int i = f.index_sets[t][pos[t]];
        if (reps[j][static_cast<std::size_t>(i)] != f.patterns[j][t]) prod = 0.0;
      }
    }
    total += prod;
    std::size_t t = l;
    while (t > 0 && ++pos[t - 1] == f.index_sets[t - 1].size()) pos[--t] = 0;
    if (t == 0) break;
  }
  return total / std::pow(n, static_cast<double>(l));
}

// <f> by enumerating (Omega^n)^k.
double literal_average(const DenseMeasure& mu, const IntensiveObservable& f) {
  const int n = mu.n();
  const int q = mu.q();
  const int k = f.replicas();
  const std::size_t size = mu.size();
  double total = 0.0;
  std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
  for (;;) {
    double w = 1.0;
    std::vector<oracle::Config> reps;
    for (std::size_t i : idx) {
      w *= mu[i];
      reps.push_back(oracle::decode(i, n, q));
    }
    if (w > 0) total += w * literal_f(f, reps, n);
    std::size_t t = idx.size();
    while (t > 0 && ++idx[t - 1] == size) idx[--t] = 0;
    if (t == 0) break;
  }
  return total;
}

// Overlap law by direct pair enumeration, keyed by the rounded matrix.
std::map<std::vector<long>, double> literal_overlap(const DenseMeasure& mu) {
  const int n = mu.n();
  const int q = mu.q();
  std::map<std::vector<long>, double> out;
  for (std::size_t a = 0; a < mu.size(); ++a) {
    for (std::size_t b = 0; b < mu.size(); ++b) {
      const auto s = oracle::decode(a, n, q);
      const auto t = oracle::decode(b, n, q);
      std::vector<long> key(static_cast<std::size_t>(q * q), 0);
      for (int i = 0; i < n; ++i) ++key[static_cast<std::size_t>(s[static_cast<std::size_t>(i)] * q + t[static_cast<std::size_t>(i)])];
      if (mu[a] * mu[b] > 0) out[key] += mu[a] * mu[b];
    }
  }
  return out;
}

DenseMeasure random_measure(int n, int q, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  std::vector<double> w(oracle::power(q, n));
  for (double& x : w) x = rng.uniform();
  return DenseMeasure::from_weights(n, SpinDomain(q), std::move(w));
}

}  // namespace

TEST(Observables, Examples) {
  IntensiveObservable f{{{0, 1, 2}}, {{0}}};
  EXPECT_NEAR(observable_average(DenseMeasure::uniform(3, SpinDomain(2)), f), 0.5, 1e-15);
  const std::vector<int> zeros{0, 0, 0};
  EXPECT_NEAR(observable_average(DenseMeasure::point_mass(3, SpinDomain(2), zeros), f), 1.0, 1e-15);

  const auto mu = gibbs_table(fixtures::g0()).mu;
  IntensiveObservable two{{{0, 1}}, {{0}, {0}}};
  EXPECT_NEAR(observable_average(mu, two), 0.25, 1e-15);

  IntensiveObservable bad{{{0, 5}}, {{0}}};
  EXPECT_THROW(observable_average(mu, bad), std::invalid_argument);
  IntensiveObservable ragged{{{0}}, {{0, 1}}};
  EXPECT_THROW(observable_average(mu, ragged), std::invalid_argument);
}

TEST(Observables, MatchBruteForce) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto mu = random_measure(3, 2 + static_cast<int>(seed % 2), seed);
    const auto family = default_observable_family(3, mu.q(), 2, 2);
    ObservableEvaluator ev(mu);
    for (std::size_t i = 0; i < family.size(); i += 7) {
      const double v = ev.average(family[i]);
      EXPECT_NEAR(v, literal_average(mu, family[i]), 1e-13);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    // Depth three with a repeated coordinate.
    IntensiveObservable deep{{{0, 1}, {1}, {0, 2}}, {{1, 0, 1}}};
    EXPECT_NEAR(ev.average(deep), literal_average(mu, deep), 1e-13);
  }
}

TEST(Observables, DefaultFamilyShape) {
  // q = 2, sets {[n], odd, even}: k=1,l=1: 3*2; k=1,l=2: 9*4; k=2,l=1: 3*4;
  // k=2,l=2: 9*16.
  EXPECT_EQ(default_observable_family(4, 2).size(), 6u + 36u + 12u + 144u);
  const auto single = default_observable_family(1, 2, 1, 1);
  EXPECT_EQ(single.size(), 4u);  // {[1], odd} and two spins
}

TEST(Overlap, Examples) {
  const std::vector<int> c{0, 1, 1};
  const auto delta = overlap_distribution(DenseMeasure::point_mass(3, SpinDomain(2), c));
  ASSERT_EQ(delta.atoms.size(), 1u);
  EXPECT_EQ(delta.atoms[0].counts, (std::vector<int>{1, 0, 0, 2}));
  EXPECT_DOUBLE_EQ(delta.atoms[0].weight, 1.0);

  const auto u = overlap_distribution(DenseMeasure::uniform(1, SpinDomain(2)));
  ASSERT_EQ(u.atoms.size(), 4u);
  for (const auto& a : u.atoms) EXPECT_DOUBLE_EQ(a.weight, 0.25);

  const auto g0 = overlap_distribution(gibbs_table(fixtures::g0()).mu);
  double total = 0.0;
  for (const auto& a : g0.atoms) total += a.weight;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Overlap, MatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto mu = random_measure(3, 3, 50 + seed);
    const auto od = overlap_distribution(mu);
    const auto ref = literal_overlap(mu);
    ASSERT_EQ(od.atoms.size(), ref.size());
    std::size_t i = 0;
    for (const auto& [key, w] : ref) {
      for (std::size_t e = 0; e < key.size(); ++e) EXPECT_EQ(od.atoms[i].counts[e], key[e]);
      EXPECT_NEAR(od.atoms[i].weight, w, 1e-14);
      ++i;
    }
    EXPECT_NEAR(overlap_d1(od, od), 0.0, 1e-12);
  }
}

TEST(Overlap, ProductMeasureConcentrates) {
  // Entry variance of rho under O_mu is O(1/n) for products.
  for (int n : {4, 8}) {
    std::vector<std::vector<double>> marg(static_cast<std::size_t>(n), {0.3, 0.7});
    const auto mu = product_measure(SpinDomain(2), marg);
    const auto od = overlap_distribution(mu);
    for (std::size_t e = 0; e < 4; ++e) {
      double m1 = 0, m2 = 0;
      for (std::size_t a = 0; a < od.atoms.size(); ++a) {
        const double x = od.matrix(a)[e];
        m1 += od.atoms[a].weight * x;
        m2 += od.atoms[a].weight * x * x;
      }
      const double p = (e == 0 ? 0.09 : e == 3 ? 0.49 : 0.21);
      // Sites are iid, so the variance is exactly p (1 - p) / n.
      EXPECT_NEAR(m2 - m1 * m1, p * (1 - p) / n, 1e-12);
    }
  }
}

TEST(Continuity, Examples) {
  const auto mu = random_measure(3, 2, 9);
  const auto family = default_observable_family(3, 2);
  const auto same = continuity_probe(mu, mu, family, CutMode::exact);
  EXPECT_NEAR(same.cut.value, 0.0, 1e-12);
  EXPECT_EQ(same.observable_gap, 0.0);
  EXPECT_NEAR(same.overlap_d1, 0.0, 1e-12);

  const std::vector<int> a{0, 0, 0, 0}, b{0, 1, 0, 0};
  const auto da = DenseMeasure::point_mass(4, SpinDomain(2), a);
  const auto db = DenseMeasure::point_mass(4, SpinDomain(2), b);
  const auto fam4 = default_observable_family(4, 2);
  const auto rep = continuity_probe(da, db, fam4, CutMode::exact);
  EXPECT_NEAR(rep.cut.value, 0.25, 1e-12);
  EXPECT_LE(rep.observable_gap, 2.0 / 4 + 1e-15);
  // Overlaps of two point masses are point masses; they differ by 1/4 in TV.
  EXPECT_NEAR(rep.overlap_d1, 0.25, 1e-12);
  for (const auto& f : fam4) {
    const double gap = std::abs(observable_average(da, f) - observable_average(db, f));
    EXPECT_LE(gap, static_cast<double>(f.depth()) / 4 + 1e-15);
  }
}

TEST(Continuity, GoldenTriple) {
  const auto mu = gibbs_table(fixtures::g0()).mu;
  const auto prod = product_of_marginals(mu);
  const auto rep = continuity_probe(mu, prod, default_observable_family(2, 2), CutMode::exact);
  EXPECT_NEAR(rep.cut.value, 1.0 / 24, 1e-9);
  // Largest gap: f = n^-2 sum_{i,j} 1{s_i = 0, s_j = 1}: 1/2 (1/3) vs 1/2 (1/4).
  EXPECT_NEAR(rep.observable_gap, 1.0 / 24, 1e-14);
  // Overlap atoms are distributions of the diagonal/off-diagonal agreement
  // count; the brute-force transport value.
  const auto a = literal_overlap(mu);
  const auto b = literal_overlap(prod);
  std::vector<double> pw, qw, cost;
  for (const auto& [k, w] : a) pw.push_back(w);
  for (const auto& [k, w] : b) qw.push_back(w);
  for (const auto& [ka, wa] : a) {
    for (const auto& [kb, wb] : b) {
      double d = 0;
      for (std::size_t e = 0; e < ka.size(); ++e) d += std::abs(static_cast<double>(ka[e] - kb[e])) / 2;
      cost.push_back(d / 2);
    }
  }
  EXPECT_NEAR(rep.overlap_d1, wasserstein_d1(pw, qw, cost), 1e-12);
}

TEST(Continuity, ExactCoincidenceCorner) {
  // Pairs built to coincide through different routes give zero everywhere.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FactorGraph g = sample_graph(fixtures::potts_spec(4, 2.0, 2, 1.0, seed));
    const auto mu = gibbs_table(g).mu;
    std::vector<Constraint> rev(g.constraints().rbegin(), g.constraints().rend());
    const auto nu = gibbs_table(FactorGraph(4, g.omega(), rev)).mu;
    const auto rep = continuity_probe(mu, nu, default_observable_family(4, 2), CutMode::exact);
    ASSERT_LT(rep.cut.value, 1e-9);
    EXPECT_LT(rep.observable_gap, 1e-6);
    EXPECT_LT(rep.overlap_d1, 1e-6);
  }
}
