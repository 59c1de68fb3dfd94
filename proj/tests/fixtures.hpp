#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "bethelab/graph.hpp"
#include "bethelab/random_models.hpp"

namespace fixtures {

using namespace bethelab;

inline WeightRef table(int q, int arity, std::vector<double> values) {
  return std::make_shared<const WeightTable>(q, arity, std::move(values));
}

inline WeightRef potts_table(int q, double beta) {
  return potts_family(q, beta).tables.front();
}

/// Two binary variables joined by one Potts edge at beta = ln 2.
inline FactorGraph g0() {
  return FactorGraph(2, SpinDomain(2), {{{0, 1}, table(2, 2, {0.5, 1.0, 1.0, 0.5})}});
}

inline FactorGraph empty_graph(int n, int q = 2) {
  return FactorGraph(n, SpinDomain(q), {});
}

/// x1 - a - x2 - b - x3 with Potts edges.
inline FactorGraph potts_path(int n, double beta, int q = 2) {
  std::vector<Constraint> cs;
  for (int i = 0; i + 1 < n; ++i) cs.push_back({{i, i + 1}, potts_table(q, beta)});
  return FactorGraph(n, SpinDomain(q), std::move(cs));
}

/// Random graph from the sparse model, resampled until the incidence graph is
/// a forest.
inline FactorGraph random_forest(int n, int k, double d, const WeightFamily& family,
                                 std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    ModelSpec spec;
    spec.n = n;
    spec.k = k;
    spec.d = d;
    spec.family = family;
    spec.seed = seed * 1000003ULL + attempt;
    FactorGraph g = sample_graph(spec);
    if (is_acyclic(g)) return g;
  }
}

inline ModelSpec potts_spec(int n, double d, int q, double beta, std::uint64_t seed) {
  ModelSpec spec;
  spec.n = n;
  spec.k = 2;
  spec.d = d;
  spec.family = potts_family(q, beta);
  spec.seed = seed;
  return spec;
}

}  // namespace fixtures
