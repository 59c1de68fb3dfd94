#pragma once

// Cavities, the Bethe local measure, Bethe-state deviations and the Potts
// neighborhood variant.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bethelab/graph.hpp"
#include "bethelab/measure.hpp"
#include "bethelab/messages.hpp"

namespace bethelab {

enum class CavityViolation { none, cyclic, multiple_anchors, shared_outside };
std::string to_string(CavityViolation v);

struct CavitySpec {
  std::vector<int> U;         // ascending
  std::vector<int> boundary;  // constraints touching U and its complement, ascending
  std::vector<int> anchors;   // anchors[t]: the variable of U in boundary[t]
  int components = 0;
  std::vector<int> Y;         // outside variables of boundary constraints, ascending
};

struct CavityCheck {
  CavityViolation violation = CavityViolation::none;
  std::optional<CavitySpec> spec;
};

/// Tests CAV1-3 in that order and reports the first failure.
CavityCheck is_cavity(const FactorGraph& g, std::span<const int> U);

struct CavityList {
  std::vector<CavitySpec> cavities;
  bool sampled = false;
};

/// C(G, l, r) when it has at most `limit` members; otherwise `limit` draws
/// (with replacement) from it by rejection over uniform l-subsets.
CavityList enumerate_cavities(const FactorGraph& g, int l, int r, std::size_t limit = 10000,
                              std::uint64_t seed = 0);

/// Internal Gibbs measure times the boundary messages, over Omega^U.
DenseMeasure bethe_local_measure(const FactorGraph& g, const CavitySpec& cav,
                                 const MessageSet& messages);
DenseMeasure bethe_local_measure(const FactorGraph& g, const CavitySpec& cav, const Event& S,
                                 const Budget& budget = {});

struct BetheDeviation {
  int l = 0;
  int r = 0;
  std::size_t n_cavities = 0;
  bool sampled = false;
  std::optional<double> deviation;  // empty when C(G, l, r) is empty
  std::vector<double> per_cavity;   // sum_sigma |mu_U - bar mu_U|
};

/// Shared state for repeated deviations of one (G, S).
struct BetheContext {
  const FactorGraph* graph;
  DenseMeasure conditional;  // mu_G[. | S]
  MessageSet messages;
};

BetheContext make_bethe_context(const FactorGraph& g, const Event& S, const Budget& budget = {});

double cavity_deviation(const BetheContext& ctx, const CavitySpec& cav);

BetheDeviation bethe_deviation(const BetheContext& ctx, int l, int r, std::size_t limit = 10000,
                               std::uint64_t seed = 0);
BetheDeviation bethe_deviation(const FactorGraph& g, int l, int r, const Event& S,
                               std::size_t limit = 10000, std::uint64_t seed = 0,
                               const Budget& budget = {});

struct BetheStateReport {
  bool is_bethe = true;
  std::vector<BetheDeviation> cells;  // 1 <= r <= l <= ell, by l then r
};

/// Strict comparison deviation < eps; empty cavity classes pass vacuously.
BetheStateReport is_bethe_state(const BetheContext& ctx, double epsilon, int ell,
                                std::size_t limit = 10000, std::uint64_t seed = 0);

/// TV between the joint law of Y in G minus the boundary constraints and the
/// product of its single-site laws, both given S. Zero when Y is empty.
double factorization_check(const FactorGraph& g, const CavitySpec& cav, const Event& S,
                           const Budget& budget = {});

struct PottsBetheReport {
  int r = 0;
  double local_score = 0.0;     // (1/n) sum_u TV(bar mu_{u,r}, mu_{nabla_{u,r}})
  double pairwise_score = 0.0;  // (1/n^2) sum_{v<w} TV(mu_vw, mu_v x mu_w)
  std::vector<double> per_vertex;
  int non_cavity = 0;           // vertices whose neighborhood is not a cavity
};

/// Requires every constraint to be a binary Potts table at inverse
/// temperature beta.
PottsBetheReport potts_bethe_suite(const FactorGraph& g, double beta, int r, const Event& S,
                                   const Budget& budget = {});

}  // namespace bethelab
