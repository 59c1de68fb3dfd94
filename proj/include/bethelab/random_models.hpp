#pragma once

// Seeded generators for G(n, m, P) and G(n, Po(dn/k), P), plus the Potts and
// k-SAT weight families.
//
// k-SAT spins use the encoding 0 <-> +1, 1 <-> -1.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bethelab/graph.hpp"
#include "bethelab/measure.hpp"

namespace bethelab {

/// Counter-based generator: output i of stream s is a fixed function of
/// (seed, s, i), so independent objects draw from independent substreams
/// regardless of evaluation order.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next(); }

  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on {0, ..., bound-1}, unbiased.
  std::uint64_t below(std::uint64_t bound);
  /// Poisson(lambda) by inversion.
  std::uint64_t poisson(double lambda);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct WeightFamily {
  std::vector<WeightRef> tables;
  std::vector<double> probs;

  int arity() const { return tables.empty() ? 0 : tables.front()->arity(); }
  int q() const { return tables.empty() ? 0 : tables.front()->q(); }
  void validate() const;
};

/// psi(s1, s2) = exp(-beta 1{s1 = s2}), single table.
WeightFamily potts_family(int q, double beta);

/// 2^k clause tables psi_xi(s) = 1 - (1 - e^-beta) 2^-k prod(1 + xi_i s_i),
/// indexed lexicographically by the encoded sign pattern xi; uniform P.
WeightFamily ksat_family(int k, double beta);

/// Throws std::invalid_argument unless every constraint is a binary Potts
/// edge at inverse temperature beta.
void require_potts(const FactorGraph& g, double beta);

struct ModelSpec {
  int n = 0;
  int k = 2;
  std::optional<double> d;
  std::optional<int> m;
  WeightFamily family;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Stream 0 draws m when d is set; constraint i draws from stream i + 1.
FactorGraph sample_graph(const ModelSpec& spec);

/// Exact inverse-CDF sampling over a dense table.
class ConfigSampler {
 public:
  explicit ConfigSampler(const DenseMeasure& mu);
  std::size_t draw_index(CounterRng& rng) const;

 private:
  std::vector<double> cdf_;
};

std::vector<int> sample_config(const DenseMeasure& mu, std::uint64_t seed);
std::vector<std::size_t> sample_config_indices(const DenseMeasure& mu,
                                               std::uint64_t seed,
                                               std::size_t count);

/// Uniform subset of {0..n-1} of the given size, ascending.
std::vector<int> sample_subset(int n, int size, CounterRng& rng);

}  // namespace bethelab
