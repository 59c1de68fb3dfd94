#include "bethelab/random_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace bethelab {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed + kGolden) ^ mix64(stream * 0xD1B54A32D192ED03ULL + 1))) {}

std::uint64_t CounterRng::next() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("below: empty range");
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % bound;
}

std::uint64_t CounterRng::poisson(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("poisson: invalid mean");
  }
  // Split large means so exp(-lambda) stays representable.
  constexpr double kChunk = 500.0;
  std::uint64_t total = 0;
  while (lambda > 0.0) {
    const double part = std::min(lambda, kChunk);
    lambda -= part;
    const double u = uniform();
    double p = std::exp(-part);
    double cdf = p;
    std::uint64_t k = 0;
    while (u >= cdf) {
      ++k;
      p *= part / static_cast<double>(k);
      const double next_cdf = cdf + p;
      if (next_cdf == cdf) break;  // tail below rounding
      cdf = next_cdf;
    }
    total += k;
  }
  return total;
}

void WeightFamily::validate() const {
  if (tables.empty()) throw std::invalid_argument("weight family is empty");
  if (tables.size() != probs.size()) {
    throw std::invalid_argument("weight family: tables and probabilities differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (!tables[i]) throw std::invalid_argument("weight family: null table");
    if (tables[i]->arity() != tables.front()->arity() || tables[i]->q() != tables.front()->q()) {
      throw std::invalid_argument("weight family: tables must share arity and q");
    }
    if (!(probs[i] >= 0.0)) throw std::invalid_argument("weight family: negative probability");
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("weight family: probabilities must sum to 1");
  }
}

WeightFamily potts_family(int q, double beta) {
  if (q < 2) throw std::invalid_argument("potts_family: q must be >= 2");
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("potts_family: beta must be > 0");
  }
  std::vector<double> values(static_cast<std::size_t>(q * q), 1.0);
  for (int s = 0; s < q; ++s) {
    values[static_cast<std::size_t>(s * q + s)] = std::exp(-beta);
  }
  return WeightFamily{{std::make_shared<const WeightTable>(q, 2, std::move(values))}, {1.0}};
}

void require_potts(const FactorGraph& g, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("potts: beta must be > 0");
  const int q = g.q();
  const double diag = std::exp(-beta);
  for (const auto& c : g.constraints()) {
    if (c.neighbors.size() != 2 || c.weight->hard()) throw std::invalid_argument("potts: non-Potts constraint");
    const auto v = c.weight->values();
    for (int s = 0; s < q; ++s) {
      for (int t = 0; t < q; ++t) {
        const double want = s == t ? diag : 1.0;
        if (std::abs(v[static_cast<std::size_t>(s * q + t)] - want) > 1e-12 * want) {
          throw std::invalid_argument("potts: table does not match beta");
        }
      }
    }
  }
}

WeightFamily ksat_family(int k, double beta) {
  if (k < 2) throw std::invalid_argument("ksat_family: k must be >= 2");
  if (k > 20) throw std::invalid_argument("ksat_family: k too large");
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("ksat_family: beta must be > 0");
  }
  const std::size_t patterns = std::size_t{1} << k;
  const double scale = (1.0 - std::exp(-beta)) / static_cast<double>(patterns);
  auto as_sign = [](std::size_t bit) { return bit == 0 ? 1.0 : -1.0; };
  WeightFamily family;
  for (std::size_t xi = 0; xi < patterns; ++xi) {
    std::vector<double> values(patterns);
    for (std::size_t s = 0; s < patterns; ++s) {
      double prod = 1.0;
      for (int i = 0; i < k; ++i) {
        const std::size_t shift = static_cast<std::size_t>(k - 1 - i);
        prod *= 1.0 + as_sign((xi >> shift) & 1U) * as_sign((s >> shift) & 1U);
      }
      values[s] = 1.0 - scale * prod;
    }
    family.tables.push_back(std::make_shared<const WeightTable>(2, k, std::move(values)));
    family.probs.push_back(1.0 / static_cast<double>(patterns));
  }
  return family;
}

void ModelSpec::validate() const {
  if (n < 1) throw std::invalid_argument("model: n must be >= 1");
  if (d.has_value() == m.has_value()) {
    throw std::invalid_argument("model: exactly one of d or m must be set");
  }
  if (d && (!(*d > 0.0) || !std::isfinite(*d))) {
    throw std::invalid_argument("model: d must be > 0");
  }
  if (m && *m < 0) throw std::invalid_argument("model: m must be >= 0");
  family.validate();
  if (family.arity() != k) {
    throw std::invalid_argument("model: family arity " + std::to_string(family.arity()) +
                                " differs from k = " + std::to_string(k));
  }
}

FactorGraph sample_graph(const ModelSpec& spec) {
  spec.validate();
  std::uint64_t m = 0;
  if (spec.m) {
    m = static_cast<std::uint64_t>(*spec.m);
  } else {
    CounterRng rng(spec.seed, 0);
    m = rng.poisson(*spec.d * spec.n / spec.k);
  }
  std::vector<double> cdf(spec.family.probs.size());
  std::partial_sum(spec.family.probs.begin(), spec.family.probs.end(), cdf.begin());
  std::vector<Constraint> constraints;
  constraints.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    CounterRng rng(spec.seed, i + 1);
    Constraint c;
    c.neighbors.reserve(static_cast<std::size_t>(spec.k));
    for (int j = 0; j < spec.k; ++j) {
      c.neighbors.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.n))));
    }
    const double u = rng.uniform();
    std::size_t pick = 0;
    while (pick + 1 < cdf.size() && u >= cdf[pick]) ++pick;
    c.weight = spec.family.tables[pick];
    constraints.push_back(std::move(c));
  }
  return FactorGraph(spec.n, SpinDomain(spec.family.q()), std::move(constraints));
}

ConfigSampler::ConfigSampler(const DenseMeasure& mu) : cdf_(mu.size()) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    acc.add(mu[i]);
    cdf_[i] = acc.value();
  }
  if (std::abs(acc.value() - 1.0) > 1e-9) {
    throw std::invalid_argument("sample_config: measure is not normalized");
  }
}

std::size_t ConfigSampler::draw_index(CounterRng& rng) const {
  const double u = rng.uniform() * cdf_.back();
  // First index whose cumulative mass exceeds u; zero-mass entries never win.
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto idx = static_cast<std::size_t>(it - cdf_.begin());
  return std::min(idx, cdf_.size() - 1);
}

std::vector<int> sample_config(const DenseMeasure& mu, std::uint64_t seed) {
  ConfigSampler sampler(mu);
  CounterRng rng(seed, 0);
  return mu.space().config_of(sampler.draw_index(rng));
}

std::vector<std::size_t> sample_config_indices(const DenseMeasure& mu,
                                               std::uint64_t seed,
                                               std::size_t count) {
  ConfigSampler sampler(mu);
  CounterRng rng(seed, 0);
  std::vector<std::size_t> out(count);
  for (auto& idx : out) idx = sampler.draw_index(rng);
  return out;
}

std::vector<int> sample_subset(int n, int size, CounterRng& rng) {
  if (size < 0 || size > n) throw std::invalid_argument("sample_subset: bad size");
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  // Partial Fisher-Yates.
  for (int i = 0; i < size; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   rng.below(static_cast<std::uint64_t>(n - i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(size));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace bethelab
