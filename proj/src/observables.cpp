#include "bethelab/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bethelab {

void validate_observable(const IntensiveObservable& f, int n, int q) {
  if (f.index_sets.empty()) throw std::invalid_argument("observable: l must be >= 1");
  if (f.patterns.empty()) throw std::invalid_argument("observable: k must be >= 1");
  for (const auto& set : f.index_sets) {
    for (int i : set) {
      if (i < 0 || i >= n) throw std::invalid_argument("observable: index out of range");
    }
  }
  for (const auto& row : f.patterns) {
    if (row.size() != f.index_sets.size()) throw std::invalid_argument("observable: pattern length must equal l");
    for (int s : row) {
      if (s < 0 || s >= q) throw std::invalid_argument("observable: spin out of range");
    }
  }
}

const DenseMeasure& ObservableEvaluator::joint(const std::vector<int>& coords) {
  auto it = cache_.find(coords);
  if (it == cache_.end()) it = cache_.emplace(coords, marginal(*mu_, coords)).first;
  return it->second;
}

double ObservableEvaluator::average(const IntensiveObservable& f) {
  const int n = mu_->n();
  const int q = mu_->q();
  validate_observable(f, n, q);
  const std::size_t l = f.index_sets.size();
  for (const auto& set : f.index_sets) {
    if (set.empty()) return 0.0;
  }
  std::vector<std::size_t> pos(l, 0);
  std::vector<int> tuple(l);
  std::vector<int> coords;
  std::vector<int> spins;
  CompensatedSum total;
  while (true) {
    for (std::size_t t = 0; t < l; ++t) tuple[t] = f.index_sets[t][pos[t]];
    coords.assign(tuple.begin(), tuple.end());
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    const DenseMeasure& m = joint(coords);
    double prod = 1.0;
    for (const auto& row : f.patterns) {
      // A coordinate repeated in the tuple must carry one spin.
      spins.assign(coords.size(), -1);
      bool ok = true;
      for (std::size_t t = 0; t < l && ok; ++t) {
        const auto c = static_cast<std::size_t>(std::lower_bound(coords.begin(), coords.end(), tuple[t]) - coords.begin());
        if (spins[c] == -1) spins[c] = row[t];
        else ok = spins[c] == row[t];
      }
      prod *= ok ? m[m.space().index_of(spins)] : 0.0;
      if (prod == 0.0) break;
    }
    total.add(prod);
    std::size_t t = l;
    while (t > 0 && ++pos[t - 1] == f.index_sets[t - 1].size()) pos[--t] = 0;
    if (t == 0) break;
  }
  return total.value() / std::pow(static_cast<double>(n), static_cast<double>(l));
}

double observable_average(const DenseMeasure& mu, const IntensiveObservable& f) {
  return ObservableEvaluator(mu).average(f);
}

std::vector<IntensiveObservable> default_observable_family(int n, int q, int max_k, int max_l) {
  if (n < 1 || q < 2 || max_k < 1 || max_l < 1) throw std::invalid_argument("observable family: bad sizes");
  std::vector<std::vector<int>> sets(3);
  for (int i = 0; i < n; ++i) {
    sets[0].push_back(i);
    sets[i % 2 == 0 ? 1 : 2].push_back(i);  // 1-based odd, then even
  }
  if (sets[2].empty()) sets.pop_back();
  std::vector<IntensiveObservable> out;
  for (int k = 1; k <= max_k; ++k) {
    for (int l = 1; l <= max_l; ++l) {
      std::vector<std::size_t> choice(static_cast<std::size_t>(l), 0);
      while (true) {
        const std::size_t cells = static_cast<std::size_t>(k * l);
        std::vector<int> spin(cells, 0);
        while (true) {
          IntensiveObservable f;
          for (std::size_t t : choice) f.index_sets.push_back(sets[t]);
          for (int j = 0; j < k; ++j) {
            f.patterns.emplace_back(spin.begin() + j * l, spin.begin() + (j + 1) * l);
          }
          out.push_back(std::move(f));
          std::size_t c = cells;
          while (c > 0 && ++spin[c - 1] == q) spin[--c] = 0;
          if (c == 0) break;
        }
        std::size_t t = choice.size();
        while (t > 0 && ++choice[t - 1] == sets.size()) choice[--t] = 0;
        if (t == 0) break;
      }
    }
  }
  return out;
}

std::vector<double> OverlapDistribution::matrix(std::size_t atom) const {
  const auto& c = atoms.at(atom).counts;
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = static_cast<double>(c[i]) / n;
  return out;
}

OverlapDistribution overlap_distribution(const DenseMeasure& mu, const Budget& budget) {
  const int n = mu.n();
  const auto q = static_cast<std::size_t>(mu.q());
  const auto support = mu.support();
  const std::size_t s = support.size();
  if (s != 0 && s > budget.max_configurations / s) {
    throw BudgetExceeded("overlap_distribution: too many configuration pairs");
  }
  std::vector<std::vector<int>> configs;
  configs.reserve(s);
  for (std::size_t idx : support) configs.push_back(mu.space().config_of(idx));
  std::map<std::vector<int>, CompensatedSum> acc;
  std::vector<int> counts(q * q);
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = 0; b < s; ++b) {
      std::fill(counts.begin(), counts.end(), 0);
      for (int i = 0; i < n; ++i) {
        ++counts[static_cast<std::size_t>(configs[a][static_cast<std::size_t>(i)]) * q +
                 static_cast<std::size_t>(configs[b][static_cast<std::size_t>(i)])];
      }
      acc[counts].add(mu[support[a]] * mu[support[b]]);
    }
  }
  OverlapDistribution out;
  out.n = n;
  out.q = mu.q();
  for (auto& [key, w] : acc) out.atoms.push_back({key, w.value()});
  return out;
}

double overlap_d1(const OverlapDistribution& a, const OverlapDistribution& b) {
  if (a.n != b.n || a.q != b.q) throw std::invalid_argument("overlap_d1: shapes differ");
  std::vector<double> pw, qw, cost;
  for (const auto& atom : a.atoms) pw.push_back(atom.weight);
  for (const auto& atom : b.atoms) qw.push_back(atom.weight);
  cost.reserve(pw.size() * qw.size());
  for (const auto& x : a.atoms) {
    for (const auto& y : b.atoms) {
      long diff = 0;
      for (std::size_t i = 0; i < x.counts.size(); ++i) diff += std::labs(static_cast<long>(x.counts[i] - y.counts[i]));
      cost.push_back(static_cast<double>(diff) / (2.0 * a.n));
    }
  }
  return wasserstein_d1(pw, qw, cost);
}

ContinuityReport continuity_probe(const DenseMeasure& mu, const DenseMeasure& nu,
                                  const std::vector<IntensiveObservable>& family, CutMode mode,
                                  const CutOptions& options, const Budget& budget) {
  if (mu.n() != nu.n() || mu.q() != nu.q()) throw std::invalid_argument("continuity_probe: shapes differ");
  ContinuityReport rep;
  rep.cut = measured_cut(mu, nu, mode, options);
  ObservableEvaluator em(mu), en(nu);
  for (const auto& f : family) {
    rep.observable_gap = std::max(rep.observable_gap, std::abs(em.average(f) - en.average(f)));
  }
  rep.overlap_d1 = overlap_d1(overlap_distribution(mu, budget), overlap_distribution(nu, budget));
  return rep;
}

}  // namespace bethelab
