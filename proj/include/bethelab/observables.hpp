#pragma once

// Intensive observables, overlap distributions and continuity probes.

#include <map>
#include <vector>

#include "bethelab/cut_metric.hpp"
#include "bethelab/measure.hpp"
#include "bethelab/pinning.hpp"

namespace bethelab {

/// f(s^1..s^k) = n^-l sum_{i_1 in I_1, ..., i_l in I_l}
///   prod_j 1{s^j_{i_1} = patterns[j][0], ..., s^j_{i_l} = patterns[j][l-1]}.
struct IntensiveObservable {
  std::vector<std::vector<int>> index_sets;  // l sets
  std::vector<std::vector<int>> patterns;    // k rows of l spins

  int replicas() const { return static_cast<int>(patterns.size()); }
  int depth() const { return static_cast<int>(index_sets.size()); }
};

void validate_observable(const IntensiveObservable& f, int n, int q);

/// Exact <f> under mu^{x k}: one joint marginal per index tuple, raised to the
/// k-th power across independent replicas (patterns may differ per replica).
class ObservableEvaluator {
 public:
  explicit ObservableEvaluator(const DenseMeasure& mu) : mu_(&mu) {}
  double average(const IntensiveObservable& f);

 private:
  const DenseMeasure& joint(const std::vector<int>& coords);

  const DenseMeasure* mu_;
  std::map<std::vector<int>, DenseMeasure> cache_;
};

double observable_average(const DenseMeasure& mu, const IntensiveObservable& f);

/// All observables with k <= max_k, l <= max_l, index sets drawn from
/// {[n], odd positions, even positions} (1-based) and every spin pattern.
std::vector<IntensiveObservable> default_observable_family(int n, int q, int max_k = 2,
                                                           int max_l = 2);

struct OverlapAtom {
  std::vector<int> counts;  // q x q, row-major; entry / n is the overlap
  double weight = 0.0;
};

struct OverlapDistribution {
  int n = 0;
  int q = 0;
  std::vector<OverlapAtom> atoms;  // lexicographic by counts

  std::vector<double> matrix(std::size_t atom) const;
};

/// Law of rho_{sigma, tau} for sigma, tau independent from mu.
OverlapDistribution overlap_distribution(const DenseMeasure& mu, const Budget& budget = {});

/// D1 with the total variation ground metric on Omega x Omega.
double overlap_d1(const OverlapDistribution& a, const OverlapDistribution& b);

struct ContinuityReport {
  MeasuredCut cut;
  double observable_gap = 0.0;
  double overlap_d1 = 0.0;
};

ContinuityReport continuity_probe(const DenseMeasure& mu, const DenseMeasure& nu,
                                  const std::vector<IntensiveObservable>& family, CutMode mode,
                                  const CutOptions& options = {}, const Budget& budget = {});

}  // namespace bethelab
