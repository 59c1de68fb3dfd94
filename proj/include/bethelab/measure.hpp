#pragma once

// Dense probability tables over Omega^n and the events used to condition
// them. Configurations are indexed lexicographically with x_1 the most
// significant coordinate.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "bethelab/common.hpp"
#include "bethelab/graph.hpp"

namespace bethelab {

/// Bijection between configurations in Omega^n and indices 0..q^n-1.
class ConfigSpace {
 public:
  ConfigSpace(int n, int q);

  int n() const noexcept { return n_; }
  int q() const noexcept { return q_; }
  std::size_t size() const noexcept { return size_; }
  /// q^(n-1-i): weight of coordinate i in the index.
  std::size_t stride(int i) const { return strides_[static_cast<std::size_t>(i)]; }

  std::size_t index_of(std::span<const int> config) const;
  std::vector<int> config_of(std::size_t index) const;
  void decode(std::size_t index, std::span<int> out) const;
  int spin(std::size_t index, int i) const {
    return static_cast<int>((index / strides_[static_cast<std::size_t>(i)]) %
                            static_cast<std::size_t>(q_));
  }

 private:
  int n_;
  int q_;
  std::size_t size_;
  std::vector<std::size_t> strides_;
};

class DenseMeasure {
 public:
  /// Validates length q^n, non-negativity and normalization within 1e-9.
  DenseMeasure(int n, SpinDomain omega, std::vector<double> probs);

  static DenseMeasure uniform(int n, SpinDomain omega);
  static DenseMeasure point_mass(int n, SpinDomain omega,
                                 std::span<const int> config);
  /// Rescales non-negative weights to sum to one.
  static DenseMeasure from_weights(int n, SpinDomain omega,
                                   std::vector<double> weights);

  int n() const noexcept { return space_.n(); }
  int q() const noexcept { return omega_.size(); }
  const SpinDomain& omega() const noexcept { return omega_; }
  const ConfigSpace& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return probs_.size(); }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }

  /// Indices with strictly positive mass, ascending.
  std::vector<std::size_t> support() const;

 private:
  SpinDomain omega_;
  ConfigSpace space_;
  std::vector<double> probs_;
};

/// S^{I,sigma}; an empty I is the full cube.
struct SubcubeEvent {
  std::vector<int> I;
  std::vector<int> sigma;
};

/// An explicit set of configuration indices (sorted, unique).
struct EventSet {
  std::vector<std::size_t> indices;
};

using Event = std::variant<SubcubeEvent, EventSet>;

inline Event full_cube() { return SubcubeEvent{}; }

/// Throws std::invalid_argument if the event is malformed for the space.
void validate_event(const Event& event, const ConfigSpace& space);
/// Sorts and deduplicates an index list.
EventSet make_event_set(std::vector<std::size_t> indices);
EventSet expand_event(const Event& event, const ConfigSpace& space);
std::size_t event_size(const Event& event, const ConfigSpace& space);

/// Visits every configuration index of the event in increasing order.
template <class Fn>
void for_each_in_event(const Event& event, const ConfigSpace& space, Fn&& fn);

struct GibbsTable {
  double Z;
  double log_Z;
  DenseMeasure mu;
};

/// Exact partition function and Gibbs table by enumeration of Omega^n.
GibbsTable gibbs_table(const FactorGraph& g, const Budget& budget = {});

/// Joint law of the coordinates I (in the given order).
DenseMeasure marginal(const DenseMeasure& mu, std::span<const int> I);

/// mu[. | S]; zero-mass events fall back to the uniform law on S.
DenseMeasure condition(const DenseMeasure& mu, const Event& event);

/// mu(S).
double event_mass(const DenseMeasure& mu, const Event& event);

/// Product of per-variable marginals.
DenseMeasure product_of_marginals(const DenseMeasure& mu);

/// All single-site marginals, each a vector of length q.
std::vector<std::vector<double>> site_marginals(const DenseMeasure& mu);

// ---------------------------------------------------------------------------

template <class Fn>
void for_each_in_event(const Event& event, const ConfigSpace& space, Fn&& fn) {
  if (const auto* set = std::get_if<EventSet>(&event)) {
    for (std::size_t idx : set->indices) fn(idx);
    return;
  }
  const auto& cube = std::get<SubcubeEvent>(event);
  const int n = space.n();
  const std::size_t q = static_cast<std::size_t>(space.q());
  std::vector<char> pinned(static_cast<std::size_t>(n), 0);
  std::size_t base = 0;
  for (std::size_t t = 0; t < cube.I.size(); ++t) {
    pinned[static_cast<std::size_t>(cube.I[t])] = 1;
    base += space.stride(cube.I[t]) * static_cast<std::size_t>(cube.sigma[t]);
  }
  std::vector<int> free_vars;
  for (int i = 0; i < n; ++i) {
    if (!pinned[static_cast<std::size_t>(i)]) free_vars.push_back(i);
  }
  // Odometer over the free coordinates, least significant last.
  std::vector<std::size_t> digits(free_vars.size(), 0);
  std::size_t idx = base;
  while (true) {
    fn(idx);
    std::size_t pos = free_vars.size();
    while (pos > 0) {
      --pos;
      const std::size_t stride = space.stride(free_vars[pos]);
      if (digits[pos] + 1 < q) {
        ++digits[pos];
        idx += stride;
        break;
      }
      idx -= digits[pos] * stride;
      digits[pos] = 0;
      if (pos == 0) return;
    }
    if (free_vars.empty()) return;
  }
}

}  // namespace bethelab
