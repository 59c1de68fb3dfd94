#pragma once

// Internal helpers for exhaustive enumeration over Omega^n.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "bethelab/graph.hpp"
#include "bethelab/measure.hpp"

namespace bethelab::detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Evaluates log psi_a(sigma|_{da}) for every constraint from decoded spins.
class ConstraintEvaluator {
 public:
  explicit ConstraintEvaluator(const FactorGraph& g) : q_(g.q()) {
    for (const Constraint& c : g.constraints()) {
      neighbors_.push_back(c.neighbors);
      logs_.push_back(c.weight->log_values());
    }
  }

  std::size_t size() const noexcept { return logs_.size(); }

  double log_weight(std::size_t a, std::span<const int> spins) const {
    std::size_t idx = 0;
    for (int x : neighbors_[a]) {
      idx = idx * static_cast<std::size_t>(q_) +
            static_cast<std::size_t>(spins[static_cast<std::size_t>(x)]);
    }
    return logs_[a][idx];
  }

 private:
  int q_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::span<const double>> logs_;
};

/// Streaming log-sum-exp with a known upper reference; used in two passes so
/// the accumulation order is fixed.
inline double safe_exp_shift(double value, double shift) {
  if (value == kNegInf) return 0.0;
  return std::exp(value - shift);
}

}  // namespace bethelab::detail
