#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bethelab {

/// Thrown when an exhaustive computation would exceed its configured budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a normalizing constant vanishes, which happens only when an
/// event is incompatible with the hard pins of a graph.
class ZeroNormalizer : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Limits for exhaustive enumeration over Omega^n.
struct Budget {
  std::size_t max_configurations = std::size_t{1} << 24;
};

/// q^n, saturating at SIZE_MAX.
std::size_t checked_power(std::size_t q, std::size_t n);

/// Throws BudgetExceeded if q^n is above the budget.
std::size_t require_enumerable(int q, int n, const Budget& budget,
                               const char* what);

/// Neumaier compensated accumulator; summation order stays fixed so results
/// are bitwise reproducible.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace bethelab
