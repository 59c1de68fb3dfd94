#include "bethelab/common.hpp"

#include <limits>

namespace bethelab {

std::size_t checked_power(std::size_t q, std::size_t n) {
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  std::size_t result = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (q != 0 && result > kMax / q) return kMax;
    result *= q;
  }
  return result;
}

std::size_t require_enumerable(int q, int n, const Budget& budget,
                               const char* what) {
  const std::size_t size = checked_power(static_cast<std::size_t>(q),
                                         static_cast<std::size_t>(n));
  if (size > budget.max_configurations) {
    throw BudgetExceeded(std::string(what) + ": q^n = " +
                         (size == std::numeric_limits<std::size_t>::max()
                              ? std::string("overflow")
                              : std::to_string(size)) +
                         " exceeds the enumeration budget of " +
                         std::to_string(budget.max_configurations));
  }
  return size;
}

}  // namespace bethelab
