#pragma once

// The message space M(G): for every incidence x in da, one distribution on
// Omega in each direction. Incidences are ordered by constraint, then by the
// first appearance of the variable in the neighbor tuple.

#include <cstddef>
#include <span>
#include <vector>

#include "bethelab/graph.hpp"
#include "bethelab/measure.hpp"

namespace bethelab {

struct Incidence {
  int variable;
  int constraint;
};

class MessageSet {
 public:
  /// Uniform messages on every incidence of g.
  explicit MessageSet(const FactorGraph& g);

  int q() const noexcept { return q_; }
  int num_variables() const noexcept { return n_; }
  std::size_t size() const noexcept { return incidences_.size(); }
  std::span<const Incidence> incidences() const noexcept { return incidences_; }

  /// Incidence id of (x, a), or -1.
  int find(int x, int a) const;

  /// nu_{x -> a}
  std::span<double> to_constraint(std::size_t i) {
    return {values_.data() + (2 * i) * q_, static_cast<std::size_t>(q_)};
  }
  std::span<const double> to_constraint(std::size_t i) const {
    return {values_.data() + (2 * i) * q_, static_cast<std::size_t>(q_)};
  }
  /// nu_{a -> x}
  std::span<double> to_variable(std::size_t i) {
    return {values_.data() + (2 * i + 1) * q_, static_cast<std::size_t>(q_)};
  }
  std::span<const double> to_variable(std::size_t i) const {
    return {values_.data() + (2 * i + 1) * q_, static_cast<std::size_t>(q_)};
  }

  /// Same incidence structure and spin count.
  bool compatible(const MessageSet& other) const;

  std::span<const double> raw() const noexcept { return values_; }

 private:
  int q_;
  int n_;
  std::vector<Incidence> incidences_;
  std::vector<int> first_of_constraint_;
  std::vector<double> values_;
};

/// Canonical (standard) messages of g given S: mu_{G,x->a}[.|S] is the
/// marginal of x in G - a, mu_{G,a->x}[.|S] the marginal of x once every
/// other constraint at x is removed. Throws ZeroNormalizer when S is
/// incompatible with the hard pins.
MessageSet standard_messages(const FactorGraph& g, const Event& S,
                             const Budget& budget = {});

}  // namespace bethelab
