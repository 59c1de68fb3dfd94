#pragma once

// Factor graphs over a finite spin domain {0, ..., q-1}.
//
// Variables are 0-based in the C++ API; the JSON file format is 1-based.
// A constraint keeps its neighbor tuple in order (repeats allowed): weight
// evaluation uses the tuple, adjacency uses the underlying set.

#include <memory>
#include <span>
#include <vector>

namespace bethelab {

class SpinDomain {
 public:
  explicit SpinDomain(int q);

  int size() const noexcept { return q_; }
  friend bool operator==(const SpinDomain&, const SpinDomain&) = default;

 private:
  int q_;
};

/// A weight function Omega^k -> (0, inf), stored lexicographically with the
/// first argument most significant. Hard pins are the single exception to
/// positivity: unary 0/1 indicators created by `hard_pin`.
class WeightTable {
 public:
  WeightTable(int q, int arity, std::vector<double> values);

  static WeightTable hard_pin(int q, int spin);

  int q() const noexcept { return q_; }
  int arity() const noexcept { return arity_; }
  bool hard() const noexcept { return hard_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> log_values() const noexcept { return log_values_; }

  double at(std::size_t index) const { return values_.at(index); }
  double operator()(std::span<const int> spins) const;
  std::size_t index_of(std::span<const int> spins) const;

  /// For a hard pin, the prescribed spin; -1 otherwise.
  int pinned_spin() const noexcept { return pinned_spin_; }

 private:
  WeightTable() = default;

  int q_ = 0;
  int arity_ = 0;
  bool hard_ = false;
  int pinned_spin_ = -1;
  std::vector<double> values_;
  std::vector<double> log_values_;
};

using WeightRef = std::shared_ptr<const WeightTable>;

struct Constraint {
  std::vector<int> neighbors;
  WeightRef weight;
};

/// Immutable, validated factor graph G = (V, F, (da), (psi_a)).
class FactorGraph {
 public:
  FactorGraph(int n, SpinDomain omega, std::vector<Constraint> constraints);

  int num_variables() const noexcept { return n_; }
  int num_constraints() const noexcept {
    return static_cast<int>(constraints_.size());
  }
  const SpinDomain& omega() const noexcept { return omega_; }
  int q() const noexcept { return omega_.size(); }

  const Constraint& constraint(int a) const { return constraints_.at(a); }
  std::span<const Constraint> constraints() const noexcept {
    return constraints_;
  }

  /// Distinct neighbors of constraint a, in order of first appearance.
  std::span<const int> constraint_variables(int a) const {
    return constraint_vars_.at(a);
  }
  /// Constraints adjacent to variable x, ascending.
  std::span<const int> variable_constraints(int x) const {
    return variable_constraints_.at(x);
  }

  bool has_hard_pins() const noexcept { return has_hard_; }
  /// Number of (variable, constraint) incidences of the bipartite graph.
  int num_incidences() const noexcept { return num_incidences_; }

 private:
  int n_;
  SpinDomain omega_;
  std::vector<Constraint> constraints_;
  std::vector<std::vector<int>> constraint_vars_;
  std::vector<std::vector<int>> variable_constraints_;
  bool has_hard_ = false;
  int num_incidences_ = 0;
};

FactorGraph build_graph(int n, SpinDomain omega,
                        std::vector<Constraint> constraints);

/// G[U] together with the maps back into the parent graph.
struct Subgraph {
  FactorGraph graph;
  std::vector<int> variable_map;    // sub index -> parent variable
  std::vector<int> constraint_map;  // sub index -> parent constraint
};

/// Variables U (re-indexed in the given order) and every constraint a with
/// da contained in U.
Subgraph induced_subgraph(const FactorGraph& g, std::span<const int> U);

/// G with the listed constraint nodes deleted; variables are kept.
FactorGraph remove_constraints(const FactorGraph& g,
                               std::span<const int> constraints);

/// Variable-to-variable distances (half the bipartite distance); -1 when
/// unreachable.
std::vector<int> variable_distances(const FactorGraph& g, int u);

/// The depth-r neighborhood of u, ascending.
std::vector<int> neighborhood(const FactorGraph& g, int u, int r);

/// True when the bipartite incidence graph has no cycle.
bool is_acyclic(const FactorGraph& g);

/// Connected component label of every variable in the incidence graph.
std::vector<int> variable_components(const FactorGraph& g);

/// G^{I,sigma}: G plus one hard unary constraint per pinned variable.
FactorGraph pin_graph(const FactorGraph& g, std::span<const int> I,
                      std::span<const int> sigma);

}  // namespace bethelab
