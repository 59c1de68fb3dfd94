#include "bethelab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>

namespace bethelab {

SpinDomain::SpinDomain(int q) : q_(q) {
  if (q < 2) {
    throw std::invalid_argument("spin domain needs at least two spins, got " +
                                std::to_string(q));
  }
}

WeightTable::WeightTable(int q, int arity, std::vector<double> values)
    : q_(q), arity_(arity), values_(std::move(values)) {
  if (q < 2) throw std::invalid_argument("weight table: q must be >= 2");
  if (arity < 1) throw std::invalid_argument("weight table: arity must be >= 1");
  std::size_t expected = 1;
  for (int i = 0; i < arity; ++i) expected *= static_cast<std::size_t>(q);
  if (values_.size() != expected) {
    throw std::invalid_argument("weight table: expected " +
                                std::to_string(expected) + " values, got " +
                                std::to_string(values_.size()));
  }
  log_values_.reserve(values_.size());
  for (double v : values_) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw std::invalid_argument("non-positive weight " + std::to_string(v) +
                                  " (only hard pins may vanish)");
    }
    log_values_.push_back(std::log(v));
  }
}

WeightTable WeightTable::hard_pin(int q, int spin) {
  if (q < 2) throw std::invalid_argument("hard pin: q must be >= 2");
  if (spin < 0 || spin >= q) {
    throw std::invalid_argument("hard pin: spin " + std::to_string(spin) +
                                " outside the domain");
  }
  WeightTable t;
  t.q_ = q;
  t.arity_ = 1;
  t.hard_ = true;
  t.pinned_spin_ = spin;
  t.values_.assign(static_cast<std::size_t>(q), 0.0);
  t.values_[static_cast<std::size_t>(spin)] = 1.0;
  t.log_values_.assign(static_cast<std::size_t>(q),
                       -std::numeric_limits<double>::infinity());
  t.log_values_[static_cast<std::size_t>(spin)] = 0.0;
  return t;
}

std::size_t WeightTable::index_of(std::span<const int> spins) const {
  if (static_cast<int>(spins.size()) != arity_) {
    throw std::invalid_argument("weight table: wrong number of arguments");
  }
  std::size_t idx = 0;
  for (int s : spins) {
    if (s < 0 || s >= q_) throw std::invalid_argument("weight table: bad spin");
    idx = idx * static_cast<std::size_t>(q_) + static_cast<std::size_t>(s);
  }
  return idx;
}

double WeightTable::operator()(std::span<const int> spins) const {
  return values_[index_of(spins)];
}

FactorGraph::FactorGraph(int n, SpinDomain omega,
                         std::vector<Constraint> constraints)
    : n_(n), omega_(omega), constraints_(std::move(constraints)) {
  if (n < 0) throw std::invalid_argument("number of variables must be >= 0");
  variable_constraints_.resize(static_cast<std::size_t>(n));
  constraint_vars_.reserve(constraints_.size());
  for (std::size_t a = 0; a < constraints_.size(); ++a) {
    const Constraint& c = constraints_[a];
    if (!c.weight) {
      throw std::invalid_argument("constraint " + std::to_string(a + 1) +
                                  " has no weight table");
    }
    if (c.weight->q() != omega_.size()) {
      throw std::invalid_argument("constraint " + std::to_string(a + 1) +
                                  ": weight table spin count mismatch");
    }
    if (static_cast<int>(c.neighbors.size()) != c.weight->arity()) {
      throw std::invalid_argument(
          "arity mismatch: constraint " + std::to_string(a + 1) + " has " +
          std::to_string(c.neighbors.size()) + " neighbors but its table has arity " +
          std::to_string(c.weight->arity()));
    }
    std::vector<int> distinct;
    for (int x : c.neighbors) {
      if (x < 0 || x >= n) {
        throw std::invalid_argument("index out of range: constraint " +
                                    std::to_string(a + 1) +
                                    " references variable " +
                                    std::to_string(x + 1) + " of " +
                                    std::to_string(n));
      }
      if (std::find(distinct.begin(), distinct.end(), x) == distinct.end()) {
        distinct.push_back(x);
      }
    }
    for (int x : distinct) {
      variable_constraints_[static_cast<std::size_t>(x)].push_back(
          static_cast<int>(a));
    }
    num_incidences_ += static_cast<int>(distinct.size());
    constraint_vars_.push_back(std::move(distinct));
    has_hard_ = has_hard_ || c.weight->hard();
  }
}

FactorGraph build_graph(int n, SpinDomain omega,
                        std::vector<Constraint> constraints) {
  if (n < 1) throw std::invalid_argument("a factor graph needs n >= 1");
  return FactorGraph(n, omega, std::move(constraints));
}

Subgraph induced_subgraph(const FactorGraph& g, std::span<const int> U) {
  if (U.empty()) throw std::invalid_argument("induced subgraph of an empty set");
  const int n = g.num_variables();
  std::vector<int> local(static_cast<std::size_t>(n), -1);
  for (std::size_t i = 0; i < U.size(); ++i) {
    const int x = U[i];
    if (x < 0 || x >= n) throw std::invalid_argument("index out of range");
    if (local[static_cast<std::size_t>(x)] != -1) {
      throw std::invalid_argument("duplicate variable in subset");
    }
    local[static_cast<std::size_t>(x)] = static_cast<int>(i);
  }
  std::vector<Constraint> kept;
  std::vector<int> constraint_map;
  for (int a = 0; a < g.num_constraints(); ++a) {
    const Constraint& c = g.constraint(a);
    const bool inside = std::all_of(c.neighbors.begin(), c.neighbors.end(),
                                    [&](int x) { return local[x] != -1; });
    if (!inside) continue;
    Constraint sub{{}, c.weight};
    sub.neighbors.reserve(c.neighbors.size());
    for (int x : c.neighbors) sub.neighbors.push_back(local[x]);
    kept.push_back(std::move(sub));
    constraint_map.push_back(a);
  }
  return Subgraph{FactorGraph(static_cast<int>(U.size()), g.omega(), std::move(kept)),
                  std::vector<int>(U.begin(), U.end()), std::move(constraint_map)};
}

FactorGraph remove_constraints(const FactorGraph& g,
                               std::span<const int> constraints) {
  std::vector<char> drop(static_cast<std::size_t>(g.num_constraints()), 0);
  for (int a : constraints) {
    if (a < 0 || a >= g.num_constraints()) {
      throw std::invalid_argument("constraint index out of range");
    }
    drop[static_cast<std::size_t>(a)] = 1;
  }
  std::vector<Constraint> kept;
  for (int a = 0; a < g.num_constraints(); ++a) {
    if (!drop[static_cast<std::size_t>(a)]) kept.push_back(g.constraint(a));
  }
  return FactorGraph(g.num_variables(), g.omega(), std::move(kept));
}

std::vector<int> variable_distances(const FactorGraph& g, int u) {
  const int n = g.num_variables();
  if (u < 0 || u >= n) throw std::invalid_argument("invalid variable");
  std::vector<int> dist(static_cast<std::size_t>(n), -1);
  std::vector<char> used(static_cast<std::size_t>(g.num_constraints()), 0);
  std::queue<int> frontier;
  dist[static_cast<std::size_t>(u)] = 0;
  frontier.push(u);
  while (!frontier.empty()) {
    const int x = frontier.front();
    frontier.pop();
    for (int a : g.variable_constraints(x)) {
      if (used[static_cast<std::size_t>(a)]) continue;
      used[static_cast<std::size_t>(a)] = 1;
      for (int y : g.constraint_variables(a)) {
        if (dist[static_cast<std::size_t>(y)] == -1) {
          dist[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(x)] + 1;
          frontier.push(y);
        }
      }
    }
  }
  return dist;
}

std::vector<int> neighborhood(const FactorGraph& g, int u, int r) {
  if (r < 0) throw std::invalid_argument("negative neighborhood radius");
  const std::vector<int> dist = variable_distances(g, u);
  std::vector<int> out;
  for (int v = 0; v < g.num_variables(); ++v) {
    const int d = dist[static_cast<std::size_t>(v)];
    if (d != -1 && d <= r) out.push_back(v);
  }
  return out;
}

namespace {

struct DisjointSets {
  explicit DisjointSets(std::size_t size) : parent(size) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
  std::vector<std::size_t> parent;
};

}  // namespace

bool is_acyclic(const FactorGraph& g) {
  const std::size_t n = static_cast<std::size_t>(g.num_variables());
  DisjointSets sets(n + static_cast<std::size_t>(g.num_constraints()));
  for (int a = 0; a < g.num_constraints(); ++a) {
    for (int x : g.constraint_variables(a)) {
      if (!sets.unite(static_cast<std::size_t>(x), n + static_cast<std::size_t>(a))) {
        return false;
      }
    }
  }
  return true;
}

std::vector<int> variable_components(const FactorGraph& g) {
  const std::size_t n = static_cast<std::size_t>(g.num_variables());
  DisjointSets sets(n);
  for (int a = 0; a < g.num_constraints(); ++a) {
    const auto vars = g.constraint_variables(a);
    for (std::size_t i = 1; i < vars.size(); ++i) {
      sets.unite(static_cast<std::size_t>(vars[0]), static_cast<std::size_t>(vars[i]));
    }
  }
  std::vector<int> label(n, -1);
  std::vector<int> root_label(n, -1);
  int next = 0;
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t root = sets.find(x);
    if (root_label[root] == -1) root_label[root] = next++;
    label[x] = root_label[root];
  }
  return label;
}

FactorGraph pin_graph(const FactorGraph& g, std::span<const int> I,
                      std::span<const int> sigma) {
  if (I.size() != sigma.size()) {
    throw std::invalid_argument("pin_graph: I and sigma length mismatch");
  }
  std::vector<Constraint> constraints(g.constraints().begin(),
                                      g.constraints().end());
  for (std::size_t i = 0; i < I.size(); ++i) {
    if (I[i] < 0 || I[i] >= g.num_variables()) {
      throw std::invalid_argument("pin_graph: index out of range");
    }
    constraints.push_back(Constraint{
        {I[i]}, std::make_shared<const WeightTable>(WeightTable::hard_pin(g.q(), sigma[i]))});
  }
  return FactorGraph(g.num_variables(), g.omega(), std::move(constraints));
}

}  // namespace bethelab
