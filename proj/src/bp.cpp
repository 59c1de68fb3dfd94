#include "bethelab/bp.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bethelab/cut_metric.hpp"
#include "bethelab/random_models.hpp"

namespace bethelab {

namespace {

void normalize_or_throw(std::span<double> v, const char* what) {
  double z = 0.0;
  for (double x : v) z += x;
  if (!(z > 0.0) || !std::isfinite(z)) throw ZeroNormalizer(what);
  for (double& x : v) x /= z;
}

// Incidence ids grouped by variable.
std::vector<std::vector<std::size_t>> by_variable(const MessageSet& nu) {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(nu.num_variables()));
  const auto inc = nu.incidences();
  for (std::size_t i = 0; i < inc.size(); ++i) out[static_cast<std::size_t>(inc[i].variable)].push_back(i);
  return out;
}

}  // namespace

double message_metric(const MessageSet& nu, const MessageSet& other) {
  if (!nu.compatible(other)) throw std::invalid_argument("message_metric: graph mismatch");
  if (nu.num_variables() == 0) return 0.0;
  CompensatedSum total;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    total.add(tv_distance(nu.to_constraint(i), other.to_constraint(i)));
    total.add(tv_distance(nu.to_variable(i), other.to_variable(i)));
  }
  return total.value() / nu.num_variables();
}

MessageSet bp_step(const FactorGraph& g, const MessageSet& nu) {
  MessageSet out(g);
  if (!out.compatible(nu)) throw std::invalid_argument("bp_step: messages do not match graph");
  const auto q = static_cast<std::size_t>(g.q());
  const auto incidences = nu.incidences();
  const auto groups = by_variable(nu);

  // Variable to constraint: product of the other incoming constraint messages.
  for (std::size_t i = 0; i < incidences.size(); ++i) {
    auto msg = out.to_constraint(i);
    std::fill(msg.begin(), msg.end(), 1.0);
    for (std::size_t j : groups[static_cast<std::size_t>(incidences[i].variable)]) {
      if (j == i) continue;
      const auto in = nu.to_variable(j);
      for (std::size_t s = 0; s < q; ++s) msg[s] *= in[s];
    }
    normalize_or_throw(msg, "bp_step: variable message vanishes");
  }

  // Constraint to variable: enumerate assignments of the distinct neighbors.
  for (int a = 0; a < g.num_constraints(); ++a) {
    const auto& c = g.constraint(a);
    const auto vars = g.constraint_variables(a);
    const std::size_t k = vars.size();
    std::vector<std::size_t> ids(k);
    for (std::size_t t = 0; t < k; ++t) ids[t] = static_cast<std::size_t>(nu.find(vars[t], a));
    // Position of every tuple slot among the distinct variables.
    std::vector<std::size_t> slot(c.neighbors.size());
    for (std::size_t p = 0; p < c.neighbors.size(); ++p) {
      for (std::size_t t = 0; t < k; ++t) {
        if (vars[t] == c.neighbors[p]) slot[p] = t;
      }
    }
    const auto psi = c.weight->values();
    for (std::size_t t = 0; t < k; ++t) {
      auto msg = out.to_variable(ids[t]);
      std::fill(msg.begin(), msg.end(), 0.0);
    }
    std::vector<int> assign(k, 0);
    while (true) {
      std::size_t idx = 0;
      for (std::size_t p = 0; p < slot.size(); ++p) idx = idx * q + static_cast<std::size_t>(assign[slot[p]]);
      const double w = psi[idx];
      if (w != 0.0) {
        for (std::size_t t = 0; t < k; ++t) {
          double prod = w;
          for (std::size_t u = 0; u < k; ++u) {
            if (u != t) prod *= nu.to_constraint(ids[u])[static_cast<std::size_t>(assign[u])];
          }
          out.to_variable(ids[t])[static_cast<std::size_t>(assign[t])] += prod;
        }
      }
      std::size_t pos = k;
      while (pos > 0 && static_cast<std::size_t>(++assign[pos - 1]) == q) assign[--pos] = 0;
      if (pos == 0) break;
    }
    for (std::size_t t = 0; t < k; ++t) normalize_or_throw(out.to_variable(ids[t]), "bp_step: constraint message vanishes");
  }
  return out;
}

MessageSet random_messages(const FactorGraph& g, std::uint64_t seed) {
  MessageSet nu(g);
  CounterRng rng(seed, 0);
  auto fill = [&](std::span<double> msg) {
    // Exponential spacings give a uniform point on the simplex.
    for (double& x : msg) x = -std::log(1.0 - rng.uniform());
    normalize_or_throw(msg, "random_messages");
  };
  for (std::size_t i = 0; i < nu.size(); ++i) {
    fill(nu.to_constraint(i));
    fill(nu.to_variable(i));
  }
  return nu;
}

BpResult bp_iterate(const FactorGraph& g, MessageSet nu0, double damping, int max_iters, double tol) {
  if (!(damping >= 0.0 && damping < 1.0)) throw std::invalid_argument("bp_iterate: damping must lie in [0, 1)");
  if (max_iters < 0) throw std::invalid_argument("bp_iterate: max_iters must be >= 0");
  BpResult res{std::move(nu0), 0.0, 0, false};
  for (;;) {
    MessageSet next = bp_step(g, res.messages);
    res.residual = message_metric(res.messages, next);
    if (res.residual < tol) {
      res.converged = true;
      return res;
    }
    if (res.iterations == max_iters) return res;
    if (damping > 0.0) {
      const std::size_t q = static_cast<std::size_t>(g.q());
      for (std::size_t i = 0; i < next.size(); ++i) {
        for (auto [dst, src] : {std::pair{next.to_constraint(i), res.messages.to_constraint(i)},
                                std::pair{next.to_variable(i), res.messages.to_variable(i)}}) {
          for (std::size_t s = 0; s < q; ++s) dst[s] = (1.0 - damping) * dst[s] + damping * src[s];
          normalize_or_throw(dst, "bp_iterate: damped message vanishes");
        }
      }
    }
    res.messages = std::move(next);
    ++res.iterations;
  }
}

double canonical_residual(const FactorGraph& g, const MessageSet& canonical) {
  return message_metric(canonical, bp_step(g, canonical));
}

double canonical_residual(const FactorGraph& g, const Event& S, const Budget& budget) {
  return canonical_residual(g, standard_messages(g, S, budget));
}

double potts_bp_residual(const FactorGraph& g, double beta, const MessageSet& canonical) {
  require_potts(g, beta);
  const auto q = static_cast<std::size_t>(g.q());
  const double damp = 1.0 - std::exp(-beta);
  const int n = g.num_variables();
  std::vector<std::vector<int>> edges_at(static_cast<std::size_t>(n));
  for (int a = 0; a < g.num_constraints(); ++a) {
    const auto& nb = g.constraint(a).neighbors;
    if (nb[0] == nb[1]) continue;
    edges_at[static_cast<std::size_t>(nb[0])].push_back(a);
    edges_at[static_cast<std::size_t>(nb[1])].push_back(a);
  }
  auto other_end = [&](int a, int v) {
    const auto& nb = g.constraint(a).neighbors;
    return nb[0] == v ? nb[1] : nb[0];
  };
  CompensatedSum total;
  std::vector<double> ratio(q);
  for (int v = 0; v < n; ++v) {
    for (int a : edges_at[static_cast<std::size_t>(v)]) {
      std::fill(ratio.begin(), ratio.end(), 1.0);
      for (int b : edges_at[static_cast<std::size_t>(v)]) {
        if (b == a) continue;
        const int u = other_end(b, v);
        const auto in = canonical.to_constraint(static_cast<std::size_t>(canonical.find(u, b)));
        for (std::size_t s = 0; s < q; ++s) ratio[s] *= 1.0 - damp * in[s];
      }
      normalize_or_throw(ratio, "potts_bp_residual");
      const auto out = canonical.to_constraint(static_cast<std::size_t>(canonical.find(v, a)));
      for (std::size_t s = 0; s < q; ++s) total.add(std::abs(out[s] - ratio[s]));
    }
  }
  return total.value() / n;
}

double potts_bp_residual(const FactorGraph& g, double beta, const Event& S, const Budget& budget) {
  return potts_bp_residual(g, beta, standard_messages(g, S, budget));
}

}  // namespace bethelab
