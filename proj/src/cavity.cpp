#include "bethelab/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bethelab/cut_metric.hpp"
#include "bethelab/pinning.hpp"
#include "bethelab/random_models.hpp"

namespace bethelab {

std::string to_string(CavityViolation v) {
  switch (v) {
    case CavityViolation::none: return "none";
    case CavityViolation::cyclic: return "CAV1";
    case CavityViolation::multiple_anchors: return "CAV2";
    case CavityViolation::shared_outside: return "CAV3";
  }
  return "?";
}

namespace {

std::vector<int> sorted_set(const FactorGraph& g, std::span<const int> U) {
  std::vector<int> out(U.begin(), U.end());
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw std::invalid_argument("cavity: repeated variable");
  }
  for (int x : out) {
    if (x < 0 || x >= g.num_variables()) throw std::invalid_argument("cavity: variable out of range");
  }
  return out;
}

int count_components(const FactorGraph& sub) {
  const auto labels = variable_components(sub);
  std::vector<int> distinct(labels.begin(), labels.end());
  std::sort(distinct.begin(), distinct.end());
  return static_cast<int>(std::unique(distinct.begin(), distinct.end()) - distinct.begin());
}

bool induced_acyclic(const FactorGraph& g, std::span<const int> U) {
  return is_acyclic(induced_subgraph(g, U).graph);
}

std::size_t position_in(std::span<const int> sorted, int x) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
}

}  // namespace

CavityCheck is_cavity(const FactorGraph& g, std::span<const int> U_in) {
  CavityCheck out;
  const std::vector<int> U = sorted_set(g, U_in);
  const Subgraph sub = induced_subgraph(g, U);
  if (!is_acyclic(sub.graph)) {
    out.violation = CavityViolation::cyclic;
    return out;
  }
  std::vector<char> in_u(static_cast<std::size_t>(g.num_variables()), 0);
  for (int x : U) in_u[static_cast<std::size_t>(x)] = 1;

  CavitySpec spec;
  spec.U = U;
  std::vector<int> owner(static_cast<std::size_t>(g.num_variables()), -1);
  for (int a = 0; a < g.num_constraints(); ++a) {
    const auto vars = g.constraint_variables(a);
    int inside = 0;
    int anchor = -1;
    for (int x : vars) {
      if (in_u[static_cast<std::size_t>(x)]) {
        ++inside;
        anchor = x;
      }
    }
    if (inside == 0 || inside == static_cast<int>(vars.size())) continue;
    if (inside > 1) {
      out.violation = CavityViolation::multiple_anchors;
      return out;
    }
    spec.boundary.push_back(a);
    spec.anchors.push_back(anchor);
  }
  for (int a : spec.boundary) {
    for (int x : g.constraint_variables(a)) {
      if (in_u[static_cast<std::size_t>(x)]) continue;
      int& o = owner[static_cast<std::size_t>(x)];
      if (o != -1 && o != a) {
        out.violation = CavityViolation::shared_outside;
        return out;
      }
      o = a;
    }
  }
  for (int x = 0; x < g.num_variables(); ++x) {
    if (owner[static_cast<std::size_t>(x)] != -1) spec.Y.push_back(x);
  }
  spec.components = count_components(sub.graph);
  out.spec = std::move(spec);
  return out;
}

CavityList enumerate_cavities(const FactorGraph& g, int l, int r, std::size_t limit,
                              std::uint64_t seed) {
  const int n = g.num_variables();
  if (r < 1 || l < r || l > n) throw std::invalid_argument("enumerate_cavities: need 1 <= r <= l <= n");
  if (limit == 0) throw std::invalid_argument("enumerate_cavities: limit must be positive");
  CavityList list;
  bool overflow = false;
  std::vector<int> chosen;
  // Depth-first over l-subsets in lexicographic order. Cycles in G[U] persist
  // in every superset, so CAV1 prunes whole branches.
  auto dfs = [&](auto&& self, int next) -> void {
    if (overflow) return;
    if (static_cast<int>(chosen.size()) == l) {
      auto check = is_cavity(g, chosen);
      if (check.spec && check.spec->components == r) {
        if (list.cavities.size() == limit) {
          overflow = true;
          return;
        }
        list.cavities.push_back(std::move(*check.spec));
      }
      return;
    }
    const int need = l - static_cast<int>(chosen.size());
    for (int x = next; x <= n - need; ++x) {
      chosen.push_back(x);
      if (induced_acyclic(g, chosen)) self(self, x + 1);
      chosen.pop_back();
      if (overflow) return;
    }
  };
  dfs(dfs, 0);
  if (!overflow) return list;

  list.cavities.clear();
  list.sampled = true;
  CounterRng rng(seed, 0);
  const std::size_t max_attempts = 1000 * limit + 100000;
  for (std::size_t attempt = 0; attempt < max_attempts && list.cavities.size() < limit; ++attempt) {
    const auto U = sample_subset(n, l, rng);
    auto check = is_cavity(g, U);
    if (check.spec && check.spec->components == r) list.cavities.push_back(std::move(*check.spec));
  }
  return list;
}

DenseMeasure bethe_local_measure(const FactorGraph& g, const CavitySpec& cav,
                                 const MessageSet& messages) {
  const Subgraph sub = induced_subgraph(g, cav.U);
  const DenseMeasure internal = gibbs_table(sub.graph).mu;
  const ConfigSpace& space = internal.space();
  std::vector<double> w(internal.probs().begin(), internal.probs().end());
  for (std::size_t t = 0; t < cav.boundary.size(); ++t) {
    const int id = messages.find(cav.anchors[t], cav.boundary[t]);
    if (id < 0) throw std::invalid_argument("bethe_local_measure: cavity does not match graph");
    const auto msg = messages.to_variable(static_cast<std::size_t>(id));
    const int pos = static_cast<int>(position_in(cav.U, cav.anchors[t]));
    for (std::size_t idx = 0; idx < w.size(); ++idx) {
      w[idx] *= msg[static_cast<std::size_t>(space.spin(idx, pos))];
    }
  }
  CompensatedSum z;
  for (double x : w) z.add(x);
  if (!(z.value() > 0.0)) throw ZeroNormalizer("bethe_local_measure: zero normalizer");
  return DenseMeasure::from_weights(internal.n(), internal.omega(), std::move(w));
}

DenseMeasure bethe_local_measure(const FactorGraph& g, const CavitySpec& cav, const Event& S,
                                 const Budget& budget) {
  return bethe_local_measure(g, cav, standard_messages(g, S, budget));
}

BetheContext make_bethe_context(const FactorGraph& g, const Event& S, const Budget& budget) {
  DenseMeasure mu = gibbs_table(g, budget).mu;
  validate_event(S, mu.space());
  if (!(event_mass(mu, S) > 0.0)) throw ZeroNormalizer("bethe: event has zero Gibbs mass");
  return BetheContext{&g, condition(mu, S), standard_messages(g, S, budget)};
}

double cavity_deviation(const BetheContext& ctx, const CavitySpec& cav) {
  const DenseMeasure actual = marginal(ctx.conditional, cav.U);
  const DenseMeasure local = bethe_local_measure(*ctx.graph, cav, ctx.messages);
  CompensatedSum s;
  for (std::size_t i = 0; i < actual.size(); ++i) s.add(std::abs(actual[i] - local[i]));
  return s.value();
}

BetheDeviation bethe_deviation(const BetheContext& ctx, int l, int r, std::size_t limit,
                               std::uint64_t seed) {
  BetheDeviation out;
  out.l = l;
  out.r = r;
  const CavityList list = enumerate_cavities(*ctx.graph, l, r, limit, seed);
  out.sampled = list.sampled;
  out.n_cavities = list.cavities.size();
  if (list.cavities.empty()) return out;
  CompensatedSum total;
  for (const auto& cav : list.cavities) {
    const double d = cavity_deviation(ctx, cav);
    out.per_cavity.push_back(d);
    total.add(d);
  }
  out.deviation = total.value() / static_cast<double>(list.cavities.size());
  return out;
}

BetheDeviation bethe_deviation(const FactorGraph& g, int l, int r, const Event& S,
                               std::size_t limit, std::uint64_t seed, const Budget& budget) {
  return bethe_deviation(make_bethe_context(g, S, budget), l, r, limit, seed);
}

BetheStateReport is_bethe_state(const BetheContext& ctx, double epsilon, int ell,
                                std::size_t limit, std::uint64_t seed) {
  if (ell < 1) throw std::invalid_argument("is_bethe_state: ell must be >= 1");
  BetheStateReport rep;
  const int top = std::min(ell, ctx.graph->num_variables());
  for (int l = 1; l <= top; ++l) {
    for (int r = 1; r <= l; ++r) {
      auto cell = bethe_deviation(ctx, l, r, limit, seed);
      if (cell.deviation && !(*cell.deviation < epsilon)) rep.is_bethe = false;
      rep.cells.push_back(std::move(cell));
    }
  }
  return rep;
}

double factorization_check(const FactorGraph& g, const CavitySpec& cav, const Event& S,
                           const Budget& budget) {
  if (cav.Y.empty()) return 0.0;
  const FactorGraph cut = remove_constraints(g, cav.boundary);
  const DenseMeasure mu = condition(gibbs_table(cut, budget).mu, S);
  const DenseMeasure joint = marginal(mu, cav.Y);
  return tv_distance(joint, product_of_marginals(joint));
}

PottsBetheReport potts_bethe_suite(const FactorGraph& g, double beta, int r, const Event& S,
                                   const Budget& budget) {
  require_potts(g, beta);
  if (r < 0) throw std::invalid_argument("potts: r must be >= 0");
  const double diag = std::exp(-beta);
  const int n = g.num_variables();
  const BetheContext ctx = make_bethe_context(g, S, budget);
  PottsBetheReport rep;
  rep.r = r;
  CompensatedSum local_total;
  for (int u = 0; u < n; ++u) {
    const std::vector<int> ball = neighborhood(g, u, r);
    if (!is_cavity(g, ball).spec) ++rep.non_cavity;
    std::vector<char> in_ball(static_cast<std::size_t>(n), 0);
    for (int x : ball) in_ball[static_cast<std::size_t>(x)] = 1;

    const DenseMeasure internal = gibbs_table(induced_subgraph(g, ball).graph, budget).mu;
    const ConfigSpace& space = internal.space();
    std::vector<double> w(internal.probs().begin(), internal.probs().end());
    for (int a = 0; a < g.num_constraints(); ++a) {
      const auto& nb = g.constraint(a).neighbors;
      const bool in0 = in_ball[static_cast<std::size_t>(nb[0])];
      const bool in1 = in_ball[static_cast<std::size_t>(nb[1])];
      if (in0 == in1) continue;
      const int inner = in0 ? nb[0] : nb[1];
      const int outer = in0 ? nb[1] : nb[0];
      // Edge message w -> v: the law of w once this edge is removed.
      const auto msg = ctx.messages.to_constraint(static_cast<std::size_t>(ctx.messages.find(outer, a)));
      const int pos = static_cast<int>(position_in(ball, inner));
      for (std::size_t idx = 0; idx < w.size(); ++idx) {
        w[idx] *= 1.0 - (1.0 - diag) * msg[static_cast<std::size_t>(space.spin(idx, pos))];
      }
    }
    const DenseMeasure local = DenseMeasure::from_weights(internal.n(), internal.omega(), std::move(w));
    const double tv = tv_distance(local, marginal(ctx.conditional, ball));
    rep.per_vertex.push_back(tv);
    local_total.add(tv);
  }
  rep.local_score = local_total.value() / n;
  rep.pairwise_score = n >= 2 ? symmetry_score(ctx.conditional, 2) / 2 : 0.0;
  return rep;
}

}  // namespace bethelab
