#include "bethelab/cut_metric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

namespace bethelab {

const char* to_string(CutMode mode) {
  switch (mode) {
    case CutMode::exact: return "exact";
    case CutMode::upper: return "upper";
    case CutMode::lower: return "lower";
  }
  return "unknown";
}

CutMode parse_cut_mode(const std::string& name) {
  if (name == "exact") return CutMode::exact;
  if (name == "upper") return CutMode::upper;
  if (name == "lower") return CutMode::lower;
  throw std::invalid_argument("unknown cut mode '" + name + "'");
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: dimension mismatch");
  CompensatedSum acc;
  for (std::size_t i = 0; i < p.size(); ++i) acc.add(std::abs(p[i] - q[i]));
  return 0.5 * acc.value();
}

double tv_distance(const DenseMeasure& p, const DenseMeasure& q) {
  if (p.n() != q.n() || p.q() != q.q()) {
    throw std::invalid_argument("tv_distance: dimension mismatch");
  }
  return tv_distance(p.probs(), q.probs());
}

namespace {

void require_same_space(const DenseMeasure& mu, const DenseMeasure& nu) {
  if (mu.n() != nu.n() || mu.q() != nu.q()) {
    throw std::invalid_argument("cut metric: measures live on different spaces");
  }
  if (mu.n() > 62) throw std::invalid_argument("cut metric: n too large for bit masks");
}

// Bit i set iff coordinate i of the configuration equals omega.
std::uint64_t spin_mask(const ConfigSpace& space, std::size_t idx, int omega) {
  std::uint64_t m = 0;
  for (int i = 0; i < space.n(); ++i) {
    if (space.spin(idx, i) == omega) m |= std::uint64_t{1} << i;
  }
  return m;
}

std::vector<int> mask_to_set(std::uint64_t mask) {
  std::vector<int> out;
  for (int i = 0; mask != 0; ++i, mask >>= 1) {
    if (mask & 1U) out.push_back(i);
  }
  return out;
}

std::uint64_t set_to_mask(std::span<const int> I, int n) {
  std::uint64_t m = 0;
  for (int i : I) {
    if (i < 0 || i >= n) throw std::invalid_argument("adversary: index out of range");
    m |= std::uint64_t{1} << i;
  }
  return m;
}

// max(0, sign * (|I & pos| - |I & neg|))
int functional_coefficient(std::uint64_t I, std::uint64_t pos, std::uint64_t neg, int sign) {
  const int d = std::popcount(I & pos) - std::popcount(I & neg);
  return std::max(0, sign * d);
}

struct Functional {
  int omega;
  int sign;
  std::uint64_t I;
};

// Functional index layout: ((omega * 2 + (sign < 0)) * 2^n) + I, I >= 1.
std::size_t functional_index(const Functional& f, int n) {
  return (static_cast<std::size_t>(f.omega) * 2 + (f.sign < 0 ? 1 : 0)) *
             (std::size_t{1} << n) + static_cast<std::size_t>(f.I);
}

Functional functional_at(std::size_t index, int n) {
  const std::size_t per = std::size_t{1} << n;
  const std::size_t block = index / per;
  return {static_cast<int>(block / 2), (block % 2 == 0) ? 1 : -1,
          static_cast<std::uint64_t>(index % per)};
}

// Pair differences (pos, neg) for every spin, aggregated by key.
struct KeyedMass {
  std::uint64_t pos;
  std::uint64_t neg;
  double mass;
};

std::vector<std::vector<KeyedMass>> aggregate_pairs(const Coupling& gamma,
                                                    const ConfigSpace& space) {
  const int q = space.q();
  std::vector<std::vector<KeyedMass>> out(static_cast<std::size_t>(q));
  for (int w = 0; w < q; ++w) {
    std::map<std::pair<std::uint64_t, std::uint64_t>, CompensatedSum> acc;
    for (std::size_t p = 0; p < gamma.size(); ++p) {
      if (!(gamma.mass[p] > 0.0)) continue;
      const std::uint64_t ms = spin_mask(space, gamma.sigma[p], w);
      const std::uint64_t mt = spin_mask(space, gamma.tau[p], w);
      const std::uint64_t pos = ms & ~mt;
      const std::uint64_t neg = mt & ~ms;
      if (pos == 0 && neg == 0) continue;
      acc[{pos, neg}].add(gamma.mass[p]);
    }
    for (const auto& [key, sum] : acc) {
      out[static_cast<std::size_t>(w)].push_back({key.first, key.second, sum.value()});
    }
  }
  return out;
}

// Unnormalized values of every functional (index 0 of each block unused).
std::vector<double> all_functionals(const Coupling& gamma, const ConfigSpace& space) {
  const int n = space.n();
  const int q = space.q();
  const std::size_t per = std::size_t{1} << n;
  std::vector<double> values(2 * static_cast<std::size_t>(q) * per, 0.0);
  const auto keyed = aggregate_pairs(gamma, space);
  for (int w = 0; w < q; ++w) {
    double* plus = &values[(static_cast<std::size_t>(w) * 2) * per];
    double* minus = &values[(static_cast<std::size_t>(w) * 2 + 1) * per];
    for (std::uint64_t I = 1; I < per; ++I) {
      double sp = 0.0;
      double sm = 0.0;
      for (const auto& km : keyed[static_cast<std::size_t>(w)]) {
        const int d = std::popcount(I & km.pos) - std::popcount(I & km.neg);
        if (d > 0) {
          sp += km.mass * d;
        } else if (d < 0) {
          sm -= km.mass * d;
        }
      }
      plus[I] = sp;
      minus[I] = sm;
    }
  }
  return values;
}

AdversaryWitness argmax_functional(std::span<const double> values, int n) {
  const std::size_t per = std::size_t{1} << n;
  std::size_t best = 1;
  double best_value = -1.0;
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    if (idx % per == 0) continue;
    if (values[idx] > best_value) {
      best_value = values[idx];
      best = idx;
    }
  }
  const Functional f = functional_at(best, n);
  return {mask_to_set(f.I), f.omega, f.sign, std::max(0.0, best_value) / n};
}

// Mass per spin mask for a weight vector over configurations.
std::vector<std::vector<std::pair<std::uint64_t, double>>> masses_by_mask(
    std::span<const double> weights, const ConfigSpace& space) {
  const int q = space.q();
  std::vector<std::vector<std::pair<std::uint64_t, double>>> out(static_cast<std::size_t>(q));
  for (int w = 0; w < q; ++w) {
    std::map<std::uint64_t, CompensatedSum> acc;
    for (std::size_t idx = 0; idx < weights.size(); ++idx) {
      if (weights[idx] > 0.0) acc[spin_mask(space, idx, w)].add(weights[idx]);
    }
    for (const auto& [m, s] : acc) out[static_cast<std::size_t>(w)].emplace_back(m, s.value());
  }
  return out;
}

// Best adversary against the product coupling scale * (a x b), where a and b
// are non-negative weight vectors over configurations.
AdversaryWitness product_form_best(std::span<const double> a, std::span<const double> b,
                                   double scale, const ConfigSpace& space) {
  const int n = space.n();
  const int q = space.q();
  const std::size_t per = std::size_t{1} << n;
  const auto am = masses_by_mask(a, space);
  const auto bm = masses_by_mask(b, space);
  std::vector<double> values(2 * static_cast<std::size_t>(q) * per, 0.0);
  std::vector<double> ca(static_cast<std::size_t>(n) + 1);
  std::vector<double> cb(static_cast<std::size_t>(n) + 1);
  for (int w = 0; w < q; ++w) {
    for (std::uint64_t I = 1; I < per; ++I) {
      const int size = std::popcount(I);
      std::fill(ca.begin(), ca.begin() + size + 1, 0.0);
      std::fill(cb.begin(), cb.begin() + size + 1, 0.0);
      for (const auto& [m, mass] : am[static_cast<std::size_t>(w)]) {
        ca[static_cast<std::size_t>(std::popcount(I & m))] += mass;
      }
      for (const auto& [m, mass] : bm[static_cast<std::size_t>(w)]) {
        cb[static_cast<std::size_t>(std::popcount(I & m))] += mass;
      }
      double sp = 0.0;
      double sm = 0.0;
      for (int x = 0; x <= size; ++x) {
        for (int y = 0; y <= size; ++y) {
          const double prod = ca[static_cast<std::size_t>(x)] * cb[static_cast<std::size_t>(y)];
          if (x > y) sp += prod * (x - y);
          if (y > x) sm += prod * (y - x);
        }
      }
      values[(static_cast<std::size_t>(w) * 2) * per + I] = scale * sp;
      values[(static_cast<std::size_t>(w) * 2 + 1) * per + I] = scale * sm;
    }
  }
  return argmax_functional(values, n);
}

CutResult upper_bound(const DenseMeasure& mu, const DenseMeasure& nu, const CutOptions& options) {
  const int n = mu.n();
  if (n > options.max_upper_n) {
    throw BudgetExceeded("cut_distance(upper): n = " + std::to_string(n) +
                         " exceeds the adversary enumeration limit " +
                         std::to_string(options.max_upper_n));
  }
  const ConfigSpace& space = mu.space();
  const std::size_t size = mu.size();
  const std::size_t supp_mu = mu.support().size();
  const std::size_t supp_nu = nu.support().size();

  // Diagonal mass contributes nothing, so only the residual product matters.
  std::vector<double> res_mu(size);
  std::vector<double> res_nu(size);
  CompensatedSum residual;
  std::size_t diag_support = 0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = std::min(mu[i], nu[i]);
    if (d > 0.0) ++diag_support;
    res_mu[i] = mu[i] - d;
    res_nu[i] = nu[i] - d;
    residual.add(res_mu[i]);
  }
  const double r = residual.value();

  CutResult diag;
  diag.mode = CutMode::upper;
  diag.coupling_kind = "diagonal";
  if (r > 1e-15) {
    diag.witness = product_form_best(res_mu, res_nu, 1.0 / r, space);
    std::size_t ra = 0;
    std::size_t rb = 0;
    for (std::size_t i = 0; i < size; ++i) {
      ra += res_mu[i] > 0.0;
      rb += res_nu[i] > 0.0;
    }
    diag.coupling_support_size = diag_support + ra * rb;
  } else {
    diag.witness = {{0}, 0, 1, 0.0};
    diag.coupling_support_size = diag_support;
  }
  diag.value = diag.witness.value;

  CutResult indep;
  indep.mode = CutMode::upper;
  indep.coupling_kind = "independent";
  indep.witness = product_form_best(mu.probs(), nu.probs(), 1.0, space);
  indep.value = indep.witness.value;
  indep.coupling_support_size = supp_mu * supp_nu;

  return indep.value < diag.value ? indep : diag;
}

void check_exact_budget(std::size_t pairs, int n, int q, const CutOptions& options) {
  if (pairs > options.max_pairs) {
    throw BudgetExceeded("cut_distance(exact): " + std::to_string(pairs) +
                         " support pairs exceed the limit " +
                         std::to_string(options.max_pairs));
  }
  const std::size_t functionals =
      2 * ((std::size_t{1} << n) - 1) * static_cast<std::size_t>(q);
  if (n >= 40 || functionals > options.max_functionals) {
    throw BudgetExceeded("cut_distance(exact): adversary family exceeds the limit " +
                         std::to_string(options.max_functionals));
  }
}

struct PairTable {
  std::vector<std::size_t> rows;  // supp mu
  std::vector<std::size_t> cols;  // supp nu
  // Per spin, per pair: (pos, neg) masks.
  std::vector<std::vector<std::pair<std::uint64_t, std::uint64_t>>> diff;

  std::size_t pairs() const { return rows.size() * cols.size(); }
};

PairTable build_pairs(const DenseMeasure& mu, const DenseMeasure& nu) {
  PairTable t;
  t.rows = mu.support();
  t.cols = nu.support();
  const int q = mu.q();
  t.diff.resize(static_cast<std::size_t>(q));
  for (int w = 0; w < q; ++w) {
    auto& d = t.diff[static_cast<std::size_t>(w)];
    d.reserve(t.pairs());
    for (std::size_t s : t.rows) {
      const std::uint64_t ms = spin_mask(mu.space(), s, w);
      for (std::size_t u : t.cols) {
        const std::uint64_t mt = spin_mask(mu.space(), u, w);
        d.emplace_back(ms & ~mt, mt & ~ms);
      }
    }
  }
  return t;
}

// Coupling-polytope equalities; the last column constraint is implied.
void add_transport_rows(lp::DenseSimplex& lp, const PairTable& t, const DenseMeasure& mu,
                        const DenseMeasure& nu, std::size_t num_vars) {
  const std::size_t a = t.rows.size();
  const std::size_t b = t.cols.size();
  std::vector<double> row(num_vars);
  for (std::size_t i = 0; i < a; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t j = 0; j < b; ++j) row[i * b + j] = 1.0;
    lp.add_equality(row, mu[t.rows[i]]);
  }
  for (std::size_t j = 0; j + 1 < b; ++j) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t i = 0; i < a; ++i) row[i * b + j] = 1.0;
    lp.add_equality(row, nu[t.cols[j]]);
  }
}

std::vector<double> functional_row(const PairTable& t, const Functional& f,
                                   std::size_t num_vars) {
  std::vector<double> row(num_vars, 0.0);
  const auto& d = t.diff[static_cast<std::size_t>(f.omega)];
  for (std::size_t p = 0; p < d.size(); ++p) {
    row[p] = functional_coefficient(f.I, d[p].first, d[p].second, f.sign);
  }
  return row;
}

Coupling coupling_from_primal(const PairTable& t, std::span<const double> x) {
  Coupling c;
  const std::size_t b = t.cols.size();
  for (std::size_t p = 0; p < t.pairs(); ++p) {
    if (x[p] > 1e-15) {
      c.sigma.push_back(t.rows[p / b]);
      c.tau.push_back(t.cols[p % b]);
      c.mass.push_back(x[p]);
    }
  }
  return c;
}

void require_optimal(lp::Status s, const char* what) {
  if (s != lp::Status::optimal) {
    throw std::runtime_error(std::string(what) + ": linear program ended with status " +
                             lp::to_string(s));
  }
}

CutResult exact_value(const DenseMeasure& mu, const DenseMeasure& nu, const CutOptions& options) {
  const int n = mu.n();
  const int q = mu.q();
  const PairTable t = build_pairs(mu, nu);
  check_exact_budget(t.pairs(), n, q, options);
  const std::size_t num_vars = t.pairs() + 1;
  const std::size_t t_var = t.pairs();

  lp::DenseSimplex lp(num_vars, options.lp);
  std::vector<double> cost(num_vars, 0.0);
  cost[t_var] = 1.0;
  lp.set_objective(cost);
  add_transport_rows(lp, t, mu, nu, num_vars);

  const std::uint64_t full = (std::uint64_t{1} << n) - 1;
  std::set<std::size_t> added;
  for (int w = 0; w < q; ++w) {
    for (int sign : {1, -1}) {
      const Functional f{w, sign, full};
      auto row = functional_row(t, f, num_vars);
      row[t_var] = -static_cast<double>(n);
      lp.add_less_equal(row, 0.0);
      added.insert(functional_index(f, n));
    }
  }
  require_optimal(lp.solve(), "cut_distance(exact)");

  CutResult result;
  result.mode = CutMode::exact;
  result.coupling_kind = "lp";
  std::size_t rounds = 1;
  while (true) {
    const auto x = lp.primal();
    Coupling gamma = coupling_from_primal(t, x);
    const auto values = all_functionals(gamma, mu.space());
    const double level = static_cast<double>(n) * x[t_var];
    std::vector<std::pair<double, std::size_t>> violated;
    for (std::size_t idx = 0; idx < values.size(); ++idx) {
      const double excess = values[idx] - level;
      if (excess > options.violation_tol && !added.contains(idx)) {
        violated.emplace_back(-excess, idx);
      }
    }
    if (violated.empty()) {
      result.witness = argmax_functional(values, n);
      result.value = result.witness.value;
      result.coupling_support_size = gamma.size();
      result.coupling = std::move(gamma);
      break;
    }
    std::sort(violated.begin(), violated.end());
    const std::size_t take = std::min(violated.size(), options.cuts_per_round);
    for (std::size_t k = 0; k < take; ++k) {
      const Functional f = functional_at(violated[k].second, n);
      auto row = functional_row(t, f, num_vars);
      row[t_var] = -static_cast<double>(n);
      added.insert(violated[k].second);
      require_optimal(lp.add_cut(row, 0.0), "cut_distance(exact)");
    }
    ++rounds;
  }
  result.lp_rounds = rounds;
  return result;
}

// Coupling-free bound: sum gamma max(0, z) >= max(0, sum gamma z), and the
// expectation of z only depends on the site marginals.
AdversaryWitness marginal_lower_bound(const DenseMeasure& mu, const DenseMeasure& nu) {
  const auto a = site_marginals(mu);
  const auto b = site_marginals(nu);
  const int n = mu.n();
  AdversaryWitness best{{0}, 0, 1, -1.0};
  for (int w = 0; w < mu.q(); ++w) {
    for (int sign : {1, -1}) {
      std::vector<int> I;
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = sign * (a[static_cast<std::size_t>(i)][static_cast<std::size_t>(w)] -
                                 b[static_cast<std::size_t>(i)][static_cast<std::size_t>(w)]);
        if (d > 0.0) {
          I.push_back(i);
          total += d;
        }
      }
      if (I.empty()) continue;
      if (total / n > best.value) best = {I, w, sign, total / n};
    }
  }
  if (best.value < 0.0) best.value = 0.0;
  return best;
}

// min over couplings of one functional, divided by n.
double transport_minimum(const PairTable& t, const DenseMeasure& mu, const DenseMeasure& nu,
                         const Functional& f, const CutOptions& options) {
  std::vector<double> supply, demand;
  for (std::size_t s : t.rows) supply.push_back(mu[s]);
  for (std::size_t u : t.cols) demand.push_back(nu[u]);
  const auto row = functional_row(t, f, t.pairs());
  return lp::solve_transport(supply, demand, row, options.lp).value / mu.n();
}

CutResult lower_bound(const DenseMeasure& mu, const DenseMeasure& nu, const CutOptions& options) {
  const int n = mu.n();
  CutResult result;
  result.mode = CutMode::lower;
  result.coupling_kind = "marginal";
  result.witness = marginal_lower_bound(mu, nu);
  result.value = result.witness.value;

  const std::size_t pairs = mu.support().size() * nu.support().size();
  if (pairs > options.max_pairs || n > options.max_upper_n) return result;

  const PairTable t = build_pairs(mu, nu);
  std::vector<Functional> candidates;
  std::set<std::size_t> seen;
  auto push = [&](const Functional& f) {
    if (f.I != 0 && seen.insert(functional_index(f, n)).second) candidates.push_back(f);
  };
  const AdversaryWitness upper = upper_bound(mu, nu, options).witness;
  push({upper.omega, upper.sign, set_to_mask(upper.I, n)});
  push({result.witness.omega, result.witness.sign, set_to_mask(result.witness.I, n)});
  const std::uint64_t full = (std::uint64_t{1} << n) - 1;
  for (int w = 0; w < mu.q(); ++w) {
    for (int sign : {1, -1}) push({w, sign, full});
  }
  for (const Functional& f : candidates) {
    const double v = transport_minimum(t, mu, nu, f, options);
    if (v > result.value) {
      result.value = v;
      result.witness = {mask_to_set(f.I), f.omega, f.sign, v};
      result.coupling_kind = "transport";
    }
  }
  result.coupling_support_size = pairs;
  return result;
}

}  // namespace

Coupling diagonal_coupling(const DenseMeasure& mu, const DenseMeasure& nu) {
  require_same_space(mu, nu);
  const std::size_t size = mu.size();
  Coupling c;
  std::vector<double> res_mu(size);
  std::vector<double> res_nu(size);
  CompensatedSum residual;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = std::min(mu[i], nu[i]);
    if (d > 0.0) {
      c.sigma.push_back(i);
      c.tau.push_back(i);
      c.mass.push_back(d);
    }
    res_mu[i] = mu[i] - d;
    res_nu[i] = nu[i] - d;
    residual.add(res_mu[i]);
  }
  const double r = residual.value();
  if (r <= 0.0) return c;
  for (std::size_t i = 0; i < size; ++i) {
    if (!(res_mu[i] > 0.0)) continue;
    for (std::size_t j = 0; j < size; ++j) {
      if (!(res_nu[j] > 0.0)) continue;
      c.sigma.push_back(i);
      c.tau.push_back(j);
      c.mass.push_back(res_mu[i] * res_nu[j] / r);
    }
  }
  return c;
}

Coupling independent_coupling(const DenseMeasure& mu, const DenseMeasure& nu) {
  require_same_space(mu, nu);
  Coupling c;
  for (std::size_t i : mu.support()) {
    for (std::size_t j : nu.support()) {
      c.sigma.push_back(i);
      c.tau.push_back(j);
      c.mass.push_back(mu[i] * nu[j]);
    }
  }
  return c;
}

void validate_coupling(const Coupling& gamma, const DenseMeasure& mu, const DenseMeasure& nu,
                       double tol) {
  require_same_space(mu, nu);
  if (gamma.sigma.size() != gamma.mass.size() || gamma.tau.size() != gamma.mass.size()) {
    throw std::invalid_argument("coupling: ragged support arrays");
  }
  std::vector<CompensatedSum> rows(mu.size());
  std::vector<CompensatedSum> cols(nu.size());
  for (std::size_t p = 0; p < gamma.size(); ++p) {
    if (gamma.sigma[p] >= mu.size() || gamma.tau[p] >= nu.size()) {
      throw std::invalid_argument("coupling: index out of range");
    }
    if (gamma.mass[p] < 0.0) throw std::invalid_argument("coupling: negative mass");
    rows[gamma.sigma[p]].add(gamma.mass[p]);
    cols[gamma.tau[p]].add(gamma.mass[p]);
  }
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (std::abs(rows[i].value() - mu[i]) > tol || std::abs(cols[i].value() - nu[i]) > tol) {
      throw std::invalid_argument("coupling: marginal mismatch");
    }
  }
}

double adversary_value(const Coupling& gamma, const ConfigSpace& space, std::span<const int> I,
                       int omega, int sign) {
  if (omega < 0 || omega >= space.q()) throw std::invalid_argument("adversary: bad spin");
  if (sign != 1 && sign != -1) throw std::invalid_argument("adversary: sign must be +1 or -1");
  const std::uint64_t mask = set_to_mask(I, space.n());
  CompensatedSum acc;
  for (std::size_t p = 0; p < gamma.size(); ++p) {
    const std::uint64_t ms = spin_mask(space, gamma.sigma[p], omega);
    const std::uint64_t mt = spin_mask(space, gamma.tau[p], omega);
    acc.add(gamma.mass[p] * functional_coefficient(mask, ms & ~mt, mt & ~ms, sign));
  }
  return acc.value() / space.n();
}

AdversaryWitness best_adversary(const Coupling& gamma, const ConfigSpace& space) {
  if (space.n() > 30) throw BudgetExceeded("best_adversary: n too large");
  return argmax_functional(all_functionals(gamma, space), space.n());
}

CutResult cut_distance(const DenseMeasure& mu, const DenseMeasure& nu, CutMode mode,
                       const CutOptions& options) {
  require_same_space(mu, nu);
  switch (mode) {
    case CutMode::exact: return exact_value(mu, nu, options);
    case CutMode::upper: return upper_bound(mu, nu, options);
    case CutMode::lower: return lower_bound(mu, nu, options);
  }
  throw std::invalid_argument("cut_distance: unknown mode");
}

DenseMeasure product_measure(SpinDomain omega, std::span<const std::vector<double>> marginals) {
  const int n = static_cast<int>(marginals.size());
  const int q = omega.size();
  for (const auto& m : marginals) {
    if (static_cast<int>(m.size()) != q) {
      throw std::invalid_argument("product_measure: marginal length differs from q");
    }
  }
  const ConfigSpace space(n, q);
  std::vector<double> probs(space.size(), 1.0);
  for (std::size_t idx = 0; idx < space.size(); ++idx) {
    double p = 1.0;
    for (int i = 0; i < n; ++i) {
      p *= marginals[static_cast<std::size_t>(i)][static_cast<std::size_t>(space.spin(idx, i))];
    }
    probs[idx] = p;
  }
  return DenseMeasure(n, omega, std::move(probs));
}

DenseMeasure mixture(std::span<const DenseMeasure> components, std::span<const double> weights) {
  if (components.empty() || components.size() != weights.size()) {
    throw std::invalid_argument("mixture: components and weights differ in length");
  }
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("mixture: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("mixture: weights not normalized");
  }
  const DenseMeasure& first = components.front();
  std::vector<CompensatedSum> acc(first.size());
  for (std::size_t c = 0; c < components.size(); ++c) {
    if (components[c].n() != first.n() || components[c].q() != first.q()) {
      throw std::invalid_argument("mixture: components live on different spaces");
    }
    if (weights[c] == 0.0) continue;
    for (std::size_t i = 0; i < first.size(); ++i) acc[i].add(weights[c] * components[c][i]);
  }
  std::vector<double> probs(first.size());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = acc[i].value();
  return DenseMeasure::from_weights(first.n(), first.omega(), std::move(probs));
}

double wasserstein_d1(std::span<const double> p_weights, std::span<const double> q_weights,
                      std::span<const double> cost, const lp::Options& options) {
  const std::size_t a = p_weights.size();
  const std::size_t b = q_weights.size();
  if (a == 0 || b == 0) throw std::invalid_argument("wasserstein_d1: empty atom list");
  if (cost.size() != a * b) throw std::invalid_argument("wasserstein_d1: cost matrix size");
  auto check = [](std::span<const double> w) {
    double total = 0.0;
    for (double x : w) {
      if (x < 0.0) throw std::invalid_argument("wasserstein_d1: negative weight");
      total += x;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("wasserstein_d1: atom weights not normalized");
    }
  };
  check(p_weights);
  check(q_weights);

  std::vector<std::size_t> pi;
  std::vector<std::size_t> qj;
  for (std::size_t i = 0; i < a; ++i) {
    if (p_weights[i] > 0.0) pi.push_back(i);
  }
  for (std::size_t j = 0; j < b; ++j) {
    if (q_weights[j] > 0.0) qj.push_back(j);
  }
  if (pi.size() == 1 || qj.size() == 1) {
    // A single atom on either side fixes the plan.
    CompensatedSum acc;
    for (std::size_t i : pi) {
      for (std::size_t j : qj) {
        const double w = pi.size() == 1 ? q_weights[j] : p_weights[i];
        acc.add(w * cost[i * b + j]);
      }
    }
    return acc.value();
  }
  const std::size_t ra = pi.size();
  const std::size_t rb = qj.size();
  std::vector<double> c(ra * rb), supply(ra), demand(rb);
  for (std::size_t i = 0; i < ra; ++i) {
    supply[i] = p_weights[pi[i]];
    for (std::size_t j = 0; j < rb; ++j) c[i * rb + j] = cost[pi[i] * b + qj[j]];
  }
  for (std::size_t j = 0; j < rb; ++j) demand[j] = q_weights[qj[j]];
  return lp::solve_transport(supply, demand, c, options).value;
}

}  // namespace bethelab
