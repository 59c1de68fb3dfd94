#include "bethelab/pinning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bethelab/random_models.hpp"

namespace bethelab {

namespace {

// Joint tables of every unordered pair (i < j), one pass over the measure.
std::vector<std::vector<double>> pair_tables(const DenseMeasure& mu) {
  const int n = mu.n();
  const auto q = static_cast<std::size_t>(mu.q());
  const ConfigSpace& space = mu.space();
  std::vector<std::vector<double>> tables(static_cast<std::size_t>(n * (n - 1) / 2),
                                          std::vector<double>(q * q, 0.0));
  std::vector<int> spins(static_cast<std::size_t>(n));
  for (std::size_t idx = 0; idx < mu.size(); ++idx) {
    const double p = mu[idx];
    if (p == 0.0) continue;
    space.decode(idx, spins);
    std::size_t k = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j, ++k) {
        tables[k][static_cast<std::size_t>(spins[static_cast<std::size_t>(i)]) * q +
                  static_cast<std::size_t>(spins[static_cast<std::size_t>(j)])] += p;
      }
    }
  }
  return tables;
}

double product_gap(const DenseMeasure& joint) {
  return tv_distance(joint, product_of_marginals(joint));
}

}  // namespace

double symmetry_score(const DenseMeasure& mu, int order) {
  const int n = mu.n();
  if (order < 2) throw std::invalid_argument("symmetry_score: order must be >= 2");
  if (n < order) throw std::invalid_argument("symmetry_score: n < order");
  if (order == 2) {
    const auto tables = pair_tables(mu);
    const auto sites = site_marginals(mu);
    const auto q = static_cast<std::size_t>(mu.q());
    CompensatedSum total;
    std::size_t k = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j, ++k) {
        CompensatedSum tv;
        for (std::size_t a = 0; a < q; ++a) {
          for (std::size_t b = 0; b < q; ++b) {
            tv.add(std::abs(tables[k][a * q + b] -
                            sites[static_cast<std::size_t>(i)][a] * sites[static_cast<std::size_t>(j)][b]));
          }
        }
        // (i, j) and (j, i) give the same distance; TV is half the L1 sum.
        total.add(tv.value());
      }
    }
    return total.value() / (static_cast<double>(n) * n);
  }
  // Higher orders: all increasing k-tuples.
  std::vector<int> idx(static_cast<std::size_t>(order));
  for (int t = 0; t < order; ++t) idx[static_cast<std::size_t>(t)] = t;
  CompensatedSum total;
  while (true) {
    total.add(product_gap(marginal(mu, idx)));
    int pos = order - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - order + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (int t = pos + 1; t < order; ++t) {
      idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t) - 1] + 1;
    }
  }
  return total.value() / std::pow(static_cast<double>(n), order);
}

int theta_max(double epsilon, int q, double exponent) {
  if (!(epsilon > 0.0) || !(epsilon < 0.5)) {
    throw std::invalid_argument("pinning: epsilon must lie in (0, 1/2)");
  }
  if (q < 2) throw std::invalid_argument("pinning: q must be >= 2");
  if (!(exponent > 0.0)) throw std::invalid_argument("pinning: exponent must be > 0");
  const double lq = std::log(static_cast<double>(q));
  const double a = 2.0 * lq / std::pow(epsilon, 4);
  const double b = std::pow(2.0 * lq / epsilon, exponent);
  const double m = std::ceil(std::min(a, b));
  if (m >= static_cast<double>(std::numeric_limits<int>::max())) {
    return std::numeric_limits<int>::max();
  }
  return std::max(1, static_cast<int>(m));
}

PinningPlan make_plan(const DenseMeasure& mu, double epsilon, std::uint64_t seed, double exponent,
                      std::optional<int> forced_theta) {
  PinningPlan plan;
  plan.epsilon = epsilon;
  plan.theta_max = theta_max(epsilon, mu.q(), exponent);
  const int n = mu.n();
  if (forced_theta) {
    if (*forced_theta < 1) throw std::invalid_argument("pinning: theta must be >= 1");
    if (*forced_theta > n) throw std::invalid_argument("pinning: theta exceeds n");
    plan.theta = *forced_theta;
  } else {
    const int top = std::min(plan.theta_max, n);
    CounterRng rng(seed, 0);
    plan.theta = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(top)));
  }
  CounterRng subset_rng(seed, 1);
  plan.I = sample_subset(n, plan.theta, subset_rng);
  const DenseMeasure pinned = marginal(mu, plan.I);
  CounterRng sigma_rng(seed, 2);
  plan.sigma = pinned.space().config_of(ConfigSampler(pinned).draw_index(sigma_rng));
  return plan;
}

StateDecomposition decompose(const DenseMeasure& mu, std::span<const int> I) {
  StateDecomposition dec;
  dec.I.assign(I.begin(), I.end());
  const ConfigSpace sub(static_cast<int>(I.size()), mu.q());
  const auto pinned_marginal = marginal(mu, I);
  dec.states.reserve(sub.size());
  for (std::size_t s = 0; s < sub.size(); ++s) {
    std::vector<int> sigma = sub.config_of(s);
    DenseMeasure cond = condition(mu, SubcubeEvent{dec.I, sigma});
    DenseMeasure prod = product_of_marginals(cond);
    dec.states.push_back({std::move(sigma), pinned_marginal[s], std::move(cond), std::move(prod)});
  }
  return dec;
}

DenseMeasure state_mixture(const StateDecomposition& dec) {
  if (dec.states.empty()) throw std::invalid_argument("state_mixture: no states");
  const DenseMeasure& first = dec.states.front().product;
  std::vector<CompensatedSum> acc(first.size());
  for (const auto& st : dec.states) {
    if (st.mass == 0.0) continue;
    for (std::size_t i = 0; i < first.size(); ++i) acc[i].add(st.mass * st.product[i]);
  }
  std::vector<double> probs(first.size());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = acc[i].value();
  return DenseMeasure::from_weights(first.n(), first.omega(), std::move(probs));
}

MeasuredCut measured_cut(const DenseMeasure& mu, const DenseMeasure& nu, CutMode mode,
                         const CutOptions& options) {
  if (mode == CutMode::exact) {
    try {
      return {cut_distance(mu, nu, CutMode::exact, options).value, CutMode::exact, false};
    } catch (const BudgetExceeded&) {
      return {cut_distance(mu, nu, CutMode::upper, options).value, CutMode::upper, true};
    }
  }
  return {cut_distance(mu, nu, mode, options).value, mode, false};
}

MeasuredCut measured_cut_on_subcube(const DenseMeasure& mu, const DenseMeasure& nu,
                                    std::span<const int> I, CutMode mode,
                                    const CutOptions& options) {
  const int n = mu.n();
  std::vector<char> pinned(static_cast<std::size_t>(n), 0);
  for (int i : I) pinned[static_cast<std::size_t>(i)] = 1;
  std::vector<int> free_vars;
  for (int i = 0; i < n; ++i) {
    if (!pinned[static_cast<std::size_t>(i)]) free_vars.push_back(i);
  }
  if (free_vars.empty()) return {0.0, mode, false};
  // Pairs agree on I under every coupling, so those coordinates never
  // contribute to an adversary; only the 1/n normalization remembers them.
  MeasuredCut c = measured_cut(marginal(mu, free_vars), marginal(nu, free_vars), mode, options);
  c.value *= static_cast<double>(free_vars.size()) / n;
  return c;
}

PinningReport run_pinning_plan(const DenseMeasure& mu, const PinningPlan& plan,
                               const PinningOptions& options, StateDecomposition* out) {
  PinningReport report;
  report.plan = plan;
  StateDecomposition dec = decompose(mu, plan.I);
  const ConfigSpace sub(static_cast<int>(plan.I.size()), mu.q());
  const std::size_t drawn = sub.index_of(plan.sigma);

  CompensatedSum weighted;
  for (std::size_t s = 0; s < dec.states.size(); ++s) {
    const auto& st = dec.states[s];
    StateReport sr;
    sr.sigma = st.sigma;
    sr.mass = st.mass;
    sr.symmetry2 = mu.n() >= 2 ? symmetry_score(st.conditional, 2) : 0.0;
    if (st.mass > 0.0 || s == drawn) {
      sr.cut = measured_cut_on_subcube(st.conditional, st.product, plan.I, options.mode, options.cut);
      weighted.add(st.mass * sr.cut->value);
    }
    if (s == drawn) report.sampled_cut = *sr.cut;
    report.per_state.push_back(std::move(sr));
  }
  report.avg_state_cut = weighted.value();
  if (options.mixture) {
    report.mixture_cut = measured_cut(mu, state_mixture(dec), options.mode, options.cut);
  }
  if (out) *out = std::move(dec);
  return report;
}

PinningReport run_pinning(const DenseMeasure& mu, std::uint64_t seed, const PinningOptions& options,
                          std::optional<int> forced_theta) {
  const PinningPlan plan = make_plan(mu, options.epsilon, seed, options.exponent, forced_theta);
  return run_pinning_plan(mu, plan, options);
}

MixtureCheck mixture_check(const DenseMeasure& mu, std::span<const EventSet> parts, double epsilon,
                           CutMode mode, const CutOptions& options) {
  if (parts.empty()) throw std::invalid_argument("mixture_check: empty partition");
  std::vector<char> used(mu.size(), 0);
  for (const auto& part : parts) {
    validate_event(part, mu.space());
    for (std::size_t idx : part.indices) {
      if (used[idx]) throw std::invalid_argument("mixture_check: overlapping parts");
      used[idx] = 1;
    }
  }
  MixtureCheck check;
  std::vector<DenseMeasure> products;
  std::vector<double> masses;
  CompensatedSum z;
  for (const auto& part : parts) {
    const double m = event_mass(mu, part);
    if (!(m > 0.0)) throw std::invalid_argument("mixture_check: zero-mass part");
    const DenseMeasure cond = condition(mu, part);
    check.part_scores.push_back(mu.n() >= 2 ? symmetry_score(cond, 2) : 0.0);
    products.push_back(product_of_marginals(cond));
    masses.push_back(m);
    z.add(m);
  }
  check.total_mass = z.value();
  for (double& m : masses) m /= check.total_mass;
  check.cut = measured_cut(mu, mixture(products, masses), mode, options);
  const double bound = std::pow(epsilon / 9.0, 3);
  check.scores_within = std::all_of(check.part_scores.begin(), check.part_scores.end(),
                                    [&](double s) { return s <= bound; });
  check.cut_within = check.cut.value <= 2 * epsilon;
  return check;
}

}  // namespace bethelab
