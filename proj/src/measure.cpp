#include "bethelab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "enumerate.hpp"

namespace bethelab {

ConfigSpace::ConfigSpace(int n, int q) : n_(n), q_(q) {
  if (n < 0) throw std::invalid_argument("config space: n must be >= 0");
  if (q < 2) throw std::invalid_argument("config space: q must be >= 2");
  size_ = checked_power(static_cast<std::size_t>(q), static_cast<std::size_t>(n));
  strides_.assign(static_cast<std::size_t>(n), 1);
  for (int i = n - 2; i >= 0; --i) {
    strides_[static_cast<std::size_t>(i)] =
        strides_[static_cast<std::size_t>(i) + 1] * static_cast<std::size_t>(q);
  }
}

std::size_t ConfigSpace::index_of(std::span<const int> config) const {
  if (static_cast<int>(config.size()) != n_) {
    throw std::invalid_argument("configuration has wrong length");
  }
  std::size_t idx = 0;
  for (int s : config) {
    if (s < 0 || s >= q_) throw std::invalid_argument("spin outside the domain");
    idx = idx * static_cast<std::size_t>(q_) + static_cast<std::size_t>(s);
  }
  return idx;
}

void ConfigSpace::decode(std::size_t index, std::span<int> out) const {
  for (int i = n_ - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] =
        static_cast<int>(index % static_cast<std::size_t>(q_));
    index /= static_cast<std::size_t>(q_);
  }
}

std::vector<int> ConfigSpace::config_of(std::size_t index) const {
  if (index >= size_) throw std::invalid_argument("configuration index out of range");
  std::vector<int> out(static_cast<std::size_t>(n_));
  decode(index, out);
  return out;
}

DenseMeasure::DenseMeasure(int n, SpinDomain omega, std::vector<double> probs)
    : omega_(omega), space_(n, omega.size()), probs_(std::move(probs)) {
  if (probs_.size() != space_.size()) {
    throw std::invalid_argument("measure table has " + std::to_string(probs_.size()) +
                                " entries, expected " + std::to_string(space_.size()));
  }
  CompensatedSum total;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("measure entries must be finite and non-negative");
    }
    total.add(p);
  }
  if (std::abs(total.value() - 1.0) > 1e-9) {
    throw std::invalid_argument("measure is not normalized (total mass " +
                                std::to_string(total.value()) + ")");
  }
}

DenseMeasure DenseMeasure::uniform(int n, SpinDomain omega) {
  const std::size_t size = checked_power(static_cast<std::size_t>(omega.size()),
                                         static_cast<std::size_t>(n));
  return DenseMeasure(n, omega, std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

DenseMeasure DenseMeasure::point_mass(int n, SpinDomain omega,
                                      std::span<const int> config) {
  ConfigSpace space(n, omega.size());
  std::vector<double> probs(space.size(), 0.0);
  probs[space.index_of(config)] = 1.0;
  return DenseMeasure(n, omega, std::move(probs));
}

DenseMeasure DenseMeasure::from_weights(int n, SpinDomain omega,
                                        std::vector<double> weights) {
  CompensatedSum total;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("weights must be finite and non-negative");
    }
    total.add(w);
  }
  if (!(total.value() > 0.0)) throw ZeroNormalizer("all weights vanish");
  const double z = total.value();
  for (double& w : weights) w /= z;
  return DenseMeasure(n, omega, std::move(weights));
}

std::vector<std::size_t> DenseMeasure::support() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (probs_[i] > 0.0) out.push_back(i);
  }
  return out;
}

void validate_event(const Event& event, const ConfigSpace& space) {
  if (const auto* set = std::get_if<EventSet>(&event)) {
    if (set->indices.empty()) throw std::invalid_argument("empty event set");
    for (std::size_t i = 0; i < set->indices.size(); ++i) {
      if (set->indices[i] >= space.size()) {
        throw std::invalid_argument("event index out of range");
      }
      if (i > 0 && set->indices[i] <= set->indices[i - 1]) {
        throw std::invalid_argument("event indices must be sorted and unique");
      }
    }
    return;
  }
  const auto& cube = std::get<SubcubeEvent>(event);
  if (cube.I.size() != cube.sigma.size()) {
    throw std::invalid_argument("subcube: I and sigma length mismatch");
  }
  std::vector<char> seen(static_cast<std::size_t>(space.n()), 0);
  for (std::size_t t = 0; t < cube.I.size(); ++t) {
    const int i = cube.I[t];
    if (i < 0 || i >= space.n()) throw std::invalid_argument("subcube: index out of range");
    if (seen[static_cast<std::size_t>(i)]) {
      throw std::invalid_argument("subcube: repeated coordinate");
    }
    seen[static_cast<std::size_t>(i)] = 1;
    if (cube.sigma[t] < 0 || cube.sigma[t] >= space.q()) {
      throw std::invalid_argument("subcube: spin outside the domain");
    }
  }
}

EventSet make_event_set(std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return EventSet{std::move(indices)};
}

EventSet expand_event(const Event& event, const ConfigSpace& space) {
  validate_event(event, space);
  EventSet out;
  for_each_in_event(event, space, [&](std::size_t idx) { out.indices.push_back(idx); });
  return out;
}

std::size_t event_size(const Event& event, const ConfigSpace& space) {
  if (const auto* set = std::get_if<EventSet>(&event)) return set->indices.size();
  const auto& cube = std::get<SubcubeEvent>(event);
  return checked_power(static_cast<std::size_t>(space.q()),
                       static_cast<std::size_t>(space.n()) - cube.I.size());
}

GibbsTable gibbs_table(const FactorGraph& g, const Budget& budget) {
  const int n = g.num_variables();
  const ConfigSpace space(n, g.q());
  require_enumerable(g.q(), n, budget, "gibbs_table");
  const detail::ConstraintEvaluator eval(g);

  std::vector<double> logw(space.size());
  std::vector<int> spins(static_cast<std::size_t>(n), 0);
  double max_log = detail::kNegInf;
  for (std::size_t idx = 0; idx < space.size(); ++idx) {
    if (idx > 0) {
      // Odometer increment of the decoded configuration.
      for (int i = n - 1; i >= 0; --i) {
        if (++spins[static_cast<std::size_t>(i)] < g.q()) break;
        spins[static_cast<std::size_t>(i)] = 0;
      }
    }
    double total = 0.0;
    for (std::size_t a = 0; a < eval.size(); ++a) {
      total += eval.log_weight(a, spins);
      if (total == detail::kNegInf) break;
    }
    logw[idx] = total;
    max_log = std::max(max_log, total);
  }
  if (max_log == detail::kNegInf) {
    throw ZeroNormalizer("gibbs_table: Z = 0 (every configuration violates a hard pin)");
  }
  CompensatedSum z;
  for (double& w : logw) {
    w = detail::safe_exp_shift(w, max_log);
    z.add(w);
  }
  const double scaled = z.value();
  for (double& w : logw) w /= scaled;
  const double log_z = max_log + std::log(scaled);
  return GibbsTable{scaled * std::exp(max_log), log_z, DenseMeasure(n, g.omega(), std::move(logw))};
}

DenseMeasure marginal(const DenseMeasure& mu, std::span<const int> I) {
  const ConfigSpace& space = mu.space();
  std::vector<char> seen(static_cast<std::size_t>(mu.n()), 0);
  for (int i : I) {
    if (i < 0 || i >= mu.n()) throw std::invalid_argument("marginal: invalid index");
    if (seen[static_cast<std::size_t>(i)]) {
      throw std::invalid_argument("marginal: repeated index");
    }
    seen[static_cast<std::size_t>(i)] = 1;
  }
  const int k = static_cast<int>(I.size());
  const ConfigSpace sub(k, mu.q());
  std::vector<CompensatedSum> acc(sub.size());
  const auto probs = mu.probs();
  for (std::size_t idx = 0; idx < probs.size(); ++idx) {
    if (probs[idx] == 0.0) continue;
    std::size_t j = 0;
    for (int i : I) {
      j = j * static_cast<std::size_t>(mu.q()) + static_cast<std::size_t>(space.spin(idx, i));
    }
    acc[j].add(probs[idx]);
  }
  std::vector<double> out(sub.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = acc[j].value();
  return DenseMeasure::from_weights(k, mu.omega(), std::move(out));
}

double event_mass(const DenseMeasure& mu, const Event& event) {
  validate_event(event, mu.space());
  CompensatedSum mass;
  for_each_in_event(event, mu.space(), [&](std::size_t idx) { mass.add(mu[idx]); });
  return mass.value();
}

DenseMeasure condition(const DenseMeasure& mu, const Event& event) {
  validate_event(event, mu.space());
  std::vector<double> out(mu.size(), 0.0);
  CompensatedSum mass;
  for_each_in_event(event, mu.space(), [&](std::size_t idx) {
    out[idx] = mu[idx];
    mass.add(mu[idx]);
  });
  if (mass.value() > 0.0) {
    const double z = mass.value();
    for (double& p : out) p /= z;
    return DenseMeasure(mu.n(), mu.omega(), std::move(out));
  }
  // Zero mass: uniform on the event.
  const double u = 1.0 / static_cast<double>(event_size(event, mu.space()));
  for_each_in_event(event, mu.space(), [&](std::size_t idx) { out[idx] = u; });
  return DenseMeasure(mu.n(), mu.omega(), std::move(out));
}

std::vector<std::vector<double>> site_marginals(const DenseMeasure& mu) {
  const int n = mu.n();
  const int q = mu.q();
  std::vector<std::vector<CompensatedSum>> acc(
      static_cast<std::size_t>(n), std::vector<CompensatedSum>(static_cast<std::size_t>(q)));
  const auto probs = mu.probs();
  for (std::size_t idx = 0; idx < probs.size(); ++idx) {
    if (probs[idx] == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(mu.space().spin(idx, i))].add(
          probs[idx]);
    }
  }
  std::vector<std::vector<double>> out(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(q)));
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t s = 0; s < out[i].size(); ++s) out[i][s] = acc[i][s].value();
  }
  return out;
}

DenseMeasure product_of_marginals(const DenseMeasure& mu) {
  const auto sites = site_marginals(mu);
  std::vector<double> out(mu.size());
  std::vector<int> spins(static_cast<std::size_t>(mu.n()));
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    mu.space().decode(idx, spins);
    double p = 1.0;
    for (std::size_t i = 0; i < spins.size(); ++i) {
      p *= sites[i][static_cast<std::size_t>(spins[i])];
    }
    out[idx] = p;
  }
  return DenseMeasure::from_weights(mu.n(), mu.omega(), std::move(out));
}

}  // namespace bethelab
