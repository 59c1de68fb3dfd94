#include "bethelab/messages.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "enumerate.hpp"

namespace bethelab {

MessageSet::MessageSet(const FactorGraph& g)
    : q_(g.q()), n_(g.num_variables()) {
  for (int a = 0; a < g.num_constraints(); ++a) {
    first_of_constraint_.push_back(static_cast<int>(incidences_.size()));
    for (int x : g.constraint_variables(a)) incidences_.push_back({x, a});
  }
  first_of_constraint_.push_back(static_cast<int>(incidences_.size()));
  values_.assign(2 * incidences_.size() * static_cast<std::size_t>(q_),
                 1.0 / static_cast<double>(q_));
}

int MessageSet::find(int x, int a) const {
  if (a < 0 || a + 1 >= static_cast<int>(first_of_constraint_.size())) return -1;
  for (int i = first_of_constraint_[static_cast<std::size_t>(a)];
       i < first_of_constraint_[static_cast<std::size_t>(a) + 1]; ++i) {
    if (incidences_[static_cast<std::size_t>(i)].variable == x) return i;
  }
  return -1;
}

bool MessageSet::compatible(const MessageSet& other) const {
  if (q_ != other.q_ || n_ != other.n_ || incidences_.size() != other.incidences_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < incidences_.size(); ++i) {
    if (incidences_[i].variable != other.incidences_[i].variable ||
        incidences_[i].constraint != other.incidences_[i].constraint) {
      return false;
    }
  }
  return true;
}

namespace {

// Per-configuration bookkeeping shared by both passes: finite log weights
// per constraint plus zero-factor counts, so kept-set products can be formed
// without dividing by vanishing hard-pin factors.
struct ConfigWeights {
  std::vector<double> log_psi;      // per constraint, kNegInf for zero
  double finite_total = 0.0;        // sum of finite entries
  int zero_total = 0;
  std::vector<double> var_finite;   // per variable: sum over da of finite logs
  std::vector<int> var_zero;        // per variable: zero count over dx
};

void fill_weights(const FactorGraph& g, const detail::ConstraintEvaluator& eval,
                  std::span<const int> spins, ConfigWeights& w) {
  w.finite_total = 0.0;
  w.zero_total = 0;
  std::fill(w.var_finite.begin(), w.var_finite.end(), 0.0);
  std::fill(w.var_zero.begin(), w.var_zero.end(), 0);
  for (std::size_t a = 0; a < eval.size(); ++a) {
    const double l = eval.log_weight(a, spins);
    w.log_psi[a] = l;
    const bool zero = (l == detail::kNegInf);
    if (zero) {
      ++w.zero_total;
    } else {
      w.finite_total += l;
    }
    for (int x : g.constraint_variables(static_cast<int>(a))) {
      if (zero) {
        ++w.var_zero[static_cast<std::size_t>(x)];
      } else {
        w.var_finite[static_cast<std::size_t>(x)] += l;
      }
    }
  }
}

}  // namespace

MessageSet standard_messages(const FactorGraph& g, const Event& S,
                             const Budget& budget) {
  const int n = g.num_variables();
  const int q = g.q();
  const ConfigSpace space(n, q);
  require_enumerable(q, n, budget, "standard_messages");
  validate_event(S, space);

  MessageSet out(g);
  const auto incidences = out.incidences();
  const std::size_t m = incidences.size();
  const detail::ConstraintEvaluator eval(g);

  ConfigWeights w;
  w.log_psi.assign(eval.size(), 0.0);
  w.var_finite.assign(static_cast<std::size_t>(n), 0.0);
  w.var_zero.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> spins(static_cast<std::size_t>(n));

  // Log of the kept-set product for message slot (incidence, direction).
  auto kept_log = [&](std::size_t i, int dir) -> double {
    const int x = incidences[i].variable;
    const std::size_t a = static_cast<std::size_t>(incidences[i].constraint);
    const bool a_zero = (w.log_psi[a] == detail::kNegInf);
    if (dir == 0) {
      // x -> a: every constraint except a.
      if (w.zero_total - (a_zero ? 1 : 0) > 0) return detail::kNegInf;
      return w.finite_total - (a_zero ? 0.0 : w.log_psi[a]);
    }
    // a -> x: every constraint except those in dx \ {a}.
    const std::size_t xs = static_cast<std::size_t>(x);
    if (a_zero || w.zero_total - w.var_zero[xs] > 0) return detail::kNegInf;
    return w.finite_total - w.var_finite[xs] + w.log_psi[a];
  };

  std::vector<double> shift(2 * m, detail::kNegInf);
  for_each_in_event(S, space, [&](std::size_t idx) {
    space.decode(idx, spins);
    fill_weights(g, eval, spins, w);
    for (std::size_t i = 0; i < m; ++i) {
      for (int dir = 0; dir < 2; ++dir) {
        shift[2 * i + static_cast<std::size_t>(dir)] =
            std::max(shift[2 * i + static_cast<std::size_t>(dir)], kept_log(i, dir));
      }
    }
  });

  std::vector<CompensatedSum> acc(2 * m * static_cast<std::size_t>(q));
  for_each_in_event(S, space, [&](std::size_t idx) {
    space.decode(idx, spins);
    fill_weights(g, eval, spins, w);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t tau = static_cast<std::size_t>(spins[static_cast<std::size_t>(incidences[i].variable)]);
      for (int dir = 0; dir < 2; ++dir) {
        const std::size_t slot = 2 * i + static_cast<std::size_t>(dir);
        if (shift[slot] == detail::kNegInf) continue;
        acc[slot * static_cast<std::size_t>(q) + tau].add(
            detail::safe_exp_shift(kept_log(i, dir), shift[slot]));
      }
    }
  });

  for (std::size_t i = 0; i < m; ++i) {
    for (int dir = 0; dir < 2; ++dir) {
      const std::size_t slot = 2 * i + static_cast<std::size_t>(dir);
      auto target = dir == 0 ? out.to_constraint(i) : out.to_variable(i);
      CompensatedSum z;
      for (int s = 0; s < q; ++s) z.add(acc[slot * static_cast<std::size_t>(q) + static_cast<std::size_t>(s)].value());
      if (shift[slot] == detail::kNegInf || !(z.value() > 0.0)) {
        throw ZeroNormalizer("standard message " +
                             std::string(dir == 0 ? "x->a" : "a->x") + " for x" +
                             std::to_string(incidences[i].variable + 1) + ", a" +
                             std::to_string(incidences[i].constraint + 1) +
                             " has zero normalizer (event incompatible with hard pins)");
      }
      for (int s = 0; s < q; ++s) {
        target[static_cast<std::size_t>(s)] =
            acc[slot * static_cast<std::size_t>(q) + static_cast<std::size_t>(s)].value() / z.value();
      }
    }
  }
  return out;
}

}  // namespace bethelab
