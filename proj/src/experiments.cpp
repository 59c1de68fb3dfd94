#include "bethelab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <concepts>
#include <filesystem>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bethelab/bp.hpp"

namespace bethelab {

namespace {

using io::Json;

// Independent seeds for the stages of one run; the graph keeps the run seed
// itself so an instance can be reproduced from the model spec alone.
constexpr std::uint64_t kPinStream = 1;
constexpr std::uint64_t kCavityStream = 2;
constexpr std::uint64_t kBpStream = 3;
constexpr std::uint64_t kGraphStream = 16;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return CounterRng(seed, stream).next(); }

std::string cell(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return io::format_double(x);
}
std::string cell(const std::optional<double>& x) { return x ? cell(*x) : std::string(); }
std::string cell(bool b) { return b ? "true" : "false"; }
std::string cell(const char* s) { return s; }
std::string cell(const std::string& s) { return s; }
template <std::integral T>
  requires(!std::same_as<T, bool>)
std::string cell(T v) {
  return std::to_string(v);
}

struct RowBuilder {
  std::vector<std::string> cells;
  template <class T>
  RowBuilder& operator<<(const T& v) {
    cells.push_back(cell(v));
    return *this;
  }
};

std::string join(const std::vector<int>& v, char sep, int offset = 0) {
  if (v.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(v[i] + offset);
  }
  return out;
}

Json nullable(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

// Output of one seed; `samples` feeds the cross-seed aggregates.
struct SeedOutcome {
  std::vector<std::vector<std::string>> rows;
  Json per_seed = Json::object();
  std::map<std::string, std::vector<double>> samples;
  std::optional<Json> messages;
  std::optional<std::string> overlaps;
};

// Runs `fn(i)` for every index on a small pool; results land by index so the
// merge order never depends on scheduling.
template <class Fn>
std::vector<SeedOutcome> run_seeds(std::size_t count, int threads, Fn&& fn) {
  std::vector<SeedOutcome> out(count);
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          out[i] = fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// Status label for a recoverable per-cell failure.
template <class Fn>
std::string guarded(Fn&& fn) {
  try {
    fn();
    return "ok";
  } catch (const BudgetExceeded&) {
    return "budget";
  } catch (const ZeroNormalizer&) {
    return "zero_mass";
  }
}

struct Retained {
  std::vector<int> sigma;
  double mass = 0.0;
  DenseMeasure conditional;
  DenseMeasure product;
};

struct StateSelection {
  int theta = 0;
  std::vector<int> I;
  std::size_t total_states = 1;
  double floor = 0.0;
  double retained_mass = 0.0;
  bool covered = false;
  std::vector<Retained> states;
};

// Subcube states in decreasing mass order (lexicographic among ties) until
// 1 - epsilon is covered, L states are kept or the mass floor is reached.
StateSelection select_states(const DenseMeasure& mu, const ExperimentConfig& c, std::uint64_t seed) {
  StateSelection sel;
  const int n = mu.n();
  if (c.theta && *c.theta == 0) {
    sel.theta = 0;
  } else {
    std::optional<int> forced;
    if (c.theta) forced = std::min(*c.theta, n);
    const auto plan = make_plan(mu, c.epsilon, derive_seed(seed, kPinStream), c.exponent, forced);
    sel.theta = plan.theta;
    sel.I = plan.I;
  }
  const auto masses = marginal(mu, sel.I);
  sel.total_states = masses.size();
  std::vector<std::size_t> order(masses.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return masses[a] > masses[b]; });
  sel.floor = c.mass_floor.value_or(c.epsilon / std::pow(2.0, sel.theta));
  CompensatedSum covered;
  for (std::size_t idx : order) {
    if (sel.states.size() >= static_cast<std::size_t>(c.L)) break;
    if (covered.value() >= 1.0 - c.epsilon) break;
    const double mass = masses[idx];
    if (mass < sel.floor || mass <= 0.0) break;
    auto sigma = masses.space().config_of(idx);
    auto cond = condition(mu, SubcubeEvent{sel.I, sigma});
    auto prod = product_of_marginals(cond);
    sel.states.push_back({std::move(sigma), mass, std::move(cond), std::move(prod)});
    covered.add(mass);
  }
  sel.retained_mass = covered.value();
  sel.covered = sel.retained_mass >= 1.0 - c.epsilon - 1e-12;
  return sel;
}

Json selection_json(const StateSelection& sel) {
  Json out;
  out["theta"] = sel.theta;
  Json I = Json::array();
  for (int i : sel.I) I.push_back(i + 1);
  out["I"] = std::move(I);
  out["total_states"] = sel.total_states;
  out["retained"] = sel.states.size();
  out["mass_floor"] = sel.floor;
  out["retained_mass"] = sel.retained_mass;
  out["covered"] = sel.covered;
  return out;
}

// Cut distance between mu and the mass-weighted mixture of retained products.
std::optional<MeasuredCut> mixture_distance(const DenseMeasure& mu, const StateSelection& sel,
                                            const ExperimentConfig& c) {
  if (sel.states.empty()) return std::nullopt;
  std::vector<DenseMeasure> parts;
  std::vector<double> weights;
  for (const auto& s : sel.states) {
    parts.push_back(s.product);
    weights.push_back(s.mass / sel.retained_mass);
  }
  return measured_cut(mu, mixture(parts, weights), c.cut_mode, c.cut);
}

// ---- bethe ----

const std::vector<std::string> kBetheHeader{
    "seed", "attempts", "theta", "state", "sigma", "mass", "symmetry2", "symmetry_mode", "l", "r",
    "n_cavities", "cavity_mode", "deviation", "canonical_residual", "status"};

SeedOutcome bethe_seed(const ExperimentConfig& c, std::uint64_t seed) {
  SeedOutcome out;
  out.per_seed["seed"] = seed;
  const Instance inst = make_instance(c, seed);
  out.per_seed["attempts"] = inst.attempts;
  const FactorGraph& g = inst.graph;
  std::optional<DenseMeasure> mu;
  const std::string gibbs_status = guarded([&] { mu = gibbs_table(g, c.budget).mu; });
  out.per_seed["status"] = gibbs_status;
  if (!mu) {
    RowBuilder row;
    row << seed << inst.attempts;
    for (std::size_t i = 2; i + 1 < kBetheHeader.size(); ++i) row << "";
    row << gibbs_status;
    out.rows.push_back(std::move(row.cells));
    return out;
  }
  const auto sel = select_states(*mu, c, seed);
  out.per_seed["states"] = selection_json(sel);
  out.samples["retained_mass"].push_back(sel.retained_mass);
  out.samples["covered"].push_back(sel.covered ? 1.0 : 0.0);
  out.samples["n_retained"].push_back(static_cast<double>(sel.states.size()));

  std::optional<MeasuredCut> mix;
  const std::string mix_status = guarded([&] { mix = mixture_distance(*mu, sel, c); });
  out.per_seed["mixture_cut"] = mix ? Json(mix->value) : Json(nullptr);
  out.per_seed["mixture_mode"] = mix ? Json(to_string(mix->mode)) : Json(nullptr);
  out.per_seed["mixture_status"] = mix_status;
  if (mix) out.samples["mixture_cut"].push_back(mix->value);

  const std::uint64_t cavity_seed = derive_seed(seed, kCavityStream);
  for (std::size_t rank = 0; rank < sel.states.size(); ++rank) {
    const auto& st = sel.states[rank];
    const double sym = symmetry_score(st.conditional);
    out.samples["symmetry2"].push_back(sym);
    const SubcubeEvent S{sel.I, st.sigma};
    std::optional<BetheContext> ctx;
    std::optional<double> residual;
    const std::string status = guarded([&] {
      ctx = make_bethe_context(g, S, c.budget);
      residual = canonical_residual(g, ctx->messages);
    });
    if (residual) out.samples["canonical_residual"].push_back(*residual);
    auto start = [&] {
      RowBuilder row;
      row << seed << inst.attempts << sel.theta << rank << join(st.sigma, '-') << st.mass << sym << "exact";
      return row;
    };
    if (c.ell == 0) {
      RowBuilder row = start();
      row << "" << "" << "" << "" << "" << cell(residual) << status;
      out.rows.push_back(std::move(row.cells));
      continue;
    }
    for (int l = 1; l <= c.ell; ++l) {
      for (int r = 1; r <= l; ++r) {
        RowBuilder row = start();
        row << l << r;
        std::optional<BetheDeviation> dev;
        std::string cell_status = status;
        if (ctx) cell_status = guarded([&] { dev = bethe_deviation(*ctx, l, r, c.cavity_limit, cavity_seed); });
        if (dev) {
          row << dev->n_cavities << (dev->n_cavities == 0 ? "empty" : dev->sampled ? "sampled" : "exact")
              << cell(dev->deviation);
          if (dev->deviation) {
            const std::string key = "deviation_l" + std::to_string(l) + "_r" + std::to_string(r);
            out.samples[key].push_back(*dev->deviation);
            out.samples["deviation_all"].push_back(*dev->deviation);
          }
        } else {
          row << "" << "" << "";
        }
        row << cell(residual) << cell_status;
        out.rows.push_back(std::move(row.cells));
      }
    }
  }
  return out;
}

// ---- pin ----

const std::vector<std::string> kPinHeader{
    "seed", "attempts", "theta", "I", "sigma", "sampled_cut", "sampled_mode", "avg_state_cut",
    "mixture_cut", "mixture_mode", "status"};

std::vector<int> pin_thetas(const ExperimentConfig& c, int n) {
  std::vector<int> out;
  for (int t : c.thetas) {
    const int clamped = std::min(t, n);
    if (clamped >= 1 && std::find(out.begin(), out.end(), clamped) == out.end()) out.push_back(clamped);
  }
  return out;
}

SeedOutcome pin_seed(const ExperimentConfig& c, std::uint64_t seed) {
  SeedOutcome out;
  out.per_seed["seed"] = seed;
  const Instance inst = make_instance(c, seed);
  out.per_seed["attempts"] = inst.attempts;
  std::optional<DenseMeasure> mu;
  const std::string gibbs_status = guarded([&] { mu = gibbs_table(inst.graph, c.budget).mu; });
  out.per_seed["status"] = gibbs_status;
  if (!mu) {
    RowBuilder row;
    row << seed << inst.attempts;
    for (std::size_t i = 2; i + 1 < kPinHeader.size(); ++i) row << "";
    row << gibbs_status;
    out.rows.push_back(std::move(row.cells));
    return out;
  }
  PinningOptions opt;
  opt.epsilon = c.epsilon;
  opt.exponent = c.exponent;
  opt.mode = c.cut_mode;
  opt.cut = c.cut;
  opt.mixture = c.mixture;
  for (int theta : pin_thetas(c, mu->n())) {
    std::optional<PinningReport> rep;
    const std::string status =
        guarded([&] { rep = run_pinning(*mu, derive_seed(seed, kPinStream), opt, theta); });
    RowBuilder row;
    row << seed << inst.attempts << theta;
    if (rep) {
      row << join(rep->plan.I, '-', 1) << join(rep->plan.sigma, '-') << rep->sampled_cut.value
          << to_string(rep->sampled_cut.mode) << rep->avg_state_cut;
      if (c.mixture) row << rep->mixture_cut.value << to_string(rep->mixture_cut.mode);
      else row << "" << "";
      const std::string t = std::to_string(theta);
      out.samples["sampled_cut_theta" + t].push_back(rep->sampled_cut.value);
      out.samples["avg_state_cut_theta" + t].push_back(rep->avg_state_cut);
      if (c.mixture) out.samples["mixture_cut_theta" + t].push_back(rep->mixture_cut.value);
    } else {
      row << "" << "" << "" << "" << "" << "" << "";
    }
    row << status;
    out.rows.push_back(std::move(row.cells));
  }
  return out;
}

// ---- bp ----

const std::vector<std::string> kBpHeader{
    "seed", "attempts", "theta", "state", "sigma", "mass", "canonical_residual", "bp_init",
    "bp_iterations", "bp_converged", "bp_residual", "bp_to_canonical", "status"};

SeedOutcome bp_seed(const ExperimentConfig& c, std::uint64_t seed) {
  SeedOutcome out;
  out.per_seed["seed"] = seed;
  const Instance inst = make_instance(c, seed);
  out.per_seed["attempts"] = inst.attempts;
  const FactorGraph& g = inst.graph;
  const char* init = c.bp.random_init ? "random" : "uniform";
  std::optional<BpResult> bp;
  const std::string bp_status = guarded([&] {
    MessageSet start = c.bp.random_init ? random_messages(g, derive_seed(seed, kBpStream)) : MessageSet(g);
    bp = bp_iterate(g, std::move(start), c.bp.damping, c.bp.max_iters, c.bp.tol);
  });
  out.per_seed["bp_status"] = bp_status;
  if (bp) {
    out.per_seed["bp_iterations"] = bp->iterations;
    out.per_seed["bp_converged"] = bp->converged;
    out.per_seed["bp_residual"] = bp->residual;
    out.samples["bp_iterations"].push_back(bp->iterations);
    out.samples["bp_converged"].push_back(bp->converged ? 1.0 : 0.0);
    out.samples["bp_residual"].push_back(bp->residual);
  }
  Json dumps = Json::array();
  if (c.emit_messages && bp) {
    Json e;
    e["seed"] = seed;
    e["kind"] = "bp";
    e["messages"] = io::messages_to_json(bp->messages);
    dumps.push_back(std::move(e));
  }

  std::optional<DenseMeasure> mu;
  const std::string gibbs_status = guarded([&] { mu = gibbs_table(g, c.budget).mu; });
  out.per_seed["status"] = gibbs_status;
  if (!mu) {
    RowBuilder row;
    row << seed << inst.attempts << "" << "" << "" << "" << "" << init;
    if (bp) row << bp->iterations << bp->converged << bp->residual;
    else row << "" << "" << "";
    row << "" << gibbs_status;
    out.rows.push_back(std::move(row.cells));
    if (c.emit_messages) out.messages = std::move(dumps);
    return out;
  }
  const auto sel = select_states(*mu, c, seed);
  out.per_seed["states"] = selection_json(sel);
  for (std::size_t rank = 0; rank < sel.states.size(); ++rank) {
    const auto& st = sel.states[rank];
    std::optional<MessageSet> canonical;
    std::optional<double> residual;
    const std::string status = guarded([&] {
      canonical = standard_messages(g, SubcubeEvent{sel.I, st.sigma}, c.budget);
      residual = canonical_residual(g, *canonical);
    });
    RowBuilder row;
    row << seed << inst.attempts << sel.theta << rank << join(st.sigma, '-') << st.mass << cell(residual) << init;
    if (bp) row << bp->iterations << bp->converged << bp->residual;
    else row << "" << "" << "";
    std::optional<double> gap;
    if (bp && canonical) gap = message_metric(bp->messages, *canonical);
    row << cell(gap) << (status == "ok" ? bp_status : status);
    out.rows.push_back(std::move(row.cells));
    if (residual) out.samples["canonical_residual"].push_back(*residual);
    if (gap) out.samples["bp_to_canonical"].push_back(*gap);
    if (c.emit_messages && canonical) {
      Json e;
      e["seed"] = seed;
      e["kind"] = "canonical";
      e["state"] = rank;
      e["sigma"] = st.sigma;
      e["messages"] = io::messages_to_json(*canonical);
      dumps.push_back(std::move(e));
    }
  }
  if (c.emit_messages) out.messages = std::move(dumps);
  return out;
}

// ---- cutm ----

const std::vector<std::string> kCutHeader{
    "seed", "attempts", "mode", "value", "coupling_kind", "coupling_support_size", "adversary_I",
    "adversary_omega", "adversary_sign", "tv", "observable_gap", "overlap_d1", "status"};

SeedOutcome cutm_seed(const ExperimentConfig& c, std::uint64_t seed, bool first) {
  SeedOutcome out;
  out.per_seed["seed"] = seed;
  const Instance inst = make_instance(c, seed);
  out.per_seed["attempts"] = inst.attempts;
  std::optional<DenseMeasure> mu;
  const std::string gibbs_status = guarded([&] { mu = gibbs_table(inst.graph, c.budget).mu; });
  out.per_seed["status"] = gibbs_status;
  if (!mu) {
    RowBuilder row;
    row << seed << inst.attempts;
    for (std::size_t i = 2; i + 1 < kCutHeader.size(); ++i) row << "";
    row << gibbs_status;
    out.rows.push_back(std::move(row.cells));
    return out;
  }
  const DenseMeasure prod = product_of_marginals(*mu);
  const double tv = tv_distance(*mu, prod);
  out.samples["tv"].push_back(tv);
  std::optional<double> gap, d1;
  if (c.continuity) {
    const std::string st = guarded([&] {
      const auto family = default_observable_family(mu->n(), mu->q());
      ObservableEvaluator em(*mu), ep(prod);
      double worst = 0.0;
      for (const auto& f : family) worst = std::max(worst, std::abs(em.average(f) - ep.average(f)));
      gap = worst;
      d1 = overlap_d1(overlap_distribution(*mu, c.budget), overlap_distribution(prod, c.budget));
    });
    out.per_seed["continuity_status"] = st;
    if (gap) out.samples["observable_gap"].push_back(*gap);
    if (d1) out.samples["overlap_d1"].push_back(*d1);
  }
  if (c.emit_overlaps && first) {
    guarded([&] {
      std::ostringstream os;
      io::write_overlap_csv(os, overlap_distribution(*mu, c.budget));
      out.overlaps = os.str();
    });
  }
  for (CutMode mode : c.cut_modes) {
    std::optional<CutResult> res;
    const std::string status = guarded([&] {
      // Exact mode is capped by the enumeration budget as well.
      if (mode == CutMode::exact && mu->size() * mu->size() > c.budget.max_configurations) {
        throw BudgetExceeded("cutm: exact coupling space over budget");
      }
      res = cut_distance(*mu, prod, mode, c.cut);
    });
    RowBuilder row;
    row << seed << inst.attempts << to_string(mode);
    if (res) {
      row << res->value << res->coupling_kind << res->coupling_support_size << join(res->witness.I, '-', 1)
          << res->witness.omega << res->witness.sign;
      out.samples[std::string("cut_") + to_string(mode)].push_back(res->value);
    } else {
      row << "" << "" << "" << "" << "" << "";
    }
    row << tv << cell(gap) << cell(d1) << status;
    out.rows.push_back(std::move(row.cells));
  }
  return out;
}

// ---- potts ----

const std::vector<std::string> kPottsHeader{
    "seed", "attempts", "n", "r", "local_score", "pairwise_score", "non_cavity", "potts_bp_residual", "status"};

SeedOutcome potts_seed(const ExperimentConfig& c, std::uint64_t seed) {
  SeedOutcome out;
  out.per_seed["seed"] = seed;
  const Instance inst = make_instance(c, seed);
  out.per_seed["attempts"] = inst.attempts;
  const FactorGraph& g = inst.graph;
  const int n = g.num_variables();
  std::optional<double> bp_res;
  const std::string bp_status = guarded([&] { bp_res = potts_bp_residual(g, c.model.beta, full_cube(), c.budget); });
  out.per_seed["potts_bp_residual"] = nullable(bp_res);
  if (bp_res) out.samples["potts_bp_residual"].push_back(*bp_res);
  bool pass = true;
  std::optional<double> pairwise;
  for (int r : c.radii) {
    std::optional<PottsBetheReport> rep;
    const std::string status = guarded([&] { rep = potts_bethe_suite(g, c.model.beta, r, full_cube(), c.budget); });
    RowBuilder row;
    row << seed << inst.attempts << n << r;
    if (rep) {
      row << rep->local_score << rep->pairwise_score << rep->non_cavity;
      pairwise = rep->pairwise_score;
      out.samples["local_score_r" + std::to_string(r)].push_back(rep->local_score);
      if (r <= c.potts_max_radius && !(rep->local_score < c.potts_threshold)) pass = false;
    } else {
      row << "" << "" << "";
      if (r <= c.potts_max_radius) pass = false;
    }
    row << cell(bp_res) << (status == "ok" ? bp_status : status);
    out.rows.push_back(std::move(row.cells));
  }
  if (pairwise) out.samples["pairwise_score"].push_back(*pairwise);
  out.samples["pass"].push_back(pass ? 1.0 : 0.0);
  out.per_seed["pairwise_score"] = nullable(pairwise);
  out.per_seed["pass"] = pass;
  return out;
}

// Shared driver for the per-seed experiments.
ExperimentResult run_single(const ExperimentConfig& c) {
  ExperimentResult res;
  res.experiment = c.experiment;
  std::vector<SeedOutcome> outcomes;
  auto dispatch = [&](auto&& fn) {
    outcomes = run_seeds(c.seeds.size(), c.threads, [&](std::size_t i) { return fn(c.seeds[i], i); });
  };
  if (c.experiment == "bethe") {
    res.header = kBetheHeader;
    dispatch([&](std::uint64_t s, std::size_t) { return bethe_seed(c, s); });
  } else if (c.experiment == "pin") {
    res.header = kPinHeader;
    dispatch([&](std::uint64_t s, std::size_t) { return pin_seed(c, s); });
  } else if (c.experiment == "bp") {
    res.header = kBpHeader;
    dispatch([&](std::uint64_t s, std::size_t) { return bp_seed(c, s); });
  } else if (c.experiment == "cutm") {
    res.header = kCutHeader;
    dispatch([&](std::uint64_t s, std::size_t i) { return cutm_seed(c, s, i == 0); });
  } else if (c.experiment == "potts") {
    res.header = kPottsHeader;
    dispatch([&](std::uint64_t s, std::size_t) { return potts_seed(c, s); });
  } else {
    throw std::invalid_argument("unknown experiment '" + c.experiment + "'");
  }

  std::map<std::string, std::vector<double>> samples;
  Json per_seed = Json::array();
  Json messages = Json::array();
  for (auto& o : outcomes) {
    for (auto& row : o.rows) res.rows.push_back(std::move(row));
    for (auto& [k, v] : o.samples) samples[k].insert(samples[k].end(), v.begin(), v.end());
    per_seed.push_back(std::move(o.per_seed));
    if (o.messages) {
      for (auto& e : *o.messages) messages.push_back(std::move(e));
    }
    if (o.overlaps && !res.overlaps_csv) res.overlaps_csv = std::move(o.overlaps);
  }
  Json agg = Json::object();
  for (auto& [k, v] : samples) agg[k] = stats_to_json(summarize(v));
  if (c.experiment == "pin") {
    // Non-increasing seed means up to one combined standard error.
    const auto thetas = pin_thetas(c, c.graph ? c.graph->num_variables() : c.model.n);
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < thetas.size(); ++i) {
      const auto a = samples.find("sampled_cut_theta" + std::to_string(thetas[i]));
      const auto b = samples.find("sampled_cut_theta" + std::to_string(thetas[i + 1]));
      if (a == samples.end() || b == samples.end()) continue;
      const auto sa = summarize(a->second), sb = summarize(b->second);
      if (sb.mean > sa.mean + std::hypot(sa.se, sb.se)) monotone = false;
    }
    agg["sampled_cut_monotone_within_se"] = monotone;
  }
  res.summary["experiment"] = c.experiment;
  res.summary["config"] = config_to_json(c);
  res.summary["aggregates"] = std::move(agg);
  res.summary["per_seed"] = std::move(per_seed);
  if (c.emit_messages) res.messages = std::move(messages);
  if (c.emit_overlaps && !res.overlaps_csv) res.overlaps_csv = "omega,omega_prime,value,weight\n";
  return res;
}

ExperimentResult run_sweep(const ExperimentConfig& c) {
  ExperimentResult res;
  res.experiment = "sweep";
  Json per_value = Json::array();
  Json messages = Json::array();
  for (double v : c.sweep_values) {
    ExperimentConfig inner = c;
    inner.experiment = c.sweep_inner;
    if (c.sweep_param == "n") inner.model.n = static_cast<int>(v);
    else if (c.sweep_param == "q") inner.model.q = static_cast<int>(v);
    else if (c.sweep_param == "beta") inner.model.beta = v;
    else if (c.sweep_param == "d") {
      inner.model.d = v;
      inner.model.m.reset();
    }
    auto sub = run_single(inner);
    if (res.header.empty()) {
      res.header.push_back("sweep_value");
      res.header.insert(res.header.end(), sub.header.begin(), sub.header.end());
    }
    for (auto& row : sub.rows) {
      row.insert(row.begin(), cell(v));
      res.rows.push_back(std::move(row));
    }
    Json e;
    e["value"] = v;
    e["aggregates"] = std::move(sub.summary["aggregates"]);
    e["per_seed"] = std::move(sub.summary["per_seed"]);
    per_value.push_back(std::move(e));
    if (sub.messages) {
      for (auto& m : *sub.messages) messages.push_back(std::move(m));
    }
    if (sub.overlaps_csv && !res.overlaps_csv) res.overlaps_csv = std::move(sub.overlaps_csv);
  }
  if (res.header.empty()) {
    // No values: still a well-formed table for the inner experiment.
    ExperimentConfig inner = c;
    inner.experiment = c.sweep_inner;
    inner.seeds.clear();
    auto sub = run_single(inner);
    res.header.push_back("sweep_value");
    res.header.insert(res.header.end(), sub.header.begin(), sub.header.end());
  }
  res.summary["experiment"] = "sweep";
  res.summary["config"] = config_to_json(c);
  res.summary["per_value"] = std::move(per_value);
  if (c.emit_messages) res.messages = std::move(messages);
  return res;
}

const std::vector<std::string> kExperiments{"pin", "bethe", "bp", "cutm", "potts", "sweep"};

std::vector<std::uint64_t> seeds_from_json(const Json& j) {
  if (j.is_string()) return parse_seed_range(j.get<std::string>());
  if (j.is_number_unsigned() || j.is_number_integer()) return {j.get<std::uint64_t>()};
  return j.get<std::vector<std::uint64_t>>();
}

}  // namespace

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  auto parse = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw std::invalid_argument("seeds: expected 'a..b' or an integer, got '" + text + "'");
    }
    return v;
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) return {parse(text)};
  const std::uint64_t a = parse(std::string_view(text).substr(0, dots));
  const std::uint64_t b = parse(std::string_view(text).substr(dots + 2));
  if (b < a) throw std::invalid_argument("seeds: empty range '" + text + "'");
  if (b - a >= 10'000'000) throw std::invalid_argument("seeds: range too long");
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
  return out;
}

ExperimentConfig config_from_json(const Json& j) {
  static const std::vector<std::string> known{
      "experiment", "model", "graph", "acyclic", "acyclic_attempts", "epsilon", "exponent", "ell", "L",
      "mass_floor", "theta", "thetas", "seeds", "cut_mode", "cut_modes", "mixture", "exact_budget",
      "max_pairs", "cavity_limit", "radii", "potts_threshold", "potts_max_radius", "bp", "emit_messages",
      "emit_overlaps", "continuity", "sweep", "threads", "output"};
  if (!j.is_object()) throw io::FormatError("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw io::FormatError("config: unknown key '" + key + "'");
    }
  }
  ExperimentConfig c;
  try {
    c.experiment = j.value("experiment", c.experiment);
    if (j.contains("model")) c.model = io::model_from_json(j.at("model"));
    if (j.contains("graph")) {
      c.graph = io::graph_from_json(j.at("graph"));
      c.model.n = c.graph->num_variables();
      c.model.q = c.graph->q();
    }
    c.acyclic = j.value("acyclic", c.acyclic);
    c.acyclic_attempts = j.value("acyclic_attempts", c.acyclic_attempts);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.exponent = j.value("exponent", c.exponent);
    c.ell = j.value("ell", c.ell);
    c.L = j.value("L", c.L);
    if (j.contains("mass_floor") && !j.at("mass_floor").is_null()) c.mass_floor = j.at("mass_floor").get<double>();
    if (j.contains("theta") && !j.at("theta").is_null()) c.theta = j.at("theta").get<int>();
    if (j.contains("thetas")) c.thetas = j.at("thetas").get<std::vector<int>>();
    if (j.contains("seeds")) c.seeds = seeds_from_json(j.at("seeds"));
    else if (j.contains("model")) c.seeds = {c.model.seed};
    if (j.contains("cut_mode")) c.cut_mode = parse_cut_mode(j.at("cut_mode").get<std::string>());
    if (j.contains("cut_modes")) {
      c.cut_modes.clear();
      for (const auto& m : j.at("cut_modes")) c.cut_modes.push_back(parse_cut_mode(m.get<std::string>()));
    }
    c.mixture = j.value("mixture", c.mixture);
    if (j.contains("exact_budget")) c.budget.max_configurations = j.at("exact_budget").get<std::size_t>();
    if (j.contains("max_pairs")) c.cut.max_pairs = j.at("max_pairs").get<std::size_t>();
    c.cavity_limit = j.value("cavity_limit", c.cavity_limit);
    if (j.contains("radii")) c.radii = j.at("radii").get<std::vector<int>>();
    c.potts_threshold = j.value("potts_threshold", c.potts_threshold);
    c.potts_max_radius = j.value("potts_max_radius", c.potts_max_radius);
    if (j.contains("bp")) {
      const auto& b = j.at("bp");
      c.bp.damping = b.value("damping", c.bp.damping);
      c.bp.max_iters = b.value("max_iters", c.bp.max_iters);
      c.bp.tol = b.value("tol", c.bp.tol);
      const std::string init = b.value("init", std::string("uniform"));
      if (init != "uniform" && init != "random") throw io::FormatError("config: bp.init must be uniform or random");
      c.bp.random_init = init == "random";
    }
    c.emit_messages = j.value("emit_messages", c.emit_messages);
    c.emit_overlaps = j.value("emit_overlaps", c.emit_overlaps);
    c.continuity = j.value("continuity", c.continuity);
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      c.sweep_param = s.value("param", c.sweep_param);
      c.sweep_values = s.value("values", c.sweep_values);
      c.sweep_inner = s.value("inner", c.sweep_inner);
    }
    c.threads = j.value("threads", c.threads);
    c.output = j.value("output", c.output);
  } catch (const nlohmann::json::exception& e) {
    throw io::FormatError(std::string("config: ") + e.what());
  }
  validate_config(c);
  return c;
}

void validate_config(const ExperimentConfig& c) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (std::find(kExperiments.begin(), kExperiments.end(), c.experiment) == kExperiments.end()) {
    fail("unknown experiment '" + c.experiment + "'");
  }
  if (c.experiment == "sweep") {
    if (c.sweep_inner == "sweep" ||
        std::find(kExperiments.begin(), kExperiments.end(), c.sweep_inner) == kExperiments.end()) {
      fail("sweep.inner must name a non-sweep experiment");
    }
    const std::vector<std::string> params{"n", "q", "beta", "d"};
    if (std::find(params.begin(), params.end(), c.sweep_param) == params.end()) fail("sweep.param must be n, q, beta or d");
    if (c.graph) fail("sweep needs a model, not a fixed graph");
  }
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) fail("epsilon must lie in (0, 1)");
  if (!(c.exponent > 0.0)) fail("exponent must be positive");
  if (c.ell < 0) fail("ell must be >= 0");
  if (c.L < 1) fail("L must be positive");
  if (c.theta && *c.theta < 0) fail("theta must be >= 0");
  if (c.mass_floor && !(*c.mass_floor >= 0.0)) fail("mass_floor must be >= 0");
  if (c.budget.max_configurations == 0) fail("exact_budget must be positive");
  if (c.cut.max_pairs == 0) fail("max_pairs must be positive");
  if (c.cavity_limit == 0) fail("cavity_limit must be positive");
  if (c.acyclic_attempts < 1) fail("acyclic_attempts must be positive");
  if (c.bp.max_iters < 0) fail("bp.max_iters must be >= 0");
  if (!(c.bp.damping >= 0.0 && c.bp.damping < 1.0)) fail("bp.damping must lie in [0, 1)");
  if (c.threads < 0) fail("threads must be >= 0");
  for (int r : c.radii) {
    if (r < 0) fail("radii must be >= 0");
  }
  if (!c.graph) {
    ExperimentConfig probe = c;
    if (c.experiment == "sweep" && !c.sweep_values.empty()) {
      // Check the first point of the sweep; later points differ in one field.
      const double v = c.sweep_values.front();
      if (c.sweep_param == "n") probe.model.n = static_cast<int>(v);
      else if (c.sweep_param == "q") probe.model.q = static_cast<int>(v);
      else if (c.sweep_param == "beta") probe.model.beta = v;
      else {
        probe.model.d = v;
        probe.model.m.reset();
      }
    }
    if (probe.model.n < 1) fail("model.n must be positive");
    (void)probe.model.to_spec();
  }
  if (c.experiment == "potts" || (c.experiment == "sweep" && c.sweep_inner == "potts")) {
    if (!c.graph && c.model.model != "potts") fail("potts experiment needs a potts model");
  }
}

io::Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = c.experiment;
  j["model"] = io::model_to_json(c.model);
  if (c.graph) j["graph"] = io::graph_to_json(*c.graph);
  j["acyclic"] = c.acyclic;
  j["acyclic_attempts"] = c.acyclic_attempts;
  j["epsilon"] = c.epsilon;
  j["exponent"] = c.exponent;
  j["ell"] = c.ell;
  j["L"] = c.L;
  j["mass_floor"] = nullable(c.mass_floor);
  j["theta"] = c.theta ? Json(*c.theta) : Json(nullptr);
  j["thetas"] = c.thetas;
  j["seeds"] = c.seeds;
  j["cut_mode"] = to_string(c.cut_mode);
  Json modes = Json::array();
  for (CutMode m : c.cut_modes) modes.push_back(to_string(m));
  j["cut_modes"] = std::move(modes);
  j["mixture"] = c.mixture;
  j["exact_budget"] = c.budget.max_configurations;
  j["max_pairs"] = c.cut.max_pairs;
  j["cavity_limit"] = c.cavity_limit;
  j["radii"] = c.radii;
  j["potts_threshold"] = c.potts_threshold;
  j["potts_max_radius"] = c.potts_max_radius;
  j["bp"] = {{"damping", c.bp.damping},
             {"max_iters", c.bp.max_iters},
             {"tol", c.bp.tol},
             {"init", c.bp.random_init ? "random" : "uniform"}};
  j["emit_messages"] = c.emit_messages;
  j["emit_overlaps"] = c.emit_overlaps;
  j["continuity"] = c.continuity;
  j["sweep"] = {{"param", c.sweep_param}, {"values", c.sweep_values}, {"inner", c.sweep_inner}};
  // threads and output do not affect results and stay out of the echo.
  return j;
}

Instance make_instance(const ExperimentConfig& config, std::uint64_t seed) {
  if (config.graph) return {*config.graph, 1};
  for (int attempt = 0; attempt < config.acyclic_attempts; ++attempt) {
    const std::uint64_t gseed = attempt == 0 ? seed : derive_seed(seed, kGraphStream + static_cast<std::uint64_t>(attempt));
    FactorGraph g = sample_graph(config.model.to_spec(gseed));
    if (!config.acyclic || is_acyclic(g)) return {std::move(g), attempt + 1};
  }
  throw std::runtime_error("make_instance: no acyclic draw within the attempt limit");
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  return config.experiment == "sweep" ? run_sweep(config) : run_single(config);
}

SummaryStats summarize(std::vector<double> values) {
  SummaryStats s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  s.mean = sum.value() / static_cast<double>(s.count);
  if (s.count > 1) {
    CompensatedSum sq;
    for (double v : values) sq.add((v - s.mean) * (v - s.mean));
    s.se = std::sqrt(sq.value() / static_cast<double>(s.count - 1) / static_cast<double>(s.count));
  }
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(s.count - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, s.count - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.min = values.front();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.max = values.back();
  return s;
}

io::Json stats_to_json(const SummaryStats& s) {
  Json j;
  j["count"] = s.count;
  j["mean"] = s.mean;
  j["se"] = s.se;
  j["min"] = s.min;
  j["q1"] = s.q1;
  j["median"] = s.median;
  j["q3"] = s.q3;
  j["max"] = s.max;
  return j;
}

std::string render_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"') out += '"';
      out += ch;
    }
    return out + "\"";
  };
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + quote(header[i]);
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + quote(row[i]);
    out += '\n';
  }
  return out;
}

std::string render_summary(const ExperimentResult& result) { return result.summary.dump(2) + "\n"; }

void emit_report(const ExperimentResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  io::write_text_file((base / "summary.json").string(), render_summary(result));
  io::write_text_file((base / "cells.csv").string(), render_csv(result.header, result.rows));
  if (result.messages) io::write_text_file((base / "messages.json").string(), result.messages->dump(2) + "\n");
  if (result.overlaps_csv) io::write_text_file((base / "overlaps.csv").string(), *result.overlaps_csv);
}

}  // namespace bethelab
