#include "bethelab/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace bethelab::io {

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

Json graph_to_json(const FactorGraph& g) {
  Json out;
  out["n"] = g.num_variables();
  out["q"] = g.q();
  Json cs = Json::array();
  for (const auto& c : g.constraints()) {
    Json nb = Json::array();
    for (int v : c.neighbors) nb.push_back(v + 1);
    Json w = Json::array();
    for (double x : c.weight->values()) w.push_back(x);
    Json entry;
    entry["neighbors"] = std::move(nb);
    entry["weights"] = std::move(w);
    cs.push_back(std::move(entry));
  }
  out["constraints"] = std::move(cs);
  return out;
}

FactorGraph graph_from_json(const Json& j) {
  try {
    const int n = j.at("n").get<int>();
    const int q = j.at("q").get<int>();
    std::vector<Constraint> constraints;
    for (const auto& c : j.at("constraints")) {
      std::vector<int> nb;
      for (const auto& v : c.at("neighbors")) nb.push_back(v.get<int>() - 1);
      auto values = c.at("weights").get<std::vector<double>>();
      const int arity = static_cast<int>(nb.size());
      // A unary 0/1 indicator is read back as a hard pin.
      int pin = -1;
      if (arity == 1) {
        int ones = 0, zeros = 0;
        for (std::size_t s = 0; s < values.size(); ++s) {
          if (values[s] == 1.0) {
            ++ones;
            pin = static_cast<int>(s);
          } else if (values[s] == 0.0) {
            ++zeros;
          }
        }
        if (!(ones == 1 && zeros == q - 1)) pin = -1;
      }
      WeightRef table = pin >= 0 ? std::make_shared<const WeightTable>(WeightTable::hard_pin(q, pin))
                                 : std::make_shared<const WeightTable>(q, arity, std::move(values));
      constraints.push_back({std::move(nb), std::move(table)});
    }
    return FactorGraph(n, SpinDomain(q), std::move(constraints));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("graph json: ") + e.what());
  }
}

void write_measure_csv(std::ostream& out, const DenseMeasure& mu) {
  out << "index,prob\n";
  for (std::size_t i = 0; i < mu.size(); ++i) out << i << ',' << format_double(mu[i]) << '\n';
}

DenseMeasure read_measure_csv(std::istream& in, int n, int q) {
  std::string line;
  if (!std::getline(in, line) || line != "index,prob") throw FormatError("measure csv: missing header");
  const std::size_t size = checked_power(static_cast<std::size_t>(q), static_cast<std::size_t>(n));
  std::vector<double> probs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("measure csv: bad row");
    std::size_t idx = 0;
    double p = 0.0;
    const char* b = line.data();
    const char* e = b + line.size();
    if (std::from_chars(b, b + comma, idx).ec != std::errc{} ||
        std::from_chars(b + comma + 1, e, p).ec != std::errc{}) {
      throw FormatError("measure csv: bad number");
    }
    if (idx != probs.size()) throw FormatError("measure csv: indices must be 0, 1, 2, ...");
    probs.push_back(p);
  }
  if (probs.size() != size) throw FormatError("measure csv: expected q^n rows");
  return DenseMeasure(n, SpinDomain(q), std::move(probs));
}

ModelSpec ModelConfig::to_spec() const { return to_spec(seed); }

ModelSpec ModelConfig::to_spec(std::uint64_t seed_override) const {
  ModelSpec spec;
  spec.n = n;
  spec.d = d;
  spec.m = m;
  spec.seed = seed_override;
  if (model == "potts") {
    if (k != 2) throw std::invalid_argument("model: potts requires k = 2");
    spec.k = 2;
    spec.family = potts_family(q, beta);
  } else if (model == "ksat") {
    if (q != 2) throw std::invalid_argument("model: ksat requires q = 2");
    spec.k = k;
    spec.family = ksat_family(k, beta);
  } else {
    throw std::invalid_argument("model: unknown family '" + model + "'");
  }
  spec.validate();
  return spec;
}

ModelConfig model_from_json(const Json& j) {
  try {
    ModelConfig m;
    m.model = j.value("model", std::string("potts"));
    m.n = j.at("n").get<int>();
    m.k = j.value("k", 2);
    m.q = j.value("q", 2);
    m.beta = j.value("beta", 1.0);
    if (j.contains("d")) m.d = j.at("d").get<double>();
    if (j.contains("m")) m.m = j.at("m").get<int>();
    m.seed = j.value("seed", std::uint64_t{0});
    if (m.d.has_value() == m.m.has_value()) throw FormatError("model: set exactly one of d or m");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model json: ") + e.what());
  }
}

Json model_to_json(const ModelConfig& m) {
  Json out;
  out["model"] = m.model;
  out["n"] = m.n;
  out["k"] = m.k;
  out["q"] = m.q;
  out["beta"] = m.beta;
  if (m.d) out["d"] = *m.d;
  if (m.m) out["m"] = *m.m;
  out["seed"] = m.seed;
  return out;
}

Json witness_to_json(const CutResult& r) {
  Json out;
  out["value"] = r.value;
  out["mode"] = to_string(r.mode);
  out["coupling_support_size"] = r.coupling_support_size;
  Json adv;
  Json I = Json::array();
  for (int i : r.witness.I) I.push_back(i + 1);
  adv["I"] = std::move(I);
  adv["omega"] = r.witness.omega;
  adv["sign"] = r.witness.sign;
  out["adversary"] = std::move(adv);
  return out;
}

namespace {

Json one_based(const std::vector<int>& v) {
  Json out = Json::array();
  for (int x : v) out.push_back(x + 1);
  return out;
}

}  // namespace

Json pinning_report_to_json(const PinningReport& r) {
  Json out;
  out["theta"] = r.plan.theta;
  out["I"] = one_based(r.plan.I);
  out["sigma"] = r.plan.sigma;
  Json states = Json::array();
  for (const auto& s : r.per_state) {
    Json e;
    e["sigma"] = s.sigma;
    e["mass"] = s.mass;
    if (s.cut) {
      e["cutm_mode"] = to_string(s.cut->mode);
      e["cutm_value"] = s.cut->value;
    } else {
      e["cutm_mode"] = nullptr;
      e["cutm_value"] = nullptr;
    }
    e["symmetry2"] = s.symmetry2;
    states.push_back(std::move(e));
  }
  out["per_state"] = std::move(states);
  out["mixture_cutm"] = r.mixture_cut.value;
  out["avg_state_cutm"] = r.avg_state_cut;
  return out;
}

Json bethe_report_to_json(const BetheDeviation& d, bool include_per_cavity) {
  Json out;
  out["l"] = d.l;
  out["r"] = d.r;
  out["n_cavities"] = d.n_cavities;
  out["sampled"] = d.sampled;
  if (d.deviation) out["deviation"] = *d.deviation;
  else out["deviation"] = nullptr;
  if (include_per_cavity) out["per_cavity"] = d.per_cavity;
  return out;
}

Json messages_to_json(const MessageSet& nu) {
  Json out = Json::array();
  const auto inc = nu.incidences();
  for (std::size_t i = 0; i < inc.size(); ++i) {
    for (bool to_constraint : {true, false}) {
      const auto dist = to_constraint ? nu.to_constraint(i) : nu.to_variable(i);
      Json e;
      e["x"] = inc[i].variable + 1;
      e["a"] = inc[i].constraint + 1;
      e["dir"] = to_constraint ? "xa" : "ax";
      e["dist"] = std::vector<double>(dist.begin(), dist.end());
      out.push_back(std::move(e));
    }
  }
  return out;
}

void write_overlap_csv(std::ostream& out, const OverlapDistribution& od) {
  out << "omega,omega_prime,value,weight\n";
  for (std::size_t a = 0; a < od.atoms.size(); ++a) {
    const auto rho = od.matrix(a);
    for (int s = 0; s < od.q; ++s) {
      for (int t = 0; t < od.q; ++t) {
        out << s << ',' << t << ',' << format_double(rho[static_cast<std::size_t>(s * od.q + t)]) << ','
            << format_double(od.atoms[a].weight) << '\n';
      }
    }
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace bethelab::io
