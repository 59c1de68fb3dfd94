#pragma once

// File formats: factor graphs and model specs as JSON, dense measures and
// overlap dumps as CSV, and JSON renderings of the engine's reports.
//
// Doubles are written in shortest round-trip form so files are byte-stable.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "bethelab/cavity.hpp"
#include "bethelab/cut_metric.hpp"
#include "bethelab/graph.hpp"
#include "bethelab/measure.hpp"
#include "bethelab/messages.hpp"
#include "bethelab/observables.hpp"
#include "bethelab/pinning.hpp"
#include "bethelab/random_models.hpp"

namespace bethelab::io {

using Json = nlohmann::ordered_json;

/// Thrown on malformed input files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest string that parses back to the same double.
std::string format_double(double x);

Json graph_to_json(const FactorGraph& g);
FactorGraph graph_from_json(const Json& j);

void write_measure_csv(std::ostream& out, const DenseMeasure& mu);
DenseMeasure read_measure_csv(std::istream& in, int n, int q);

/// {"model": "potts"|"ksat", "n", "k", "q", "beta", "d" or "m", "seed"}.
struct ModelConfig {
  std::string model = "potts";
  int n = 0;
  int k = 2;
  int q = 2;
  double beta = 1.0;
  std::optional<double> d;
  std::optional<int> m;
  std::uint64_t seed = 0;

  ModelSpec to_spec() const;
  /// Same model with another seed.
  ModelSpec to_spec(std::uint64_t seed_override) const;
};

ModelConfig model_from_json(const Json& j);
Json model_to_json(const ModelConfig& m);

Json witness_to_json(const CutResult& r);
Json pinning_report_to_json(const PinningReport& r);
Json bethe_report_to_json(const BetheDeviation& d, bool include_per_cavity = true);
Json messages_to_json(const MessageSet& nu);

/// One row per (atom, omega, omega') entry; atoms stay contiguous.
void write_overlap_csv(std::ostream& out, const OverlapDistribution& od);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace bethelab::io
