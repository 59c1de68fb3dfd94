#pragma once

// Seeded, configuration-driven experiments and their report files.
//
// Every experiment runs its seeds concurrently, merges in seed order and
// renders a deterministic summary.json plus a cells.csv table. Budget and
// normalizer failures are recorded in the affected row, never thrown.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bethelab/io.hpp"

namespace bethelab {

struct BpConfig {
  double damping = 0.0;
  int max_iters = 1000;
  double tol = 1e-10;
  bool random_init = false;
};

struct ExperimentConfig {
  std::string experiment = "bethe";  // pin, bethe, bp, cutm, potts or sweep
  io::ModelConfig model;
  /// A fixed instance replaces sampling; seeds then drive the pinning only.
  std::optional<FactorGraph> graph;
  /// Resample (with derived seeds) until the incidence graph is acyclic.
  bool acyclic = false;
  int acyclic_attempts = 1000;

  double epsilon = 0.1;
  double exponent = 10.0;
  int ell = 2;
  int L = 16;
  std::optional<double> mass_floor;  // default epsilon / 2^Theta
  /// 0 disables pinning (one state, the full cube); empty draws Theta.
  std::optional<int> theta;
  std::vector<int> thetas{1, 2, 4, 8, 10};  // pin sweep, clamped to n

  std::vector<std::uint64_t> seeds{0};
  CutMode cut_mode = CutMode::upper;
  std::vector<CutMode> cut_modes{CutMode::lower, CutMode::upper, CutMode::exact};  // cutm
  bool mixture = true;
  Budget budget;
  CutOptions cut;
  std::size_t cavity_limit = 2000;

  std::vector<int> radii{0, 1, 2};  // potts
  /// A potts seed passes when every local score with r <= potts_max_radius
  /// is below the threshold.
  double potts_threshold = 0.05;
  int potts_max_radius = 2;
  BpConfig bp;

  bool emit_messages = false;
  bool emit_overlaps = false;
  /// Observable gap and overlap D1 alongside the cut distances (cutm).
  bool continuity = false;

  std::string sweep_param = "n";  // n, d, beta or q
  std::vector<double> sweep_values;
  std::string sweep_inner = "potts";

  int threads = 0;  // 0: hardware concurrency
  std::string output = "out";
};

/// Parses the JSON config; unknown experiments and non-positive budgets are
/// rejected with std::invalid_argument.
ExperimentConfig config_from_json(const io::Json& j);
io::Json config_to_json(const ExperimentConfig& c);
void validate_config(const ExperimentConfig& c);

/// Parses "a..b" (inclusive) or a single integer.
std::vector<std::uint64_t> parse_seed_range(const std::string& text);

struct ExperimentResult {
  std::string experiment;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  io::Json summary;
  std::optional<io::Json> messages;
  std::optional<std::string> overlaps_csv;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows);
std::string render_summary(const ExperimentResult& result);

/// Writes summary.json, cells.csv and the optional dumps into dir.
void emit_report(const ExperimentResult& result, const std::string& dir);

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(count)
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Quartiles by linear interpolation between order statistics.
SummaryStats summarize(std::vector<double> values);
io::Json stats_to_json(const SummaryStats& s);

/// The instance an experiment uses for a seed, with the number of draws it
/// took (acyclic conditioning).
struct Instance {
  FactorGraph graph;
  int attempts = 1;
};
Instance make_instance(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace bethelab
