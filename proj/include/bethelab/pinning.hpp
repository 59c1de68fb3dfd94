#pragma once

// Symmetry scores, the pinning procedure and the subcube state decomposition.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bethelab/cut_metric.hpp"
#include "bethelab/measure.hpp"

namespace bethelab {

/// order 2: (1/n^2) sum over ordered pairs i != j of TV(mu_ij, mu_i x mu_j).
/// order k: n^-k sum over i_1 < ... < i_k of TV(mu_{i_1..i_k}, product).
double symmetry_score(const DenseMeasure& mu, int order = 2);

/// ceil(min(2 eps^-4 ln q, ((2 ln q) / eps)^c)).
int theta_max(double epsilon, int q, double exponent = 10.0);

struct PinningPlan {
  double epsilon = 0.0;
  int theta_max = 0;
  int theta = 0;
  std::vector<int> I;      // ascending
  std::vector<int> sigma;  // spins on I
};

/// Theta uniform on 1..min(theta_max, n) from stream 0, I uniform of size
/// Theta from stream 1, sigma ~ mu_I from stream 2. A forced theta replaces
/// the first draw.
PinningPlan make_plan(const DenseMeasure& mu, double epsilon, std::uint64_t seed,
                      double exponent = 10.0, std::optional<int> forced_theta = std::nullopt);

struct SubcubeState {
  std::vector<int> sigma;
  double mass = 0.0;
  DenseMeasure conditional;  // mu^{I,sigma}, uniform on the subcube if mass is 0
  DenseMeasure product;      // product of the conditional's site marginals
};

struct StateDecomposition {
  std::vector<int> I;
  std::vector<SubcubeState> states;  // all sigma in Omega^I, lexicographic
};

StateDecomposition decompose(const DenseMeasure& mu, std::span<const int> I);

/// sum_sigma mu(S^sigma) * product_sigma.
DenseMeasure state_mixture(const StateDecomposition& dec);

/// A cut distance with the mode that produced it; exact requests fall back
/// to upper mode when the exact budget is exceeded.
struct MeasuredCut {
  double value = 0.0;
  CutMode mode = CutMode::upper;
  bool fell_back = false;
};

MeasuredCut measured_cut(const DenseMeasure& mu, const DenseMeasure& nu, CutMode mode,
                         const CutOptions& options = {});

/// Cut distance between two measures that agree deterministically on the
/// pinned coordinates I: computed on the free coordinates and rescaled.
MeasuredCut measured_cut_on_subcube(const DenseMeasure& mu, const DenseMeasure& nu,
                                    std::span<const int> I, CutMode mode,
                                    const CutOptions& options = {});

struct StateReport {
  std::vector<int> sigma;
  double mass = 0.0;
  std::optional<MeasuredCut> cut;  // empty for zero-mass states
  double symmetry2 = 0.0;
};

struct PinningReport {
  PinningPlan plan;
  std::vector<StateReport> per_state;
  MeasuredCut sampled_cut;     // Cutm(mu^{I,Sigma}, product) for the drawn Sigma
  double avg_state_cut = 0.0;  // mass-weighted average over the states
  MeasuredCut mixture_cut;     // Cutm(mu, sum_sigma mu(S^sigma) product_sigma)
};

struct PinningOptions {
  double epsilon = 0.1;
  double exponent = 10.0;
  CutMode mode = CutMode::upper;
  CutOptions cut;
  /// Skip the (expensive) mixture distance.
  bool mixture = true;
};

PinningReport run_pinning(const DenseMeasure& mu, std::uint64_t seed, const PinningOptions& options,
                          std::optional<int> forced_theta = std::nullopt);

/// Report for an explicit plan (the decomposition is returned alongside).
PinningReport run_pinning_plan(const DenseMeasure& mu, const PinningPlan& plan,
                               const PinningOptions& options, StateDecomposition* out = nullptr);

struct MixtureCheck {
  double total_mass = 0.0;
  MeasuredCut cut;
  std::vector<double> part_scores;
  bool scores_within = false;  // every score <= (eps/9)^3
  bool cut_within = false;     // cut <= 2 eps
};

/// Partition members must be pairwise disjoint with positive mass.
MixtureCheck mixture_check(const DenseMeasure& mu, std::span<const EventSet> parts, double epsilon,
                           CutMode mode = CutMode::exact, const CutOptions& options = {});

}  // namespace bethelab
