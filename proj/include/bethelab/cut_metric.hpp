#pragma once

// The cut metric
//
//   Cutm(mu, nu) = (1/n) min_gamma max_{I, B, omega}
//                  | sum_{i in I} sum_{(s,t) in B} gamma(s,t) (1{s_i=omega} - 1{t_i=omega}) |
//
// For fixed (I, omega, sign) the best B keeps exactly the pairs with a
// positive integrand, so the inner max runs over the finite family of
// functionals f_{I,omega,sign}(gamma) = sum gamma(s,t) max(0, sign * D_I(s,t)).
// Exact mode solves min_gamma max_f by constraint generation over that
// family. Upper mode evaluates the family on heuristic couplings; lower mode
// minimizes selected functionals over all couplings.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bethelab/measure.hpp"
#include "bethelab/simplex.hpp"

namespace bethelab {

enum class CutMode { exact, upper, lower };

const char* to_string(CutMode mode);
CutMode parse_cut_mode(const std::string& name);

/// Sparse joint law on pairs of configuration indices.
struct Coupling {
  std::vector<std::size_t> sigma;
  std::vector<std::size_t> tau;
  std::vector<double> mass;

  std::size_t size() const noexcept { return mass.size(); }
};

/// A member (I, omega, sign) of the adversary family and its value, already
/// divided by n.
struct AdversaryWitness {
  std::vector<int> I;  // ascending, 0-based
  int omega = 0;
  int sign = 1;
  double value = 0.0;
};

struct CutOptions {
  std::size_t max_pairs = std::size_t{1} << 16;
  std::size_t max_functionals = std::size_t{1} << 18;
  /// Upper mode enumerates all (I, mask) pairs: 4^n work per spin.
  int max_upper_n = 14;
  /// Cuts added per round of constraint generation.
  std::size_t cuts_per_round = 16;
  double violation_tol = 1e-11;
  lp::Options lp;
};

struct CutResult {
  double value = 0.0;
  CutMode mode = CutMode::exact;
  AdversaryWitness witness;
  /// "lp", "diagonal", "independent", "transport" or "marginal".
  std::string coupling_kind;
  std::size_t coupling_support_size = 0;
  /// Materialized for exact mode only.
  std::optional<Coupling> coupling;
  std::size_t lp_rounds = 0;
};

/// (1/2) sum |p - q|.
double tv_distance(const DenseMeasure& p, const DenseMeasure& q);
double tv_distance(std::span<const double> p, std::span<const double> q);

/// Maximal diagonal mass min(mu, nu), residuals coupled independently.
Coupling diagonal_coupling(const DenseMeasure& mu, const DenseMeasure& nu);
Coupling independent_coupling(const DenseMeasure& mu, const DenseMeasure& nu);

/// Throws std::invalid_argument if the marginals differ from (mu, nu) by more
/// than tol.
void validate_coupling(const Coupling& gamma, const DenseMeasure& mu,
                       const DenseMeasure& nu, double tol = 1e-10);

/// f_{I,omega,sign}(gamma) / n for one adversary.
double adversary_value(const Coupling& gamma, const ConfigSpace& space,
                       std::span<const int> I, int omega, int sign);

/// The adversary maximizing f(gamma) / n over all nonempty I, omega, sign.
/// Ties go to the smallest (omega, sign, I-bitmask) triple in that order.
AdversaryWitness best_adversary(const Coupling& gamma, const ConfigSpace& space);

CutResult cut_distance(const DenseMeasure& mu, const DenseMeasure& nu,
                       CutMode mode, const CutOptions& options = {});

/// Product of per-variable marginals given as length-q vectors.
DenseMeasure product_measure(SpinDomain omega,
                             std::span<const std::vector<double>> marginals);

/// sum_i p_i mu_i over components sharing n and omega.
DenseMeasure mixture(std::span<const DenseMeasure> components,
                     std::span<const double> weights);

/// Optimal transport cost between weighted atoms under the ground costs
/// cost[i * |Q| + j]; exact via the transport linear program.
double wasserstein_d1(std::span<const double> p_weights,
                      std::span<const double> q_weights,
                      std::span<const double> cost,
                      const lp::Options& options = {});

}  // namespace bethelab
