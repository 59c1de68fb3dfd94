#pragma once

// Dense-tableau simplex for
//
//   minimize c.x  subject to  A_eq x = b_eq,  A_le x <= b_le,  x >= 0.
//
// Two-phase primal simplex with Dantzig pricing (lowest index on ties) and a
// Bland fallback after a run of degenerate pivots. Rows appended after an
// optimal solve are handled by the dual simplex, which keeps the tableau warm
// for cutting-plane loops. Every choice is deterministic.

#include <cstddef>
#include <span>
#include <vector>

namespace bethelab::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(Status status);

struct Options {
  double feasibility_tol = 1e-10;
  double optimality_tol = 1e-11;
  double pivot_tol = 1e-9;
  std::size_t max_iterations = 2'000'000;
  std::size_t degenerate_run_before_bland = 64;
};

class DenseSimplex {
 public:
  explicit DenseSimplex(std::size_t num_vars, Options options = {});

  std::size_t num_vars() const noexcept { return num_vars_; }

  void set_objective(std::span<const double> c);
  void add_equality(std::span<const double> coeffs, double rhs);
  void add_less_equal(std::span<const double> coeffs, double rhs);

  Status solve();

  /// Appends coeffs.x <= rhs to an optimally solved problem and re-optimizes.
  Status add_cut(std::span<const double> coeffs, double rhs);

  double objective_value() const;
  std::vector<double> primal() const;
  std::size_t iterations() const noexcept { return iterations_; }
  std::size_t num_rows() const noexcept { return basis_.size(); }

 private:
  enum class RowKind { equality, less_equal };

  double& at(std::size_t row, std::size_t col) { return tableau_[row * stride_ + col]; }
  double at(std::size_t row, std::size_t col) const { return tableau_[row * stride_ + col]; }

  void build_initial_tableau();
  void pivot(std::size_t row, std::size_t col);
  void price(std::span<const double> costs);
  Status primal_loop();
  Status dual_loop();
  void ensure_columns(std::size_t cols);
  void drop_artificials();

  std::size_t num_vars_;
  Options options_;
  std::vector<double> cost_;

  // Rows staged before the first solve.
  std::vector<std::vector<double>> staged_rows_;
  std::vector<RowKind> staged_kind_;
  std::vector<double> staged_rhs_;

  // Tableau state.
  std::size_t cols_ = 0;    // live columns
  std::size_t stride_ = 0;  // allocated columns per row
  std::vector<double> tableau_;
  std::vector<double> rhs_;
  std::vector<std::size_t> basis_;
  std::vector<double> reduced_;
  std::vector<double> col_cost_;
  std::vector<char> artificial_;
  bool solved_ = false;
  std::size_t iterations_ = 0;
};

struct TransportResult {
  double value = 0.0;
  std::vector<double> flow;  // supply.size() x demand.size(), row-major
  std::size_t iterations = 0;
};

/// min sum c_ij x_ij over x >= 0 with row sums `supply` and column sums
/// `demand`, by the transportation simplex (north-west start, potentials,
/// tree cycles). Demand is rescaled to the supply total, which must agree
/// within 1e-9.
TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                                std::span<const double> cost, const Options& options = {});

}  // namespace bethelab::lp
