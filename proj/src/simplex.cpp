#include "bethelab/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bethelab::lp {

const char* to_string(Status status) {
  switch (status) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

DenseSimplex::DenseSimplex(std::size_t num_vars, Options options)
    : num_vars_(num_vars), options_(options), cost_(num_vars, 0.0) {}

void DenseSimplex::set_objective(std::span<const double> c) {
  if (c.size() != num_vars_) throw std::invalid_argument("simplex: objective size mismatch");
  if (solved_) throw std::logic_error("simplex: objective is fixed after solve()");
  cost_.assign(c.begin(), c.end());
}

void DenseSimplex::add_equality(std::span<const double> coeffs, double rhs) {
  if (coeffs.size() != num_vars_) throw std::invalid_argument("simplex: row size mismatch");
  if (solved_) throw std::logic_error("simplex: use add_cut() after solve()");
  staged_rows_.emplace_back(coeffs.begin(), coeffs.end());
  staged_kind_.push_back(RowKind::equality);
  staged_rhs_.push_back(rhs);
}

void DenseSimplex::add_less_equal(std::span<const double> coeffs, double rhs) {
  if (coeffs.size() != num_vars_) throw std::invalid_argument("simplex: row size mismatch");
  if (solved_) throw std::logic_error("simplex: use add_cut() after solve()");
  staged_rows_.emplace_back(coeffs.begin(), coeffs.end());
  staged_kind_.push_back(RowKind::less_equal);
  staged_rhs_.push_back(rhs);
}

void DenseSimplex::ensure_columns(std::size_t cols) {
  if (cols <= stride_) {
    cols_ = std::max(cols_, cols);
    return;
  }
  std::size_t new_stride = std::max<std::size_t>(stride_ * 2, cols + 8);
  std::vector<double> grown(basis_.size() * new_stride, 0.0);
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    std::copy_n(tableau_.begin() + static_cast<std::ptrdiff_t>(i * stride_), cols_,
                grown.begin() + static_cast<std::ptrdiff_t>(i * new_stride));
  }
  tableau_ = std::move(grown);
  stride_ = new_stride;
  cols_ = cols;
  reduced_.resize(stride_, 0.0);
  col_cost_.resize(stride_, 0.0);
  artificial_.resize(stride_, 0);
}

void DenseSimplex::build_initial_tableau() {
  const std::size_t m = staged_rows_.size();
  std::size_t slacks = 0;
  std::size_t artificials = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (staged_kind_[i] == RowKind::less_equal) {
      ++slacks;
      if (staged_rhs_[i] < 0) ++artificials;
    } else {
      ++artificials;
    }
  }
  cols_ = num_vars_ + slacks + artificials;
  stride_ = cols_ + 16;
  tableau_.assign(m * stride_, 0.0);
  rhs_.assign(m, 0.0);
  basis_.assign(m, 0);
  reduced_.assign(stride_, 0.0);
  col_cost_.assign(stride_, 0.0);
  artificial_.assign(stride_, 0);
  std::copy(cost_.begin(), cost_.end(), col_cost_.begin());

  std::size_t next_slack = num_vars_;
  std::size_t next_art = num_vars_ + slacks;
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = staged_rhs_[i] < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < num_vars_; ++j) at(i, j) = sign * staged_rows_[i][j];
    rhs_[i] = sign * staged_rhs_[i];
    if (staged_kind_[i] == RowKind::less_equal) {
      const std::size_t s = next_slack++;
      at(i, s) = sign;
      if (sign > 0) {
        basis_[i] = s;
        continue;
      }
    }
    const std::size_t a = next_art++;
    at(i, a) = 1.0;
    artificial_[a] = 1;
    basis_[i] = a;
  }
  staged_rows_.clear();
  staged_rows_.shrink_to_fit();
}

void DenseSimplex::price(std::span<const double> costs) {
  for (std::size_t j = 0; j < cols_; ++j) reduced_[j] = costs[j];
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    const double cb = costs[basis_[i]];
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j < cols_; ++j) reduced_[j] -= cb * at(i, j);
  }
}

void DenseSimplex::pivot(std::size_t r, std::size_t s) {
  ++iterations_;
  const double inv = 1.0 / at(r, s);
  double* prow = &tableau_[r * stride_];
  for (std::size_t j = 0; j < cols_; ++j) prow[j] *= inv;
  prow[s] = 1.0;
  rhs_[r] *= inv;
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (i == r) continue;
    double* row = &tableau_[i * stride_];
    const double f = row[s];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < cols_; ++j) row[j] -= f * prow[j];
    row[s] = 0.0;
    rhs_[i] -= f * rhs_[r];
  }
  const double f = reduced_[s];
  if (f != 0.0) {
    for (std::size_t j = 0; j < cols_; ++j) reduced_[j] -= f * prow[j];
    reduced_[s] = 0.0;
  }
  basis_[r] = s;
}

Status DenseSimplex::primal_loop() {
  std::vector<char> is_basic(cols_, 0);
  for (std::size_t b : basis_) is_basic[b] = 1;
  std::size_t degenerate_run = 0;
  while (true) {
    if (iterations_ >= options_.max_iterations) return Status::iteration_limit;
    const bool bland = degenerate_run >= options_.degenerate_run_before_bland;
    std::size_t enter = cols_;
    double best = -options_.optimality_tol;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (is_basic[j] || artificial_[j]) continue;
      if (reduced_[j] < best) {
        enter = j;
        if (bland) break;
        best = reduced_[j];
      }
    }
    if (enter == cols_) return Status::optimal;

    std::size_t leave = basis_.size();
    double best_ratio = std::numeric_limits<double>::infinity();
    double best_pivot = 0.0;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const double a = at(i, enter);
      if (a <= options_.pivot_tol) continue;
      const double ratio = std::max(rhs_[i], 0.0) / a;
      bool take = false;
      if (ratio < best_ratio - 1e-14) {
        take = true;
      } else if (ratio <= best_ratio + 1e-14) {
        take = bland ? basis_[i] < basis_[leave] : a > best_pivot;
      }
      if (take) {
        leave = i;
        best_ratio = ratio;
        best_pivot = a;
      }
    }
    if (leave == basis_.size()) return Status::unbounded;
    degenerate_run = best_ratio <= 1e-14 ? degenerate_run + 1 : 0;
    is_basic[basis_[leave]] = 0;
    is_basic[enter] = 1;
    pivot(leave, enter);
  }
}

Status DenseSimplex::dual_loop() {
  std::vector<char> is_basic(cols_, 0);
  for (std::size_t b : basis_) is_basic[b] = 1;
  while (true) {
    if (iterations_ >= options_.max_iterations) return Status::iteration_limit;
    std::size_t leave = basis_.size();
    double most_negative = -options_.feasibility_tol;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (rhs_[i] < most_negative) {
        most_negative = rhs_[i];
        leave = i;
      }
    }
    if (leave == basis_.size()) return Status::optimal;

    std::size_t enter = cols_;
    double best_ratio = std::numeric_limits<double>::infinity();
    double best_pivot = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (is_basic[j] || artificial_[j]) continue;
      const double a = at(leave, j);
      if (a >= -options_.pivot_tol) continue;
      const double ratio = std::max(reduced_[j], 0.0) / (-a);
      if (ratio < best_ratio - 1e-14 ||
          (ratio <= best_ratio + 1e-14 && -a > best_pivot)) {
        enter = j;
        best_ratio = ratio;
        best_pivot = -a;
      }
    }
    if (enter == cols_) return Status::infeasible;
    is_basic[basis_[leave]] = 0;
    is_basic[enter] = 1;
    pivot(leave, enter);
  }
}

void DenseSimplex::drop_artificials() {
  // Pivot basic artificials (at zero level) out, or drop their rows when the
  // row is redundant.
  for (std::size_t i = 0; i < basis_.size();) {
    if (!artificial_[basis_[i]]) {
      ++i;
      continue;
    }
    std::size_t best = cols_;
    double best_abs = options_.pivot_tol;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (artificial_[j]) continue;
      if (std::abs(at(i, j)) > best_abs) {
        best_abs = std::abs(at(i, j));
        best = j;
      }
    }
    if (best != cols_) {
      pivot(i, best);
      ++i;
      continue;
    }
    // Redundant row: remove it.
    const std::size_t last = basis_.size() - 1;
    for (std::size_t r = i; r < last; ++r) {
      std::copy_n(tableau_.begin() + static_cast<std::ptrdiff_t>((r + 1) * stride_), stride_,
                  tableau_.begin() + static_cast<std::ptrdiff_t>(r * stride_));
      rhs_[r] = rhs_[r + 1];
      basis_[r] = basis_[r + 1];
    }
    basis_.pop_back();
    rhs_.pop_back();
    tableau_.resize(basis_.size() * stride_);
  }
  // Compact the artificial columns away.
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < cols_; ++j) {
    if (!artificial_[j]) keep.push_back(j);
  }
  if (keep.size() == cols_) return;
  std::vector<std::size_t> remap(cols_, cols_);
  for (std::size_t k = 0; k < keep.size(); ++k) remap[keep[k]] = k;
  const std::size_t new_stride = keep.size() + 16;
  std::vector<double> compact(basis_.size() * new_stride, 0.0);
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    for (std::size_t k = 0; k < keep.size(); ++k) {
      compact[i * new_stride + k] = at(i, keep[k]);
    }
    basis_[i] = remap[basis_[i]];
  }
  std::vector<double> costs(new_stride, 0.0);
  for (std::size_t k = 0; k < keep.size(); ++k) costs[k] = col_cost_[keep[k]];
  tableau_ = std::move(compact);
  stride_ = new_stride;
  cols_ = keep.size();
  col_cost_ = std::move(costs);
  artificial_.assign(stride_, 0);
  reduced_.assign(stride_, 0.0);
}

Status DenseSimplex::solve() {
  if (solved_) throw std::logic_error("simplex: solve() called twice");
  build_initial_tableau();
  solved_ = true;

  bool any_artificial = false;
  for (std::size_t b : basis_) any_artificial = any_artificial || artificial_[b];
  if (any_artificial) {
    std::vector<double> phase1(stride_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) phase1[j] = artificial_[j] ? 1.0 : 0.0;
    // Artificial columns may enter during phase one.
    std::vector<char> saved = artificial_;
    std::fill(artificial_.begin(), artificial_.end(), 0);
    price(phase1);
    const Status s = primal_loop();
    artificial_ = std::move(saved);
    if (s == Status::iteration_limit) return s;
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (artificial_[basis_[i]]) infeasibility += std::max(rhs_[i], 0.0);
    }
    double scale = 1.0;
    for (double r : rhs_) scale = std::max(scale, std::abs(r));
    if (infeasibility > options_.feasibility_tol * scale * 10.0) return Status::infeasible;
    drop_artificials();
  }
  price(col_cost_);
  return primal_loop();
}

Status DenseSimplex::add_cut(std::span<const double> coeffs, double rhs) {
  if (!solved_) throw std::logic_error("simplex: add_cut() requires a prior solve()");
  if (coeffs.size() != num_vars_) throw std::invalid_argument("simplex: row size mismatch");
  const std::size_t slack = cols_;
  ensure_columns(cols_ + 1);
  const std::size_t r = basis_.size();
  tableau_.resize((r + 1) * stride_, 0.0);
  std::fill(tableau_.begin() + static_cast<std::ptrdiff_t>(r * stride_), tableau_.end(), 0.0);
  for (std::size_t j = 0; j < num_vars_; ++j) at(r, j) = coeffs[j];
  at(r, slack) = 1.0;
  double b = rhs;
  // Express the new row in the current basis.
  for (std::size_t i = 0; i < r; ++i) {
    const double f = at(r, basis_[i]);
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < cols_; ++j) at(r, j) -= f * at(i, j);
    at(r, basis_[i]) = 0.0;
    b -= f * rhs_[i];
  }
  rhs_.push_back(b);
  basis_.push_back(slack);
  reduced_[slack] = 0.0;
  col_cost_[slack] = 0.0;
  const Status s = dual_loop();
  if (s != Status::optimal) return s;
  return primal_loop();
}

double DenseSimplex::objective_value() const {
  double z = 0.0;
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (basis_[i] < num_vars_) z += cost_[basis_[i]] * std::max(rhs_[i], 0.0);
  }
  return z;
}

std::vector<double> DenseSimplex::primal() const {
  std::vector<double> x(num_vars_, 0.0);
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (basis_[i] < num_vars_) x[basis_[i]] = std::max(rhs_[i], 0.0);
  }
  return x;
}

TransportResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                                std::span<const double> cost, const Options& options) {
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();
  if (m == 0 || n == 0) throw std::invalid_argument("solve_transport: empty side");
  if (cost.size() != m * n) throw std::invalid_argument("solve_transport: cost matrix size");
  double total_s = 0.0, total_d = 0.0;
  for (double x : supply) {
    if (!(x >= 0.0)) throw std::invalid_argument("solve_transport: negative supply");
    total_s += x;
  }
  for (double x : demand) {
    if (!(x >= 0.0)) throw std::invalid_argument("solve_transport: negative demand");
    total_d += x;
  }
  if (std::abs(total_s - total_d) > 1e-9 * std::max(1.0, total_s)) {
    throw std::invalid_argument("solve_transport: supply and demand totals differ");
  }
  double cmax = 0.0;
  for (double c : cost) cmax = std::max(cmax, std::abs(c));
  const double tol = options.optimality_tol * std::max(1.0, cmax);

  TransportResult res;
  res.flow.assign(m * n, 0.0);
  std::vector<char> basic(m * n, 0);
  std::vector<std::size_t> cells;  // basic cells, i * n + j

  // North-west corner: exactly m + n - 1 basic cells, some possibly zero.
  {
    std::vector<double> a(supply.begin(), supply.end());
    std::vector<double> b(demand.begin(), demand.end());
    const double scale = total_d > 0.0 ? total_s / total_d : 1.0;
    for (double& x : b) x *= scale;
    std::size_t i = 0, j = 0;
    while (true) {
      const double amt = std::max(0.0, std::min(a[i], b[j]));
      res.flow[i * n + j] = amt;
      basic[i * n + j] = 1;
      cells.push_back(i * n + j);
      a[i] -= amt;
      b[j] -= amt;
      if (i == m - 1 && j == n - 1) break;
      if (j == n - 1 || (i < m - 1 && a[i] <= b[j])) ++i;
      else ++j;
    }
  }

  // Tree nodes: rows 0..m-1, columns m..m+n-1.
  const std::size_t nodes = m + n;
  std::vector<double> pot(nodes);
  std::vector<std::size_t> parent(nodes), parent_cell(nodes), depth(nodes);
  std::vector<std::vector<std::size_t>> adj(nodes);
  std::vector<std::size_t> queue;
  std::vector<char> seen(nodes);
  std::size_t degenerate_run = 0;

  while (true) {
    for (auto& v : adj) v.clear();
    for (std::size_t k = 0; k < cells.size(); ++k) {
      adj[cells[k] / n].push_back(k);
      adj[m + cells[k] % n].push_back(k);
    }
    std::fill(seen.begin(), seen.end(), 0);
    queue.assign(1, 0);
    seen[0] = 1;
    pot[0] = 0.0;
    depth[0] = 0;
    parent[0] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const std::size_t v = queue[h];
      for (std::size_t k : adj[v]) {
        const std::size_t i = cells[k] / n;
        const std::size_t w = v < m ? m + cells[k] % n : i;
        if (seen[w]) continue;
        seen[w] = 1;
        // u_i + v_j = c_ij on basic cells.
        pot[w] = cost[cells[k]] - pot[v];
        parent[w] = v;
        parent_cell[w] = k;
        depth[w] = depth[v] + 1;
        queue.push_back(w);
      }
    }
    if (queue.size() != nodes) throw std::logic_error("solve_transport: basis is not a spanning tree");

    // Pricing: most negative reduced cost, or the first negative one while
    // stalling on degenerate pivots.
    const bool bland = degenerate_run > options.degenerate_run_before_bland;
    std::size_t enter = m * n;
    double best = -tol;
    for (std::size_t i = 0; i < m && !(bland && enter < m * n); ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t c = i * n + j;
        if (basic[c]) continue;
        const double r = cost[c] - pot[i] - pot[m + j];
        if (r < best) {
          best = r;
          enter = c;
          if (bland) break;
        }
      }
    }
    if (enter == m * n) break;
    if (++res.iterations > options.max_iterations) {
      throw std::runtime_error("solve_transport: iteration limit");
    }

    // Cycle: entering cell, then the tree path from its column to its row.
    std::size_t a = m + enter % n;  // column side
    std::size_t b = enter / n;      // row side
    std::vector<std::size_t> from_col, from_row;
    while (a != b) {
      if (depth[a] >= depth[b]) {
        from_col.push_back(parent_cell[a]);
        a = parent[a];
      } else {
        from_row.push_back(parent_cell[b]);
        b = parent[b];
      }
    }
    std::vector<std::size_t> path(from_col);
    path.insert(path.end(), from_row.rbegin(), from_row.rend());
    // path[0] is subtracted, path[1] added, and so on.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = path.size();
    for (std::size_t t = 0; t < path.size(); t += 2) {
      const double f = res.flow[cells[path[t]]];
      if (f < theta) {
        theta = f;
        leave = t;
      }
    }
    theta = std::max(0.0, theta);
    degenerate_run = theta == 0.0 ? degenerate_run + 1 : 0;
    res.flow[enter] += theta;
    for (std::size_t t = 0; t < path.size(); ++t) {
      double& f = res.flow[cells[path[t]]];
      f = t % 2 == 0 ? std::max(0.0, f - theta) : f + theta;
    }
    const std::size_t out = path[leave];
    res.flow[cells[out]] = 0.0;
    basic[cells[out]] = 0;
    basic[enter] = 1;
    cells[out] = enter;
  }

  double value = 0.0, comp = 0.0;
  for (std::size_t c = 0; c < m * n; ++c) {
    if (res.flow[c] == 0.0) continue;
    const double term = res.flow[c] * cost[c] - comp;
    const double t = value + term;
    comp = (t - value) - term;
    value = t;
  }
  res.value = value;
  return res;
}

}  // namespace bethelab::lp
