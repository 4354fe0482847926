#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace potentia {

struct SimplexOptions {
  double tol = 1e-9;               // pivot / feasibility / optimality tolerance
  std::uint64_t max_pivots = 2'000'000;
  std::uint64_t stall_limit = 2'000;  // pivots without progress before Bland's rule
};

struct SimplexSolution {
  std::vector<double> x;
  double objective = 0.0;
  std::uint64_t pivots = 0;
};

/// Deterministic dense simplex for  max c.x  s.t.  A x <= b,  x >= 0.
///
/// Constraints are appended incrementally; solve() restores feasibility with
/// dual-simplex pivots (rows added with a violated right-hand side enter as
/// infeasible basic slacks) and then drives to optimality with primal pivots.
/// All index choices are deterministic: Dantzig pricing with lowest-index
/// tie-breaking, and a permanent switch to Bland's rule if the objective
/// stalls, so runs are bit-reproducible.
class SimplexSolver {
public:
  SimplexSolver(std::vector<double> objective, SimplexOptions options = {});

  std::size_t num_vars() const { return n_; }
  std::size_t num_rows() const { return rows_; }

  /// Append the constraint  sum_j coeffs[j] * x_j <= rhs  (coeffs has size n).
  void add_row(const double* coeffs, double rhs);

  /// (Re-)optimize after any number of add_row calls.
  SimplexSolution solve();

  /// Current primal value of each structural variable.
  std::vector<double> primal() const;

private:
  double& at(std::size_t i, std::size_t j) { return tab_[i * n_ + j]; }
  double at(std::size_t i, std::size_t j) const { return tab_[i * n_ + j]; }

  void pivot(std::size_t r, std::size_t c);
  bool primal_step(bool bland);
  bool dual_step(bool bland);

  std::size_t n_;                 // structural variables / tableau columns
  std::size_t rows_ = 0;          // tableau rows (one per constraint)
  std::vector<double> c_;         // original objective (structural vars)
  std::vector<double> tab_;       // row-major rows_ x n_
  std::vector<double> rhs_;       // rows_
  std::vector<double> drow_;      // reduced costs over nonbasic columns, size n_
  double z0_ = 0.0;               // objective offset
  std::vector<std::size_t> row_label_;  // basic variable per row
  std::vector<std::size_t> col_label_;  // nonbasic variable per column
  std::vector<std::ptrdiff_t> basic_row_of_var_;  // -1 if nonbasic
  SimplexOptions opt_;
};

}  // namespace potentia
