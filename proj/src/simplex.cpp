#include "potentia/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "potentia/errors.hpp"

namespace potentia {

namespace {
constexpr std::size_t kNone = static_cast<std::size_t>(-1);
}

SimplexSolver::SimplexSolver(std::vector<double> objective, SimplexOptions options)
    : n_(objective.size()), c_(std::move(objective)), opt_(options) {
  if (n_ == 0) throw Error(ErrorCode::invalid_argument, "simplex: no variables");
  drow_ = c_;
  col_label_.resize(n_);
  for (std::size_t j = 0; j < n_; ++j) col_label_[j] = j;
  basic_row_of_var_.assign(n_, -1);
}

void SimplexSolver::add_row(const double* coeffs, double rhs) {
  // Express the new slack in terms of the current nonbasic variables by
  // substituting every basic structural variable with its tableau row.
  std::vector<double> row(n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t lab = col_label_[j];
    if (lab < n_) row[j] = coeffs[lab];
  }
  double b = rhs;
  for (std::size_t i = 0; i < rows_; ++i) {
    const std::size_t lab = row_label_[i];
    if (lab >= n_) continue;
    const double cv = coeffs[lab];
    if (cv == 0.0) continue;
    const double* tr = &tab_[i * n_];
    for (std::size_t j = 0; j < n_; ++j) row[j] -= cv * tr[j];
    b -= cv * rhs_[i];
  }
  tab_.insert(tab_.end(), row.begin(), row.end());
  rhs_.push_back(b);
  row_label_.push_back(basic_row_of_var_.size());  // fresh slack label
  basic_row_of_var_.push_back(static_cast<std::ptrdiff_t>(rows_));
  ++rows_;
}

void SimplexSolver::pivot(std::size_t r, std::size_t c) {
  const double p = at(r, c);
  const double invp = 1.0 / p;
  double* rowr = &tab_[r * n_];
  for (std::size_t j = 0; j < n_; ++j) rowr[j] *= invp;
  rhs_[r] *= invp;
  rowr[c] = 0.0;  // stashed so the uniform updates below skip the pivot column
  for (std::size_t i = 0; i < rows_; ++i) {
    if (i == r) continue;
    double* rowi = &tab_[i * n_];
    const double f = rowi[c];
    if (f != 0.0) {
      for (std::size_t j = 0; j < n_; ++j) rowi[j] -= f * rowr[j];
      rowi[c] = -f * invp;
      rhs_[i] -= f * rhs_[r];
    }
  }
  const double fd = drow_[c];
  if (fd != 0.0) {
    for (std::size_t j = 0; j < n_; ++j) drow_[j] -= fd * rowr[j];
    drow_[c] = -fd * invp;
    z0_ += fd * rhs_[r];
  }
  rowr[c] = invp;

  const std::size_t leaving = row_label_[r];
  const std::size_t entering = col_label_[c];
  row_label_[r] = entering;
  col_label_[c] = leaving;
  basic_row_of_var_[entering] = static_cast<std::ptrdiff_t>(r);
  basic_row_of_var_[leaving] = -1;
}

bool SimplexSolver::primal_step(bool bland) {
  const double tol = opt_.tol;
  std::size_t c = kNone;
  if (!bland) {
    double best = tol;
    for (std::size_t j = 0; j < n_; ++j) {
      if (drow_[j] > best) {
        best = drow_[j];
        c = j;
      }
    }
  } else {
    std::size_t best_label = kNone;
    for (std::size_t j = 0; j < n_; ++j) {
      if (drow_[j] > tol && col_label_[j] < best_label) {
        best_label = col_label_[j];
        c = j;
      }
    }
  }
  if (c == kNone) return false;

  std::size_t r = kNone;
  double best_ratio = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    const double a = at(i, c);
    if (a <= tol) continue;
    const double ratio = std::max(rhs_[i], 0.0) / a;
    if (r == kNone) {
      best_ratio = ratio;
      r = i;
      continue;
    }
    const double band = tol * std::max(1.0, best_ratio);
    if (ratio < best_ratio - band) {
      best_ratio = ratio;
      r = i;
    } else if (ratio <= best_ratio + band && bland && row_label_[i] < row_label_[r]) {
      r = i;
    }
  }
  if (r == kNone) throw Error(ErrorCode::compute, "simplex: unbounded objective");
  pivot(r, c);
  return true;
}

bool SimplexSolver::dual_step(bool bland) {
  const double tol = opt_.tol;
  std::size_t r = kNone;
  if (!bland) {
    double worst = -tol;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (rhs_[i] < worst) {
        worst = rhs_[i];
        r = i;
      }
    }
  } else {
    std::size_t best_label = kNone;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (rhs_[i] < -tol && row_label_[i] < best_label) {
        best_label = row_label_[i];
        r = i;
      }
    }
  }
  if (r == kNone) return false;

  std::size_t c = kNone;
  double best_theta = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    const double a = at(r, j);
    if (a >= -tol) continue;
    const double theta = drow_[j] / a;  // >= 0 when dual feasible
    if (c == kNone) {
      best_theta = theta;
      c = j;
      continue;
    }
    const double band = tol * std::max(1.0, best_theta);
    if (theta < best_theta - band) {
      best_theta = theta;
      c = j;
    } else if (theta <= best_theta + band && bland && col_label_[j] < col_label_[c]) {
      c = j;
    }
  }
  if (c == kNone) throw Error(ErrorCode::compute, "simplex: infeasible constraint system");
  pivot(r, c);
  return true;
}

SimplexSolution SimplexSolver::solve() {
  if (rows_ == 0) {
    // No constraints: only a zero/negative objective is bounded.
    for (std::size_t j = 0; j < n_; ++j) {
      if (c_[j] > opt_.tol) throw Error(ErrorCode::compute, "simplex: unbounded objective");
    }
    return {std::vector<double>(n_, 0.0), 0.0, 0};
  }

  double dual_infeas = 0.0;
  double primal_infeas = 0.0;
  for (std::size_t j = 0; j < n_; ++j) dual_infeas = std::max(dual_infeas, drow_[j]);
  for (std::size_t i = 0; i < rows_; ++i) primal_infeas = std::max(primal_infeas, -rhs_[i]);
  if (primal_infeas > opt_.tol && dual_infeas > opt_.tol) {
    // Usage contract: the first solve starts from nonnegative right-hand
    // sides, later re-solves start dual-feasible, so this mix cannot occur.
    throw Error(ErrorCode::compute, "simplex: neither primal nor dual feasible start");
  }

  std::uint64_t pivots = 0;
  bool bland = false;
  double best_obj = -std::numeric_limits<double>::infinity();
  std::uint64_t since_progress = 0;

  auto account = [&]() {
    ++pivots;
    if (pivots > opt_.max_pivots) {
      throw Error(ErrorCode::compute, "simplex: iteration limit exceeded");
    }
    if (z0_ > best_obj + opt_.tol * (1.0 + std::fabs(best_obj))) {
      best_obj = z0_;
      since_progress = 0;
    } else if (++since_progress > opt_.stall_limit) {
      bland = true;
    }
  };

  while (dual_step(bland)) account();
  best_obj = -std::numeric_limits<double>::infinity();
  since_progress = 0;
  while (primal_step(bland)) account();

  SimplexSolution sol;
  sol.x = primal();
  sol.pivots = pivots;
  double obj = 0.0;
  for (std::size_t v = 0; v < n_; ++v) obj += c_[v] * sol.x[v];
  sol.objective = obj;
  return sol;
}

std::vector<double> SimplexSolver::primal() const {
  std::vector<double> x(n_, 0.0);
  for (std::size_t v = 0; v < n_; ++v) {
    const std::ptrdiff_t r = basic_row_of_var_[v];
    if (r >= 0) x[v] = std::max(rhs_[static_cast<std::size_t>(r)], 0.0);
  }
  return x;
}

}  // namespace potentia
