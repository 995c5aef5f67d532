#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "simplex_model.hpp"
#include "ubcn/errors.hpp"
#include "ubcn/solver/linear_program.hpp"

namespace ubcn::solver {
namespace detail {

namespace {

bool is_integer_value(double v) { return std::abs(v - std::round(v)) <= 1e-12 * std::max(1.0, std::abs(v)); }

struct NormalizedRow {
  std::vector<double> a;
  double b;
  RowSense sense;
  bool integral;
};

}  // namespace

SimplexModel::SimplexModel(const LinearProgram& lp, std::vector<bool> integer_vars, const LpOptions& options)
    : options_(options) {
  const std::size_t n = lp.num_variables();
  if (n == 0) throw std::invalid_argument("linear program has no variables");
  if (!lp.lower.empty() && lp.lower.size() != n) throw std::invalid_argument("lower bound size mismatch");
  if (!lp.upper.empty() && lp.upper.size() != n) throw std::invalid_argument("upper bound size mismatch");
  if (!integer_vars.empty() && integer_vars.size() != n) throw std::invalid_argument("integer flag size mismatch");
  integer_vars.resize(n, false);
  for (double c : lp.objective)
    if (!std::isfinite(c)) throw std::invalid_argument("objective coefficients must be finite");

  num_structural_ = n;
  lower_.assign(n, 0.0);
  std::vector<double> upper(n, kInfinity);
  for (std::size_t j = 0; j < n; ++j) {
    if (!lp.lower.empty()) lower_[j] = lp.lower[j];
    if (!lp.upper.empty()) upper[j] = lp.upper[j];
    if (!std::isfinite(lower_[j])) throw std::invalid_argument("lower bounds must be finite");
    if (integer_vars[j]) {
      lower_[j] = std::ceil(lower_[j] - 1e-9);
      if (std::isfinite(upper[j])) upper[j] = std::floor(upper[j] + 1e-9);
    }
    if (upper[j] < lower_[j]) throw Infeasible("variable bounds are inconsistent");
  }

  std::vector<NormalizedRow> rows;
  auto push_row = [&](std::vector<double> a, RowSense sense, double b) {
    if (a.size() != n) throw std::invalid_argument("constraint row size mismatch");
    for (double v : a)
      if (!std::isfinite(v)) throw std::invalid_argument("constraint coefficients must be finite");
    if (!std::isfinite(b)) throw std::invalid_argument("constraint rhs must be finite");
    for (std::size_t j = 0; j < n; ++j) b -= a[j] * lower_[j];
    if (b < 0.0) {
      for (double& v : a) v = -v;
      b = -b;
      if (sense == RowSense::LessEqual) sense = RowSense::GreaterEqual;
      else if (sense == RowSense::GreaterEqual) sense = RowSense::LessEqual;
    }
    double amax = 0.0;
    bool integral = is_integer_value(b);
    for (std::size_t j = 0; j < n; ++j) {
      amax = std::max(amax, std::abs(a[j]));
      if (a[j] != 0.0 && (!integer_vars[j] || !is_integer_value(a[j]))) integral = false;
    }
    if (amax == 0.0) {
      const bool ok = (sense == RowSense::LessEqual) || b <= options_.feasibility_tol;
      if (!ok) throw Infeasible("constraint with zero coefficients cannot be met");
      return;
    }
    if (!integral) {
      for (double& v : a) v /= amax;
      b /= amax;
    }
    rows.push_back({std::move(a), b, sense, integral});
  };
  for (const auto& row : lp.constraints) push_row(row.coefficients, row.sense, row.rhs);
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isfinite(upper[j])) {
      std::vector<double> a(n, 0.0);
      a[j] = 1.0;
      push_row(std::move(a), RowSense::LessEqual, upper[j]);
    }
  }

  std::size_t num_slack = 0, num_art = 0;
  for (const auto& r : rows) {
    if (r.sense != RowSense::Equal) ++num_slack;
    if (r.sense != RowSense::LessEqual) ++num_art;
  }
  rows_ = rows.size();
  cols_ = n + num_slack + num_art;
  stride_ = cols_ + 1;
  data_.assign(rows_ * stride_, 0.0);
  cost_.assign(cols_, 0.0);
  basis_.assign(rows_, 0);
  allowed_.assign(cols_, 1);
  integer_.assign(cols_, 0);
  artificial_.assign(cols_, 0);
  objective_.assign(cols_, 0.0);
  expr_.assign(cols_, std::vector<double>(n, 0.0));
  expr_const_.assign(cols_, 0.0);

  double cmax = 0.0;
  for (double c : lp.objective) cmax = std::max(cmax, std::abs(c));
  objective_scale_ = cmax > 0.0 ? 1.0 / cmax : 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    objective_[j] = lp.objective[j] * objective_scale_;
    integer_[j] = integer_vars[j] ? 1 : 0;
    expr_[j][j] = 1.0;
  }

  std::size_t slack_col = n;
  std::size_t art_col = n + num_slack;
  for (std::size_t r = 0; r < rows_; ++r) {
    const auto& row = rows[r];
    for (std::size_t j = 0; j < n; ++j) at(r, j) = row.a[j];
    rhs(r) = row.b;
    if (row.sense != RowSense::Equal) {
      const double sign = row.sense == RowSense::LessEqual ? 1.0 : -1.0;
      at(r, slack_col) = sign;
      integer_[slack_col] = row.integral ? 1 : 0;
      for (std::size_t j = 0; j < n; ++j) expr_[slack_col][j] = -sign * row.a[j];
      expr_const_[slack_col] = sign * row.b;
      if (row.sense == RowSense::LessEqual) basis_[r] = slack_col;
      ++slack_col;
    }
    if (row.sense != RowSense::LessEqual) {
      phase_one_scale_ = std::max(phase_one_scale_, row.b);
      at(r, art_col) = 1.0;
      artificial_[art_col] = 1;
      basis_[r] = art_col;
      ++art_col;
    }
  }
}

void SimplexModel::pivot(std::size_t r, std::size_t c) {
  const double piv = at(r, c);
  double* row_r = &data_[r * stride_];
  const double inv = 1.0 / piv;
  std::vector<std::size_t> nz;
  nz.reserve(stride_);
  for (std::size_t j = 0; j < stride_; ++j) {
    if (row_r[j] != 0.0) {
      row_r[j] *= inv;
      nz.push_back(j);
    }
  }
  row_r[c] = 1.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    if (i == r) continue;
    double* row_i = &data_[i * stride_];
    const double f = row_i[c];
    if (f == 0.0) continue;
    for (std::size_t j : nz) row_i[j] -= f * row_r[j];
    row_i[c] = 0.0;
  }
  const double cc = cost_[c];
  if (cc != 0.0) {
    for (std::size_t j : nz) {
      if (j < cols_) cost_[j] -= cc * row_r[j];
    }
    value_ += cc * row_r[cols_];
    cost_[c] = 0.0;
  }
  basis_[r] = c;
  ++pivots_;
  if (pivots_ > options_.max_pivots) throw NumericalFailure("simplex pivot budget exhausted");
}

std::size_t SimplexModel::choose_entering() const {
  std::size_t best = cols_;
  double best_val = options_.optimality_tol;
  for (std::size_t j = 0; j < cols_; ++j) {
    if (!allowed_[j] || cost_[j] <= options_.optimality_tol) continue;
    if (bland_) return j;
    if (cost_[j] > best_val) {
      best_val = cost_[j];
      best = j;
    }
  }
  return best;
}

void SimplexModel::primal_loop() {
  while (true) {
    const std::size_t e = choose_entering();
    if (e == cols_) return;
    std::size_t leave = rows_;
    double best_ratio = kInfinity;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double a = at(r, e);
      if (a <= options_.pivot_tol) continue;
      const double ratio = std::max(rhs(r), 0.0) / a;
      if (leave == rows_) {
        best_ratio = ratio;
        leave = r;
        continue;
      }
      const double tie = 1e-12 * (1.0 + best_ratio);
      if (ratio < best_ratio - tie || (ratio <= best_ratio + tie && basis_[r] < basis_[leave])) {
        best_ratio = std::min(ratio, best_ratio);
        leave = r;
      }
    }
    if (leave == rows_) throw Unbounded("linear program is unbounded");
    if (best_ratio <= 1e-12) {
      if (++degenerate_run_ > options_.degenerate_streak) bland_ = true;
    } else {
      degenerate_run_ = 0;
    }
    pivot(leave, e);
  }
}

void SimplexModel::dual_loop() {
  while (true) {
    std::size_t leave = rows_;
    double most_negative = -options_.feasibility_tol;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (rhs(r) < most_negative) {
        if (bland_) {
          if (leave == rows_ || basis_[r] < basis_[leave]) leave = r;
        } else {
          most_negative = rhs(r);
          leave = r;
        }
      }
    }
    if (leave == rows_) return;
    std::size_t enter = cols_;
    double best_ratio = kInfinity;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (!allowed_[j]) continue;
      const double a = at(leave, j);
      if (a >= -options_.pivot_tol) continue;
      const double ratio = std::min(cost_[j], 0.0) / a;
      if (ratio < best_ratio - 1e-12) {
        best_ratio = ratio;
        enter = j;
      }
    }
    if (enter == cols_) throw Infeasible("linear program became infeasible after adding cuts");
    if (best_ratio <= 1e-12) {
      if (++degenerate_run_ > options_.degenerate_streak) bland_ = true;
    } else {
      degenerate_run_ = 0;
    }
    pivot(leave, enter);
  }
}

void SimplexModel::set_phase_two_costs() {
  for (std::size_t j = 0; j < cols_; ++j) cost_[j] = objective_[j];
  value_ = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    const double cb = objective_[basis_[r]];
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j < cols_; ++j) cost_[j] -= cb * at(r, j);
    value_ += cb * rhs(r);
  }
  for (std::size_t r = 0; r < rows_; ++r) cost_[basis_[r]] = 0.0;
}

void SimplexModel::solve() {
  bool any_artificial = false;
  std::fill(cost_.begin(), cost_.end(), 0.0);
  value_ = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    if (!artificial_[basis_[r]]) continue;
    any_artificial = true;
    for (std::size_t j = 0; j < cols_; ++j)
      if (!artificial_[j]) cost_[j] += at(r, j);
    value_ -= rhs(r);
  }
  if (any_artificial) {
    primal_loop();
    if (value_ < -options_.feasibility_tol * phase_one_scale_) throw Infeasible("linear program is infeasible");
    for (std::size_t r = 0; r < rows_; ++r) {
      if (!artificial_[basis_[r]]) continue;
      std::size_t best = cols_;
      double best_abs = 1e-7;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (artificial_[j]) continue;
        if (std::abs(at(r, j)) > best_abs) {
          best_abs = std::abs(at(r, j));
          best = j;
        }
      }
      if (best < cols_) pivot(r, best);
    }
  }
  for (std::size_t j = 0; j < cols_; ++j)
    if (artificial_[j]) allowed_[j] = 0;
  bland_ = false;
  degenerate_run_ = 0;
  set_phase_two_costs();
  primal_loop();
}

void SimplexModel::resize(std::size_t rows, std::size_t cols) {
  const std::size_t new_stride = cols + 1;
  std::vector<double> data(rows * new_stride, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t j = 0; j < cols_; ++j) data[r * new_stride + j] = at(r, j);
    data[r * new_stride + cols] = rhs(r);
  }
  data_ = std::move(data);
  rows_ = rows;
  cols_ = cols;
  stride_ = new_stride;
  cost_.resize(cols, 0.0);
  allowed_.resize(cols, 1);
  integer_.resize(cols, 0);
  artificial_.resize(cols, 0);
  objective_.resize(cols, 0.0);
  expr_.resize(cols, std::vector<double>(num_structural_, 0.0));
  expr_const_.resize(cols, 0.0);
  basis_.resize(rows, 0);
}

std::size_t SimplexModel::add_gomory_round(std::size_t max_cuts, double min_fractionality) {
  std::vector<char> is_basic(cols_, 0);
  for (std::size_t r = 0; r < rows_; ++r) is_basic[basis_[r]] = 1;

  struct Candidate {
    std::size_t row;
    double score;
  };
  std::vector<Candidate> candidates;
  for (std::size_t r = 0; r < rows_; ++r) {
    if (!integer_[basis_[r]]) continue;
    const double v = rhs(r);
    const double f0 = v - std::floor(v);
    if (f0 < min_fractionality || f0 > 1.0 - min_fractionality) continue;
    candidates.push_back({r, std::min(f0, 1.0 - f0)});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  if (candidates.size() > max_cuts) candidates.resize(max_cuts);

  std::vector<std::vector<double>> gammas;
  for (const auto& cand : candidates) {
    const double v = rhs(cand.row);
    const double f0 = v - std::floor(v);
    std::vector<double> gamma(cols_, 0.0);
    double gmax = 0.0, gmin = kInfinity;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (is_basic[j] || !allowed_[j]) continue;
      const double a = at(cand.row, j);
      if (std::abs(a) < 1e-12) continue;
      double g;
      if (integer_[j]) {
        double f = a - std::floor(a);
        if (f < 1e-9 || f > 1.0 - 1e-9) continue;
        g = f <= f0 ? f / f0 : (1.0 - f) / (1.0 - f0);
      } else {
        g = a >= 0.0 ? a / f0 : -a / (1.0 - f0);
      }
      gamma[j] = g;
      gmax = std::max(gmax, g);
      gmin = std::min(gmin, g);
    }
    if (gmax <= 0.0 || gmax / gmin > 1e9) continue;
    gammas.push_back(std::move(gamma));
  }
  if (gammas.empty()) return 0;

  const std::size_t old_rows = rows_, old_cols = cols_;
  resize(old_rows + gammas.size(), old_cols + gammas.size());
  for (std::size_t c = 0; c < gammas.size(); ++c) {
    const std::size_t r = old_rows + c;
    const std::size_t slack = old_cols + c;
    const auto& gamma = gammas[c];
    std::vector<double> coeff(num_structural_, 0.0);
    double constant = 0.0;
    for (std::size_t j = 0; j < old_cols; ++j) {
      if (gamma[j] == 0.0) continue;
      at(r, j) = -gamma[j];
      for (std::size_t i = 0; i < num_structural_; ++i) coeff[i] += gamma[j] * expr_[j][i];
      constant += gamma[j] * expr_const_[j];
    }
    at(r, slack) = 1.0;
    rhs(r) = -1.0;
    basis_[r] = slack;
    expr_[slack] = coeff;
    expr_const_[slack] = constant - 1.0;

    Cut cut;
    cut.rhs = 1.0 - constant;
    for (std::size_t i = 0; i < num_structural_; ++i) cut.rhs += coeff[i] * lower_[i];
    cut.coefficients = std::move(coeff);
    cuts_.push_back(std::move(cut));
  }
  dual_loop();
  primal_loop();
  return gammas.size();
}

bool SimplexModel::integral(double tol) const {
  const auto x = primal();
  for (std::size_t j = 0; j < num_structural_; ++j) {
    if (integer_[j] && std::abs(x[j] - std::round(x[j])) > tol) return false;
  }
  return true;
}

std::vector<double> SimplexModel::primal() const {
  std::vector<double> x(lower_);
  for (std::size_t r = 0; r < rows_; ++r) {
    if (basis_[r] < num_structural_) x[basis_[r]] += std::max(rhs(r), 0.0);
  }
  return x;
}

std::vector<double> SimplexModel::raise_costs() const {
  std::vector<double> rc(num_structural_, 0.0);
  std::vector<char> is_basic(cols_, 0);
  for (std::size_t r = 0; r < rows_; ++r) is_basic[basis_[r]] = 1;
  for (std::size_t j = 0; j < num_structural_; ++j)
    if (!is_basic[j]) rc[j] = std::max(-cost_[j], 0.0) / objective_scale_;
  return rc;
}

double SimplexModel::objective() const {
  const auto x = primal();
  double v = 0.0;
  for (std::size_t j = 0; j < num_structural_; ++j) v += objective_[j] * x[j];
  return v / objective_scale_;
}

}  // namespace detail

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
  detail::SimplexModel model(lp, {}, options);
  model.solve();
  return {model.primal(), model.objective(), model.pivots()};
}

double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (const auto& row : lp.constraints) {
    const double lhs = std::inner_product(row.coefficients.begin(), row.coefficients.end(), x.begin(), 0.0);
    double v = 0.0;
    switch (row.sense) {
      case RowSense::LessEqual: v = lhs - row.rhs; break;
      case RowSense::GreaterEqual: v = row.rhs - lhs; break;
      case RowSense::Equal: v = std::abs(lhs - row.rhs); break;
    }
    worst = std::max(worst, v);
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double lo = lp.lower.empty() ? 0.0 : lp.lower[j];
    const double hi = lp.upper.empty() ? kInfinity : lp.upper[j];
    worst = std::max({worst, lo - x[j], x[j] - hi});
  }
  return worst;
}

}  // namespace ubcn::solver
