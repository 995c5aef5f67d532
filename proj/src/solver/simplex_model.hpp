#pragma once

// Dense simplex tableau shared by solve_lp and the cutting-plane MIP layer.

#include <cstddef>
#include <vector>

#include "ubcn/solver/linear_program.hpp"

namespace ubcn::solver::detail {

class SimplexModel {
 public:
  /// integer_vars may be empty (pure LP).
  SimplexModel(const LinearProgram& lp, std::vector<bool> integer_vars, const LpOptions& options);

  /// Two-phase primal simplex to optimality.
  void solve();

  /// Adds up to max_cuts Gomory mixed-integer cuts from rows whose basic
  /// variable is integer but fractional, then restores optimality with the dual
  /// simplex. Returns the number of cuts added (0 when none qualify).
  std::size_t add_gomory_round(std::size_t max_cuts, double min_fractionality);

  /// True when every integer variable is within tol of an integer.
  bool integral(double tol) const;

  std::vector<double> primal() const;
  /// Objective decrease per unit increase of each structural variable that is
  /// nonbasic at its lower bound (0 for basic variables). Valid at optimality.
  std::vector<double> raise_costs() const;
  double objective() const;
  std::size_t pivots() const { return pivots_; }
  const std::vector<Cut>& cuts() const { return cuts_; }

 private:
  double& at(std::size_t r, std::size_t c) { return data_[r * stride_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * stride_ + c]; }
  double& rhs(std::size_t r) { return data_[r * stride_ + cols_]; }
  double rhs(std::size_t r) const { return data_[r * stride_ + cols_]; }

  void pivot(std::size_t r, std::size_t c);
  void primal_loop();
  void dual_loop();
  void set_phase_two_costs();
  void resize(std::size_t rows, std::size_t cols);
  std::size_t choose_entering() const;

  LpOptions options_;
  std::size_t num_structural_ = 0;
  std::vector<double> lower_;          // shift: x = lower + x'
  std::vector<double> objective_;      // scaled phase-two costs for every column
  double objective_scale_ = 1.0;
  double phase_one_scale_ = 1.0;       // largest rhs of a row carrying an artificial

  std::size_t rows_ = 0, cols_ = 0, stride_ = 0;
  std::vector<double> data_;           // rows_ x (cols_ + 1), last column is the rhs
  std::vector<double> cost_;           // reduced costs (maximize: enter when > tol)
  double value_ = 0.0;                 // current objective (scaled)
  std::vector<std::size_t> basis_;
  std::vector<char> allowed_;          // column may enter the basis
  std::vector<char> integer_;          // column is integer-constrained
  std::vector<char> artificial_;
  // Each column as an affine function of the shifted structural variables:
  // value = expr_const_[c] + expr_[c] . x'
  std::vector<std::vector<double>> expr_;
  std::vector<double> expr_const_;

  bool bland_ = false;
  std::size_t degenerate_run_ = 0;
  std::size_t pivots_ = 0;
  std::vector<Cut> cuts_;
};

}  // namespace ubcn::solver::detail
