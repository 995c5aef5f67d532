#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ubcn/solver/linear_program.hpp"

namespace ubcn::solver {

struct MipOptions {
  std::size_t cut_rounds = 50;
  std::size_t cuts_per_round = 8;
  double min_fractionality = 1e-3;
  double cut_relaxation = 1e-7;  // rhs slack given to cuts reused in branch-and-bound
  double integrality_tol = 1e-6;
  double feasibility_tol = 1e-7;
  std::size_t max_nodes = 200000;
  std::size_t dive_interval = 100;  // nodes between diving heuristics (0 disables)
  /// On an exhausted node budget, return the best integer point found instead
  /// of throwing; the result is then flagged as not proven optimal.
  bool best_effort = false;
  LpOptions lp;
};

struct MipResult {
  std::vector<double> x;
  double objective = 0.0;
  double relaxation_objective = 0.0;
  std::vector<Cut> cuts;        // every cut generated, in original variables
  std::size_t cut_rounds = 0;
  std::size_t nodes = 0;        // branch-and-bound and diving nodes (0 when cuts sufficed)
  bool proven_optimal = true;
};

/// Maximizes lp over points whose flagged variables are integral. Gomory
/// mixed-integer cuts are added round by round from the optimal tableau; if the
/// relaxation is still fractional after the cut budget, a best-first
/// branch-and-bound over the cut-strengthened relaxation finishes the job.
/// `incumbent`, when integral and feasible, seeds the bound used for pruning.
/// Diving and reduced-cost bound tightening against the incumbent run
/// alongside the search. Throws Infeasible when no integer point exists,
/// Unbounded for an unbounded relaxation and NumericalFailure when the node
/// budget runs out (unless best_effort is set and an integer point is known).
MipResult solve_mip(const LinearProgram& lp, const std::vector<bool>& integer_vars, const MipOptions& options = {},
                    const std::optional<std::vector<double>>& incumbent = std::nullopt);

}  // namespace ubcn::solver
