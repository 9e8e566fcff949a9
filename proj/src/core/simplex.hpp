#pragma once

#include "milp_problem.hpp"

#include <span>
#include <vector>

namespace lfa {

enum class LpStatus { Optimal, Infeasible };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;  // in the problem's own sense
  std::vector<double> x;   // all variables, binaries relaxed
  long iterations = 0;
};

struct LpTolerances {
  double optimality = 1e-9;   // reduced-cost threshold
  double feasibility = 1e-9;  // primal bound slack
  double pivot = 1e-9;        // smallest acceptable pivot magnitude
  int bland_after = 50;       // non-improving iterations before Bland's rule
  long max_iterations = 0;    // per phase; 0 picks a size-based cap
};

// Bounded-variable primal simplex over the relaxation of a MilpProblem
// (binaries relaxed to their [lo, hi]). Two-phase: phase one drives row
// artificials to zero, phase two optimizes the objective. The basis inverse
// is kept dense and refactorized periodically.
class LpRelaxation {
 public:
  explicit LpRelaxation(const MilpProblem& problem, LpTolerances tol = {});

  // Solves with the given variable bounds (same length as problem vars).
  LpResult solve(const std::vector<double>& lower, const std::vector<double>& upper) const;

  const MilpProblem& problem() const { return problem_; }

 private:
  const MilpProblem& problem_;
  LpTolerances tol_;
  std::size_t m_ = 0;        // rows
  std::size_t n_ = 0;        // structural columns
  std::size_t n_slack_ = 0;  // one per inequality row
  // Sparse columns for structural then slack variables: (row, value).
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> rhs_;
};

LpResult lp_solve(const MilpProblem& problem, std::span<const BinaryFixing> fixings = {},
                  LpTolerances tol = {});

}  // namespace lfa
