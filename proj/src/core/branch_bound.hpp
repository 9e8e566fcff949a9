#pragma once

#include "milp_problem.hpp"
#include "simplex.hpp"

#include <vector>

namespace lfa {

enum class MilpStatus { Optimal, Infeasible, NodeLimit };

const char* to_string(MilpStatus status);

struct MilpTolerances {
  double integrality = 1e-6;
  double gap = 1e-6;    // absolute optimality gap
  double prune = 1e-9;  // required improvement over the incumbent
};

struct BbOptions {
  long node_limit = 100000;
  MilpTolerances tol;
  LpTolerances lp;
};

struct MilpSolution {
  MilpStatus status = MilpStatus::Infeasible;
  double objective = 0.0;  // in the problem's sense
  double bound = 0.0;      // best proved bound, same sense
  double gap = 0.0;        // |bound - objective|
  std::vector<double> x_cont;
  std::vector<double> x_bin;
  long nodes_explored = 0;
  long lp_iterations = 0;
  double wall_time = 0.0;  // seconds
  double root_bound = 0.0;
};

// Exact branch-and-bound: best-first on the relaxation bound, branching on the
// most fractional binary (lowest index on ties).
MilpSolution solve_bb(const MilpProblem& problem, const BbOptions& options = {});

}  // namespace lfa
