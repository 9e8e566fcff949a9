#include "branch_bound.hpp"

#include "error.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <queue>

namespace lfa {

const char* to_string(MilpStatus status) {
  switch (status) {
    case MilpStatus::Optimal: return "Optimal";
    case MilpStatus::Infeasible: return "Infeasible";
    case MilpStatus::NodeLimit: return "NodeLimit";
  }
  return "Unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Node {
  double bound;  // minimization sense
  long seq;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> x;  // relaxation solution
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

}  // namespace

MilpSolution solve_bb(const MilpProblem& problem, const BbOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const LpRelaxation lp(problem, options.lp);
  const double sign = problem.sense == Sense::Maximize ? -1.0 : 1.0;
  const auto& tol = options.tol;

  MilpSolution sol;
  double incumbent = kInf;  // minimization sense
  std::vector<double> best_x;
  long seq = 0;

  auto integral = [&](const std::vector<double>& x) {
    for (std::size_t j = problem.n_cont; j < problem.num_vars(); ++j)
      if (std::abs(x[j] - std::round(x[j])) > tol.integrality) return false;
    return true;
  };
  auto offer = [&](const std::vector<double>& x) {
    const double v = sign * problem.objective_value(x);
    if (v < incumbent) {
      incumbent = v;
      best_x = x;
    }
  };
  auto solve_node = [&](const std::vector<double>& lo, const std::vector<double>& hi) {
    LpResult r;
    try {
      r = lp.solve(lo, hi);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::CycleLimit)
        throw Error(ErrorCode::CycleLimit,
                    std::string(e.what()) + " (branch-and-bound node " +
                        std::to_string(sol.nodes_explored) + ")");
      throw;
    }
    ++sol.nodes_explored;
    sol.lp_iterations += r.iterations;
    return r;
  };
  // All binaries integral: fix them at their rounded values and re-solve the
  // continuous part so the incumbent is free of relaxation fuzz.
  auto round_and_offer = [&](const std::vector<double>& lo, const std::vector<double>& hi,
                             const std::vector<double>& x) {
    std::vector<double> flo = lo;
    std::vector<double> fhi = hi;
    for (std::size_t j = problem.n_cont; j < problem.num_vars(); ++j)
      flo[j] = fhi[j] = std::round(x[j]);
    const LpResult fixed = lp.solve(flo, fhi);
    sol.lp_iterations += fixed.iterations;
    if (fixed.status == LpStatus::Optimal) offer(fixed.x);
    else offer(x);
  };

  if (problem.hint && problem.hint->size() == problem.num_vars() && integral(*problem.hint) &&
      problem.max_violation(*problem.hint) <= 1e-9)
    offer(*problem.hint);

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  {
    const LpResult root = solve_node(problem.lower, problem.upper);
    if (root.status == LpStatus::Infeasible) {
      sol.status = MilpStatus::Infeasible;
      sol.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return sol;
    }
    const double b = sign * root.objective;
    sol.root_bound = root.objective;
    if (integral(root.x)) round_and_offer(problem.lower, problem.upper, root.x);
    else open.push({b, seq++, problem.lower, problem.upper, root.x});
  }

  bool hit_limit = false;
  while (!open.empty()) {
    if (open.top().bound >= incumbent - tol.gap) break;
    if (sol.nodes_explored >= options.node_limit) {
      hit_limit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (node.bound >= incumbent - tol.prune) continue;

    std::size_t branch = problem.num_vars();
    double most = -1.0;
    for (std::size_t j = problem.n_cont; j < problem.num_vars(); ++j) {
      const double frac = std::abs(node.x[j] - std::round(node.x[j]));
      if (frac <= tol.integrality) continue;
      const double score = 0.5 - std::abs(node.x[j] - std::floor(node.x[j]) - 0.5);
      if (score > most) {
        most = score;
        branch = j;
      }
    }
    if (branch == problem.num_vars()) continue;

    for (double value : {0.0, 1.0}) {
      std::vector<double> lo = node.lower;
      std::vector<double> hi = node.upper;
      if (value < lo[branch] || value > hi[branch]) continue;
      lo[branch] = hi[branch] = value;
      const LpResult r = solve_node(lo, hi);
      if (r.status == LpStatus::Infeasible) continue;
      const double b = sign * r.objective;
      if (b >= incumbent - tol.prune) continue;
      if (integral(r.x)) round_and_offer(lo, hi, r.x);
      else open.push({b, seq++, std::move(lo), std::move(hi), r.x});
    }
  }

  sol.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (best_x.empty()) {
    sol.status = hit_limit ? MilpStatus::NodeLimit : MilpStatus::Infeasible;
    return sol;
  }
  const double open_bound = open.empty() ? incumbent : std::min(incumbent, open.top().bound);
  sol.status = hit_limit ? MilpStatus::NodeLimit : MilpStatus::Optimal;
  sol.objective = problem.objective_value(best_x);
  sol.bound = sign * open_bound;
  sol.gap = std::abs(incumbent - open_bound);
  sol.x_cont.assign(best_x.begin(), best_x.begin() + static_cast<std::ptrdiff_t>(problem.n_cont));
  sol.x_bin.assign(best_x.begin() + static_cast<std::ptrdiff_t>(problem.n_cont), best_x.end());
  for (double& v : sol.x_bin) v = std::round(v);
  return sol;
}

}  // namespace lfa
