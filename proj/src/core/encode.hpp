#pragma once

#include "bounds.hpp"
#include "dataset.hpp"
#include "milp_problem.hpp"
#include "network.hpp"

#include <vector>

namespace lfa {

enum class Mode { Max, Min };

inline Sense sense_of(Mode mode) { return mode == Mode::Max ? Sense::Maximize : Sense::Minimize; }

// Variable layout of an encoded attack problem.
struct AttackEncoding {
  MilpProblem problem;
  std::vector<int> input_vars;                // z_1, one per input coordinate
  std::vector<std::vector<int>> hidden_vars;  // post-ReLU outputs per hidden layer
  std::vector<std::vector<int>> relu_bins;    // activation indicators per hidden layer
  std::vector<int> mask_bins;                 // availability only: 1 = feature kept
  int output_var = -1;
};

// Big-M model of the network over the input box stack.lower[0]..upper[0].
// Unstable units get the three mixed-integer rows plus z >= 0 as a bound;
// stable units are pinned (z = 0 or z = Wz + b) with their indicator fixed.
AttackEncoding encode_integrity(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                                double eps, const IntervalStack& bounds, Mode mode);

AttackEncoding encode_availability(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                                   const ImputationVector& c, int budget,
                                   const IntervalStack& bounds, Mode mode);

// Assignment induced by evaluating the network on `input` (with the given
// mask for availability encodings). Used as a starting incumbent and for
// feasibility checks.
std::vector<double> trajectory_assignment(const AttackEncoding& enc, const Plnn& model,
                                          const Eigen::Ref<const Eigen::VectorXd>& input,
                                          const std::vector<int>& mask = {});

}  // namespace lfa
