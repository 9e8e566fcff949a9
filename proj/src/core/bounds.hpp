#pragma once

#include "dataset.hpp"
#include "network.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <vector>

namespace lfa {

inline constexpr double kDefaultSlack = 1e-6;

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

// Level 0 is the input box; level k (1..d-1) bounds the pre-activation of
// hidden layer k; level d bounds the network output.
struct IntervalStack {
  std::vector<Eigen::VectorXd> lower;
  std::vector<Eigen::VectorXd> upper;
  double slack = 0.0;

  std::size_t levels() const { return lower.size(); }
};

// Flexible coordinates span [min(c,x) - slack, max(c,x) + slack]; fixed
// coordinates are pinned to x.
Box init_bounds_availability(const Eigen::Ref<const Eigen::VectorXd>& x,
                             const ImputationVector& c, double slack = kDefaultSlack);

// l-infinity ball on flexible coordinates, fixed coordinates pinned. No
// clamping to the scaled feature range.
Box init_bounds_integrity(const Eigen::Ref<const Eigen::VectorXd>& x, double eps);

IntervalStack propagate(const Plnn& model, const Box& input, double slack = 0.0);

void write_bounds_csv(const std::filesystem::path& path, const IntervalStack& stack);

}  // namespace lfa
