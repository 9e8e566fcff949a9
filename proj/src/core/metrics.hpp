#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace lfa {

struct BoxStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

// Mean absolute percentage error against ground truth, in percent.
double mape(const Eigen::Ref<const Eigen::VectorXd>& pred,
            const Eigen::Ref<const Eigen::VectorXd>& truth);

// Signed mean percentage deviation of attacked from clean forecasts.
double mpe(const Eigen::Ref<const Eigen::VectorXd>& adv,
           const Eigen::Ref<const Eigen::VectorXd>& clean);

// Single-sample MPE term.
double mpe_term(double adv, double clean);

// Linear-interpolation quantile between order statistics (R type 7).
double quantile(std::vector<double> values, double q);
BoxStats box_stats(const std::vector<double>& values);
double median_abs(const std::vector<double>& values);

}  // namespace lfa
