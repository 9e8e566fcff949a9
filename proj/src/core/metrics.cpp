#include "metrics.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lfa {

namespace {

void check_lengths(Eigen::Index a, Eigen::Index b) {
  if (a != b) throw Error(ErrorCode::DimensionMismatch, "metric inputs differ in length");
  if (a == 0) throw Error(ErrorCode::InvalidArgument, "metric of empty input");
}

double sorted_quantile(const std::vector<double>& v, double q) {
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double r = v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  return std::clamp(r, v[lo], v[hi]);
}

}  // namespace

double mape(const Eigen::Ref<const Eigen::VectorXd>& pred,
            const Eigen::Ref<const Eigen::VectorXd>& truth) {
  check_lengths(pred.size(), truth.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (truth[i] == 0.0)
      throw Error(ErrorCode::ZeroDenominator, "zero truth at index " + std::to_string(i));
    acc += std::abs(pred[i] - truth[i]) / truth[i];
  }
  return acc / static_cast<double>(pred.size()) * 100.0;
}

double mpe_term(double adv, double clean) {
  if (clean == 0.0) throw Error(ErrorCode::ZeroDenominator, "zero clean forecast");
  return (adv - clean) / clean * 100.0;
}

double mpe(const Eigen::Ref<const Eigen::VectorXd>& adv,
           const Eigen::Ref<const Eigen::VectorXd>& clean) {
  check_lengths(adv.size(), clean.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < adv.size(); ++i) {
    if (clean[i] == 0.0)
      throw Error(ErrorCode::ZeroDenominator, "zero clean forecast at index " + std::to_string(i));
    acc += (adv[i] - clean[i]) / clean[i];
  }
  return acc / static_cast<double>(adv.size()) * 100.0;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of empty input");
  std::sort(values.begin(), values.end());
  return sorted_quantile(values, q);
}

BoxStats box_stats(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "box_stats of empty input");
  std::vector<double> v = values;
  std::sort(v.begin(), v.end());
  BoxStats s;
  s.n = v.size();
  s.min = v.front();
  s.max = v.back();
  s.q1 = sorted_quantile(v, 0.25);
  s.median = sorted_quantile(v, 0.5);
  s.q3 = sorted_quantile(v, 0.75);
  return s;
}

double median_abs(const std::vector<double>& values) {
  std::vector<double> a;
  a.reserve(values.size());
  for (double v : values) a.push_back(std::abs(v));
  return quantile(std::move(a), 0.5);
}

}  // namespace lfa
