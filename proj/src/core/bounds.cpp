#include "bounds.hpp"

#include "error.hpp"

#include <cstdio>
#include <fstream>
#include <limits>

namespace lfa {

Box init_bounds_availability(const Eigen::Ref<const Eigen::VectorXd>& x,
                             const ImputationVector& c, double slack) {
  if (c.c.size() != x.size())
    throw Error(ErrorCode::DimensionMismatch, "imputation vector length differs from input");
  if (!(slack >= 0.0)) throw Error(ErrorCode::InvalidArgument, "slack must be >= 0");
  Box box{x, x};
  const auto flex = static_cast<Eigen::Index>(flex_count(static_cast<std::size_t>(x.size())));
  for (Eigen::Index j = 0; j < flex; ++j) {
    box.lower[j] = std::min(c.c[j], x[j]) - slack;
    box.upper[j] = std::max(c.c[j], x[j]) + slack;
  }
  return box;
}

Box init_bounds_integrity(const Eigen::Ref<const Eigen::VectorXd>& x, double eps) {
  if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  Box box{x, x};
  const auto flex = static_cast<Eigen::Index>(flex_count(static_cast<std::size_t>(x.size())));
  box.lower.head(flex).array() -= eps;
  box.upper.head(flex).array() += eps;
  return box;
}

IntervalStack propagate(const Plnn& model, const Box& input, double slack) {
  if (static_cast<std::size_t>(input.lower.size()) != model.input_dim() ||
      input.upper.size() != input.lower.size())
    throw Error(ErrorCode::DimensionMismatch, "input box does not match model input");
  if ((input.lower.array() > input.upper.array()).any())
    throw Error(ErrorCode::InvalidBounds, "input box has lower > upper");

  IntervalStack s;
  s.slack = slack;
  s.lower.push_back(input.lower);
  s.upper.push_back(input.upper);
  const auto& layers = model.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    // The raw input is not a ReLU output, so only hidden levels are clipped.
    Eigen::VectorXd lo = s.lower.back();
    Eigen::VectorXd hi = s.upper.back();
    if (i > 0) {
      lo = lo.cwiseMax(0.0);
      hi = hi.cwiseMax(0.0);
    }
    const Eigen::MatrixXd pos = layers[i].W.cwiseMax(0.0);
    const Eigen::MatrixXd neg = layers[i].W.cwiseMin(0.0);
    // Widen by a bound on dot-product rounding so realized pre-activations
    // computed in a different summation order still fall inside.
    const double gamma = 2.0 * static_cast<double>(layers[i].W.cols() + 2) *
                         std::numeric_limits<double>::epsilon();
    const Eigen::VectorXd mag = lo.cwiseAbs().cwiseMax(hi.cwiseAbs());
    const Eigen::VectorXd pad = gamma * (layers[i].W.cwiseAbs() * mag);
    s.lower.push_back(pos * lo + neg * hi - pad + layers[i].b);
    s.upper.push_back(neg * lo + pos * hi + pad + layers[i].b);
  }
  return s;
}

void write_bounds_csv(const std::filesystem::path& path, const IntervalStack& stack) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "layer,unit,l,u\n";
  char buf[128];
  for (std::size_t k = 0; k < stack.levels(); ++k)
    for (Eigen::Index u = 0; u < stack.lower[k].size(); ++u) {
      std::snprintf(buf, sizeof buf, "%zu,%ld,%.17g,%.17g\n", k, static_cast<long>(u),
                    stack.lower[k][u], stack.upper[k][u]);
      out << buf;
    }
}

}  // namespace lfa
