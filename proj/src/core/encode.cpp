#include "encode.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lfa {

namespace {

void check_stack(const Plnn& model, const IntervalStack& bounds) {
  if (bounds.levels() != model.depth() + 1)
    throw Error(ErrorCode::InvalidBounds, "interval stack depth does not match the model");
  for (std::size_t k = 0; k < bounds.levels(); ++k) {
    if (bounds.lower[k].size() != bounds.upper[k].size())
      throw Error(ErrorCode::InvalidBounds, "interval stack shape mismatch");
    for (Eigen::Index u = 0; u < bounds.lower[k].size(); ++u)
      if (!(bounds.lower[k][u] <= bounds.upper[k][u]))
        throw Error(ErrorCode::InvalidBounds,
                    "bounds at level " + std::to_string(k) + ", unit " + std::to_string(u) +
                        " have l > u");
  }
  if (static_cast<std::size_t>(bounds.lower[0].size()) != model.input_dim())
    throw Error(ErrorCode::InvalidBounds, "input bounds do not match the model input");
}

// Shared network rows; the caller has already created the input variables.
void encode_network(const Plnn& model, const IntervalStack& bounds, AttackEncoding& enc) {
  MilpProblem& p = enc.problem;
  const auto& layers = model.layers();
  const std::size_t d = layers.size();

  // Continuous variables: post-ReLU outputs, then the network output.
  enc.hidden_vars.resize(d - 1);
  for (std::size_t k = 0; k + 1 < d; ++k) {
    const Eigen::VectorXd& l = bounds.lower[k + 1];
    const Eigen::VectorXd& u = bounds.upper[k + 1];
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      const double hi = u[i] <= 0.0 ? 0.0 : u[i];
      enc.hidden_vars[k].push_back(
          p.add_continuous(0.0, hi, "z_" + std::to_string(k + 1) + "_" + std::to_string(i)));
    }
  }
  {
    const double lo = bounds.lower[d][0];
    const double hi = bounds.upper[d][0];
    const double pad = 1e-6 * std::max({1.0, std::abs(lo), std::abs(hi)});
    enc.output_var = p.add_continuous(lo - pad, hi + pad, "y");
  }

  // Indicator binaries; stable units are fixed.
  enc.relu_bins.resize(d - 1);
  for (std::size_t k = 0; k + 1 < d; ++k) {
    const Eigen::VectorXd& l = bounds.lower[k + 1];
    const Eigen::VectorXd& u = bounds.upper[k + 1];
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      double lo = 0.0, hi = 1.0;
      if (u[i] <= 0.0) hi = 0.0;
      else if (l[i] >= 0.0) lo = 1.0;
      enc.relu_bins[k].push_back(
          p.add_binary("v_" + std::to_string(k + 1) + "_" + std::to_string(i), lo, hi));
    }
  }

  for (std::size_t k = 0; k + 1 < d; ++k) {
    const Layer& layer = layers[k];
    const std::vector<int>& prev = k == 0 ? enc.input_vars : enc.hidden_vars[k - 1];
    const Eigen::VectorXd& l = bounds.lower[k + 1];
    const Eigen::VectorXd& u = bounds.upper[k + 1];
    for (Eigen::Index i = 0; i < layer.W.rows(); ++i) {
      const std::string tag = std::to_string(k + 1) + "_" + std::to_string(i);
      const int z = enc.hidden_vars[k][static_cast<std::size_t>(i)];
      const int v = enc.relu_bins[k][static_cast<std::size_t>(i)];
      const double b = layer.b[i];
      std::vector<std::pair<int, double>> affine;  // W_i z_prev
      for (Eigen::Index c = 0; c < layer.W.cols(); ++c)
        if (layer.W(i, c) != 0.0) affine.emplace_back(prev[static_cast<std::size_t>(c)], layer.W(i, c));

      if (u[i] <= 0.0) continue;  // z pinned to 0 by its bounds
      if (l[i] >= 0.0) {
        // z - W z_prev = b
        std::vector<std::pair<int, double>> t{{z, 1.0}};
        for (const auto& [j, a] : affine) t.emplace_back(j, -a);
        p.add_row(std::move(t), Relation::Equal, b, "active_" + tag);
        continue;
      }
      const double uhat = std::max(u[i], 0.0);
      const double lhat = std::min(l[i], 0.0);
      {  // z >= W z_prev + b
        std::vector<std::pair<int, double>> t{{z, 1.0}};
        for (const auto& [j, a] : affine) t.emplace_back(j, -a);
        p.add_row(std::move(t), Relation::GreaterEq, b, "relu_lb_" + tag);
      }
      // u v >= z
      p.add_row({{z, 1.0}, {v, -uhat}}, Relation::LessEq, 0.0, "relu_on_" + tag);
      {  // W z_prev + b >= z + (1 - v) l
        std::vector<std::pair<int, double>> t = affine;
        t.emplace_back(z, -1.0);
        t.emplace_back(v, lhat);
        p.add_row(std::move(t), Relation::GreaterEq, lhat - b, "relu_off_" + tag);
      }
    }
  }

  // y = W_d z_d + b_d
  const Layer& last = layers.back();
  const std::vector<int>& prev = d >= 2 ? enc.hidden_vars[d - 2] : enc.input_vars;
  std::vector<std::pair<int, double>> t{{enc.output_var, 1.0}};
  for (Eigen::Index c = 0; c < last.W.cols(); ++c)
    if (last.W(0, c) != 0.0) t.emplace_back(prev[static_cast<std::size_t>(c)], -last.W(0, c));
  p.add_row(std::move(t), Relation::Equal, last.b[0], "output");
}

}  // namespace

AttackEncoding encode_integrity(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                                double eps, const IntervalStack& bounds, Mode mode) {
  check_stack(model, bounds);
  if (static_cast<std::size_t>(x.size()) != model.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "input does not match model");
  if (!(eps >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");

  AttackEncoding enc;
  MilpProblem& p = enc.problem;
  p.sense = sense_of(mode);
  const auto flex = static_cast<Eigen::Index>(flex_count(static_cast<std::size_t>(x.size())));
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    double lo = x[j], hi = x[j];
    if (j < flex) {
      lo = std::max(x[j] - eps, bounds.lower[0][j]);
      hi = std::min(x[j] + eps, bounds.upper[0][j]);
      if (lo > hi) throw Error(ErrorCode::InvalidBounds, "input bounds do not cover the ball");
    }
    enc.input_vars.push_back(p.add_continuous(lo, hi, "x_" + std::to_string(j)));
  }
  encode_network(model, bounds, enc);
  p.objective[static_cast<std::size_t>(enc.output_var)] = 1.0;
  p.hint = trajectory_assignment(enc, model, x);
  return enc;
}

AttackEncoding encode_availability(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                                   const ImputationVector& c, int budget,
                                   const IntervalStack& bounds, Mode mode) {
  check_stack(model, bounds);
  if (static_cast<std::size_t>(x.size()) != model.input_dim() || c.c.size() != x.size())
    throw Error(ErrorCode::DimensionMismatch, "input/imputation does not match model");
  const auto flex = static_cast<int>(flex_count(static_cast<std::size_t>(x.size())));
  if (budget < 0 || budget > flex)
    throw Error(ErrorCode::BadBudget, "budget must lie in [0, " + std::to_string(flex) + "]");

  AttackEncoding enc;
  MilpProblem& p = enc.problem;
  p.sense = sense_of(mode);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    double lo = bounds.lower[0][j], hi = bounds.upper[0][j];
    if (j >= flex) lo = hi = x[j];
    enc.input_vars.push_back(p.add_continuous(lo, hi, "x_" + std::to_string(j)));
  }
  encode_network(model, bounds, enc);
  for (int j = 0; j < flex; ++j) enc.mask_bins.push_back(p.add_binary("m_" + std::to_string(j)));

  // z_1[j] = m_j x_j + (1 - m_j) c_j  <=>  z_1[j] - (x_j - c_j) m_j = c_j
  for (int j = 0; j < flex; ++j)
    p.add_row({{enc.input_vars[static_cast<std::size_t>(j)], 1.0},
               {enc.mask_bins[static_cast<std::size_t>(j)], -(x[j] - c.c[j])}},
              Relation::Equal, c.c[j], "impute_" + std::to_string(j));
  // flex - sum(m) <= budget
  std::vector<std::pair<int, double>> t;
  for (int m : enc.mask_bins) t.emplace_back(m, 1.0);
  p.add_row(std::move(t), Relation::GreaterEq, static_cast<double>(flex - budget), "budget");

  p.objective[static_cast<std::size_t>(enc.output_var)] = 1.0;
  p.hint = trajectory_assignment(enc, model, x, std::vector<int>(static_cast<std::size_t>(flex), 1));
  return enc;
}

std::vector<double> trajectory_assignment(const AttackEncoding& enc, const Plnn& model,
                                          const Eigen::Ref<const Eigen::VectorXd>& input,
                                          const std::vector<int>& mask) {
  const MilpProblem& p = enc.problem;
  std::vector<double> a(p.num_vars(), 0.0);
  const ForwardPass fp = forward(model, input);
  for (std::size_t j = 0; j < enc.input_vars.size(); ++j)
    a[static_cast<std::size_t>(enc.input_vars[j])] = input[static_cast<Eigen::Index>(j)];
  for (std::size_t k = 0; k < enc.hidden_vars.size(); ++k)
    for (std::size_t i = 0; i < enc.hidden_vars[k].size(); ++i) {
      const double pre = fp.preactivations[k][static_cast<Eigen::Index>(i)];
      a[static_cast<std::size_t>(enc.hidden_vars[k][i])] = std::max(pre, 0.0);
      const auto v = static_cast<std::size_t>(enc.relu_bins[k][i]);
      // Respect pre-fixed indicators (pre == 0 satisfies either branch).
      double ind = pre > 0.0 ? 1.0 : 0.0;
      if (p.lower[v] == p.upper[v]) ind = p.lower[v];
      a[v] = ind;
    }
  a[static_cast<std::size_t>(enc.output_var)] = fp.output;
  for (std::size_t j = 0; j < enc.mask_bins.size() && j < mask.size(); ++j)
    a[static_cast<std::size_t>(enc.mask_bins[j])] = mask[j];
  return a;
}

}  // namespace lfa
