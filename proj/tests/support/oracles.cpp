#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace oracle {

RefNet copy_net(const lfa::Plnn& model) {
  RefNet net;
  for (const auto& l : model.layers()) {
    RefLayer r;
    for (Eigen::Index i = 0; i < l.W.rows(); ++i) {
      Vec row;
      for (Eigen::Index j = 0; j < l.W.cols(); ++j) row.push_back(l.W(i, j));
      r.W.push_back(row);
      r.b.push_back(l.b[i]);
    }
    net.layers.push_back(r);
  }
  return net;
}

double forward(const RefNet& net, const Vec& x, std::vector<Vec>* pre) {
  Vec a = x;
  if (pre) pre->clear();
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const RefLayer& l = net.layers[k];
    Vec z(l.b.size());
    for (std::size_t i = 0; i < l.W.size(); ++i) {
      long double acc = l.b[i];
      for (std::size_t j = 0; j < a.size(); ++j) acc += static_cast<long double>(l.W[i][j]) * a[j];
      z[i] = static_cast<double>(acc);
    }
    if (pre) pre->push_back(z);
    if (k + 1 < net.layers.size())
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    a = z;
  }
  return a[0];
}

Vec to_vec(const Eigen::VectorXd& v) { return Vec(v.data(), v.data() + v.size()); }

Extremes enumerate(const RefNet& net, const Vec& x, const Vec& c, int budget) {
  Extremes e;
  bool first = true;
  for (int bits = 0; bits < 64; ++bits) {
    int blocked = 0;
    for (int j = 0; j < 6; ++j) blocked += (bits >> j) & 1;
    if (blocked > budget) continue;
    Vec z = x;
    for (int j = 0; j < 6; ++j)
      if ((bits >> j) & 1) z[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)];
    const double f = forward(net, z);
    ++e.evaluated;
    if (first || f > e.max) e.max = f;
    if (first || f < e.min) e.min = f;
    first = false;
  }
  return e;
}

Vec fd_params(const std::function<double(const lfa::Plnn&)>& f, const lfa::Plnn& model, double h) {
  Vec out;
  lfa::Plnn m = model;
  auto& layers = m.mutable_layers();
  auto probe = [&](double& p) {
    const double keep = p;
    p = keep + h;
    const double up = f(m);
    p = keep - h;
    const double down = f(m);
    p = keep;
    out.push_back((up - down) / (2.0 * h));
  };
  for (auto& l : layers) {
    for (Eigen::Index i = 0; i < l.W.rows(); ++i)
      for (Eigen::Index j = 0; j < l.W.cols(); ++j) probe(l.W(i, j));
    for (Eigen::Index i = 0; i < l.b.size(); ++i) probe(l.b[i]);
  }
  return out;
}

Vec flatten(const lfa::ParamGrad& g) {
  Vec out;
  for (const auto& l : g) {
    for (Eigen::Index i = 0; i < l.W.rows(); ++i)
      for (Eigen::Index j = 0; j < l.W.cols(); ++j) out.push_back(l.W(i, j));
    for (Eigen::Index i = 0; i < l.b.size(); ++i) out.push_back(l.b[i]);
  }
  return out;
}

Vec fd_input(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec out(x.size());
  Vec z = x;
  for (std::size_t j = 0; j < x.size(); ++j) {
    z[j] = x[j] + h;
    const double up = f(z);
    z[j] = x[j] - h;
    const double down = f(z);
    z[j] = x[j];
    out[j] = (up - down) / (2.0 * h);
  }
  return out;
}

double min_abs_preactivation(const RefNet& net, const std::vector<Vec>& inputs) {
  double m = INFINITY;
  for (const auto& x : inputs) {
    std::vector<Vec> pre;
    forward(net, x, &pre);
    for (std::size_t k = 0; k + 1 < pre.size(); ++k)
      for (double v : pre[k]) m = std::min(m, std::abs(v));
  }
  return m;
}

double rel_error(const Vec& a, const Vec& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += std::max(a[i] * a[i], b[i] * b[i]);
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

const Desk& desk(std::size_t rows, const std::vector<std::size_t>& dims, std::uint64_t seed,
                 int epochs) {
  static std::mutex mu;
  static std::map<std::tuple<std::size_t, std::vector<std::size_t>, std::uint64_t, int>, Desk> cache;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_tuple(rows, dims, seed, epochs);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  Desk d;
  d.data = lfa::prepare_synthetic(rows, seed, 0.8);
  lfa::TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 32;
  cfg.lr0 = 0.01;
  cfg.seed = seed;
  d.model = lfa::train(lfa::Plnn::init_uniform(dims, seed), d.data.train, d.data.test, cfg).model;
  return cache.emplace(key, std::move(d)).first->second;
}

}  // namespace oracle
