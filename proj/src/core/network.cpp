#include "network.hpp"

#include "error.hpp"
#include "metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace lfa {

namespace {

using json = nlohmann::json;

bool all_finite(const Layer& l) { return l.W.allFinite() && l.b.allFinite(); }

}  // namespace

Plnn::Plnn(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.size() < 2)
    throw Error(ErrorCode::SchemaMismatch, "a network needs at least two layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    if (l.W.rows() != l.b.size() || l.W.rows() == 0 || l.W.cols() == 0)
      throw Error(ErrorCode::SchemaMismatch, "layer " + std::to_string(i) + ": bias/weight shape mismatch");
    if (i > 0 && l.W.cols() != layers_[i - 1].W.rows())
      throw Error(ErrorCode::SchemaMismatch, "layer " + std::to_string(i) + ": input width mismatch");
    if (!all_finite(l))
      throw Error(ErrorCode::SchemaMismatch, "layer " + std::to_string(i) + ": non-finite parameter");
  }
  if (layers_.back().W.rows() != 1)
    throw Error(ErrorCode::SchemaMismatch, "output dimension must be 1");
}

Plnn Plnn::init_uniform(const std::vector<std::size_t>& dims, std::uint64_t seed) {
  if (dims.size() < 3)
    throw Error(ErrorCode::InvalidArgument, "dims must list input, >=1 hidden width, and output");
  std::mt19937_64 rng(seed);
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const auto in = static_cast<Eigen::Index>(dims[i]);
    const auto out = static_cast<Eigen::Index>(dims[i + 1]);
    if (in == 0 || out == 0) throw Error(ErrorCode::InvalidArgument, "zero layer width");
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> unif(-bound, bound);
    Layer l{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) l.W(r, c) = unif(rng);
    for (Eigen::Index r = 0; r < out; ++r) l.b[r] = unif(rng);
    layers.push_back(std::move(l));
  }
  return Plnn(std::move(layers));
}

std::vector<std::size_t> Plnn::dims() const {
  std::vector<std::size_t> d;
  d.push_back(input_dim());
  for (const auto& l : layers_) d.push_back(static_cast<std::size_t>(l.W.rows()));
  return d;
}

std::size_t Plnn::hidden_units() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) n += static_cast<std::size_t>(layers_[i].b.size());
  return n;
}

bool Plnn::operator==(const Plnn& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.W.rows() != b.W.rows() || a.W.cols() != b.W.cols()) return false;
    if (a.W != b.W || a.b != b.b) return false;
  }
  return true;
}

ParamGrad zero_like(const Plnn& model) {
  ParamGrad g;
  for (const auto& l : model.layers())
    g.push_back({Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()), Eigen::VectorXd::Zero(l.b.size())});
  return g;
}

void axpy(double alpha, const ParamGrad& x, ParamGrad& y) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i].W += alpha * x[i].W;
    y[i].b += alpha * x[i].b;
  }
}

ForwardPass forward(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (static_cast<std::size_t>(x.size()) != model.input_dim())
    throw Error(ErrorCode::DimensionMismatch,
                "input has " + std::to_string(x.size()) + " entries, model expects " +
                    std::to_string(model.input_dim()));
  ForwardPass fp;
  const auto& layers = model.layers();
  fp.activations.reserve(layers.size());
  fp.preactivations.reserve(layers.size());
  fp.activations.emplace_back(x);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Eigen::VectorXd pre = layers[i].W * fp.activations.back() + layers[i].b;
    if (i + 1 < layers.size()) fp.activations.emplace_back(pre.cwiseMax(0.0));
    fp.preactivations.push_back(std::move(pre));
  }
  fp.output = fp.preactivations.back()[0];
  return fp;
}

double predict(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (static_cast<std::size_t>(x.size()) != model.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "input dimension mismatch");
  const auto& layers = model.layers();
  Eigen::VectorXd z = x;
  for (std::size_t i = 0; i + 1 < layers.size(); ++i)
    z = (layers[i].W * z + layers[i].b).cwiseMax(0.0);
  return (layers.back().W * z + layers.back().b)[0];
}

Eigen::VectorXd predict_all(const Plnn& model, const Eigen::MatrixXd& X) {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) out[r] = predict(model, X.row(r).transpose());
  return out;
}

double mse_loss(const Plnn& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& Y) {
  if (X.rows() == 0) throw Error(ErrorCode::InvalidArgument, "mse_loss of an empty batch");
  double acc = 0.0;
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const double e = Y[r] - predict(model, X.row(r).transpose());
    acc += e * e;
  }
  return acc / static_cast<double>(X.rows());
}

ParamGrad grad_params(const Plnn& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& Y) {
  if (X.rows() == 0) throw Error(ErrorCode::InvalidArgument, "grad_params of an empty batch");
  const auto& layers = model.layers();
  const std::size_t d = layers.size();
  ParamGrad g = zero_like(model);
  const double scale = -2.0 / static_cast<double>(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const ForwardPass fp = forward(model, X.row(r).transpose());
    Eigen::VectorXd delta(1);
    delta[0] = scale * (Y[r] - fp.output);
    for (std::size_t k = d; k-- > 0;) {
      g[k].W.noalias() += delta * fp.activations[k].transpose();
      g[k].b += delta;
      if (k == 0) break;
      Eigen::VectorXd back = layers[k].W.transpose() * delta;
      const Eigen::VectorXd& pre = fp.preactivations[k - 1];
      for (Eigen::Index u = 0; u < back.size(); ++u)
        if (!(pre[u] > 0.0)) back[u] = 0.0;
      delta = std::move(back);
    }
  }
  return g;
}

Eigen::VectorXd grad_input(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const ForwardPass fp = forward(model, x);
  const auto& layers = model.layers();
  Eigen::RowVectorXd row = layers.back().W;
  for (std::size_t k = layers.size() - 1; k-- > 0;) {
    const Eigen::VectorXd& pre = fp.preactivations[k];
    for (Eigen::Index u = 0; u < row.size(); ++u)
      if (!(pre[u] > 0.0)) row[u] = 0.0;
    row = row * layers[k].W;
  }
  return row.transpose();
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  if (!(lr0 >= 0.0) || !std::isfinite(lr0))
    throw Error(ErrorCode::InvalidArgument, "learning rate must be finite and >= 0");
}

double TrainConfig::lr_at(int epoch) const {
  const int horizon = anneal_epochs > 0 ? anneal_epochs : epochs;
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * epoch / horizon));
}

AdamOptimizer::AdamOptimizer(const Plnn& model, AdamParams params)
    : params_(params), m_(zero_like(model)), v_(zero_like(model)) {}

void AdamOptimizer::step(Plnn& model, const ParamGrad& grad, double lr) {
  ++t_;
  const double b1 = params_.beta1;
  const double b2 = params_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  auto& layers = model.mutable_layers();
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + params_.eps);
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].W, grad[i].W, m_[i].W, v_[i].W);
    update(layers[i].b, grad[i].b, m_[i].b, v_[i].b);
  }
}

namespace detail {

void run_epochs(Plnn& model, const Dataset& train, const TrainConfig& cfg,
                const std::function<ParamGrad(const Plnn&, const Eigen::MatrixXd&,
                                              const Eigen::VectorXd&, int, int)>& batch_grad,
                const std::function<void(int, double, const Plnn&)>& end_epoch) {
  cfg.validate();
  if (train.rows() == 0) throw Error(ErrorCode::InvalidArgument, "empty training set");
  if (static_cast<std::size_t>(train.X.cols()) != model.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "dataset width does not match model input");

  AdamOptimizer opt(model, cfg.adam);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.lr_at(epoch);
    std::shuffle(order.begin(), order.end(), rng);
    int batch = 0;
    for (std::size_t start = 0; start < order.size(); start += bs, ++batch) {
      const std::size_t end = std::min(order.size(), start + bs);
      const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(end));
      const Dataset b = train.subset(rows);
      const ParamGrad g = batch_grad(model, b.X, b.Y, epoch, batch);
      for (const auto& l : g)
        if (!all_finite(l))
          throw Error(ErrorCode::NonfiniteLoss,
                      "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                          std::to_string(batch));
      opt.step(model, g, lr);
    }
    for (const auto& l : model.layers())
      if (!all_finite(l))
        throw Error(ErrorCode::NonfiniteLoss,
                    "non-finite parameters after epoch " + std::to_string(epoch));
    if (cfg.on_epoch) cfg.on_epoch(epoch, model);
    end_epoch(epoch, lr, model);
  }
}

}  // namespace detail

TrainResult train(Plnn model, const Dataset& train_set, const Dataset& test_set,
                  const TrainConfig& cfg) {
  if (test_set.rows() == 0) throw Error(ErrorCode::InvalidArgument, "empty test set");
  TrainResult result;
  double best = std::numeric_limits<double>::infinity();
  result.model = model;
  detail::run_epochs(
      model, train_set, cfg,
      [](const Plnn& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, int epoch, int batch) {
        const double loss = mse_loss(m, X, Y);
        if (!std::isfinite(loss))
          throw Error(ErrorCode::NonfiniteLoss, "non-finite loss at epoch " + std::to_string(epoch) +
                                                    ", batch " + std::to_string(batch));
        return grad_params(m, X, Y);
      },
      [&](int epoch, double lr, const Plnn& m) {
        TrainHistoryRow row;
        row.epoch = epoch;
        row.lr = lr;
        row.train_mse = mse_loss(m, train_set.X, train_set.Y);
        row.test_mape = mape(predict_all(m, test_set.X), test_set.Y);
        if (!std::isfinite(row.train_mse))
          throw Error(ErrorCode::NonfiniteLoss, "non-finite loss at epoch " + std::to_string(epoch));
        if (row.test_mape < best) {
          best = row.test_mape;
          result.model = m;
          result.best_epoch = epoch;
        }
        result.history.push_back(row);
      });
  return result;
}

void write_train_history(const std::filesystem::path& path,
                         const std::vector<TrainHistoryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "epoch,train_mse,test_mape,lr\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.epoch, r.train_mse, r.test_mape, r.lr);
    out << buf;
  }
}

void save_model(const Plnn& model, const std::filesystem::path& path, std::uint64_t manifest_hash) {
  json doc;
  doc["format"] = "lfa-plnn";
  doc["format_version"] = kModelFormatVersion;
  doc["dims"] = model.dims();
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(manifest_hash));
  doc["manifest_hash"] = hex;
  json layers = json::array();
  for (const auto& l : model.layers()) {
    json W = json::array();
    for (Eigen::Index r = 0; r < l.W.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < l.W.cols(); ++c) row.push_back(l.W(r, c));
      W.push_back(std::move(row));
    }
    json b = json::array();
    for (Eigen::Index r = 0; r < l.b.size(); ++r) b.push_back(l.b[r]);
    layers.push_back({{"W", std::move(W)}, {"b", std::move(b)}});
  }
  doc["layers"] = std::move(layers);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << doc.dump(1) << "\n";
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

Plnn load_model(const std::filesystem::path& path, std::uint64_t* manifest_hash) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json doc;
  try {
    doc = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": " + e.what());
  }
  std::vector<Layer> layers;
  std::vector<std::size_t> dims;
  try {
    if (doc.at("format").get<std::string>() != "lfa-plnn")
      throw Error(ErrorCode::SchemaMismatch, path.string() + ": not a model file");
    if (doc.at("format_version").get<int>() != kModelFormatVersion)
      throw Error(ErrorCode::SchemaMismatch, path.string() + ": unsupported model format version");
    dims = doc.at("dims").get<std::vector<std::size_t>>();
    if (manifest_hash)
      *manifest_hash = std::stoull(doc.at("manifest_hash").get<std::string>(), nullptr, 16);
    const json& arr = doc.at("layers");
    if (dims.size() < 3 || arr.size() != dims.size() - 1)
      throw Error(ErrorCode::SchemaMismatch, path.string() + ": layer count disagrees with dims");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const json& W = arr[i].at("W");
      const json& b = arr[i].at("b");
      const auto rows = static_cast<Eigen::Index>(dims[i + 1]);
      const auto cols = static_cast<Eigen::Index>(dims[i]);
      if (W.size() != dims[i + 1] || b.size() != dims[i + 1])
        throw Error(ErrorCode::SchemaMismatch,
                    path.string() + ": layer " + std::to_string(i) + " shape disagrees with dims");
      Layer l{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
      for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = W[static_cast<std::size_t>(r)];
        if (row.size() != dims[i])
          throw Error(ErrorCode::SchemaMismatch,
                      path.string() + ": layer " + std::to_string(i) + " shape disagrees with dims");
        for (Eigen::Index c = 0; c < cols; ++c) l.W(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        l.b[r] = b[static_cast<std::size_t>(r)].get<double>();
      }
      layers.push_back(std::move(l));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": " + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": bad manifest hash");
  }
  return Plnn(std::move(layers));
}

}  // namespace lfa
