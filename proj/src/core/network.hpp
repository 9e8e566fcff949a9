#pragma once

#include "dataset.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace lfa {

struct Layer {
  Eigen::MatrixXd W;  // out x in
  Eigen::VectorXd b;
};

// Feedforward ReLU network: hidden layers are affine + ReLU, the final layer
// is affine with a single output.
class Plnn {
 public:
  Plnn() = default;
  explicit Plnn(std::vector<Layer> layers);

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  static Plnn init_uniform(const std::vector<std::size_t>& dims, std::uint64_t seed);

  std::vector<std::size_t> dims() const;
  std::size_t input_dim() const { return static_cast<std::size_t>(layers_.front().W.cols()); }
  std::size_t depth() const { return layers_.size(); }
  std::size_t hidden_units() const;
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }

  bool operator==(const Plnn& other) const;

 private:
  std::vector<Layer> layers_;
};

using ParamGrad = std::vector<Layer>;

ParamGrad zero_like(const Plnn& model);
void axpy(double alpha, const ParamGrad& x, ParamGrad& y);

struct ForwardPass {
  double output = 0.0;
  // activations[0] = input; activations[k] = post-ReLU output of hidden layer k.
  std::vector<Eigen::VectorXd> activations;
  // preactivations[k] = W_k z_k + b_k for every layer (last entry has size 1).
  std::vector<Eigen::VectorXd> preactivations;
};

ForwardPass forward(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x);
double predict(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd predict_all(const Plnn& model, const Eigen::MatrixXd& X);

double mse_loss(const Plnn& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& Y);
ParamGrad grad_params(const Plnn& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& Y);
Eigen::VectorXd grad_input(const Plnn& model, const Eigen::Ref<const Eigen::VectorXd>& x);

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  int epochs = 150;
  int batch_size = 64;
  double lr0 = 5e-4;
  AdamParams adam;
  int anneal_epochs = 0;  // cosine horizon; 0 means `epochs`
  std::uint64_t seed = 0;
  // Called after each epoch's updates with the current parameters.
  std::function<void(int epoch, const Plnn&)> on_epoch;

  void validate() const;
  double lr_at(int epoch) const;
};

struct TrainHistoryRow {
  int epoch = 0;
  double train_mse = 0.0;
  double test_mape = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  Plnn model;  // snapshot with the lowest test MAPE
  int best_epoch = 0;
  std::vector<TrainHistoryRow> history;
};

class AdamOptimizer {
 public:
  AdamOptimizer(const Plnn& model, AdamParams params);
  void step(Plnn& model, const ParamGrad& grad, double lr);

 private:
  AdamParams params_;
  ParamGrad m_;
  ParamGrad v_;
  long t_ = 0;
};

namespace detail {

// Shared epoch/batch loop for clean and adversarial training. `batch_grad`
// returns the gradient for the given batch rows (and may record side data);
// `end_epoch` is invoked after each epoch's updates.
void run_epochs(Plnn& model, const Dataset& train, const TrainConfig& cfg,
                const std::function<ParamGrad(const Plnn&, const Eigen::MatrixXd&,
                                              const Eigen::VectorXd&, int epoch,
                                              int batch)>& batch_grad,
                const std::function<void(int epoch, double lr, const Plnn&)>& end_epoch);

}  // namespace detail

TrainResult train(Plnn model, const Dataset& train, const Dataset& test, const TrainConfig& cfg);

void write_train_history(const std::filesystem::path& path,
                         const std::vector<TrainHistoryRow>& rows);

inline constexpr int kModelFormatVersion = 1;

void save_model(const Plnn& model, const std::filesystem::path& path,
                std::uint64_t manifest_hash = 0);
Plnn load_model(const std::filesystem::path& path, std::uint64_t* manifest_hash = nullptr);

}  // namespace lfa
