#pragma once

#include "attacks.hpp"
#include "dataset.hpp"
#include "network.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lfa {

enum class InnerSolver { BruteForce, Milp };

// SquaredError picks, per sample, whichever forecast extreme has the larger
// (adv_max) or smaller (adv_min) squared residual. Forecast uses the
// max-forecast mask for adv_max and the min-forecast mask for adv_min.
enum class InnerObjective { SquaredError, Forecast };

const char* to_string(InnerSolver solver);
const char* to_string(InnerObjective objective);
InnerSolver parse_inner_solver(const std::string& text);
InnerObjective parse_inner_objective(const std::string& text);

struct AdvTrainConfig {
  TrainConfig base;
  int budget = 6;
  ImputeMode impute = ImputeMode::Mean;
  double max_weight = 1.0;
  double min_weight = 1.0;
  InnerSolver inner_solver = InnerSolver::BruteForce;
  InnerObjective inner_objective = InnerObjective::SquaredError;
  int workers = 0;  // 0: hardware concurrency

  void validate() const;
};

struct AdversarialLoss {
  double clean = 0.0;
  double adv_max = 0.0;
  double adv_min = 0.0;
  std::vector<Mask> masks_max;
  std::vector<Mask> masks_min;
};

AdversarialLoss adversarial_loss(const Plnn& model, const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& Y, const ImputationVector& c,
                                 const AdvTrainConfig& cfg);

// Rows of X with each sample's mask applied.
Eigen::MatrixXd apply_masks(const Eigen::MatrixXd& X, const std::vector<Mask>& masks,
                            const ImputationVector& c);

// Gradient of clean + w_max * L(masked_max) + w_min * L(masked_min) with the
// masks held fixed.
ParamGrad danskin_grad(const Plnn& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                       const ImputationVector& c, const AdversarialLoss& masks,
                       const AdvTrainConfig& cfg);

struct AdvHistoryRow {
  int epoch = 0;
  double clean_loss = 0.0;
  double adv_max_loss = 0.0;
  double adv_min_loss = 0.0;
  double test_mape = 0.0;
  double test_median_abs_mpe_max = 0.0;
  double test_median_abs_mpe_min = 0.0;
  double lr = 0.0;
};

struct AdvTrainResult {
  Plnn model;  // snapshot with the lowest combined score
  int best_epoch = 0;
  std::vector<AdvHistoryRow> history;
};

// Median |MPE| over X for the forecast-maximizing and -minimizing masks.
std::pair<double, double> median_abs_mpe(const Plnn& model, const Eigen::MatrixXd& X,
                                         const ImputationVector& c, int budget, int workers);

AdvTrainResult advtrain(Plnn model, const Dataset& train, const Dataset& test,
                        const ImputationVector& c, const AdvTrainConfig& cfg);

void write_advtrain_history(const std::filesystem::path& path,
                            const std::vector<AdvHistoryRow>& rows);

}  // namespace lfa
