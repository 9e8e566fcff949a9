#include "advtrain.hpp"

#include "error.hpp"
#include "metrics.hpp"
#include "parallel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace lfa {

namespace {

struct InnerResult {
  Mask max_mask;
  double max_forecast = 0.0;
  Mask min_mask;
  double min_forecast = 0.0;
};

InnerResult solve_inner(const Plnn& model, const Eigen::VectorXd& x, const ImputationVector& c,
                        const AdvTrainConfig& cfg) {
  InnerResult r;
  if (cfg.inner_solver == InnerSolver::BruteForce) {
    MaskExtremes e = enumerate_mask_extremes(model, x, c, cfg.budget);
    r.max_mask = std::move(e.max_mask);
    r.max_forecast = e.max_forecast;
    r.min_mask = std::move(e.min_mask);
    r.min_forecast = e.min_forecast;
    return r;
  }
  AttackResult hi = availability_milp(model, x, AttackSpec::availability(Mode::Max, cfg.impute, cfg.budget), c);
  AttackResult lo = availability_milp(model, x, AttackSpec::availability(Mode::Min, cfg.impute, cfg.budget), c);
  r.max_mask = std::move(hi.mask);
  r.max_forecast = hi.adversarial_forecast;
  r.min_mask = std::move(lo.mask);
  r.min_forecast = lo.adversarial_forecast;
  return r;
}

int resolve_workers(int workers) { return workers > 0 ? workers : default_workers(); }

}  // namespace

const char* to_string(InnerSolver solver) {
  return solver == InnerSolver::BruteForce ? "bruteforce" : "milp";
}

const char* to_string(InnerObjective objective) {
  return objective == InnerObjective::SquaredError ? "squared_error" : "forecast";
}

InnerSolver parse_inner_solver(const std::string& text) {
  if (text == "bruteforce") return InnerSolver::BruteForce;
  if (text == "milp") return InnerSolver::Milp;
  throw Error(ErrorCode::InvalidArgument, "unknown inner solver '" + text + "'");
}

InnerObjective parse_inner_objective(const std::string& text) {
  if (text == "squared_error") return InnerObjective::SquaredError;
  if (text == "forecast") return InnerObjective::Forecast;
  throw Error(ErrorCode::InvalidArgument, "unknown inner objective '" + text + "'");
}

void AdvTrainConfig::validate() const {
  base.validate();
  if (budget < 0 || budget > static_cast<int>(kNumFlex))
    throw Error(ErrorCode::BadBudget, "adversarial budget must lie in [0, 6]");
  if (!std::isfinite(max_weight) || !std::isfinite(min_weight) || max_weight < 0.0 ||
      min_weight < 0.0)
    throw Error(ErrorCode::InvalidArgument, "adversarial weights must be finite and >= 0");
}

AdversarialLoss adversarial_loss(const Plnn& model, const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& Y, const ImputationVector& c,
                                 const AdvTrainConfig& cfg) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "adversarial_loss of an empty batch");
  if (static_cast<std::size_t>(Y.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "batch targets and inputs differ in length");
  std::vector<InnerResult> inner(n);
  parallel_for(n, resolve_workers(cfg.workers), [&](std::size_t i) {
    inner[i] = solve_inner(model, X.row(static_cast<Eigen::Index>(i)).transpose(), c, cfg);
  });

  AdversarialLoss out;
  out.masks_max.resize(n);
  out.masks_min.resize(n);
  double clean = 0.0, hi = 0.0, lo = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double y = Y[r];
    const double e0 = y - predict(model, X.row(r).transpose());
    const double e_hi = y - inner[i].max_forecast;
    const double e_lo = y - inner[i].min_forecast;
    clean += e0 * e0;
    bool hi_first = true;  // adv_max uses the max-forecast mask
    if (cfg.inner_objective == InnerObjective::SquaredError) hi_first = e_hi * e_hi >= e_lo * e_lo;
    out.masks_max[i] = hi_first ? inner[i].max_mask : inner[i].min_mask;
    out.masks_min[i] = hi_first ? inner[i].min_mask : inner[i].max_mask;
    hi += hi_first ? e_hi * e_hi : e_lo * e_lo;
    lo += hi_first ? e_lo * e_lo : e_hi * e_hi;
  }
  const double dn = static_cast<double>(n);
  out.clean = clean / dn;
  out.adv_max = hi / dn;
  out.adv_min = lo / dn;
  return out;
}

Eigen::MatrixXd apply_masks(const Eigen::MatrixXd& X, const std::vector<Mask>& masks,
                            const ImputationVector& c) {
  if (masks.size() != static_cast<std::size_t>(X.rows()))
    throw Error(ErrorCode::DimensionMismatch, "one mask per batch row required");
  Eigen::MatrixXd Z = X;
  for (Eigen::Index r = 0; r < X.rows(); ++r)
    Z.row(r) = impute(X.row(r).transpose(), masks[static_cast<std::size_t>(r)], c).transpose();
  return Z;
}

ParamGrad danskin_grad(const Plnn& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& Y,
                       const ImputationVector& c, const AdversarialLoss& masks,
                       const AdvTrainConfig& cfg) {
  ParamGrad g = grad_params(model, X, Y);
  // Zero weights skip the extra terms so clean training is reproduced exactly.
  if (cfg.max_weight != 0.0)
    axpy(cfg.max_weight, grad_params(model, apply_masks(X, masks.masks_max, c), Y), g);
  if (cfg.min_weight != 0.0)
    axpy(cfg.min_weight, grad_params(model, apply_masks(X, masks.masks_min, c), Y), g);
  return g;
}

std::pair<double, double> median_abs_mpe(const Plnn& model, const Eigen::MatrixXd& X,
                                         const ImputationVector& c, int budget, int workers) {
  const auto n = static_cast<std::size_t>(X.rows());
  std::vector<double> hi(n), lo(n);
  parallel_for(n, resolve_workers(workers), [&](std::size_t i) {
    const Eigen::VectorXd x = X.row(static_cast<Eigen::Index>(i)).transpose();
    const double clean = predict(model, x);
    const MaskExtremes e = enumerate_mask_extremes(model, x, c, budget);
    hi[i] = mpe_term(e.max_forecast, clean);
    lo[i] = mpe_term(e.min_forecast, clean);
  });
  return {median_abs(hi), median_abs(lo)};
}

AdvTrainResult advtrain(Plnn model, const Dataset& train_set, const Dataset& test_set,
                        const ImputationVector& c, const AdvTrainConfig& cfg) {
  cfg.validate();
  if (test_set.rows() == 0) throw Error(ErrorCode::InvalidArgument, "empty test set");
  AdvTrainResult result;
  result.model = model;
  double best = std::numeric_limits<double>::infinity();
  double sum_clean = 0.0, sum_hi = 0.0, sum_lo = 0.0;
  std::size_t seen = 0;

  detail::run_epochs(
      model, train_set, cfg.base,
      [&](const Plnn& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, int epoch, int batch) {
        const AdversarialLoss loss = adversarial_loss(m, X, Y, c, cfg);
        if (!std::isfinite(loss.clean) || !std::isfinite(loss.adv_max) ||
            !std::isfinite(loss.adv_min))
          throw Error(ErrorCode::NonfiniteLoss, "non-finite loss at epoch " + std::to_string(epoch) +
                                                    ", batch " + std::to_string(batch));
        const auto rows = static_cast<double>(X.rows());
        sum_clean += loss.clean * rows;
        sum_hi += loss.adv_max * rows;
        sum_lo += loss.adv_min * rows;
        seen += static_cast<std::size_t>(X.rows());
        return danskin_grad(m, X, Y, c, loss, cfg);
      },
      [&](int epoch, double lr, const Plnn& m) {
        AdvHistoryRow row;
        row.epoch = epoch;
        row.lr = lr;
        const double dn = static_cast<double>(seen);
        row.clean_loss = sum_clean / dn;
        row.adv_max_loss = sum_hi / dn;
        row.adv_min_loss = sum_lo / dn;
        sum_clean = sum_hi = sum_lo = 0.0;
        seen = 0;
        row.test_mape = mape(predict_all(m, test_set.X), test_set.Y);
        const auto [med_hi, med_lo] = median_abs_mpe(m, test_set.X, c, cfg.budget, cfg.workers);
        row.test_median_abs_mpe_max = med_hi;
        row.test_median_abs_mpe_min = med_lo;
        const double score = row.test_mape + 0.5 * (med_hi + med_lo);
        if (!std::isfinite(score))
          throw Error(ErrorCode::NonfiniteLoss, "non-finite metrics at epoch " + std::to_string(epoch));
        if (score < best) {
          best = score;
          result.model = m;
          result.best_epoch = epoch;
        }
        result.history.push_back(row);
      });
  return result;
}

void write_advtrain_history(const std::filesystem::path& path,
                            const std::vector<AdvHistoryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "epoch,clean_loss,adv_max_loss,adv_min_loss,test_mape,test_median_abs_mpe_max,"
         "test_median_abs_mpe_min,lr\n";
  char buf[320];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.epoch,
                  r.clean_loss, r.adv_max_loss, r.adv_min_loss, r.test_mape,
                  r.test_median_abs_mpe_max, r.test_median_abs_mpe_min, r.lr);
    out << buf;
  }
}

}  // namespace lfa
