#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/advtrain.hpp"
#include "core/error.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace lfa;

namespace {

AdvTrainConfig config(int budget, double wmax, double wmin) {
  AdvTrainConfig cfg;
  cfg.budget = budget;
  cfg.max_weight = wmax;
  cfg.min_weight = wmin;
  cfg.workers = 2;
  cfg.base.epochs = 3;
  cfg.base.batch_size = 32;
  cfg.base.lr0 = 0.01;
  cfg.base.seed = 5;
  return cfg;
}

ImputationVector zero_c() {
  ImputationVector c;
  c.c = Eigen::VectorXd::Zero(12);
  return c;
}

}  // namespace

TEST_CASE("budget zero makes every adversarial loss equal the clean loss") {
  const oracle::Desk& d = oracle::desk(2000, {12, 16, 8, 1}, 1);
  const Eigen::MatrixXd X = d.data.train.X.topRows(32);
  const Eigen::VectorXd Y = d.data.train.Y.head(32);
  const AdversarialLoss l = adversarial_loss(d.model, X, Y, d.data.manifest.mean, config(0, 1, 1));
  CHECK(l.adv_max == l.clean);
  CHECK(l.adv_min == l.clean);
  CHECK(l.clean == doctest::Approx(mse_loss(d.model, X, Y)).epsilon(1e-12));
}

TEST_CASE("hand-built instance") {
  // f(x) = relu(x_0 + 10); blocking x_0 = 2 drops the forecast from 12 to 10.
  Layer l1{Eigen::MatrixXd::Zero(1, 12), Eigen::VectorXd::Constant(1, 10.0)};
  l1.W(0, 0) = 1.0;
  const Plnn m({l1, Layer{Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1)}});
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(1, 12);
  X(0, 0) = 2.0;
  const Eigen::VectorXd Y = Eigen::VectorXd::Constant(1, 12.0);
  const AdversarialLoss l = adversarial_loss(m, X, Y, zero_c(), config(6, 1, 1));
  CHECK(l.clean == 0.0);
  CHECK(l.adv_max - l.clean == doctest::Approx(4.0));
  CHECK(l.adv_min == 0.0);
  CHECK(l.masks_max[0] == Mask{0, 1, 1, 1, 1, 1});
  CHECK(l.masks_min[0] == Mask(6, 1));

  AdvTrainConfig fc = config(6, 1, 1);
  fc.inner_objective = InnerObjective::Forecast;
  const AdversarialLoss f = adversarial_loss(m, X, Y, zero_c(), fc);
  CHECK(f.adv_max == 0.0);
  CHECK(f.adv_min == doctest::Approx(4.0));
}

TEST_CASE("loss ordering on trained batches") {
  const oracle::Desk& d = oracle::desk(2000, {12, 16, 8, 1}, 1);
  for (int b = 0; b < 10; ++b) {
    const Eigen::MatrixXd X = d.data.train.X.middleRows(32 * b, 32);
    const Eigen::VectorXd Y = d.data.train.Y.segment(32 * b, 32);
    for (int beta : {1, 3, 6}) {
      const AdversarialLoss l = adversarial_loss(d.model, X, Y, d.data.manifest.zero, config(beta, 1, 1));
      CHECK(l.adv_max >= l.clean - 1e-15);
      CHECK(l.adv_max >= l.adv_min);
      CHECK(l.adv_min >= 0.0);
      for (const auto& mask : l.masks_max) {
        int blocked = 0;
        for (int v : mask) blocked += v == 0;
        CHECK(blocked <= beta);
      }
    }
  }
}

TEST_CASE("danskin gradient matches finite differences with masks frozen") {
  const oracle::Desk& d = oracle::desk(2000, {12, 16, 8, 1}, 1);
  const Eigen::MatrixXd X = d.data.train.X.topRows(8);
  const Eigen::VectorXd Y = d.data.train.Y.head(8);
  const ImputationVector& c = d.data.manifest.mean;
  const AdvTrainConfig cfg = config(3, 0.7, 0.4);
  const AdversarialLoss masks = adversarial_loss(d.model, X, Y, c, cfg);
  const Eigen::MatrixXd Xh = apply_masks(X, masks.masks_max, c);
  const Eigen::MatrixXd Xl = apply_masks(X, masks.masks_min, c);

  const oracle::RefNet ref = oracle::copy_net(d.model);
  std::vector<oracle::Vec> pts;
  for (const Eigen::MatrixXd* M : {&X, &Xh, &Xl})
    for (Eigen::Index r = 0; r < M->rows(); ++r) pts.push_back(oracle::to_vec(M->row(r).transpose()));
  REQUIRE(oracle::min_abs_preactivation(ref, pts) > 1e-4);

  auto f = [&](const Plnn& m) {
    return mse_loss(m, X, Y) + 0.7 * mse_loss(m, Xh, Y) + 0.4 * mse_loss(m, Xl, Y);
  };
  const oracle::Vec fd = oracle::fd_params(f, d.model, 1e-6);
  const oracle::Vec an = oracle::flatten(danskin_grad(d.model, X, Y, c, masks, cfg));
  CHECK(oracle::rel_error(an, fd) < 1e-5);

  const ParamGrad plain = grad_params(d.model, X, Y);
  const ParamGrad zero_w = danskin_grad(d.model, X, Y, c, masks, config(3, 0, 0));
  for (std::size_t k = 0; k < plain.size(); ++k) {
    CHECK(plain[k].W == zero_w[k].W);
    CHECK(plain[k].b == zero_w[k].b);
  }
}

TEST_CASE("zero weights reproduce clean training exactly") {
  const oracle::Desk& d = oracle::desk(2000, {12, 16, 8, 1}, 1);
  const Plnn init = Plnn::init_uniform({12, 8, 1}, 3);
  AdvTrainConfig cfg = config(6, 0, 0);
  std::vector<Plnn> adv_traj, clean_traj;
  cfg.base.on_epoch = [&](int, const Plnn& m) { adv_traj.push_back(m); };
  advtrain(init, d.data.train, d.data.test, d.data.manifest.mean, cfg);
  TrainConfig base = cfg.base;
  base.on_epoch = [&](int, const Plnn& m) { clean_traj.push_back(m); };
  train(init, d.data.train, d.data.test, base);
  REQUIRE(adv_traj.size() == 3);
  REQUIRE(clean_traj.size() == 3);
  for (std::size_t e = 0; e < 3; ++e) CHECK(adv_traj[e] == clean_traj[e]);
}

TEST_CASE("MILP and brute-force inner solvers agree") {
  const oracle::Desk& d = oracle::desk(2000, {12, 16, 8, 1}, 1);
  const Eigen::MatrixXd X = d.data.train.X.topRows(16);
  const Eigen::VectorXd Y = d.data.train.Y.head(16);
  AdvTrainConfig a = config(4, 1, 1);
  AdvTrainConfig b = a;
  b.inner_solver = InnerSolver::Milp;
  const AdversarialLoss la = adversarial_loss(d.model, X, Y, d.data.manifest.mean, a);
  const AdversarialLoss lb = adversarial_loss(d.model, X, Y, d.data.manifest.mean, b);
  CHECK(la.clean == lb.clean);
  CHECK(std::abs(la.adv_max - lb.adv_max) < 1e-8);
  CHECK(std::abs(la.adv_min - lb.adv_min) < 1e-8);
}

TEST_CASE("advtrain history, selection and validation") {
  const oracle::Desk& d = oracle::desk(2000, {12, 16, 8, 1}, 1);
  const AdvTrainConfig cfg = config(6, 1, 1);
  const AdvTrainResult r = advtrain(Plnn::init_uniform({12, 8, 1}, 3), d.data.train, d.data.test,
                                    d.data.manifest.mean, cfg);
  REQUIRE(r.history.size() == 3);
  double best = INFINITY;
  int best_epoch = -1;
  for (const auto& h : r.history) {
    CHECK(h.adv_max_loss >= h.clean_loss);
    const double s = h.test_mape + 0.5 * (h.test_median_abs_mpe_max + h.test_median_abs_mpe_min);
    if (s < best) {
      best = s;
      best_epoch = h.epoch;
    }
  }
  CHECK(r.best_epoch == best_epoch);
  const auto med = median_abs_mpe(r.model, d.data.test.X, d.data.manifest.mean, 6, 2);
  CHECK(med.first == doctest::Approx(r.history[static_cast<std::size_t>(best_epoch)].test_median_abs_mpe_max));

  const auto path = std::filesystem::temp_directory_path() / "lfa_adv_history.csv";
  write_advtrain_history(path, r.history);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "epoch,clean_loss,adv_max_loss,adv_min_loss,test_mape,test_median_abs_mpe_max,"
        "test_median_abs_mpe_min,lr");

  AdvTrainConfig bad = cfg;
  bad.budget = 7;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.max_weight = -1;
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK(parse_inner_solver("milp") == InnerSolver::Milp);
  CHECK(parse_inner_objective("forecast") == InnerObjective::Forecast);
}
