// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when a
// hard criterion fails.

#include "core/advtrain.hpp"
#include "core/attacks.hpp"
#include "core/bounds.hpp"
#include "core/results_io.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace lfa;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

const std::vector<std::size_t> kDesk = {12, 16, 8, 1};

struct Outcome {
  enum Kind { Pass, Fail, Warn, Skip } kind;
  std::string detail;
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

int workers() { return default_workers(); }

AdvTrainConfig desk_adv(ImputeMode impute) {
  AdvTrainConfig cfg;
  cfg.base.epochs = 50;
  cfg.base.batch_size = 32;
  cfg.base.lr0 = 0.01;
  cfg.base.seed = 1;
  cfg.budget = 6;
  cfg.impute = impute;
  cfg.workers = workers();
  return cfg;
}

Outcome oracle_equivalence() {
  long instances = 0, obj_bad = 0, mask_bad = 0;
  double worst = 0.0;
  for (std::uint64_t seed : {1, 2}) {
    const oracle::Desk& d = oracle::desk(2000, kDesk, seed);
    const oracle::RefNet ref = oracle::copy_net(d.model);
    std::mt19937_64 rng(100 + seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, d.data.test.X.rows() - 1);
    for (int s = 0; s < 5; ++s) {
      const Eigen::VectorXd x = d.data.test.X.row(pick(rng)).transpose();
      for (ImputeMode im : {ImputeMode::Zero, ImputeMode::Mean}) {
        const ImputationVector& c = d.data.imputation(im);
        for (int beta = 0; beta <= 6; ++beta)
          for (Mode mode : {Mode::Max, Mode::Min}) {
            const AttackSpec spec = AttackSpec::availability(mode, im, beta);
            const AttackResult milp = availability_milp(d.model, x, spec, c);
            const AttackResult brute = availability_bruteforce(d.model, x, spec, c);
            const double diff = std::abs(milp.adversarial_forecast - brute.adversarial_forecast);
            worst = std::max(worst, diff);
            obj_bad += diff > 1e-6;
            const double fwd = oracle::forward(ref, oracle::to_vec(impute(x, milp.mask, c)));
            mask_bad += std::abs(fwd - milp.adversarial_forecast) > 1e-6;
            ++instances;
          }
      }
    }
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "%ld instances, %ld objective mismatches (worst %.2e), %ld mask mismatches",
                instances, obj_bad, worst, mask_bad);
  return {instances >= 200 && obj_bad == 0 && mask_bad == 0 ? Outcome::Pass : Outcome::Fail, buf};
}

Outcome milp_dominates_pgd() {
  const oracle::Desk& d = oracle::desk(2000, kDesk, 1);
  const Eigen::MatrixXd X = d.data.test.X.topRows(100);
  bool ok = true;
  std::ostringstream detail;
  for (double eps : {0.05, 0.1, 0.2}) {
    long violations = 0, strict = 0;
    for (Mode mode : {Mode::Max, Mode::Min}) {
      const AttackSpec spec = AttackSpec::integrity(mode, eps);
      const BatchResult milp = batch_attack(d.model, X, spec, d.data.manifest.zero,
                                            BatchOptions{workers(), AttackMethod::Milp});
      const BatchResult pgd = batch_attack(d.model, X, spec, d.data.manifest.zero,
                                           BatchOptions{workers(), AttackMethod::Pgd});
      if (!milp.summary.failures.empty() || !pgd.summary.failures.empty()) ok = false;
      const double sigma = mode == Mode::Max ? 1.0 : -1.0;
      for (std::size_t i = 0; i < milp.results.size(); ++i) {
        if (!milp.results[i] || !pgd.results[i]) continue;
        const double gain = sigma * (milp.results[i]->adversarial_forecast -
                                     pgd.results[i]->adversarial_forecast);
        violations += gain < -1e-6;
        strict += gain > 1e-6;
      }
    }
    detail << "eps " << eps << ": " << strict << " strict, " << violations << " violations; ";
    ok = ok && violations == 0 && strict >= 1;
  }
  return {ok ? Outcome::Pass : Outcome::Fail, detail.str()};
}

Outcome ibp_soundness() {
  long checked = 0, violations = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const oracle::Desk& d = oracle::desk(2000, kDesk, seed);
    const oracle::RefNet ref = oracle::copy_net(d.model);
    std::mt19937_64 rng(seed * 31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int box_type = 0; box_type < 2; ++box_type) {
      for (int s = 0; s < 100; ++s) {
        const Eigen::VectorXd x = d.data.test.X.row(s).transpose();
        const ImputationVector& c = d.data.manifest.mean;
        const Box box = box_type == 0 ? init_bounds_availability(x, c)
                                      : init_bounds_integrity(x, 0.2);
        const IntervalStack st =
            propagate(d.model, box, box_type == 0 ? kDefaultSlack : 0.0);
        for (int t = 0; t < 100; ++t) {
          oracle::Vec z(12);
          for (int j = 0; j < 12; ++j)
            z[static_cast<std::size_t>(j)] = box.lower[j] + u(rng) * (box.upper[j] - box.lower[j]);
          std::vector<oracle::Vec> pre;
          oracle::forward(ref, z, &pre);
          for (std::size_t k = 0; k < pre.size(); ++k)
            for (std::size_t j = 0; j < pre[k].size(); ++j) {
              const auto jj = static_cast<Eigen::Index>(j);
              violations += pre[k][j] < st.lower[k + 1][jj] || pre[k][j] > st.upper[k + 1][jj];
              ++checked;
            }
        }
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "3 models x 2 box types x 10000 inputs, %ld preactivations, %ld violations",
                checked, violations);
  return {violations == 0 ? Outcome::Pass : Outcome::Fail, buf};
}

Outcome gradients() {
  const oracle::Desk& d = oracle::desk(2000, kDesk, 1);
  const oracle::RefNet ref = oracle::copy_net(d.model);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<Eigen::Index> pick(0, d.data.train.X.rows() - 1);
  double worst_p = 0.0, worst_i = 0.0, worst_d = 0.0;
  int done_p = 0, done_i = 0, done_d = 0, tried = 0;
  AdvTrainConfig cfg = desk_adv(ImputeMode::Mean);
  cfg.budget = 3;
  cfg.max_weight = 0.8;
  cfg.min_weight = 0.6;
  const double h = 1e-6;
  while ((done_p < 20 || done_i < 20 || done_d < 20) && tried < 2000) {
    ++tried;
    Eigen::MatrixXd X(8, 12);
    Eigen::VectorXd Y(8);
    for (int r = 0; r < 8; ++r) {
      const Eigen::Index k = pick(rng);
      X.row(r) = d.data.train.X.row(k);
      Y[r] = d.data.train.Y[k];
    }
    std::vector<oracle::Vec> pts;
    for (int r = 0; r < 8; ++r) pts.push_back(oracle::to_vec(X.row(r).transpose()));
    const AdversarialLoss masks = adversarial_loss(d.model, X, Y, d.data.manifest.mean, cfg);
    const Eigen::MatrixXd Xh = apply_masks(X, masks.masks_max, d.data.manifest.mean);
    const Eigen::MatrixXd Xl = apply_masks(X, masks.masks_min, d.data.manifest.mean);
    std::vector<oracle::Vec> all = pts;
    for (int r = 0; r < 8; ++r) {
      all.push_back(oracle::to_vec(Xh.row(r).transpose()));
      all.push_back(oracle::to_vec(Xl.row(r).transpose()));
    }
    // Parameter perturbations of size h move preactivations by at most
    // h * (1 + |z|_1); 1e-3 is far above that for scaled inputs.
    if (done_p < 20 && oracle::min_abs_preactivation(ref, pts) > 1e-3) {
      const oracle::Vec fd = oracle::fd_params([&](const Plnn& m) { return mse_loss(m, X, Y); }, d.model, h);
      worst_p = std::max(worst_p, oracle::rel_error(oracle::flatten(grad_params(d.model, X, Y)), fd));
      ++done_p;
    }
    if (done_i < 20 && oracle::min_abs_preactivation(ref, {pts[0]}) > 1e-3) {
      const oracle::Vec fd = oracle::fd_input([&](const oracle::Vec& z) { return oracle::forward(ref, z); }, pts[0], h);
      worst_i = std::max(worst_i, oracle::rel_error(oracle::to_vec(grad_input(d.model, X.row(0).transpose())), fd));
      ++done_i;
    }
    if (done_d < 20 && oracle::min_abs_preactivation(ref, all) > 1e-3) {
      auto f = [&](const Plnn& m) {
        return mse_loss(m, X, Y) + cfg.max_weight * mse_loss(m, Xh, Y) + cfg.min_weight * mse_loss(m, Xl, Y);
      };
      const oracle::Vec fd = oracle::fd_params(f, d.model, h);
      worst_d = std::max(worst_d, oracle::rel_error(
          oracle::flatten(danskin_grad(d.model, X, Y, d.data.manifest.mean, masks, cfg)), fd));
      ++done_d;
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "worst relative error: grad_params %.2e (%d), grad_input %.2e (%d), danskin %.2e (%d)",
                worst_p, done_p, worst_i, done_i, worst_d, done_d);
  const bool ok = done_p == 20 && done_i == 20 && done_d == 20 && worst_p < 1e-5 && worst_i < 1e-5 &&
                  worst_d < 1e-5;
  return {ok ? Outcome::Pass : Outcome::Fail, buf};
}

Outcome budget_monotonicity() {
  const oracle::Desk& d = oracle::desk(2000, kDesk, 1);
  const Eigen::MatrixXd X = d.data.test.X.topRows(100);
  long breaks = 0;
  std::ostringstream plateau;
  for (ImputeMode im : {ImputeMode::Zero, ImputeMode::Mean}) {
    std::vector<std::vector<double>> f(7);
    plateau << to_string(im) << " median MPE by beta:";
    for (int beta = 0; beta <= 6; ++beta) {
      const AttackSpec spec = AttackSpec::availability(Mode::Max, im, beta);
      const BatchResult r = batch_attack(d.model, X, spec, d.data.imputation(im),
                                         BatchOptions{workers(), AttackMethod::Milp});
      for (const auto& res : r.results) f[static_cast<std::size_t>(beta)].push_back(res ? res->adversarial_forecast : NAN);
      char buf[32];
      std::snprintf(buf, sizeof buf, " %.2f", r.summary.mpe.median);
      plateau << buf;
    }
    plateau << "; ";
    for (int beta = 1; beta <= 6; ++beta)
      for (std::size_t i = 0; i < f[0].size(); ++i)
        breaks += !(f[static_cast<std::size_t>(beta)][i] >= f[static_cast<std::size_t>(beta) - 1][i]);
  }
  return {breaks == 0 ? Outcome::Pass : Outcome::Fail,
          std::to_string(breaks) + " decreases over 100 samples x 2 imputations; " + plateau.str()};
}

struct AdvModels {
  Plnn clean;
  Plnn adv_zero;
  Plnn adv_mean;
  const PreparedData* data = nullptr;
};

const AdvModels& adv_models() {
  static const AdvModels m = [] {
    AdvModels out;
    const oracle::Desk& d = oracle::desk(2000, kDesk, 1);
    out.data = &d.data;
    out.clean = d.model;
    const Plnn init = Plnn::init_uniform(kDesk, 1);
    out.adv_zero = advtrain(init, d.data.train, d.data.test, d.data.manifest.zero, desk_adv(ImputeMode::Zero)).model;
    out.adv_mean = advtrain(init, d.data.train, d.data.test, d.data.manifest.mean, desk_adv(ImputeMode::Mean)).model;
    return out;
  }();
  return m;
}

Outcome adversarial_effectiveness() {
  const AdvModels& m = adv_models();
  bool ok = true;
  std::ostringstream detail;
  for (ImputeMode im : {ImputeMode::Zero, ImputeMode::Mean}) {
    const ImputationVector& c = m.data->imputation(im);
    const Plnn& adv = im == ImputeMode::Zero ? m.adv_zero : m.adv_mean;
    const auto clean = median_abs_mpe(m.clean, m.data->test.X, c, 6, workers());
    const auto hard = median_abs_mpe(adv, m.data->test.X, c, 6, workers());
    const double rmax = hard.first / clean.first, rmin = hard.second / clean.second;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%s: max %.2f -> %.2f (x%.2f), min %.2f -> %.2f (x%.2f); ",
                  to_string(im), clean.first, hard.first, rmax, clean.second, hard.second, rmin);
    detail << buf;
    ok = ok && rmax <= 0.7 && rmin <= 0.7;
  }
  return {ok ? Outcome::Pass : Outcome::Fail, detail.str()};
}

Outcome clean_accuracy_cost() {
  const AdvModels& m = adv_models();
  const auto test_mape = [&](const Plnn& p) { return mape(predict_all(p, m.data->test.X), m.data->test.Y); };
  const double base = test_mape(m.clean);
  const double dz = test_mape(m.adv_zero) - base, dm = test_mape(m.adv_mean) - base;
  char buf[160];
  std::snprintf(buf, sizeof buf, "clean test MAPE %.2f%%; degradation zero-trained %+.2f pp, mean-trained %+.2f pp",
                base, dz, dm);
  return {dz <= 3.0 && dm <= 3.0 ? Outcome::Pass : Outcome::Fail, buf};
}

// Attack CSV text with the wall-time column removed.
std::string without_ms(const fs::path& p) {
  std::ifstream in(p);
  std::string out, line;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

Outcome parallel_speedup(Outcome* determinism) {
  const oracle::Desk& d = oracle::desk(2000, kDesk, 1);
  const Eigen::MatrixXd X = d.data.test.X.topRows(200);
  const fs::path root = fs::temp_directory_path() / "lfa_acceptance_parallel";
  fs::remove_all(root);
  double t1 = 0.0, t8 = 0.0;
  long differing = 0, files = 0;
  for (Mode mode : {Mode::Max, Mode::Min})
    for (int beta = 1; beta <= 6; ++beta) {
      const AttackSpec spec = AttackSpec::availability(mode, ImputeMode::Mean, beta);
      std::string text[2];
      int k = 0;
      for (int w : {1, 8}) {
        const auto t0 = Clock::now();
        const BatchResult r = batch_attack(d.model, X, spec, d.data.manifest.mean, BatchOptions{w});
        (w == 1 ? t1 : t8) += seconds_since(t0);
        const fs::path dir = root / ("w" + std::to_string(w));
        fs::create_directories(dir);
        write_attack_csv(dir / attack_file_name(spec), to_table(spec, r));
        text[k++] = without_ms(dir / attack_file_name(spec));
      }
      ++files;
      differing += text[0] != text[1];
    }
  char buf[200];
  std::snprintf(buf, sizeof buf, "%ld of %ld CSVs differ outside the ms column", differing, files);
  *determinism = {differing == 0 ? Outcome::Pass : Outcome::Fail, buf};
  const double speedup = t1 / t8;
  std::snprintf(buf, sizeof buf, "1 worker %.3f s, 8 workers %.3f s, speedup x%.2f on %u hardware thread(s)",
                t1, t8, speedup, std::thread::hardware_concurrency());
  return {speedup >= 3.0 ? Outcome::Pass : Outcome::Warn, buf};
}

Outcome reduction_identity() {
  const oracle::Desk& d = oracle::desk(2000, kDesk, 1);
  const Plnn init = Plnn::init_uniform(kDesk, 1);
  AdvTrainConfig cfg = desk_adv(ImputeMode::Mean);
  cfg.max_weight = 0.0;
  cfg.min_weight = 0.0;
  std::vector<Plnn> adv, clean;
  cfg.base.on_epoch = [&](int, const Plnn& m) { adv.push_back(m); };
  advtrain(init, d.data.train, d.data.test, d.data.manifest.mean, cfg);
  TrainConfig base = cfg.base;
  base.on_epoch = [&](int, const Plnn& m) { clean.push_back(m); };
  train(init, d.data.train, d.data.test, base);
  std::size_t same = 0;
  for (std::size_t e = 0; e < std::min(adv.size(), clean.size()); ++e) same += adv[e] == clean[e];
  const bool ok = adv.size() == 50 && clean.size() == 50 && same == 50;
  return {ok ? Outcome::Pass : Outcome::Fail,
          std::to_string(same) + " of 50 epoch snapshots bit-identical"};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  Outcome determinism{Outcome::Fail, "not run"};
  const std::vector<Entry> entries = {
      {1, "availability MILP equals brute force", oracle_equivalence},
      {2, "integrity MILP dominates PGD", milp_dominates_pgd},
      {3, "interval bounds are sound", ibp_soundness},
      {4, "gradients match finite differences", gradients},
      {5, "worst case is monotone in the budget", budget_monotonicity},
      {6, "adversarial training cuts median |MPE| to <= 0.7x", adversarial_effectiveness},
      {7, "clean MAPE cost <= 3 pp", clean_accuracy_cost},
      {8, "parallel speedup >= 3x with 8 workers", [&] { return parallel_speedup(&determinism); }},
  };
  int failures = 0;
  auto print = [&](const std::string& id, const char* name, const Outcome& o, double secs) {
    static const char* tags[] = {"PASS", "FAIL", "WARN", "SKIP"};
    std::printf("%s criterion %s: %s [%.1f s] %s\n", tags[o.kind], id.c_str(), name, secs, o.detail.c_str());
    std::fflush(stdout);
    failures += o.kind == Outcome::Fail;
  };
  for (const auto& e : entries) {
    const auto t0 = Clock::now();
    const Outcome o = e.run();
    print(std::to_string(e.id), e.name, o, seconds_since(t0));
    if (e.id == 8) print("8b", "attack CSVs identical across worker counts", determinism, 0.0);
  }
  const auto t0 = Clock::now();
  const Outcome identity = reduction_identity();
  print("9", "zero-weight advtrain reproduces clean training", identity, seconds_since(t0));
  print("10", "competition dataset MAPE", {Outcome::Skip, "no competition dataset supplied"}, 0.0);
  std::printf("%d hard failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
