// Command-line front end. Talks to the library only through lfa/lfa.h.

#include "lfa/lfa.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kInput = 2, kTraining = 3, kVerification = 4 };

struct CliError {
  int exit_code;
  std::string message;
};

[[noreturn]] void raise(int code, const std::string& message) { throw CliError{code, message}; }

int exit_for(lfa_status s) {
  switch (s) {
    case LFA_OK: return kOk;
    case LFA_ERR_NONFINITE_LOSS: return kTraining;
    case LFA_ERR_VERIFICATION_FAILED:
    case LFA_ERR_ORACLE_MISMATCH:
    case LFA_ERR_CYCLE_LIMIT: return kVerification;
    default: return kInput;
  }
}

void check(lfa_status s, const std::string& context, int exit_code = -1) {
  if (s == LFA_OK) return;
  std::string msg = context + ": " + lfa_last_error();
  if (lfa_last_error_row() > 0) {
    msg += " (row " + std::to_string(lfa_last_error_row());
    if (*lfa_last_error_column()) msg += ", column " + std::string(lfa_last_error_column());
    msg += ")";
  }
  raise(exit_code >= 0 ? exit_code : exit_for(s), msg + " [" + lfa_status_name(s) + "]");
}

std::string default_out() {
  if (const char* env = std::getenv("LFA_OUTPUT_DIR"); env && *env) return env;
  return "lfa_out";
}

// Fills options that were not given on the command line from a JSON object.
// Keys are long option names with '-' or '_'; unknown keys are rejected.
void apply_config(CLI::App& cmd, const std::string& path) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) raise(kInput, "cannot read config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    raise(kInput, "config " + path + ": " + e.what());
  }
  if (!doc.is_object()) raise(kInput, "config " + path + ": expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    std::string name = key;
    for (char& ch : name)
      if (ch == '_') ch = '-';
    CLI::Option* opt = name == "config" ? nullptr : cmd.get_option_no_throw("--" + name);
    if (!opt) raise(kInput, "config " + path + ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;  // flags win
    auto scalar = [](const json& v) {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
      return v.dump();
    };
    std::vector<std::string> items;
    if (value.is_array()) {
      for (const auto& v : value) items.push_back(scalar(v));
    } else {
      items.push_back(scalar(value));
    }
    if (opt->get_items_expected_max() <= 1 && items.size() > 1) {
      std::string joined;
      for (std::size_t i = 0; i < items.size(); ++i) joined += (i ? "," : "") + items[i];
      items = {joined};
    }
    try {
      for (const auto& s : items) opt->add_result(s);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      raise(kInput, "config " + path + ": key '" + key + "': " + e.what());
    }
  }
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  try {
    while (std::getline(ss, part, ',')) {
      const auto dots = part.find("..");
      if (dots != std::string::npos) {
        const int a = std::stoi(part.substr(0, dots));
        const int b = std::stoi(part.substr(dots + 2));
        if (b < a) raise(kInput, what + ": empty range '" + part + "'");
        for (int v = a; v <= b; ++v) out.push_back(v);
      } else {
        std::size_t used = 0;
        out.push_back(std::stoi(part, &used));
        if (used != part.size()) throw std::invalid_argument(part);
      }
    }
  } catch (const std::logic_error&) {
    raise(kInput, what + ": cannot parse '" + text + "'");
  }
  if (out.empty()) raise(kInput, what + ": no values");
  return out;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  try {
    while (std::getline(ss, part, ',')) {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    }
  } catch (const std::logic_error&) {
    raise(kInput, what + ": cannot parse '" + text + "'");
  }
  if (out.empty()) raise(kInput, what + ": no values");
  return out;
}

struct DatasetHandle {
  lfa_dataset* p = nullptr;
  ~DatasetHandle() { lfa_dataset_free(p); }
};

struct ModelHandle {
  lfa_model* p = nullptr;
  ~ModelHandle() { lfa_model_free(p); }
};

// ---- prepare ----

struct PrepareArgs {
  std::size_t synthetic = 0;
  std::string csv;
  std::string schema;
  std::uint64_t seed = 0;
  double ratio = 0.8;
  std::string out;
  std::string config;
};

int run_prepare(const PrepareArgs& a) {
  DatasetHandle d;
  if (a.synthetic > 0 && !a.csv.empty()) raise(kInput, "use either --synthetic or --csv");
  if (a.synthetic > 0) {
    check(lfa_dataset_prepare_synthetic(a.synthetic, a.seed, a.ratio, &d.p), "prepare");
  } else if (!a.csv.empty()) {
    std::string schema;
    if (!a.schema.empty()) {
      std::ifstream in(a.schema);
      if (!in) raise(kInput, "cannot read schema " + a.schema);
      schema.assign(std::istreambuf_iterator<char>(in), {});
    }
    check(lfa_dataset_prepare_csv(a.csv.c_str(), schema.empty() ? nullptr : schema.c_str(), a.ratio,
                                  a.seed, &d.p),
          a.csv);
  } else {
    raise(kInput, "prepare needs --synthetic N or --csv FILE");
  }
  const std::string out = a.out.empty() ? default_out() : a.out;
  check(lfa_dataset_save(d.p, out.c_str()), "save dataset");
  lfa_dataset_info info{};
  check(lfa_dataset_info_get(d.p, &info), "dataset info");
  std::printf("rows: raw %zu, outliers removed %zu, train %zu, test %zu\n", info.raw_rows,
              info.outliers_removed, info.train_rows, info.test_rows);
  std::printf("manifest hash %016llx written to %s\n",
              static_cast<unsigned long long>(info.manifest_hash), out.c_str());
  return kOk;
}

// ---- train / advtrain ----

struct TrainArgs {
  std::string data;
  std::string out;
  std::string name;
  std::string config;
  std::vector<std::size_t> dims{12, 40, 20, 10, 1};
  int epochs = 150;
  int batch_size = 64;
  double lr = 5e-4;
  int anneal_epochs = 0;
  std::uint64_t seed = 0;
  // advtrain only
  double bmax = 1.0;
  double bmin = 1.0;
  int budget = 6;
  std::string impute = "mean";
  std::string inner_solver = "bruteforce";
  std::string inner_objective = "squared_error";
  int workers = 0;
};

lfa_impute impute_of(const std::string& s) {
  if (s == "zero") return LFA_IMPUTE_ZERO;
  if (s == "mean") return LFA_IMPUTE_MEAN;
  raise(kInput, "unknown imputation '" + s + "' (zero|mean)");
}

int run_train(const TrainArgs& a, bool adversarial) {
  const std::string out = a.out.empty() ? default_out() : a.out;
  const std::string data_dir = a.data.empty() ? default_out() : a.data;
  const std::string name = a.name.empty() ? (adversarial ? "adv" : "clean") : a.name;
  DatasetHandle d;
  check(lfa_dataset_load(data_dir.c_str(), &d.p), "load dataset " + data_dir);
  lfa_dataset_info info{};
  check(lfa_dataset_info_get(d.p, &info), "dataset info");
  ModelHandle m;
  check(lfa_model_create(a.dims.data(), a.dims.size(), a.seed, &m.p), "create model");
  fs::create_directories(out);
  const std::string history = (fs::path(out) / (name + "_history.csv")).string();
  const std::string metrics = (fs::path(out) / ("metrics_" + name + ".csv")).string();
  const std::string model_path = (fs::path(out) / (name + ".model.json")).string();

  lfa_train_options base;
  lfa_train_options_init(&base);
  base.epochs = a.epochs;
  base.batch_size = a.batch_size;
  base.lr0 = a.lr;
  base.anneal_epochs = a.anneal_epochs;
  base.seed = a.seed;
  base.history_csv = history.c_str();
  base.metrics_csv = metrics.c_str();
  base.label = name.c_str();
  int best = 0;
  if (adversarial) {
    lfa_advtrain_options o;
    lfa_advtrain_options_init(&o);
    o.base = base;
    o.budget = a.budget;
    o.impute = impute_of(a.impute);
    o.max_weight = a.bmax;
    o.min_weight = a.bmin;
    if (a.inner_solver == "bruteforce") o.inner_solver = LFA_INNER_BRUTEFORCE;
    else if (a.inner_solver == "milp") o.inner_solver = LFA_INNER_MILP;
    else raise(kInput, "unknown inner solver '" + a.inner_solver + "'");
    if (a.inner_objective == "squared_error") o.inner_objective = LFA_INNER_SQUARED_ERROR;
    else if (a.inner_objective == "forecast") o.inner_objective = LFA_INNER_FORECAST;
    else raise(kInput, "unknown inner objective '" + a.inner_objective + "'");
    o.workers = a.workers;
    const lfa_status s = lfa_model_advtrain(m.p, d.p, &o, &best);
    check(s, "advtrain", s == LFA_ERR_NONFINITE_LOSS ? kTraining : -1);
  } else {
    const lfa_status s = lfa_model_train(m.p, d.p, &base, &best);
    check(s, "train", s == LFA_ERR_NONFINITE_LOSS ? kTraining : -1);
  }
  check(lfa_model_save(m.p, model_path.c_str(), info.manifest_hash), "save model");
  double test_mape = 0.0;
  check(lfa_model_evaluate_mape(m.p, d.p, LFA_SPLIT_TEST, &test_mape), "evaluate");
  std::printf("best epoch %d, test MAPE %.4f%%\nmodel %s\nhistory %s\n", best, test_mape,
              model_path.c_str(), history.c_str());
  return kOk;
}

// ---- attack ----

struct AttackArgs {
  std::string model;
  std::string data;
  std::string out;
  std::string config;
  std::string kind = "availability";
  std::vector<std::string> modes{"max"};
  std::vector<std::string> imputes{"zero"};
  std::string beta = "1..6";
  std::string eps = "0.05,0.1,0.2";
  std::string method = "milp";
  std::string split = "test";
  std::size_t samples = 0;
  int workers = 0;
  bool oracle_check = false;
  int pgd_steps = 40;
  double pgd_step_size = -1.0;
  int pgd_restarts = 5;
  std::uint64_t seed = 0;
  long node_limit = 100000;
};

int run_attack(const AttackArgs& a) {
  const std::string out = a.out.empty() ? default_out() : a.out;
  const std::string data_dir = a.data.empty() ? default_out() : a.data;
  if (a.model.empty()) raise(kInput, "attack needs --model");
  DatasetHandle d;
  check(lfa_dataset_load(data_dir.c_str(), &d.p), "load dataset " + data_dir);
  ModelHandle m;
  check(lfa_model_load(a.model.c_str(), &m.p), "load model " + a.model);
  fs::create_directories(out);

  lfa_attack_options base;
  lfa_attack_options_init(&base);
  if (a.kind == "availability") base.kind = LFA_AVAILABILITY;
  else if (a.kind == "integrity") base.kind = LFA_INTEGRITY;
  else raise(kInput, "unknown attack kind '" + a.kind + "'");
  if (a.method == "milp") base.method = LFA_METHOD_MILP;
  else if (a.method == "pgd") base.method = LFA_METHOD_PGD;
  else if (a.method == "bruteforce") base.method = LFA_METHOD_BRUTEFORCE;
  else raise(kInput, "unknown method '" + a.method + "'");
  if (a.split != "test" && a.split != "train") raise(kInput, "split must be test or train");
  const lfa_split split = a.split == "train" ? LFA_SPLIT_TRAIN : LFA_SPLIT_TEST;
  base.pgd_steps = a.pgd_steps;
  base.pgd_step_size = a.pgd_step_size;
  base.pgd_restarts = a.pgd_restarts;
  base.pgd_seed = a.seed;
  base.node_limit = a.node_limit;
  base.workers = a.workers;
  base.oracle_check = a.oracle_check ? 1 : 0;
  base.max_samples = a.samples;

  std::vector<lfa_mode> modes;
  for (const auto& s : a.modes) {
    if (s == "max") modes.push_back(LFA_MAX);
    else if (s == "min") modes.push_back(LFA_MIN);
    else raise(kInput, "unknown mode '" + s + "'");
  }
  std::vector<lfa_impute> imputes;
  if (base.kind == LFA_AVAILABILITY)
    for (const auto& s : a.imputes) imputes.push_back(impute_of(s));
  else
    imputes.push_back(LFA_IMPUTE_ZERO);
  const std::vector<int> betas =
      base.kind == LFA_AVAILABILITY ? parse_int_list(a.beta, "--beta") : std::vector<int>{0};
  const std::vector<double> epss =
      base.kind == LFA_INTEGRITY ? parse_double_list(a.eps, "--eps") : std::vector<double>{0.0};

  int exit_code = kOk;
  for (lfa_mode mode : modes) {
    for (lfa_impute imp : imputes) {
      std::vector<lfa_attack_options> cells;
      std::vector<lfa_attack_summary> sums;
      for (int beta : betas) {
        for (double eps : epss) {
          lfa_attack_options o = base;
          o.mode = mode;
          o.impute = imp;
          o.budget = beta;
          o.eps = eps;
          char name[160];
          check(lfa_attack_file_name(&o, name, sizeof name), "attack spec");
          const std::string path = (fs::path(out) / name).string();
          o.results_csv = path.c_str();
          lfa_attack_summary s{};
          const lfa_status status = lfa_attack_run(m.p, d.p, split, &o, &s);
          if (status == LFA_ERR_ORACLE_MISMATCH) {
            std::fprintf(stderr, "%s: %s\n", name, lfa_last_error());
            exit_code = kVerification;
          } else {
            check(status, name);
          }
          std::printf("%-44s n=%zu median %+.4f%% q1 %+.4f%% q3 %+.4f%% min %+.4f%% max %+.4f%% "
                      "%.3f ms/sample\n",
                      name, s.samples, s.median_mpe, s.q1_mpe, s.q3_mpe, s.min_mpe, s.max_mpe,
                      s.mean_ms);
          if (s.failures > 0) {
            std::fprintf(stderr, "%s: %zu failed sample(s); first: %s\n", name, s.failures,
                         s.first_failure);
            if (static_cast<double>(s.failures) >= 0.01 * static_cast<double>(s.samples))
              exit_code = kVerification;
          }
          o.results_csv = nullptr;
          cells.push_back(o);
          sums.push_back(s);
        }
      }
      char summary_name[160];
      check(lfa_attack_summary_file_name(&cells.front(), summary_name, sizeof summary_name),
            "attack spec");
      const std::string summary_path = (fs::path(out) / summary_name).string();
      check(lfa_attack_write_summary(summary_path.c_str(), cells.data(), sums.data(), cells.size()),
            "write summary");
    }
  }
  return exit_code;
}

// ---- report ----

int run_report(const std::string& results, const std::string& out_arg) {
  const std::string dir = results.empty() ? default_out() : results;
  const std::string out = out_arg.empty() ? (fs::path(dir) / "report").string() : out_arg;
  std::size_t files = 0;
  check(lfa_report(dir.c_str(), out.c_str(), &files), "report");
  std::printf("%zu report file(s) written to %s\n", files, out.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal attacks and adversarial training for ReLU load forecasters"};
  app.require_subcommand(0, 1);
  app.set_version_flag("--version",
                       std::string("lfa ") + lfa_version() + " (dataset format " +
                           std::to_string(lfa_dataset_format_version()) + ", model format " +
                           std::to_string(lfa_model_format_version()) + ")");

  PrepareArgs pa;
  auto* prepare = app.add_subcommand("prepare", "Clean, split and scale a dataset");
  prepare->add_option("--synthetic", pa.synthetic, "Generate N synthetic rows");
  prepare->add_option("--csv", pa.csv, "Raw CSV file");
  prepare->add_option("--schema", pa.schema, "JSON column mapping for --csv");
  prepare->add_option("--seed", pa.seed, "Split and generator seed");
  prepare->add_option("--ratio", pa.ratio, "Training fraction")->check(CLI::Range(0.0, 1.0));
  prepare->add_option("--out", pa.out, "Output directory (default $LFA_OUTPUT_DIR or lfa_out)");
  prepare->add_option("--config", pa.config, "JSON config file");

  TrainArgs ta;
  auto add_train_opts = [&ta](CLI::App* cmd) {
    cmd->add_option("--data", ta.data, "Prepared dataset directory");
    cmd->add_option("--out", ta.out, "Output directory (default $LFA_OUTPUT_DIR or lfa_out)");
    cmd->add_option("--name", ta.name, "Model name used for output files");
    cmd->add_option("--config", ta.config, "JSON config file");
    cmd->add_option("--dims", ta.dims, "Layer widths, e.g. 12,40,20,10,1")->delimiter(',');
    cmd->add_option("--epochs", ta.epochs);
    cmd->add_option("--batch-size", ta.batch_size);
    cmd->add_option("--lr", ta.lr, "Initial learning rate");
    cmd->add_option("--anneal-epochs", ta.anneal_epochs, "Cosine horizon (0: epochs)");
    cmd->add_option("--seed", ta.seed);
  };
  auto* train = app.add_subcommand("train", "Train a forecaster on clean data");
  add_train_opts(train);
  auto* advtrain = app.add_subcommand("advtrain", "Adversarially train against availability attacks");
  add_train_opts(advtrain);
  advtrain->add_option("--bmax", ta.bmax, "Weight of the max-attack loss");
  advtrain->add_option("--bmin", ta.bmin, "Weight of the min-attack loss");
  advtrain->add_option("--budget", ta.budget, "Inner attack budget");
  advtrain->add_option("--impute", ta.impute, "zero|mean");
  advtrain->add_option("--inner-solver", ta.inner_solver, "bruteforce|milp");
  advtrain->add_option("--inner-objective", ta.inner_objective, "squared_error|forecast");
  advtrain->add_option("--workers", ta.workers, "Inner-solve threads (0: all cores)");

  AttackArgs aa;
  auto* attack = app.add_subcommand("attack", "Run attack grids against a trained model");
  attack->add_option("--model", aa.model, "Model file");
  attack->add_option("--data", aa.data, "Prepared dataset directory");
  attack->add_option("--out", aa.out, "Output directory (default $LFA_OUTPUT_DIR or lfa_out)");
  attack->add_option("--config", aa.config, "JSON config file");
  attack->add_option("--kind", aa.kind, "availability|integrity");
  attack->add_option("--mode", aa.modes, "max|min (repeatable or comma-separated)")->delimiter(',');
  attack->add_option("--impute", aa.imputes, "zero|mean (repeatable or comma-separated)")
      ->delimiter(',');
  attack->add_option("--beta", aa.beta, "Budgets, e.g. 1..6 or 0,3,6");
  attack->add_option("--eps", aa.eps, "Radii, e.g. 0.05,0.1,0.2");
  attack->add_option("--method", aa.method, "milp|pgd|bruteforce");
  attack->add_option("--split", aa.split, "test|train");
  attack->add_option("--samples", aa.samples, "Use the first N samples (0: all)");
  attack->add_option("--workers", aa.workers, "Worker threads (0: all cores)");
  attack->add_flag("--oracle-check", aa.oracle_check, "Cross-check availability MILP by enumeration");
  attack->add_option("--pgd-steps", aa.pgd_steps);
  attack->add_option("--pgd-step-size", aa.pgd_step_size, "Negative: eps/10");
  attack->add_option("--pgd-restarts", aa.pgd_restarts);
  attack->add_option("--seed", aa.seed, "PGD seed");
  attack->add_option("--node-limit", aa.node_limit, "Branch-and-bound node limit");

  std::string report_results, report_out;
  auto* report = app.add_subcommand("report", "Render box plots, histograms and the MAPE table");
  report->add_option("--results", report_results, "Directory with attack/metrics CSVs");
  report->add_option("--out", report_out, "Report directory (default <results>/report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInput;
  }

  try {
    if (prepare->parsed()) {
      apply_config(*prepare, pa.config);
      return run_prepare(pa);
    }
    if (train->parsed()) {
      apply_config(*train, ta.config);
      return run_train(ta, false);
    }
    if (advtrain->parsed()) {
      apply_config(*advtrain, ta.config);
      return run_train(ta, true);
    }
    if (attack->parsed()) {
      apply_config(*attack, aa.config);
      return run_attack(aa);
    }
    if (report->parsed()) return run_report(report_results, report_out);
    std::cout << app.help();
    return kInput;
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return e.exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInput;
  }
}
