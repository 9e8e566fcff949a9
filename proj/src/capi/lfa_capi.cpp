#include "lfa/lfa.h"

#include "core/advtrain.hpp"
#include "core/attacks.hpp"
#include "core/dataset.hpp"
#include "core/error.hpp"
#include "core/metrics.hpp"
#include "core/network.hpp"
#include "core/report.hpp"
#include "core/results_io.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

struct lfa_dataset {
  lfa::PreparedData data;
  std::uint64_t hash = 0;
};

struct lfa_model {
  lfa::Plnn model;
  std::uint64_t manifest_hash = 0;
};

namespace {

thread_local std::string g_error;
thread_local std::size_t g_error_row = 0;
thread_local std::string g_error_column;

lfa_status to_status(lfa::ErrorCode code) {
  using lfa::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return LFA_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return LFA_ERR_IO;
    case ErrorCode::MissingColumn: return LFA_ERR_MISSING_COLUMN;
    case ErrorCode::UnparseableField: return LFA_ERR_UNPARSEABLE_FIELD;
    case ErrorCode::EmptyFile: return LFA_ERR_EMPTY_FILE;
    case ErrorCode::AllRemoved: return LFA_ERR_ALL_REMOVED;
    case ErrorCode::DegenerateColumn: return LFA_ERR_DEGENERATE_COLUMN;
    case ErrorCode::DimensionMismatch: return LFA_ERR_DIMENSION_MISMATCH;
    case ErrorCode::NonfiniteLoss: return LFA_ERR_NONFINITE_LOSS;
    case ErrorCode::SchemaMismatch: return LFA_ERR_SCHEMA_MISMATCH;
    case ErrorCode::CorruptFile: return LFA_ERR_CORRUPT_FILE;
    case ErrorCode::InvalidBounds: return LFA_ERR_INVALID_BOUNDS;
    case ErrorCode::BadBudget: return LFA_ERR_BAD_BUDGET;
    case ErrorCode::CycleLimit: return LFA_ERR_CYCLE_LIMIT;
    case ErrorCode::VerificationFailed: return LFA_ERR_VERIFICATION_FAILED;
    case ErrorCode::ZeroDenominator: return LFA_ERR_ZERO_DENOMINATOR;
  }
  return LFA_ERR_INTERNAL;
}

lfa_status fail(lfa_status status, const std::string& message) {
  g_error = message;
  g_error_row = 0;
  g_error_column.clear();
  return status;
}

template <class F>
lfa_status guarded(F&& body) {
  try {
    g_error.clear();
    g_error_row = 0;
    g_error_column.clear();
    return body();
  } catch (const lfa::Error& e) {
    g_error = e.what();
    g_error_row = e.row();
    g_error_column = e.column();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    return fail(LFA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LFA_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LFA_ERR_INTERNAL, "unknown error");
  }
}

#define LFA_REQUIRE(cond, what) \
  if (!(cond)) return fail(LFA_ERR_INVALID_ARGUMENT, what)

lfa::ImputeMode impute_of(lfa_impute m) {
  return m == LFA_IMPUTE_MEAN ? lfa::ImputeMode::Mean : lfa::ImputeMode::Zero;
}

const lfa::Dataset& split_of(const lfa_dataset* d, lfa_split s) {
  return s == LFA_SPLIT_TEST ? d->data.test : d->data.train;
}

lfa::TrainConfig train_config(const lfa_train_options& o) {
  lfa::TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.lr0 = o.lr0;
  cfg.anneal_epochs = o.anneal_epochs;
  cfg.seed = o.seed;
  if (o.on_epoch) {
    auto cb = o.on_epoch;
    void* user = o.user;
    cfg.on_epoch = [cb, user](int epoch, const lfa::Plnn& m) {
      lfa_model snapshot{m, 0};
      cb(epoch, &snapshot, user);
    };
  }
  return cfg;
}

lfa::AttackSpec attack_spec(const lfa_attack_options& o) {
  lfa::AttackSpec s;
  s.kind = o.kind == LFA_INTEGRITY ? lfa::AttackKind::Integrity : lfa::AttackKind::Availability;
  s.mode = o.mode == LFA_MIN ? lfa::Mode::Min : lfa::Mode::Max;
  s.eps = o.eps;
  s.budget = o.budget;
  s.impute = impute_of(o.impute);
  s.pgd.steps = o.pgd_steps;
  s.pgd.step_size = o.pgd_step_size;
  s.pgd.restarts = o.pgd_restarts;
  s.pgd.seed = o.pgd_seed;
  s.node_limit = o.node_limit;
  s.validate();
  return s;
}

lfa::AttackMethod method_of(lfa_method m) {
  switch (m) {
    case LFA_METHOD_PGD: return lfa::AttackMethod::Pgd;
    case LFA_METHOD_BRUTEFORCE: return lfa::AttackMethod::BruteForce;
    default: return lfa::AttackMethod::Milp;
  }
}

void write_metrics(const lfa_train_options& o, const lfa::Plnn& m, const lfa_dataset* data,
                   const char* training) {
  if (!o.metrics_csv) return;
  lfa::MetricsRow row;
  row.model = o.label ? o.label : "model";
  row.training = training;
  row.train_mape = lfa::mape(lfa::predict_all(m, data->data.train.X), data->data.train.Y);
  row.test_mape = lfa::mape(lfa::predict_all(m, data->data.test.X), data->data.test.Y);
  lfa::write_metrics_csv(o.metrics_csv, row);
}

lfa_status copy_name(const std::string& name, char* buf, std::size_t size) {
  LFA_REQUIRE(buf && size > name.size(), "buffer too small for file name");
  std::memcpy(buf, name.c_str(), name.size() + 1);
  return LFA_OK;
}

}  // namespace

extern "C" {

const char* lfa_version(void) { return "1.0.0"; }
int lfa_dataset_format_version(void) { return lfa::kDatasetFormatVersion; }
int lfa_model_format_version(void) { return lfa::kModelFormatVersion; }
const char* lfa_last_error(void) { return g_error.c_str(); }
size_t lfa_last_error_row(void) { return g_error_row; }

const char* lfa_last_error_column(void) { return g_error_column.c_str(); }

const char* lfa_status_name(lfa_status status) {
  switch (status) {
    case LFA_OK: return "ok";
    case LFA_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case LFA_ERR_IO: return "io";
    case LFA_ERR_MISSING_COLUMN: return "missing_column";
    case LFA_ERR_UNPARSEABLE_FIELD: return "unparseable_field";
    case LFA_ERR_EMPTY_FILE: return "empty_file";
    case LFA_ERR_ALL_REMOVED: return "all_removed";
    case LFA_ERR_DEGENERATE_COLUMN: return "degenerate_column";
    case LFA_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case LFA_ERR_NONFINITE_LOSS: return "nonfinite_loss";
    case LFA_ERR_SCHEMA_MISMATCH: return "schema_mismatch";
    case LFA_ERR_CORRUPT_FILE: return "corrupt_file";
    case LFA_ERR_INVALID_BOUNDS: return "invalid_bounds";
    case LFA_ERR_BAD_BUDGET: return "bad_budget";
    case LFA_ERR_CYCLE_LIMIT: return "cycle_limit";
    case LFA_ERR_VERIFICATION_FAILED: return "verification_failed";
    case LFA_ERR_ZERO_DENOMINATOR: return "zero_denominator";
    case LFA_ERR_ORACLE_MISMATCH: return "oracle_mismatch";
    case LFA_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

lfa_status lfa_dataset_prepare_csv(const char* csv_path, const char* schema_json,
                                   double train_ratio, uint64_t seed, lfa_dataset** out) {
  LFA_REQUIRE(csv_path && out, "null argument");
  return guarded([&] {
    const lfa::CsvSchema schema =
        schema_json ? lfa::CsvSchema::from_json(schema_json) : lfa::CsvSchema{};
    auto records = lfa::load_csv(csv_path, schema);
    auto* d = new lfa_dataset;
    try {
      d->data = lfa::prepare_from_records(records, csv_path, train_ratio, seed);
      d->hash = lfa::manifest_hash(d->data.manifest);
    } catch (...) {
      delete d;
      throw;
    }
    *out = d;
    return LFA_OK;
  });
}

lfa_status lfa_dataset_prepare_synthetic(size_t rows, uint64_t seed, double train_ratio,
                                         lfa_dataset** out) {
  LFA_REQUIRE(out, "null argument");
  return guarded([&] {
    auto* d = new lfa_dataset;
    try {
      d->data = lfa::prepare_synthetic(rows, seed, train_ratio);
      d->hash = lfa::manifest_hash(d->data.manifest);
    } catch (...) {
      delete d;
      throw;
    }
    *out = d;
    return LFA_OK;
  });
}

lfa_status lfa_dataset_save(const lfa_dataset* data, const char* dir) {
  LFA_REQUIRE(data && dir, "null argument");
  return guarded([&] {
    lfa::save_prepared(data->data, dir);
    return LFA_OK;
  });
}

lfa_status lfa_dataset_load(const char* dir, lfa_dataset** out) {
  LFA_REQUIRE(dir && out, "null argument");
  return guarded([&] {
    auto* d = new lfa_dataset;
    try {
      d->data = lfa::load_prepared(dir);
      d->hash = lfa::manifest_hash(d->data.manifest);
    } catch (...) {
      delete d;
      throw;
    }
    *out = d;
    return LFA_OK;
  });
}

void lfa_dataset_free(lfa_dataset* data) { delete data; }

lfa_status lfa_dataset_info_get(const lfa_dataset* data, lfa_dataset_info* out) {
  LFA_REQUIRE(data && out, "null argument");
  const auto& m = data->data.manifest;
  out->raw_rows = m.raw_rows;
  out->outliers_removed = m.outliers_removed;
  out->train_rows = data->data.train.rows();
  out->test_rows = data->data.test.rows();
  out->features = static_cast<size_t>(data->data.train.X.cols());
  out->manifest_hash = data->hash;
  return LFA_OK;
}

lfa_status lfa_dataset_get_sample(const lfa_dataset* data, lfa_split split, size_t index,
                                  double* x, double* y) {
  LFA_REQUIRE(data && x, "null argument");
  const lfa::Dataset& d = split_of(data, split);
  LFA_REQUIRE(index < d.rows(), "sample index out of range");
  const auto r = static_cast<Eigen::Index>(index);
  for (Eigen::Index j = 0; j < d.X.cols(); ++j) x[j] = d.X(r, j);
  if (y) *y = d.Y[r];
  return LFA_OK;
}

lfa_status lfa_dataset_imputation(const lfa_dataset* data, lfa_impute mode, double* c) {
  LFA_REQUIRE(data && c, "null argument");
  const auto& v = data->data.imputation(impute_of(mode)).c;
  for (Eigen::Index j = 0; j < v.size(); ++j) c[j] = v[j];
  return LFA_OK;
}

lfa_status lfa_model_create(const size_t* dims, size_t n_dims, uint64_t seed, lfa_model** out) {
  LFA_REQUIRE(dims && out, "null argument");
  return guarded([&] {
    std::vector<std::size_t> d(dims, dims + n_dims);
    *out = new lfa_model{lfa::Plnn::init_uniform(d, seed), 0};
    return LFA_OK;
  });
}

lfa_status lfa_model_load(const char* path, lfa_model** out) {
  LFA_REQUIRE(path && out, "null argument");
  return guarded([&] {
    std::uint64_t hash = 0;
    lfa::Plnn m = lfa::load_model(path, &hash);
    *out = new lfa_model{std::move(m), hash};
    return LFA_OK;
  });
}

lfa_status lfa_model_save(const lfa_model* model, const char* path, uint64_t manifest_hash) {
  LFA_REQUIRE(model && path, "null argument");
  return guarded([&] {
    lfa::save_model(model->model, path, manifest_hash);
    return LFA_OK;
  });
}

void lfa_model_free(lfa_model* model) { delete model; }

lfa_status lfa_model_dims(const lfa_model* model, size_t* dims, size_t capacity, size_t* n_dims) {
  LFA_REQUIRE(model && n_dims, "null argument");
  const auto d = model->model.dims();
  *n_dims = d.size();
  if (dims) {
    LFA_REQUIRE(capacity >= d.size(), "dims buffer too small");
    for (std::size_t i = 0; i < d.size(); ++i) dims[i] = d[i];
  }
  return LFA_OK;
}

lfa_status lfa_model_manifest_hash(const lfa_model* model, uint64_t* out) {
  LFA_REQUIRE(model && out, "null argument");
  *out = model->manifest_hash;
  return LFA_OK;
}

lfa_status lfa_model_predict(const lfa_model* model, const double* x, size_t n, double* y) {
  LFA_REQUIRE(model && x && y, "null argument");
  return guarded([&] {
    *y = lfa::predict(model->model, Eigen::Map<const Eigen::VectorXd>(x, static_cast<Eigen::Index>(n)));
    return LFA_OK;
  });
}

lfa_status lfa_model_evaluate_mape(const lfa_model* model, const lfa_dataset* data,
                                   lfa_split split, double* out) {
  LFA_REQUIRE(model && data && out, "null argument");
  return guarded([&] {
    const lfa::Dataset& d = split_of(data, split);
    *out = lfa::mape(lfa::predict_all(model->model, d.X), d.Y);
    return LFA_OK;
  });
}

void lfa_train_options_init(lfa_train_options* o) {
  if (!o) return;
  const lfa::TrainConfig d;
  *o = lfa_train_options{};
  o->epochs = d.epochs;
  o->batch_size = d.batch_size;
  o->lr0 = d.lr0;
  o->anneal_epochs = 0;
  o->seed = 0;
}

lfa_status lfa_model_train(lfa_model* model, const lfa_dataset* data,
                           const lfa_train_options* options, int* best_epoch) {
  LFA_REQUIRE(model && data && options, "null argument");
  return guarded([&] {
    const lfa::TrainResult r =
        lfa::train(model->model, data->data.train, data->data.test, train_config(*options));
    if (options->history_csv) lfa::write_train_history(options->history_csv, r.history);
    model->model = r.model;
    model->manifest_hash = data->hash;
    write_metrics(*options, model->model, data, "clean");
    if (best_epoch) *best_epoch = r.best_epoch;
    return LFA_OK;
  });
}

void lfa_advtrain_options_init(lfa_advtrain_options* o) {
  if (!o) return;
  const lfa::AdvTrainConfig d;
  *o = lfa_advtrain_options{};
  lfa_train_options_init(&o->base);
  o->budget = d.budget;
  o->impute = d.impute == lfa::ImputeMode::Mean ? LFA_IMPUTE_MEAN : LFA_IMPUTE_ZERO;
  o->max_weight = d.max_weight;
  o->min_weight = d.min_weight;
  o->inner_solver = LFA_INNER_BRUTEFORCE;
  o->inner_objective = LFA_INNER_SQUARED_ERROR;
  o->workers = 0;
}

lfa_status lfa_model_advtrain(lfa_model* model, const lfa_dataset* data,
                              const lfa_advtrain_options* options, int* best_epoch) {
  LFA_REQUIRE(model && data && options, "null argument");
  return guarded([&] {
    lfa::AdvTrainConfig cfg;
    cfg.base = train_config(options->base);
    cfg.budget = options->budget;
    cfg.impute = impute_of(options->impute);
    cfg.max_weight = options->max_weight;
    cfg.min_weight = options->min_weight;
    cfg.inner_solver = options->inner_solver == LFA_INNER_MILP ? lfa::InnerSolver::Milp
                                                               : lfa::InnerSolver::BruteForce;
    cfg.inner_objective = options->inner_objective == LFA_INNER_FORECAST
                              ? lfa::InnerObjective::Forecast
                              : lfa::InnerObjective::SquaredError;
    cfg.workers = options->workers;
    const lfa::AdvTrainResult r = lfa::advtrain(model->model, data->data.train, data->data.test,
                                                data->data.imputation(cfg.impute), cfg);
    if (options->base.history_csv) lfa::write_advtrain_history(options->base.history_csv, r.history);
    model->model = r.model;
    model->manifest_hash = data->hash;
    write_metrics(options->base, model->model, data, "adversarial");
    if (best_epoch) *best_epoch = r.best_epoch;
    return LFA_OK;
  });
}

void lfa_attack_options_init(lfa_attack_options* o) {
  if (!o) return;
  const lfa::AttackSpec d;
  *o = lfa_attack_options{};
  o->kind = LFA_AVAILABILITY;
  o->mode = LFA_MAX;
  o->eps = 0.0;
  o->budget = 0;
  o->impute = LFA_IMPUTE_ZERO;
  o->method = LFA_METHOD_MILP;
  o->pgd_steps = d.pgd.steps;
  o->pgd_step_size = d.pgd.step_size;
  o->pgd_restarts = d.pgd.restarts;
  o->pgd_seed = d.pgd.seed;
  o->node_limit = d.node_limit;
  o->workers = 0;
  o->oracle_check = 0;
  o->max_samples = 0;
  o->results_csv = nullptr;
}

lfa_status lfa_attack_file_name(const lfa_attack_options* options, char* buf, size_t size) {
  LFA_REQUIRE(options, "null argument");
  return guarded([&] { return copy_name(lfa::attack_file_name(attack_spec(*options)), buf, size); });
}

lfa_status lfa_attack_summary_file_name(const lfa_attack_options* options, char* buf,
                                        size_t size) {
  LFA_REQUIRE(options, "null argument");
  return guarded(
      [&] { return copy_name(lfa::summary_file_name(attack_spec(*options)), buf, size); });
}

lfa_status lfa_attack_run(const lfa_model* model, const lfa_dataset* data, lfa_split split,
                          const lfa_attack_options* options, lfa_attack_summary* out) {
  LFA_REQUIRE(model && data && options && out, "null argument");
  return guarded([&] {
    if (model->manifest_hash != 0 && model->manifest_hash != data->hash)
      return fail(LFA_ERR_SCHEMA_MISMATCH, "model was trained on a different dataset manifest");
    const lfa::AttackSpec spec = attack_spec(*options);
    const lfa::Dataset& d = split_of(data, split);
    Eigen::MatrixXd X = d.X;
    if (options->max_samples > 0 && options->max_samples < d.rows())
      X = d.X.topRows(static_cast<Eigen::Index>(options->max_samples));
    lfa::BatchOptions bo;
    bo.workers = options->workers;
    bo.method = method_of(options->method);
    bo.oracle_check = options->oracle_check != 0;
    const lfa::BatchResult r =
        lfa::batch_attack(model->model, X, spec, data->data.imputation(spec.impute), bo);
    if (options->results_csv) lfa::write_attack_csv(options->results_csv, lfa::to_table(spec, r));
    *out = lfa_attack_summary{};
    const auto& s = r.summary;
    out->samples = s.samples;
    out->failures = s.failures.size();
    out->oracle_mismatches = s.oracle_mismatches.size();
    out->median_mpe = s.mpe.median;
    out->q1_mpe = s.mpe.q1;
    out->q3_mpe = s.mpe.q3;
    out->min_mpe = s.mpe.min;
    out->max_mpe = s.mpe.max;
    out->mean_ms = s.mean_ms;
    out->elapsed_ms = s.elapsed_ms;
    if (!s.failures.empty()) {
      const std::string msg =
          "sample " + std::to_string(s.failures.front().index) + ": " + s.failures.front().message;
      std::strncpy(out->first_failure, msg.c_str(), sizeof out->first_failure - 1);
    }
    if (!s.oracle_mismatches.empty())
      return fail(LFA_ERR_ORACLE_MISMATCH,
                  std::to_string(s.oracle_mismatches.size()) +
                      " sample(s) disagree with the enumeration oracle, first at index " +
                      std::to_string(s.oracle_mismatches.front()));
    return LFA_OK;
  });
}

lfa_status lfa_attack_sample(const lfa_model* model, const double* x, size_t n, const double* c,
                             const lfa_attack_options* options, lfa_attack_result* out) {
  LFA_REQUIRE(model && x && options && out, "null argument");
  LFA_REQUIRE(options->kind == LFA_INTEGRITY || c, "availability attacks need an imputation vector");
  return guarded([&] {
    const lfa::AttackSpec spec = attack_spec(*options);
    const auto len = static_cast<Eigen::Index>(n);
    const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x, len);
    lfa::ImputationVector iv;
    iv.mode = spec.impute;
    iv.c = c ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(c, len))
             : Eigen::VectorXd::Zero(len);
    const lfa::AttackResult r =
        lfa::run_attack(model->model, xv, spec, iv, method_of(options->method));
    *out = lfa_attack_result{};
    out->clean_forecast = r.clean_forecast;
    out->adversarial_forecast = r.adversarial_forecast;
    out->mpe = r.mpe;
    out->linf = r.linf;
    out->missing_count = r.missing_count;
    for (std::size_t j = 0; j < r.mask.size() && j < LFA_NUM_FLEX; ++j) out->mask[j] = r.mask[j];
    out->nodes = r.stats.nodes;
    out->ms = r.stats.ms;
    return LFA_OK;
  });
}

lfa_status lfa_attack_write_summary(const char* path, const lfa_attack_options* options,
                                    const lfa_attack_summary* summaries, size_t count) {
  LFA_REQUIRE(path && (count == 0 || (options && summaries)), "null argument");
  return guarded([&] {
    std::vector<lfa::SummaryRow> rows;
    for (std::size_t i = 0; i < count; ++i) {
      const lfa::AttackSpec spec = attack_spec(options[i]);
      const lfa_attack_summary& s = summaries[i];
      lfa::SummaryRow row;
      row.kind = spec.kind;
      row.mode = spec.mode;
      row.impute = spec.impute;
      row.budget = spec.budget;
      row.eps = spec.eps;
      row.samples = s.samples;
      row.failures = s.failures;
      row.mpe = {s.median_mpe, s.q1_mpe, s.q3_mpe, s.min_mpe, s.max_mpe, s.samples - s.failures};
      row.mean_ms = s.mean_ms;
      rows.push_back(row);
    }
    lfa::write_summary_csv(path, rows);
    return LFA_OK;
  });
}

lfa_status lfa_report(const char* results_dir, const char* out_dir, size_t* files_written) {
  LFA_REQUIRE(results_dir && out_dir, "null argument");
  return guarded([&] {
    const lfa::ReportOutput r = lfa::make_report(results_dir, out_dir);
    if (files_written) *files_written = r.files.size();
    return LFA_OK;
  });
}

}  // extern "C"
