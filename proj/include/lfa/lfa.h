/* Load-forecast attack toolkit: C interface. */
#ifndef LFA_LFA_H
#define LFA_LFA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(LFA_BUILDING_LIBRARY)
#define LFA_API __attribute__((visibility("default")))
#else
#define LFA_API
#endif

#define LFA_NUM_FEATURES 12
#define LFA_NUM_FLEX 6

typedef enum lfa_status {
  LFA_OK = 0,
  LFA_ERR_INVALID_ARGUMENT = 1,
  LFA_ERR_IO = 2,
  LFA_ERR_MISSING_COLUMN = 3,
  LFA_ERR_UNPARSEABLE_FIELD = 4,
  LFA_ERR_EMPTY_FILE = 5,
  LFA_ERR_ALL_REMOVED = 6,
  LFA_ERR_DEGENERATE_COLUMN = 7,
  LFA_ERR_DIMENSION_MISMATCH = 8,
  LFA_ERR_NONFINITE_LOSS = 9,
  LFA_ERR_SCHEMA_MISMATCH = 10,
  LFA_ERR_CORRUPT_FILE = 11,
  LFA_ERR_INVALID_BOUNDS = 12,
  LFA_ERR_BAD_BUDGET = 13,
  LFA_ERR_CYCLE_LIMIT = 14,
  LFA_ERR_VERIFICATION_FAILED = 15,
  LFA_ERR_ZERO_DENOMINATOR = 16,
  LFA_ERR_ORACLE_MISMATCH = 17,
  LFA_ERR_INTERNAL = 99
} lfa_status;

LFA_API const char* lfa_version(void);
LFA_API int lfa_dataset_format_version(void);
LFA_API int lfa_model_format_version(void);
LFA_API const char* lfa_status_name(lfa_status status);
/* Message of the most recent failure on the calling thread; "" if none. */
LFA_API const char* lfa_last_error(void);
/* Location of the last ingestion failure: 1-based data row (0 if unknown)
   and column name ("" if unknown). */
LFA_API size_t lfa_last_error_row(void);
LFA_API const char* lfa_last_error_column(void);

typedef struct lfa_dataset lfa_dataset;
typedef struct lfa_model lfa_model;

typedef enum lfa_split { LFA_SPLIT_TRAIN = 0, LFA_SPLIT_TEST = 1 } lfa_split;
typedef enum lfa_impute { LFA_IMPUTE_ZERO = 0, LFA_IMPUTE_MEAN = 1 } lfa_impute;

/* ---- dataset ---- */

/* schema_json may be NULL for the default column names. */
LFA_API lfa_status lfa_dataset_prepare_csv(const char* csv_path, const char* schema_json,
                                           double train_ratio, uint64_t seed, lfa_dataset** out);
LFA_API lfa_status lfa_dataset_prepare_synthetic(size_t rows, uint64_t seed, double train_ratio,
                                                 lfa_dataset** out);
/* Writes manifest.json and dataset.bin into dir (created if missing). */
LFA_API lfa_status lfa_dataset_save(const lfa_dataset* data, const char* dir);
LFA_API lfa_status lfa_dataset_load(const char* dir, lfa_dataset** out);
LFA_API void lfa_dataset_free(lfa_dataset* data);

typedef struct lfa_dataset_info {
  size_t raw_rows;
  size_t outliers_removed;
  size_t train_rows;
  size_t test_rows;
  size_t features;
  uint64_t manifest_hash;
} lfa_dataset_info;

LFA_API lfa_status lfa_dataset_info_get(const lfa_dataset* data, lfa_dataset_info* out);
/* x receives LFA_NUM_FEATURES values; y may be NULL. */
LFA_API lfa_status lfa_dataset_get_sample(const lfa_dataset* data, lfa_split split, size_t index,
                                          double* x, double* y);
/* c receives LFA_NUM_FEATURES values (fixed entries are 0). */
LFA_API lfa_status lfa_dataset_imputation(const lfa_dataset* data, lfa_impute mode, double* c);

/* ---- model ---- */

LFA_API lfa_status lfa_model_create(const size_t* dims, size_t n_dims, uint64_t seed,
                                    lfa_model** out);
LFA_API lfa_status lfa_model_load(const char* path, lfa_model** out);
/* Stores the hash of the dataset manifest the model was trained on. */
LFA_API lfa_status lfa_model_save(const lfa_model* model, const char* path,
                                  uint64_t manifest_hash);
LFA_API void lfa_model_free(lfa_model* model);
LFA_API lfa_status lfa_model_dims(const lfa_model* model, size_t* dims, size_t capacity,
                                  size_t* n_dims);
LFA_API lfa_status lfa_model_manifest_hash(const lfa_model* model, uint64_t* out);
LFA_API lfa_status lfa_model_predict(const lfa_model* model, const double* x, size_t n,
                                     double* y);
LFA_API lfa_status lfa_model_evaluate_mape(const lfa_model* model, const lfa_dataset* data,
                                           lfa_split split, double* out);

/* ---- training ---- */

/* Called after each epoch's parameter updates. The snapshot is only valid
   for the duration of the call. */
typedef void (*lfa_epoch_callback)(int epoch, const lfa_model* snapshot, void* user);

typedef struct lfa_train_options {
  int epochs;
  int batch_size;
  double lr0;
  int anneal_epochs; /* 0: same as epochs */
  uint64_t seed;
  const char* history_csv; /* optional */
  const char* metrics_csv; /* optional: train/test MAPE of the selected model */
  const char* label;       /* model name used in metrics_csv */
  lfa_epoch_callback on_epoch;
  void* user;
} lfa_train_options;

LFA_API void lfa_train_options_init(lfa_train_options* options);
/* Replaces *model's parameters with the selected snapshot. */
LFA_API lfa_status lfa_model_train(lfa_model* model, const lfa_dataset* data,
                                   const lfa_train_options* options, int* best_epoch);

typedef enum lfa_inner_solver { LFA_INNER_BRUTEFORCE = 0, LFA_INNER_MILP = 1 } lfa_inner_solver;
typedef enum lfa_inner_objective {
  LFA_INNER_SQUARED_ERROR = 0,
  LFA_INNER_FORECAST = 1
} lfa_inner_objective;

typedef struct lfa_advtrain_options {
  lfa_train_options base;
  int budget;
  lfa_impute impute;
  double max_weight;
  double min_weight;
  lfa_inner_solver inner_solver;
  lfa_inner_objective inner_objective;
  int workers; /* 0: hardware concurrency */
} lfa_advtrain_options;

LFA_API void lfa_advtrain_options_init(lfa_advtrain_options* options);
LFA_API lfa_status lfa_model_advtrain(lfa_model* model, const lfa_dataset* data,
                                      const lfa_advtrain_options* options, int* best_epoch);

/* ---- attacks ---- */

typedef enum lfa_attack_kind { LFA_INTEGRITY = 0, LFA_AVAILABILITY = 1 } lfa_attack_kind;
typedef enum lfa_mode { LFA_MAX = 0, LFA_MIN = 1 } lfa_mode;
typedef enum lfa_method { LFA_METHOD_MILP = 0, LFA_METHOD_PGD = 1, LFA_METHOD_BRUTEFORCE = 2 } lfa_method;

typedef struct lfa_attack_options {
  lfa_attack_kind kind;
  lfa_mode mode;
  double eps;   /* integrity */
  int budget;   /* availability */
  lfa_impute impute;
  lfa_method method;
  int pgd_steps;
  double pgd_step_size; /* negative: eps / 10 */
  int pgd_restarts;
  uint64_t pgd_seed;
  long node_limit;
  int workers; /* 0: hardware concurrency */
  int oracle_check;
  size_t max_samples;      /* 0: whole split */
  const char* results_csv; /* optional per-sample output */
} lfa_attack_options;

typedef struct lfa_attack_summary {
  size_t samples;
  size_t failures;
  size_t oracle_mismatches;
  double median_mpe;
  double q1_mpe;
  double q3_mpe;
  double min_mpe;
  double max_mpe;
  double mean_ms;
  double elapsed_ms;
  char first_failure[256];
} lfa_attack_summary;

typedef struct lfa_attack_result {
  double clean_forecast;
  double adversarial_forecast;
  double mpe;
  double linf;
  int missing_count;
  int mask[LFA_NUM_FLEX];
  long nodes;
  double ms;
} lfa_attack_result;

LFA_API void lfa_attack_options_init(lfa_attack_options* options);
/* Canonical results file name for the grid cell, e.g. attack_integrity_max_e0.1.csv. */
LFA_API lfa_status lfa_attack_file_name(const lfa_attack_options* options, char* buf, size_t size);
LFA_API lfa_status lfa_attack_summary_file_name(const lfa_attack_options* options, char* buf,
                                                size_t size);
/* Runs one grid cell over a split. Returns LFA_ERR_ORACLE_MISMATCH (with
   *out filled) when oracle_check finds a disagreement. */
LFA_API lfa_status lfa_attack_run(const lfa_model* model, const lfa_dataset* data,
                                  lfa_split split, const lfa_attack_options* options,
                                  lfa_attack_summary* out);
/* Single input; c is required for availability attacks. */
LFA_API lfa_status lfa_attack_sample(const lfa_model* model, const double* x, size_t n,
                                     const double* c, const lfa_attack_options* options,
                                     lfa_attack_result* out);
LFA_API lfa_status lfa_attack_write_summary(const char* path, const lfa_attack_options* options,
                                            const lfa_attack_summary* summaries, size_t count);

/* ---- report ---- */

LFA_API lfa_status lfa_report(const char* results_dir, const char* out_dir,
                              size_t* files_written);

#ifdef __cplusplus
}
#endif

#endif
