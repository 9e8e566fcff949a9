#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace lfa {

inline constexpr std::size_t kNumFeatures = 12;
inline constexpr std::size_t kNumFlex = 6;
inline constexpr std::size_t kNumTemporal = kNumFeatures - kNumFlex;

// Flexible (attackable) features always occupy the leading columns. Models
// narrower than the standard layout treat every input as flexible up to 6.
inline std::size_t flex_count(std::size_t input_dim) {
  return input_dim < kNumFlex ? input_dim : kNumFlex;
}

struct Timestamp {
  int year = 2000;
  int month = 1;   // 1..12
  int day = 1;     // 1..31
  int hour = 0;    // 0..23
};

struct RawRecord {
  Timestamp time;
  // K1 pressure, K2 cloud cover, K3 humidity, K4 temperature,
  // K5 wind direction, K6 wind speed.
  std::array<double, kNumFlex> weather{};
  double load = 0.0;
};

// Maps logical fields onto CSV header names. Either `timestamp` (an ISO
// "YYYY-MM-DD HH[:MM[:SS]]" column) or the four split date columns are used.
struct CsvSchema {
  std::string timestamp;
  std::string year = "year";
  std::string month = "month";
  std::string day = "day";
  std::string hour = "hour";
  std::array<std::string, kNumFlex> weather{"k1", "k2", "k3", "k4", "k5", "k6"};
  std::string load = "load";

  // Parses a JSON object of overrides; unknown keys are rejected.
  static CsvSchema from_json(const std::string& text);
};

struct ScaleStats {
  Eigen::VectorXd min;  // length kNumFlex
  Eigen::VectorXd max;
};

struct Dataset {
  Eigen::MatrixXd X;  // N x 12, flexible block first
  Eigen::VectorXd Y;
  ScaleStats scale;   // empty until apply_scale

  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
  Dataset subset(const std::vector<std::size_t>& idx) const;
};

enum class ImputeMode { Zero, Mean };

struct ImputationVector {
  ImputeMode mode = ImputeMode::Zero;
  Eigen::VectorXd c;  // length p; fixed entries stored as 0
};

const char* to_string(ImputeMode mode);
ImputeMode parse_impute_mode(const std::string& text);

std::vector<RawRecord> load_csv(const std::filesystem::path& path,
                                const CsvSchema& schema);

std::array<double, kNumTemporal> encode_temporal(const Timestamp& t);

// Indices of loads within 3 sample standard deviations of the mean.
std::vector<std::size_t> outlier_keep_indices(const std::vector<double>& loads);
std::vector<RawRecord> remove_outliers(const std::vector<RawRecord>& records);

Dataset build_dataset(const std::vector<RawRecord>& records);

std::pair<Dataset, Dataset> split(const Dataset& data, double ratio,
                                  std::uint64_t seed);

ScaleStats fit_scale(const Dataset& train);
Dataset apply_scale(const Dataset& data, const ScaleStats& stats);

ImputationVector make_imputation(const Dataset& train, ImputeMode mode);

// Smooth known target used by the synthetic generator; exposed for tests.
double synth_target(const Eigen::Ref<const Eigen::VectorXd>& x);
Dataset synth_generate(std::size_t n, std::uint64_t seed,
                       double noise = 0.01);

struct DatasetManifest {
  std::string source;  // csv path or "synthetic"
  std::uint64_t seed = 0;
  double ratio = 0.8;
  std::size_t raw_rows = 0;
  std::size_t outliers_removed = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  ScaleStats scale;
  ImputationVector zero;
  ImputationVector mean;
};

struct PreparedData {
  DatasetManifest manifest;
  Dataset train;
  Dataset test;

  const ImputationVector& imputation(ImputeMode mode) const {
    return mode == ImputeMode::Zero ? manifest.zero : manifest.mean;
  }
};

// load -> clean -> encode -> split -> scale -> imputation.
PreparedData prepare_from_records(const std::vector<RawRecord>& records,
                                  const std::string& source, double ratio,
                                  std::uint64_t seed);
PreparedData prepare_synthetic(std::size_t n, std::uint64_t seed, double ratio);

inline constexpr int kDatasetFormatVersion = 1;

std::string manifest_to_text(const DatasetManifest& manifest);
DatasetManifest manifest_from_text(const std::string& text);
std::uint64_t fnv1a64(const std::string& bytes);

// Writes manifest.json and dataset.bin into `dir`.
void save_prepared(const PreparedData& data, const std::filesystem::path& dir);
PreparedData load_prepared(const std::filesystem::path& dir);
std::uint64_t manifest_hash(const DatasetManifest& manifest);

}  // namespace lfa
