#pragma once

#include "attacks.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lfa {

// One row of a per-sample attack results file.
struct AttackRow {
  std::size_t sample_index = 0;
  double clean_forecast = 0.0;
  double adv_forecast = 0.0;
  double mpe_percent = 0.0;
  int missing_count = 0;  // availability
  double linf = 0.0;      // integrity
  std::string mask_bits;  // availability, e.g. "110111"
  long nodes = 0;
  double ms = 0.0;
};

struct AttackTable {
  AttackKind kind = AttackKind::Availability;
  std::vector<AttackRow> rows;
};

struct SummaryRow {
  AttackKind kind = AttackKind::Availability;
  Mode mode = Mode::Max;
  ImputeMode impute = ImputeMode::Zero;  // availability
  int budget = 0;                        // availability
  double eps = 0.0;                      // integrity
  std::size_t samples = 0;
  std::size_t failures = 0;
  BoxStats mpe;
  double mean_ms = 0.0;
};

// "attack_availability_min_mean_b3.csv", "attack_integrity_max_e0.1.csv".
std::string attack_file_name(const AttackSpec& spec);
// "summary_availability_min_mean.csv", "summary_integrity_max.csv".
std::string summary_file_name(const AttackSpec& spec);

std::string mask_to_bits(const Mask& mask);

AttackTable to_table(const AttackSpec& spec, const BatchResult& batch);
SummaryRow to_summary(const AttackSpec& spec, const BatchSummary& summary);

void write_attack_csv(const std::filesystem::path& path, const AttackTable& table);
AttackTable read_attack_csv(const std::filesystem::path& path);

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

// Parses the grid cell encoded in an attack results file name.
AttackSpec spec_from_file_name(const std::string& name);

// Splits one CSV line; no quoting is needed for the files written here.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace lfa
