#pragma once

#include "metrics.hpp"
#include "results_io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace lfa {

struct LabeledBox {
  std::string label;
  BoxStats stats;
};

// Box plot with full-range whiskers. The y axis is linear; the <g id="axis">
// element carries data-value-min/max and data-px-bottom/top so rendered
// positions can be mapped back to values.
std::string box_plot_svg(const std::string& title, const std::string& x_label,
                         const std::vector<LabeledBox>& boxes);

struct MissingHistogram {
  int budget = 0;
  std::vector<std::size_t> counts;  // index = missing count, 0..6
};

std::string missing_histogram_svg(const std::string& title,
                                  const std::vector<MissingHistogram>& groups);

// Clean/adversarial MAPE of one trained model, written next to the model by
// the training commands.
struct MetricsRow {
  std::string model;
  std::string training;  // "clean" or "adversarial"
  double train_mape = 0.0;
  double test_mape = 0.0;
};

void write_metrics_csv(const std::filesystem::path& path, const MetricsRow& row);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);
std::string mape_table(const std::vector<MetricsRow>& rows);

struct ReportOutput {
  std::vector<std::filesystem::path> files;
  std::string table;  // empty when no metrics files were found
};

// Scans `results_dir` for attack_*.csv and metrics_*.csv and writes one box
// plot per grid, one missing-count histogram per availability grid, and
// mape_table.txt into `out_dir`.
ReportOutput make_report(const std::filesystem::path& results_dir,
                         const std::filesystem::path& out_dir);

}  // namespace lfa
