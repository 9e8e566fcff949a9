#include "report.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace lfa {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 690.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 350.0;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

void header(std::ostringstream& svg, const std::string& title) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"16\">" << escape(title) << "</text>\n";
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double to_px(double v) const { return kBottom - (v - lo) / (hi - lo) * (kBottom - kTop); }
};

Axis axis_for(double lo, double hi) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

}  // namespace

std::string box_plot_svg(const std::string& title, const std::string& x_label,
                         const std::vector<LabeledBox>& boxes) {
  if (boxes.empty()) throw Error(ErrorCode::InvalidArgument, "box plot needs at least one box");
  double lo = boxes[0].stats.min, hi = boxes[0].stats.max;
  for (const auto& b : boxes) {
    lo = std::min(lo, b.stats.min);
    hi = std::max(hi, b.stats.max);
  }
  const Axis ax = axis_for(lo, hi);
  std::ostringstream svg;
  header(svg, title);
  svg << "<g id=\"axis\" data-value-min=\"" << num(ax.lo) << "\" data-value-max=\"" << num(ax.hi)
      << "\" data-px-bottom=\"" << num(kBottom) << "\" data-px-top=\"" << num(kTop) << "\">\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kBottom << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight << "\" y2=\""
      << kBottom << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = ax.lo + (ax.hi - ax.lo) * t / 5.0;
    const double y = ax.to_px(v);
    svg << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft << "\" y2=\""
        << num(y) << "\" stroke=\"black\"/>"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << short_num(v)
        << "</text>\n";
  }
  if (ax.lo < 0.0 && ax.hi > 0.0)
    svg << "<line class=\"zero\" x1=\"" << kLeft << "\" y1=\"" << num(ax.to_px(0.0)) << "\" x2=\""
        << kRight << "\" y2=\"" << num(ax.to_px(0.0))
        << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  svg << "<text x=\"20\" y=\"" << (kTop + kBottom) / 2 << "\" transform=\"rotate(-90 20 "
      << (kTop + kBottom) / 2
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">MPE (%)</text>\n"
      << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kBottom + 40
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape(x_label) << "</text>\n</g>\n";

  const double slot = (kRight - kLeft) / static_cast<double>(boxes.size());
  const double half = std::min(30.0, slot * 0.3);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const BoxStats& s = boxes[i].stats;
    const double cx = kLeft + (static_cast<double>(i) + 0.5) * slot;
    const double y_q1 = ax.to_px(s.q1), y_q3 = ax.to_px(s.q3);
    svg << "<g class=\"box\" data-label=\"" << escape(boxes[i].label) << "\" data-n=\"" << s.n
        << "\">\n"
        << "<line class=\"whisker\" x1=\"" << num(cx) << "\" y1=\"" << num(y_q3) << "\" x2=\""
        << num(cx) << "\" y2=\"" << num(ax.to_px(s.max)) << "\" stroke=\"black\"/>\n"
        << "<line class=\"whisker\" x1=\"" << num(cx) << "\" y1=\"" << num(y_q1) << "\" x2=\""
        << num(cx) << "\" y2=\"" << num(ax.to_px(s.min)) << "\" stroke=\"black\"/>\n"
        << "<line class=\"cap-max\" x1=\"" << num(cx - half / 2) << "\" y1=\""
        << num(ax.to_px(s.max)) << "\" x2=\"" << num(cx + half / 2) << "\" y2=\""
        << num(ax.to_px(s.max)) << "\" stroke=\"black\"/>\n"
        << "<line class=\"cap-min\" x1=\"" << num(cx - half / 2) << "\" y1=\""
        << num(ax.to_px(s.min)) << "\" x2=\"" << num(cx + half / 2) << "\" y2=\""
        << num(ax.to_px(s.min)) << "\" stroke=\"black\"/>\n"
        << "<rect class=\"iqr\" x=\"" << num(cx - half) << "\" y=\"" << num(y_q3)
        << "\" width=\"" << num(2 * half) << "\" height=\"" << num(y_q1 - y_q3)
        << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n"
        << "<line class=\"median\" x1=\"" << num(cx - half) << "\" y1=\"" << num(ax.to_px(s.median))
        << "\" x2=\"" << num(cx + half) << "\" y2=\"" << num(ax.to_px(s.median))
        << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << num(cx) << "\" y=\"" << kBottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << escape(boxes[i].label) << "</text>\n</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string missing_histogram_svg(const std::string& title,
                                  const std::vector<MissingHistogram>& groups) {
  if (groups.empty()) throw Error(ErrorCode::InvalidArgument, "histogram needs at least one group");
  std::size_t peak = 1;
  std::size_t bins = 0;
  for (const auto& g : groups) {
    bins = std::max(bins, g.counts.size());
    for (auto c : g.counts) peak = std::max(peak, c);
  }
  std::ostringstream svg;
  header(svg, title);
  svg << "<g id=\"axis\" data-count-max=\"" << peak << "\" data-px-bottom=\"" << num(kBottom)
      << "\" data-px-top=\"" << num(kTop) << "\">\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight << "\" y2=\""
      << kBottom << "\" stroke=\"black\"/>\n"
      << "<text x=\"20\" y=\"" << (kTop + kBottom) / 2 << "\" transform=\"rotate(-90 20 "
      << (kTop + kBottom) / 2
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">samples</text>\n"
      << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kBottom + 40
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << "budget (bars: missing count 0.." << (bins == 0 ? 0 : bins - 1) << ")</text>\n</g>\n";
  const double slot = (kRight - kLeft) / static_cast<double>(groups.size());
  const double bar = slot * 0.8 / static_cast<double>(std::max<std::size_t>(bins, 1));
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    const double x0 = kLeft + static_cast<double>(gi) * slot + slot * 0.1;
    svg << "<g class=\"group\" data-budget=\"" << g.budget << "\">\n";
    for (std::size_t k = 0; k < g.counts.size(); ++k) {
      const double h = static_cast<double>(g.counts[k]) / static_cast<double>(peak) * (kBottom - kTop);
      svg << "<rect class=\"bar\" data-missing=\"" << k << "\" data-count=\"" << g.counts[k]
          << "\" x=\"" << num(x0 + static_cast<double>(k) * bar) << "\" y=\"" << num(kBottom - h)
          << "\" width=\"" << num(bar * 0.9) << "\" height=\"" << num(h)
          << "\" fill=\"#fdae6b\" stroke=\"black\"/>\n";
    }
    svg << "<text x=\"" << num(x0 + slot * 0.4) << "\" y=\"" << kBottom + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">β=" << g.budget
        << "</text>\n</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsRow& row) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "model,training,train_mape,test_mape\n"
      << row.model << ',' << row.training << ',' << num(row.train_mape) << ','
      << num(row.test_mape) << '\n';
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "model,training,train_mape,test_mape")
    throw Error(ErrorCode::SchemaMismatch, path.string() + ": unexpected header");
  std::vector<MetricsRow> rows;
  for (std::size_t r = 1; std::getline(in, line); ++r) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4)
      throw Error(ErrorCode::UnparseableField, path.string() + ": expected 4 fields", r, "");
    MetricsRow m;
    m.model = f[0];
    m.training = f[1];
    try {
      std::size_t used = 0;
      m.train_mape = std::stod(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument(f[2]);
      m.test_mape = std::stod(f[3], &used);
      if (used != f[3].size()) throw std::invalid_argument(f[3]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::UnparseableField, path.string() + ": malformed MAPE value", r, "train_mape/test_mape");
    }
    rows.push_back(m);
  }
  return rows;
}

std::string mape_table(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-32s %-12s %12s %12s %12s\n", "model", "training",
                "train_mape", "test_mape", "delta_test");
  out << buf;
  const MetricsRow* clean = nullptr;
  for (const auto& r : rows)
    if (r.training == "clean") {
      clean = &r;
      break;
    }
  for (const auto& r : rows) {
    char delta[32] = "-";
    if (clean && r.training != "clean")
      std::snprintf(delta, sizeof delta, "%+.2f", r.test_mape - clean->test_mape);
    std::snprintf(buf, sizeof buf, "%-32s %-12s %12.2f %12.2f %12s\n", r.model.c_str(),
                  r.training.c_str(), r.train_mape, r.test_mape, delta);
    out << buf;
  }
  return out.str();
}

ReportOutput make_report(const std::filesystem::path& results_dir,
                         const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(results_dir))
    throw Error(ErrorCode::Io, "results directory not found: " + results_dir.string());

  struct Cell {
    AttackSpec spec;
    AttackTable table;
  };
  std::map<std::string, std::vector<Cell>> grids;
  std::vector<fs::path> metrics_files;
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(results_dir))
    if (e.is_regular_file()) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());
  for (const auto& p : entries) {
    const std::string name = p.filename().string();
    if (name.rfind("metrics_", 0) == 0 && p.extension() == ".csv") {
      metrics_files.push_back(p);
      continue;
    }
    if (name.rfind("attack_", 0) != 0 || p.extension() != ".csv") continue;
    const AttackSpec spec = spec_from_file_name(name);
    std::string key = spec.kind == AttackKind::Integrity
                          ? std::string("integrity_") + to_string(spec.mode)
                          : std::string("availability_") + to_string(spec.mode) + "_" +
                                to_string(spec.impute);
    grids[key].push_back({spec, read_attack_csv(p)});
  }
  if (grids.empty() && metrics_files.empty())
    throw Error(ErrorCode::EmptyFile, "no results found in " + results_dir.string());

  fs::create_directories(out_dir);
  ReportOutput out;
  for (auto& [key, cells] : grids) {
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
      return a.spec.kind == AttackKind::Integrity ? a.spec.eps < b.spec.eps
                                                  : a.spec.budget < b.spec.budget;
    });
    const AttackSpec& first = cells.front().spec;
    const bool avail = first.kind == AttackKind::Availability;
    std::vector<LabeledBox> boxes;
    std::vector<MissingHistogram> hist;
    for (const auto& cell : cells) {
      std::vector<double> mpes;
      MissingHistogram h;
      h.budget = cell.spec.budget;
      h.counts.assign(kNumFlex + 1, 0);
      for (const auto& r : cell.table.rows) {
        mpes.push_back(r.mpe_percent);
        if (avail && r.missing_count >= 0 && r.missing_count <= static_cast<int>(kNumFlex))
          ++h.counts[static_cast<std::size_t>(r.missing_count)];
      }
      if (mpes.empty()) continue;
      boxes.push_back({avail ? std::to_string(cell.spec.budget) : short_num(cell.spec.eps),
                       box_stats(mpes)});
      if (avail) hist.push_back(std::move(h));
    }
    if (boxes.empty()) continue;
    const std::string title =
        avail ? std::string("AVAI(") + to_string(first.mode) + ", " + to_string(first.impute) + ", β)"
              : std::string("INTE(") + to_string(first.mode) + ", ε)";
    const fs::path box_path = out_dir / ("box_" + key + ".svg");
    write_text(box_path, box_plot_svg(title, avail ? "attack budget β" : "ε", boxes));
    out.files.push_back(box_path);
    if (avail) {
      const fs::path hist_path = out_dir / ("missing_" + key + ".svg");
      write_text(hist_path, missing_histogram_svg(title + " missing features", hist));
      out.files.push_back(hist_path);
    }
  }
  std::vector<MetricsRow> metrics;
  for (const auto& p : metrics_files) {
    auto rows = read_metrics_csv(p);
    metrics.insert(metrics.end(), rows.begin(), rows.end());
  }
  if (!metrics.empty()) {
    out.table = mape_table(metrics);
    const fs::path table_path = out_dir / "mape_table.txt";
    write_text(table_path, out.table);
    out.files.push_back(table_path);
  }
  return out;
}

}  // namespace lfa
