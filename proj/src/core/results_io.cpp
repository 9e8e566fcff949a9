#include "results_io.hpp"

#include "error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lfa {

namespace {

const char* kAttackHeaderAvail =
    "sample_index,clean_forecast,adv_forecast,mpe_percent,missing_count,mask_bits,nodes,ms";
const char* kAttackHeaderInteg =
    "sample_index,clean_forecast,adv_forecast,mpe_percent,l_inf_norm_used,mask_bits,nodes,ms";
const char* kSummaryHeader =
    "kind,mode,impute,budget,eps,samples,failures,median_mpe,q1_mpe,q3_mpe,min_mpe,max_mpe,"
    "mean_ms_per_sample";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, std::size_t row, const std::string& col) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw Error(ErrorCode::UnparseableField, "expected a number, got '" + s + "'", row, col);
  return v;
}

long parse_long(const std::string& s, std::size_t row, const std::string& col) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw Error(ErrorCode::UnparseableField, "expected an integer, got '" + s + "'", row, col);
  return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw Error(ErrorCode::EmptyFile, path.string() + " is empty");
  return lines;
}

std::string with_path(const std::filesystem::path& path, const Error& e) {
  std::string msg = path.string();
  if (e.row() > 0) msg += ": row " + std::to_string(e.row());
  if (!e.column().empty()) msg += ", column " + e.column();
  return msg + ": " + e.what();
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string mask_to_bits(const Mask& mask) {
  std::string s;
  for (int m : mask) s.push_back(m ? '1' : '0');
  return s;
}

std::string attack_file_name(const AttackSpec& spec) {
  char buf[128];
  if (spec.kind == AttackKind::Integrity)
    std::snprintf(buf, sizeof buf, "attack_integrity_%s_e%g.csv", to_string(spec.mode), spec.eps);
  else
    std::snprintf(buf, sizeof buf, "attack_availability_%s_%s_b%d.csv", to_string(spec.mode),
                  to_string(spec.impute), spec.budget);
  return buf;
}

std::string summary_file_name(const AttackSpec& spec) {
  if (spec.kind == AttackKind::Integrity)
    return std::string("summary_integrity_") + to_string(spec.mode) + ".csv";
  return std::string("summary_availability_") + to_string(spec.mode) + "_" +
         to_string(spec.impute) + ".csv";
}

AttackSpec spec_from_file_name(const std::string& name) {
  const auto bad = [&] {
    return Error(ErrorCode::InvalidArgument, "not an attack results file name: " + name);
  };
  const std::string ext = ".csv";
  if (name.rfind("attack_", 0) != 0 || name.size() <= ext.size() ||
      name.compare(name.size() - ext.size(), ext.size(), ext) != 0)
    throw bad();
  std::vector<std::string> parts;
  std::istringstream ss(name.substr(7, name.size() - 7 - ext.size()));
  for (std::string p; std::getline(ss, p, '_');) parts.push_back(p);
  try {
    if (parts.size() == 3 && parts[0] == "integrity" && parts[2].size() > 1 && parts[2][0] == 'e')
      return AttackSpec::integrity(parse_mode(parts[1]), parse_double(parts[2].substr(1), 0, ""));
    if (parts.size() == 4 && parts[0] == "availability" && parts[3].size() > 1 && parts[3][0] == 'b')
      return AttackSpec::availability(parse_mode(parts[1]), parse_impute_mode(parts[2]),
                                      static_cast<int>(parse_long(parts[3].substr(1), 0, "")));
  } catch (const Error&) {
    throw bad();
  }
  throw bad();
}

AttackTable to_table(const AttackSpec& spec, const BatchResult& batch) {
  AttackTable t;
  t.kind = spec.kind;
  for (std::size_t i = 0; i < batch.results.size(); ++i) {
    if (!batch.results[i]) continue;
    const AttackResult& r = *batch.results[i];
    AttackRow row;
    row.sample_index = i;
    row.clean_forecast = r.clean_forecast;
    row.adv_forecast = r.adversarial_forecast;
    row.mpe_percent = r.mpe;
    if (spec.kind == AttackKind::Availability) {
      row.missing_count = r.missing_count;
      row.mask_bits = mask_to_bits(r.mask);
    } else {
      row.linf = r.linf;
    }
    row.nodes = r.stats.nodes;
    row.ms = i < batch.summary.sample_ms.size() ? batch.summary.sample_ms[i] : r.stats.ms;
    t.rows.push_back(std::move(row));
  }
  return t;
}

SummaryRow to_summary(const AttackSpec& spec, const BatchSummary& summary) {
  SummaryRow s;
  s.kind = spec.kind;
  s.mode = spec.mode;
  s.impute = spec.impute;
  s.budget = spec.budget;
  s.eps = spec.eps;
  s.samples = summary.samples;
  s.failures = summary.failures.size();
  s.mpe = summary.mpe;
  s.mean_ms = summary.mean_ms;
  return s;
}

void write_attack_csv(const std::filesystem::path& path, const AttackTable& table) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  const bool avail = table.kind == AttackKind::Availability;
  out << (avail ? kAttackHeaderAvail : kAttackHeaderInteg) << '\n';
  for (const auto& r : table.rows) {
    out << r.sample_index << ',' << fmt(r.clean_forecast) << ',' << fmt(r.adv_forecast) << ','
        << fmt(r.mpe_percent) << ',' << (avail ? std::to_string(r.missing_count) : fmt(r.linf))
        << ',' << r.mask_bits << ',' << r.nodes << ',' << fmt(r.ms) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

AttackTable read_attack_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  AttackTable t;
  const auto cols = split_csv_line(lines[0]);
  if (lines[0] == kAttackHeaderAvail) t.kind = AttackKind::Availability;
  else if (lines[0] == kAttackHeaderInteg) t.kind = AttackKind::Integrity;
  else throw Error(ErrorCode::SchemaMismatch, path.string() + ": unexpected header");
  try {
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto f = split_csv_line(lines[i]);
      if (f.size() != 8)
        throw Error(ErrorCode::UnparseableField, "expected 8 fields, got " + std::to_string(f.size()), i, "");
      AttackRow r;
      r.sample_index = static_cast<std::size_t>(parse_long(f[0], i, cols[0]));
      r.clean_forecast = parse_double(f[1], i, cols[1]);
      r.adv_forecast = parse_double(f[2], i, cols[2]);
      r.mpe_percent = parse_double(f[3], i, cols[3]);
      if (t.kind == AttackKind::Availability) {
        r.missing_count = static_cast<int>(parse_long(f[4], i, cols[4]));
        if (f[5].size() != kNumFlex || f[5].find_first_not_of("01") != std::string::npos)
          throw Error(ErrorCode::UnparseableField, "mask must be six 0/1 characters", i, cols[5]);
      } else {
        r.linf = parse_double(f[4], i, cols[4]);
      }
      r.mask_bits = f[5];
      r.nodes = parse_long(f[6], i, cols[6]);
      r.ms = parse_double(f[7], i, cols[7]);
      t.rows.push_back(std::move(r));
    }
  } catch (const Error& e) {
    throw Error(e.code(), with_path(path, e), e.row(), e.column());
  }
  return t;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << kSummaryHeader << '\n';
  for (const auto& s : rows) {
    const bool avail = s.kind == AttackKind::Availability;
    out << to_string(s.kind) << ',' << to_string(s.mode) << ','
        << (avail ? to_string(s.impute) : "") << ',' << (avail ? std::to_string(s.budget) : "")
        << ',' << (avail ? "" : fmt(s.eps)) << ',' << s.samples << ',' << s.failures << ','
        << fmt(s.mpe.median) << ',' << fmt(s.mpe.q1) << ',' << fmt(s.mpe.q3) << ','
        << fmt(s.mpe.min) << ',' << fmt(s.mpe.max) << ',' << fmt(s.mean_ms) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines[0] != kSummaryHeader)
    throw Error(ErrorCode::SchemaMismatch, path.string() + ": unexpected header");
  const auto cols = split_csv_line(lines[0]);
  std::vector<SummaryRow> rows;
  try {
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto f = split_csv_line(lines[i]);
      if (f.size() != 13)
        throw Error(ErrorCode::UnparseableField, "expected 13 fields, got " + std::to_string(f.size()), i, "");
      SummaryRow s;
      s.kind = parse_attack_kind(f[0]);
      s.mode = parse_mode(f[1]);
      if (s.kind == AttackKind::Availability) {
        s.impute = parse_impute_mode(f[2]);
        s.budget = static_cast<int>(parse_long(f[3], i, cols[3]));
      } else {
        s.eps = parse_double(f[4], i, cols[4]);
      }
      s.samples = static_cast<std::size_t>(parse_long(f[5], i, cols[5]));
      s.failures = static_cast<std::size_t>(parse_long(f[6], i, cols[6]));
      s.mpe.median = parse_double(f[7], i, cols[7]);
      s.mpe.q1 = parse_double(f[8], i, cols[8]);
      s.mpe.q3 = parse_double(f[9], i, cols[9]);
      s.mpe.min = parse_double(f[10], i, cols[10]);
      s.mpe.max = parse_double(f[11], i, cols[11]);
      s.mpe.n = s.samples - s.failures;
      s.mean_ms = parse_double(f[12], i, cols[12]);
      rows.push_back(s);
    }
  } catch (const Error& e) {
    throw Error(e.code(), with_path(path, e), e.row(), e.column());
  }
  return rows;
}

}  // namespace lfa
