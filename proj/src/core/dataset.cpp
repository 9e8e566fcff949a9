#include "dataset.hpp"

#include "error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

namespace lfa {

namespace {

using json = nlohmann::json;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

// "YYYY-MM-DD HH[:MM[:SS]]", with ' ' or 'T' as the separator.
bool parse_iso_timestamp(const std::string& text, Timestamp& t) {
  if (text.size() < 13) return false;
  if (text[4] != '-' || text[7] != '-' || (text[10] != ' ' && text[10] != 'T'))
    return false;
  const std::string_view v(text);
  return parse_int(v.substr(0, 4), t.year) && parse_int(v.substr(5, 2), t.month) &&
         parse_int(v.substr(8, 2), t.day) && parse_int(v.substr(11, 2), t.hour);
}

bool valid_time(const Timestamp& t) {
  return t.month >= 1 && t.month <= 12 && t.day >= 1 && t.day <= 31 &&
         t.hour >= 0 && t.hour <= 23;
}

std::string fmt_row(std::size_t row, const std::string& col) {
  return "row " + std::to_string(row) + ", column '" + col + "'";
}

json vec_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vec_from_json(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

}  // namespace

const char* to_string(ImputeMode mode) {
  return mode == ImputeMode::Zero ? "zero" : "mean";
}

ImputeMode parse_impute_mode(const std::string& text) {
  if (text == "zero" || text == "0") return ImputeMode::Zero;
  if (text == "mean") return ImputeMode::Mean;
  throw Error(ErrorCode::InvalidArgument, "unknown imputation mode '" + text + "'");
}

CsvSchema CsvSchema::from_json(const std::string& text) {
  CsvSchema schema;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("schema: ") + e.what());
  }
  if (!doc.is_object())
    throw Error(ErrorCode::InvalidArgument, "schema must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_string())
      throw Error(ErrorCode::InvalidArgument, "schema value for '" + key + "' must be a string");
    const std::string name = value.get<std::string>();
    if (key == "timestamp") schema.timestamp = name;
    else if (key == "year") schema.year = name;
    else if (key == "month") schema.month = name;
    else if (key == "day") schema.day = name;
    else if (key == "hour") schema.hour = name;
    else if (key == "load") schema.load = name;
    else if (key.size() == 2 && key[0] == 'k' && key[1] >= '1' && key[1] <= '6')
      schema.weather[static_cast<std::size_t>(key[1] - '1')] = name;
    else
      throw Error(ErrorCode::InvalidArgument, "unknown schema key '" + key + "'");
  }
  return schema;
}

Dataset Dataset::subset(const std::vector<std::size_t>& idx) const {
  Dataset out;
  out.X.resize(static_cast<Eigen::Index>(idx.size()), X.cols());
  out.Y.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(idx[r]);
    out.X.row(static_cast<Eigen::Index>(r)) = X.row(src);
    out.Y[static_cast<Eigen::Index>(r)] = Y[src];
  }
  out.scale = scale;
  return out;
}

std::vector<RawRecord> load_csv(const std::filesystem::path& path,
                                const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line) || trim(line).empty())
    throw Error(ErrorCode::EmptyFile, path.string() + ": empty file");
  if (line.size() >= 3 && std::memcmp(line.data(), "\xEF\xBB\xBF", 3) == 0)
    line.erase(0, 3);

  const auto header = split_csv_line(line);
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col.emplace(header[i], i);
  auto require = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end())
      throw Error(ErrorCode::MissingColumn,
                  path.string() + ": missing column '" + name + "'", 0, name);
    return it->second;
  };

  const bool iso = !schema.timestamp.empty();
  std::size_t ts_col = 0, y_col = 0, m_col = 0, d_col = 0, h_col = 0;
  if (iso) {
    ts_col = require(schema.timestamp);
  } else {
    y_col = require(schema.year);
    m_col = require(schema.month);
    d_col = require(schema.day);
    h_col = require(schema.hour);
  }
  std::array<std::size_t, kNumFlex> k_col{};
  for (std::size_t k = 0; k < kNumFlex; ++k) k_col[k] = require(schema.weather[k]);
  const std::size_t load_col = require(schema.load);

  std::vector<RawRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_csv_line(line);
    auto field = [&](std::size_t c, const std::string& name) -> const std::string& {
      if (c >= fields.size())
        throw Error(ErrorCode::UnparseableField,
                    path.string() + ": " + fmt_row(row, name) + ": missing field", row, name);
      return fields[c];
    };
    auto number = [&](std::size_t c, const std::string& name) {
      double v = 0.0;
      if (!parse_double(field(c, name), v))
        throw Error(ErrorCode::UnparseableField,
                    path.string() + ": " + fmt_row(row, name) + ": cannot parse '" +
                        field(c, name) + "'",
                    row, name);
      return v;
    };
    auto integer = [&](std::size_t c, const std::string& name) {
      int v = 0;
      if (!parse_int(field(c, name), v)) {
        double d = 0.0;
        if (!parse_double(field(c, name), d) || d != std::floor(d))
          throw Error(ErrorCode::UnparseableField,
                      path.string() + ": " + fmt_row(row, name) + ": cannot parse '" +
                          field(c, name) + "'",
                      row, name);
        v = static_cast<int>(d);
      }
      return v;
    };

    RawRecord rec;
    if (iso) {
      if (!parse_iso_timestamp(field(ts_col, schema.timestamp), rec.time))
        throw Error(ErrorCode::UnparseableField,
                    path.string() + ": " + fmt_row(row, schema.timestamp) +
                        ": bad timestamp '" + field(ts_col, schema.timestamp) + "'",
                    row, schema.timestamp);
    } else {
      rec.time.year = integer(y_col, schema.year);
      rec.time.month = integer(m_col, schema.month);
      rec.time.day = integer(d_col, schema.day);
      rec.time.hour = integer(h_col, schema.hour);
    }
    if (!valid_time(rec.time)) {
      const std::string& name = iso ? schema.timestamp : schema.month;
      throw Error(ErrorCode::UnparseableField,
                  path.string() + ": " + fmt_row(row, name) + ": date/time out of range",
                  row, name);
    }
    for (std::size_t k = 0; k < kNumFlex; ++k)
      rec.weather[k] = number(k_col[k], schema.weather[k]);
    rec.load = number(load_col, schema.load);
    if (!(rec.load > 0.0))
      throw Error(ErrorCode::UnparseableField,
                  path.string() + ": " + fmt_row(row, schema.load) + ": load must be positive",
                  row, schema.load);
    records.push_back(rec);
  }
  if (records.empty())
    throw Error(ErrorCode::EmptyFile, path.string() + ": no data rows");
  return records;
}

std::array<double, kNumTemporal> encode_temporal(const Timestamp& t) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double m = two_pi * t.month / 12.0;
  const double d = two_pi * t.day / 31.0;
  const double h = two_pi * t.hour / 24.0;
  return {std::sin(m), std::cos(m), std::sin(d), std::cos(d), std::sin(h), std::cos(h)};
}

std::vector<std::size_t> outlier_keep_indices(const std::vector<double>& loads) {
  const std::size_t n = loads.size();
  std::vector<std::size_t> keep;
  if (n == 0) return keep;
  double mean = 0.0;
  for (double v : loads) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : loads) ss += (v - mean) * (v - mean);
  const double sigma = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  keep.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(loads[i] - mean) <= 3.0 * sigma) keep.push_back(i);
  return keep;
}

std::vector<RawRecord> remove_outliers(const std::vector<RawRecord>& records) {
  if (records.empty())
    throw Error(ErrorCode::InvalidArgument, "remove_outliers: empty input");
  std::vector<double> loads;
  loads.reserve(records.size());
  for (const auto& r : records) loads.push_back(r.load);
  std::vector<RawRecord> out;
  for (std::size_t i : outlier_keep_indices(loads)) out.push_back(records[i]);
  if (out.empty()) throw Error(ErrorCode::AllRemoved, "outlier removal removed every row");
  return out;
}

Dataset build_dataset(const std::vector<RawRecord>& records) {
  Dataset d;
  const auto n = static_cast<Eigen::Index>(records.size());
  d.X.resize(n, static_cast<Eigen::Index>(kNumFeatures));
  d.Y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& rec = records[static_cast<std::size_t>(r)];
    for (std::size_t k = 0; k < kNumFlex; ++k)
      d.X(r, static_cast<Eigen::Index>(k)) = rec.weather[k];
    const auto t = encode_temporal(rec.time);
    for (std::size_t k = 0; k < kNumTemporal; ++k)
      d.X(r, static_cast<Eigen::Index>(kNumFlex + k)) = t[k];
    d.Y[r] = rec.load;
  }
  return d;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double ratio,
                                  std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw Error(ErrorCode::InvalidArgument, "split ratio must lie in (0,1)");
  const std::size_t n = data.rows();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  std::vector<std::size_t> tr(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> te(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  return {data.subset(tr), data.subset(te)};
}

ScaleStats fit_scale(const Dataset& train) {
  if (train.rows() == 0) throw Error(ErrorCode::InvalidArgument, "fit_scale: empty train set");
  ScaleStats s;
  const auto flex = static_cast<Eigen::Index>(kNumFlex);
  s.min = train.X.leftCols(flex).colwise().minCoeff().transpose();
  s.max = train.X.leftCols(flex).colwise().maxCoeff().transpose();
  for (Eigen::Index j = 0; j < flex; ++j)
    if (!(s.max[j] > s.min[j]))
      throw Error(ErrorCode::DegenerateColumn,
                  "flexible column " + std::to_string(j) + " is constant on the train set");
  return s;
}

Dataset apply_scale(const Dataset& data, const ScaleStats& stats) {
  Dataset out = data;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(kNumFlex); ++j) {
    const double span = stats.max[j] - stats.min[j];
    if (!(span > 0.0))
      throw Error(ErrorCode::DegenerateColumn, "degenerate scale for column " + std::to_string(j));
    out.X.col(j) = ((data.X.col(j).array() - stats.min[j]) / span).matrix();
  }
  out.scale = stats;
  return out;
}

ImputationVector make_imputation(const Dataset& train, ImputeMode mode) {
  ImputationVector iv;
  iv.mode = mode;
  iv.c = Eigen::VectorXd::Zero(train.X.cols());
  if (mode == ImputeMode::Mean) {
    if (train.rows() == 0) throw Error(ErrorCode::InvalidArgument, "mean imputation of empty set");
    const auto flex = static_cast<Eigen::Index>(flex_count(static_cast<std::size_t>(train.X.cols())));
    iv.c.head(flex) = train.X.leftCols(flex).colwise().mean().transpose();
  }
  return iv;
}

double synth_target(const Eigen::Ref<const Eigen::VectorXd>& x) {
  return 2.0 + 0.35 * x[0] - 0.25 * x[1] + 0.3 * x[2] * x[3] +
         0.8 * (x[4] - 0.5) * (x[4] - 0.5) + 0.15 * std::sin(std::numbers::pi * x[5]) +
         0.1 * x[7] + 0.05 * x[8] + 0.3 * x[10] + 0.15 * x[11];
}

Dataset synth_generate(std::size_t n, std::uint64_t seed, double noise) {
  if (n < 10) throw Error(ErrorCode::InvalidArgument, "synth_generate needs n >= 10");
  static constexpr int kDaysInMonth[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, noise);

  Dataset d;
  d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kNumFeatures));
  d.Y.resize(static_cast<Eigen::Index>(n));
  Timestamp t{2017, 1, 1, 0};
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(n); ++r) {
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(kNumFlex); ++k) d.X(r, k) = unif(rng);
    const auto enc = encode_temporal(t);
    for (std::size_t k = 0; k < kNumTemporal; ++k)
      d.X(r, static_cast<Eigen::Index>(kNumFlex + k)) = enc[k];
    d.Y[r] = synth_target(d.X.row(r).transpose()) + gauss(rng);

    if (++t.hour == 24) {
      t.hour = 0;
      if (++t.day > kDaysInMonth[t.month - 1]) {
        t.day = 1;
        if (++t.month > 12) {
          t.month = 1;
          ++t.year;
        }
      }
    }
  }
  return d;
}

namespace {

PreparedData finish_prepare(Dataset full, std::size_t raw_rows, const std::string& source,
                            double ratio, std::uint64_t seed) {
  PreparedData out;
  auto [train, test] = split(full, ratio, seed);
  const ScaleStats stats = fit_scale(train);
  out.train = apply_scale(train, stats);
  out.test = apply_scale(test, stats);

  DatasetManifest& m = out.manifest;
  m.source = source;
  m.seed = seed;
  m.ratio = ratio;
  m.raw_rows = raw_rows;
  m.outliers_removed = raw_rows - full.rows();
  m.train_rows = out.train.rows();
  m.test_rows = out.test.rows();
  m.scale = stats;
  m.zero = make_imputation(out.train, ImputeMode::Zero);
  m.mean = make_imputation(out.train, ImputeMode::Mean);
  return out;
}

}  // namespace

PreparedData prepare_from_records(const std::vector<RawRecord>& records,
                                  const std::string& source, double ratio,
                                  std::uint64_t seed) {
  const auto cleaned = remove_outliers(records);
  return finish_prepare(build_dataset(cleaned), records.size(), source, ratio, seed);
}

PreparedData prepare_synthetic(std::size_t n, std::uint64_t seed, double ratio) {
  Dataset raw = synth_generate(n, seed);
  const std::vector<double> loads(raw.Y.data(), raw.Y.data() + raw.Y.size());
  const auto keep = outlier_keep_indices(loads);
  if (keep.empty()) throw Error(ErrorCode::AllRemoved, "outlier removal removed every row");
  return finish_prepare(raw.subset(keep), n, "synthetic:" + std::to_string(n), ratio, seed);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string manifest_to_text(const DatasetManifest& m) {
  json doc;
  doc["format"] = "lfa-dataset-manifest";
  doc["format_version"] = kDatasetFormatVersion;
  doc["source"] = m.source;
  doc["seed"] = m.seed;
  doc["ratio"] = m.ratio;
  doc["raw_rows"] = m.raw_rows;
  doc["outliers_removed"] = m.outliers_removed;
  doc["train_rows"] = m.train_rows;
  doc["test_rows"] = m.test_rows;
  doc["scale_min"] = vec_to_json(m.scale.min);
  doc["scale_max"] = vec_to_json(m.scale.max);
  doc["imputation_zero"] = vec_to_json(m.zero.c);
  doc["imputation_mean"] = vec_to_json(m.mean.c);
  return doc.dump(2) + "\n";
}

DatasetManifest manifest_from_text(const std::string& text) {
  DatasetManifest m;
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != "lfa-dataset-manifest")
      throw Error(ErrorCode::SchemaMismatch, "not a dataset manifest");
    if (doc.at("format_version").get<int>() != kDatasetFormatVersion)
      throw Error(ErrorCode::SchemaMismatch, "unsupported dataset manifest version");
    m.source = doc.at("source").get<std::string>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.ratio = doc.at("ratio").get<double>();
    m.raw_rows = doc.at("raw_rows").get<std::size_t>();
    m.outliers_removed = doc.at("outliers_removed").get<std::size_t>();
    m.train_rows = doc.at("train_rows").get<std::size_t>();
    m.test_rows = doc.at("test_rows").get<std::size_t>();
    m.scale.min = vec_from_json(doc.at("scale_min"));
    m.scale.max = vec_from_json(doc.at("scale_max"));
    m.zero = {ImputeMode::Zero, vec_from_json(doc.at("imputation_zero"))};
    m.mean = {ImputeMode::Mean, vec_from_json(doc.at("imputation_mean"))};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("manifest: ") + e.what());
  }
  return m;
}

std::uint64_t manifest_hash(const DatasetManifest& manifest) {
  return fnv1a64(manifest_to_text(manifest));
}

namespace {

constexpr char kBinMagic[8] = {'L', 'F', 'A', 'D', 'A', 'T', 'A', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error(ErrorCode::CorruptFile, "dataset.bin truncated");
  return v;
}

void write_split(std::ostream& out, const Dataset& d) {
  write_u64(out, d.rows());
  write_u64(out, static_cast<std::uint64_t>(d.X.cols()));
  for (Eigen::Index r = 0; r < d.X.rows(); ++r)
    for (Eigen::Index c = 0; c < d.X.cols(); ++c) {
      const double v = d.X(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  out.write(reinterpret_cast<const char*>(d.Y.data()),
            static_cast<std::streamsize>(sizeof(double) * d.rows()));
}

Dataset read_split(std::istream& in) {
  Dataset d;
  const auto rows = read_u64(in);
  const auto cols = read_u64(in);
  if (cols != kNumFeatures || rows > (1ULL << 32))
    throw Error(ErrorCode::SchemaMismatch, "dataset.bin: unexpected shape");
  d.X.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  d.Y.resize(static_cast<Eigen::Index>(rows));
  for (Eigen::Index r = 0; r < d.X.rows(); ++r)
    for (Eigen::Index c = 0; c < d.X.cols(); ++c)
      in.read(reinterpret_cast<char*>(&d.X(r, c)), sizeof(double));
  in.read(reinterpret_cast<char*>(d.Y.data()),
          static_cast<std::streamsize>(sizeof(double) * rows));
  if (!in) throw Error(ErrorCode::CorruptFile, "dataset.bin truncated");
  return d;
}

}  // namespace

void save_prepared(const PreparedData& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  {
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / "manifest.json").string());
    out << manifest_to_text(data.manifest);
  }
  std::ofstream out(dir / "dataset.bin", std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / "dataset.bin").string());
  out.write(kBinMagic, sizeof kBinMagic);
  write_u64(out, manifest_hash(data.manifest));
  write_split(out, data.train);
  write_split(out, data.test);
}

PreparedData load_prepared(const std::filesystem::path& dir) {
  PreparedData data;
  {
    std::ifstream in(dir / "manifest.json", std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + (dir / "manifest.json").string());
    std::stringstream ss;
    ss << in.rdbuf();
    data.manifest = manifest_from_text(ss.str());
  }
  std::ifstream in(dir / "dataset.bin", std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + (dir / "dataset.bin").string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kBinMagic, sizeof magic) != 0)
    throw Error(ErrorCode::CorruptFile, "dataset.bin: bad magic");
  if (read_u64(in) != manifest_hash(data.manifest))
    throw Error(ErrorCode::SchemaMismatch, "dataset.bin does not match manifest.json");
  data.train = read_split(in);
  data.test = read_split(in);
  if (in.peek() != std::char_traits<char>::eof())
    throw Error(ErrorCode::CorruptFile, "dataset.bin has trailing bytes");
  data.train.scale = data.manifest.scale;
  data.test.scale = data.manifest.scale;
  if (data.train.rows() != data.manifest.train_rows || data.test.rows() != data.manifest.test_rows)
    throw Error(ErrorCode::SchemaMismatch, "dataset.bin row counts disagree with manifest");
  return data;
}

}  // namespace lfa
