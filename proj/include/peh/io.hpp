#pragma once

// File formats: provenance-tagged CSV tables, acceleration records (CSV or
// binary), per-event CSV + JSON, and dense matrix dumps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "peh/errors.hpp"
#include "peh/events.hpp"

namespace peh {

inline constexpr const char* kVersion = "0.1.0";

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Provenance {
  std::string config_hash = "none";
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> extra;

  Provenance& add(std::string key, std::string value) {
    extra.emplace_back(std::move(key), std::move(value));
    return *this;
  }

  std::string header() const {
    std::string s = "# peh " + std::string(kVersion) + "\n# config_hash=" + config_hash + "\n# seed=" +
                    std::to_string(seed) + "\n";
    for (const auto& [k, v] : extra) s += "# " + k + "=" + v + "\n";
    return s;
  }

  nlohmann::json json() const {
    nlohmann::json j = {{"version", kVersion}, {"config_hash", config_hash}, {"seed", seed}};
    for (const auto& [k, v] : extra) j[k] = v;
    return j;
  }
};

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create directory '" + dir.string() + "': " + ec.message());
}

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) ensure_directory(p.parent_path());
  const auto tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::IoError, "cannot write '" + p.string() + "'");
    out << text;
    if (!out) fail(ErrorKind::IoError, "write failed for '" + p.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, p, ec);
  if (ec) fail(ErrorKind::IoError, "cannot move '" + tmp + "' into place: " + ec.message());
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) { write_text_file(p, j.dump(2) + "\n"); }

/// Builds a CSV table in memory; written atomically.
class CsvTable {
 public:
  CsvTable(std::vector<std::string> columns, Provenance prov = {})
      : columns_(std::move(columns)), prov_(std::move(prov)) {}

  CsvTable& row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) fail(ErrorKind::InvalidArgument, "CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      body_ += cells[i];
      body_ += i + 1 < cells.size() ? ',' : '\n';
    }
    ++rows_;
    return *this;
  }

  CsvTable& row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    return row(cells);
  }

  std::size_t rows() const { return rows_; }

  std::string str() const {
    std::string s = prov_.header();
    for (std::size_t i = 0; i < columns_.size(); ++i) s += columns_[i] + (i + 1 < columns_.size() ? "," : "\n");
    return s + body_;
  }

  void write(const std::filesystem::path& p) const { write_text_file(p, str()); }

 private:
  std::vector<std::string> columns_;
  Provenance prov_;
  std::string body_;
  std::size_t rows_ = 0;
};

inline void write_matrix_csv(const std::filesystem::path& p, const Eigen::MatrixXd& m, const Provenance& prov = {}) {
  std::string s = prov.header();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += format_double(m(i, j)) + (j + 1 < m.cols() ? "," : "\n");
  write_text_file(p, s);
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    out.push_back(cell);
  }
  return out;
}

inline double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::IoError, where + ": not a number: '" + s + "'");
  }
}

}  // namespace detail

inline constexpr char kRecordMagic[8] = {'P', 'E', 'H', 'A', 'C', 'C', '1', '\0'};

/// CSV with header `t,a` (rate inferred from t) or `a` (rate from `declared_rate`
/// or a `# sample_rate=` comment). Binary: magic, double rate, uint64 count, doubles.
inline AccelerationRecord read_record(const std::filesystem::path& p, double declared_rate = 0.0) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open record '" + p.string() + "'");
  AccelerationRecord rec;
  rec.channel = p.stem().string();

  char magic[8] = {};
  in.read(magic, 8);
  if (in.gcount() == 8 && std::memcmp(magic, kRecordMagic, 8) == 0) {
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&rec.sample_rate), sizeof(double));
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!in) fail(ErrorKind::IoError, p.string() + ": truncated binary header");
    rec.samples.resize(n);
    in.read(reinterpret_cast<char*>(rec.samples.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) fail(ErrorKind::IoError, p.string() + ": truncated binary payload");
    if (declared_rate > 0.0) rec.sample_rate = declared_rate;
    validate(rec);
    return rec;
  }
  in.clear();
  in.seekg(0);

  std::string line;
  std::size_t lineno = 0;
  int t_col = -1, a_col = -1;
  std::vector<double> t;
  double comment_rate = 0.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto k = line.find("sample_rate=");
      if (k != std::string::npos) comment_rate = detail::parse_number(line.substr(k + 12), p.string());
      continue;
    }
    const auto cells = detail::split_csv(line);
    const std::string where = p.string() + ":" + std::to_string(lineno);
    if (a_col < 0) {
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (cells[c] == "t") t_col = static_cast<int>(c);
        if (cells[c] == "a") a_col = static_cast<int>(c);
      }
      if (a_col < 0) fail(ErrorKind::IoError, where + ": header must contain column 'a'");
      continue;
    }
    if (static_cast<int>(cells.size()) <= std::max(a_col, t_col)) fail(ErrorKind::IoError, where + ": missing columns");
    rec.samples.push_back(detail::parse_number(cells[static_cast<std::size_t>(a_col)], where));
    if (t_col >= 0) t.push_back(detail::parse_number(cells[static_cast<std::size_t>(t_col)], where));
  }
  if (a_col < 0) fail(ErrorKind::EmptyRecord, p.string() + ": no header or data");

  if (declared_rate > 0.0) {
    rec.sample_rate = declared_rate;
  } else if (t.size() >= 2) {
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(dt > 0.0)) fail(ErrorKind::IoError, p.string() + ": time column is not increasing");
    for (std::size_t i = 1; i < t.size(); ++i)
      if (std::abs(t[i] - t[i - 1] - dt) > 1e-3 * dt)
        fail(ErrorKind::IoError, p.string() + ":" + std::to_string(i) + ": non-uniform sampling");
    rec.sample_rate = 1.0 / dt;
    const double rounded = std::round(rec.sample_rate);
    if (std::abs(rounded - rec.sample_rate) < 1e-6 * rounded) rec.sample_rate = rounded;
  } else if (comment_rate > 0.0) {
    rec.sample_rate = comment_rate;
  } else {
    fail(ErrorKind::IoError, p.string() + ": sample rate unknown (no t column, no declared rate)");
  }
  validate(rec);
  return rec;
}

inline void write_record_binary(const std::filesystem::path& p, const AccelerationRecord& rec) {
  std::string buf(kRecordMagic, 8);
  const std::uint64_t n = rec.samples.size();
  buf.append(reinterpret_cast<const char*>(&rec.sample_rate), sizeof(double));
  buf.append(reinterpret_cast<const char*>(&n), sizeof n);
  buf.append(reinterpret_cast<const char*>(rec.samples.data()), n * sizeof(double));
  write_text_file(p, buf);
}

inline std::string record_csv(const std::vector<double>& samples, double fs, const Provenance* prov = nullptr) {
  std::string s = prov ? prov->header() : std::string();
  s += "t,a\n";
  for (std::size_t i = 0; i < samples.size(); ++i)
    s += format_double(static_cast<double>(i) / fs) + "," + format_double(samples[i]) + "\n";
  return s;
}

inline std::string event_stem(int id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "event_%04d", id);
  return buf;
}

inline nlohmann::json event_metadata(const Event& e) {
  return {{"id", e.id},
          {"peak_value", e.peak_value},
          {"source", e.source},
          {"offset", static_cast<double>(e.offset) / e.sample_rate},
          {"offset_samples", e.offset},
          {"peak_index", e.peak_index},
          {"sample_rate", e.sample_rate},
          {"samples", e.samples.size()}};
}

/// `<dir>/event_0001.csv` (t relative to the window start) plus `.json` metadata.
inline void write_events(const std::filesystem::path& dir, const std::vector<Event>& events) {
  ensure_directory(dir);
  for (const Event& e : events) {
    write_text_file(dir / (event_stem(e.id) + ".csv"), record_csv(e.samples, e.sample_rate));
    write_json(dir / (event_stem(e.id) + ".json"), event_metadata(e));
  }
}

/// Reads every event_NNNN.csv in `dir` (metadata from the sibling .json when present), ordered by id.
inline std::vector<Event> read_events(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) fail(ErrorKind::IoError, "not a directory: '" + dir.string() + "'");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("event_", 0) == 0 && entry.path().extension() == ".csv")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Event> out;
  for (const auto& f : files) {
    const AccelerationRecord r = read_record(f);
    Event e;
    e.sample_rate = r.sample_rate;
    e.samples = r.samples;
    e.source = f.string();
    try {
      e.id = std::stoi(f.stem().string().substr(6));
    } catch (const std::exception&) {
      fail(ErrorKind::IoError, "cannot parse event id from '" + f.string() + "'");
    }
    auto meta = f;
    meta.replace_extension(".json");
    if (std::filesystem::exists(meta)) {
      std::ifstream in(meta);
      try {
        const auto j = nlohmann::json::parse(in);
        e.peak_value = j.value("peak_value", 0.0);
        e.source = j.value("source", e.source);
        e.offset = j.value("offset_samples", std::size_t{0});
        e.peak_index = j.value("peak_index", std::size_t{0});
      } catch (const nlohmann::json::exception& ex) {
        fail(ErrorKind::IoError, meta.string() + ": " + ex.what());
      }
    }
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const Event& a, const Event& b) { return a.id < b.id; });
  return out;
}

}  // namespace peh
