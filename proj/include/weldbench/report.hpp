#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "weldbench/errors.hpp"

namespace weldbench::report {

// Locale-independent rendering with 17 significant digits; non-finite values
// become "inf", "-inf" or "nan".
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

enum class ToleranceKind { Absolute, Relative, Sigma, AtLeast, AtMost };

inline const char* to_string(ToleranceKind k) {
  switch (k) {
    case ToleranceKind::Absolute: return "abs";
    case ToleranceKind::Relative: return "rel";
    case ToleranceKind::Sigma: return "sigma";
    case ToleranceKind::AtLeast: return "min";
    case ToleranceKind::AtMost: return "max";
  }
  return "?";
}

// One check. For Sigma, `tolerance` counts standard errors and `sigma` holds
// the standard error; AtLeast / AtMost compare `observed` with `tolerance`
// directly and ignore `expected`.
struct ValidationRecord {
  std::string id;
  std::string anchor;
  std::string inputs;
  double expected = std::numeric_limits<double>::quiet_NaN();
  double observed = std::numeric_limits<double>::quiet_NaN();
  double tolerance = 0.0;
  double sigma = 0.0;
  ToleranceKind kind = ToleranceKind::Absolute;
  bool pass = false;
  std::string note;
  double runtime_s = 0.0;  // reported on the console only, never in files
};

inline bool within(const ValidationRecord& r) {
  if (std::isnan(r.observed)) return false;
  switch (r.kind) {
    case ToleranceKind::Absolute: return std::abs(r.observed - r.expected) <= r.tolerance;
    case ToleranceKind::Relative:
      return std::abs(r.observed - r.expected) <= r.tolerance * std::abs(r.expected);
    case ToleranceKind::Sigma: return std::abs(r.observed - r.expected) <= r.tolerance * r.sigma;
    case ToleranceKind::AtLeast: return r.observed >= r.tolerance;
    case ToleranceKind::AtMost: return r.observed <= r.tolerance;
  }
  return false;
}

inline ValidationRecord make_record(std::string id, std::string anchor, std::string inputs,
                                    double expected, double observed, double tolerance,
                                    ToleranceKind kind, double sigma = 0.0) {
  ValidationRecord r;
  r.id = std::move(id);
  r.anchor = std::move(anchor);
  r.inputs = std::move(inputs);
  r.expected = expected;
  r.observed = observed;
  r.tolerance = tolerance;
  r.kind = kind;
  r.sigma = sigma;
  r.pass = within(r);
  return r;
}

inline ValidationRecord failed_record(std::string id, std::string anchor, std::string inputs,
                                      const std::string& error) {
  ValidationRecord r;
  r.id = std::move(id);
  r.anchor = std::move(anchor);
  r.inputs = std::move(inputs);
  r.note = error;
  r.pass = false;
  return r;
}

inline const char* kRecordHeader = "id,anchor,inputs,expected,observed,tolerance,kind,sigma,status,note";

inline std::string record_row(const ValidationRecord& r) {
  std::ostringstream os;
  os << csv_field(r.id) << ',' << csv_field(r.anchor) << ',' << csv_field(r.inputs) << ','
     << fmt(r.expected) << ',' << fmt(r.observed) << ',' << fmt(r.tolerance) << ','
     << to_string(r.kind) << ',' << fmt(r.sigma) << ',' << (r.pass ? "pass" : "fail") << ','
     << csv_field(r.note);
  return os.str();
}

inline std::string records_csv(const std::vector<ValidationRecord>& recs) {
  std::string out = std::string(kRecordHeader) + "\n";
  for (const auto& r : recs) out += record_row(r) + "\n";
  return out;
}

inline nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

inline nlohmann::ordered_json records_json(const std::string& suite, std::uint64_t seed,
                                           const std::vector<ValidationRecord>& recs) {
  nlohmann::ordered_json j;
  std::size_t passed = 0;
  for (const auto& r : recs) passed += r.pass ? 1 : 0;
  j["suite"] = suite;
  j["seed"] = seed;
  j["passed"] = passed;
  j["failed"] = recs.size() - passed;
  j["records"] = nlohmann::ordered_json::array();
  for (const auto& r : recs) {
    nlohmann::ordered_json x;
    x["id"] = r.id;
    x["anchor"] = r.anchor;
    x["inputs"] = r.inputs;
    x["expected"] = json_number(r.expected);
    x["observed"] = json_number(r.observed);
    x["tolerance"] = json_number(r.tolerance);
    x["kind"] = to_string(r.kind);
    x["sigma"] = json_number(r.sigma);
    x["status"] = r.pass ? "pass" : "fail";
    x["note"] = r.note;
    j["records"].push_back(std::move(x));
  }
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path);
}

// Minimal CSV reader for the tables this tool writes (quoted fields allowed).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  }
  double number(std::size_t row, int col) const {
    if (col < 0 || static_cast<std::size_t>(col) >= rows[row].size()) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    const std::string& s = rows[row][static_cast<std::size_t>(col)];
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::istringstream is(s);
    is.imbue(std::locale::classic());
    double v;
    if (!(is >> v)) return std::numeric_limits<double>::quiet_NaN();
    return v;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline Table read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  Table t;
  std::string line;
  if (std::getline(f, line)) t.header = split_csv_line(line);
  while (std::getline(f, line)) {
    if (!line.empty()) t.rows.push_back(split_csv_line(line));
  }
  return t;
}

}  // namespace weldbench::report
