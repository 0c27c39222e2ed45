#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "dephasing.hpp"
#include "errors.hpp"
#include "sensitivity.hpp"

namespace nvsens {

inline constexpr const char* kToolVersion = "0.1.0";

// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError("not a number: '" + s + "'");
  return v;
}

struct CsvTable {
  std::vector<std::string> metadata;  // written as "# line"
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> r) { rows.push_back(std::move(r)); }
  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ParseError("no column '" + name + "'");
  }
};

namespace detail {

inline std::string csv_field(const std::string& f) {
  if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
  std::string q = "\"";
  for (char c : f) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

inline void write_record(std::ostream& os, const std::vector<std::string>& r) {
  for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_field(r[i]);
  os << '\n';
}

inline std::vector<std::string> split_record(const std::string& line) {
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
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quote in CSV record");
  out.push_back(std::move(cur));
  return out;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const CsvTable& t) {
  for (const auto& m : t.metadata) os << "# " << m << '\n';
  detail::write_record(os, t.header);
  for (const auto& r : t.rows) detail::write_record(os, r);
}

inline std::string to_csv_string(const CsvTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

inline void write_csv_file(const CsvTable& t, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_csv(os, t);
  os.flush();
  if (!os) throw IoError("write failed for " + path.string());
}

inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header && line.rfind("#", 0) == 0) {
      t.metadata.push_back(line.size() > 2 ? line.substr(2) : std::string{});
      continue;
    }
    if (!have_header) {
      t.header = detail::split_record(line);
      have_header = true;
    } else if (!line.empty()) {
      t.rows.push_back(detail::split_record(line));
    }
  }
  if (!have_header) throw ParseError("CSV has no header row");
  return t;
}

inline CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_csv(is);
}

inline CsvTable budget_table(const DephasingBudget& b, std::vector<std::string> metadata = {}) {
  CsvTable t;
  t.metadata = std::move(metadata);
  t.metadata.insert(t.metadata.begin(), std::string("tool: nvsens ") + kToolVersion);
  t.metadata.push_back(std::string("kind: ") + (b.kind == BudgetKind::T2star ? "t2star" : "t2"));
  t.metadata.push_back(std::string("basis: ") + to_string(b.basis));
  t.metadata.push_back(std::string("bath_drive: ") + (b.bath_drive ? "true" : "false") +
                       " (suppression " + format_double(b.drive_suppression) + ")");
  if (!b.entries.empty()) {
    t.metadata.push_back("total_rate_per_s: " + format_double(b.total_rate()));
    t.metadata.push_back("total_time_s: " + format_double(b.total_time_s()));
    t.metadata.push_back("dominant: " + b.dominant());
  }
  t.header = {"mechanism", "rate_per_s", "time_s"};
  for (const auto& [name, rate] : b.entries)
    t.add_row({name, format_double(rate), format_double(detail::rate_to_time(rate))});
  return t;
}

inline std::vector<std::string> report_header() {
  return {"protocol",      "eta_T_per_sqrtHz", "projection_limit", "dephasing_factor", "readout_factor",
          "overhead_factor", "coherence_time_s", "tau_s",          "t_i_s",            "t_r_s",
          "contrast",      "n_avg",            "n_sensors",        "delta_ms",         "p_exponent",
          "basis",         "k_pulses",         "s_scaling",        "t_b_s",            "rate_r_hz",
          "linewidth_hz",  "optimum_detuning_hz", "approximation_flag"};
}

inline std::vector<std::string> report_row(const SensitivityReport& r) {
  const auto& p = r.inputs;
  return {to_string(r.protocol),
          format_double(r.eta_T_per_sqrtHz),
          format_double(r.factors.projection_limit),
          format_double(r.factors.dephasing_factor),
          format_double(r.factors.readout_factor),
          format_double(r.factors.overhead_factor),
          format_double(r.coherence_time_s),
          format_double(p.tau_s),
          format_double(p.t_i_s),
          format_double(p.t_r_s),
          format_double(p.contrast),
          format_double(p.n_avg),
          format_double(p.n_sensors),
          std::to_string(p.delta_ms),
          format_double(p.p_exponent),
          to_string(p.basis),
          std::to_string(p.k_pulses),
          format_double(p.s_scaling),
          format_double(p.t_b_s),
          format_double(p.rate_r_hz),
          format_double(p.linewidth_hz),
          format_double(r.optimum_detuning_hz),
          r.approximation_flag ? "true" : "false"};
}

inline CsvTable report_table(const std::vector<SensitivityReport>& reports, std::vector<std::string> metadata = {}) {
  CsvTable t;
  t.metadata = std::move(metadata);
  t.metadata.insert(t.metadata.begin(), std::string("tool: nvsens ") + kToolVersion);
  t.header = report_header();
  for (const auto& r : reports) t.add_row(report_row(r));
  return t;
}

inline void save_report(const DephasingBudget& b, const std::filesystem::path& path) {
  write_csv_file(budget_table(b), path);
}

inline void save_report(const SensitivityReport& r, const std::filesystem::path& path) {
  write_csv_file(report_table({r}), path);
}

inline void save_report(const std::vector<SensitivityReport>& r, const std::filesystem::path& path) {
  write_csv_file(report_table(r), path);
}

}  // namespace nvsens
