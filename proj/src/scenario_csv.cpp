#include "driftcomp/scenario_csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace driftcomp {
namespace {

constexpr std::array<const char*, 8> kBaseColumns = {"time_s", "adc1", "adc2", "adc3",
                                                     "adc4",   "adc5", "adc6", "temp_c"};
constexpr std::array<const char*, kAxes> kDriftColumns = {"dfx", "dfy", "dfz", "dmx", "dmy", "dmz"};
constexpr std::array<const char*, kAxes> kAppliedColumns = {"afx", "afy", "afz",
                                                            "amx", "amy", "amz"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_error(std::size_t line_no, const std::string& what) {
  fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + what);
}

double parse_real(std::string_view field, std::size_t line_no, const char* column) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    parse_error(line_no, std::string("column ") + column + ": '" + std::string(field) +
                             "' is not a number");
  }
  if (!std::isfinite(v)) parse_error(line_no, std::string("column ") + column + ": not finite");
  return v;
}

std::int32_t parse_count(std::string_view field, std::size_t line_no, const char* column) {
  std::int32_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    parse_error(line_no, std::string("column ") + column + ": '" + std::string(field) +
                             "' is not an integer count");
  }
  return v;
}

bool group_matches(std::span<const std::string_view> cols, std::size_t at,
                   const std::array<const char*, kAxes>& names) {
  if (cols.size() < at + kAxes) return false;
  for (std::size_t i = 0; i < kAxes; ++i) {
    if (cols[at + i] != names[i]) return false;
  }
  return true;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

ScenarioCsvLayout ScenarioCsvLayout::from_header(const std::string& header, std::size_t line_no) {
  const auto cols = split(header);
  if (cols.size() < kBaseColumns.size()) parse_error(line_no, "header has too few columns");
  for (std::size_t i = 0; i < kBaseColumns.size(); ++i) {
    if (cols[i] != kBaseColumns[i]) {
      parse_error(line_no, "header column " + std::to_string(i + 1) + " should be '" +
                               kBaseColumns[i] + "', found '" + std::string(cols[i]) + "'");
    }
  }
  ScenarioCsvLayout layout;
  std::size_t at = kBaseColumns.size();
  if (group_matches(cols, at, kDriftColumns)) {
    layout.has_drift_ = true;
    at += kAxes;
  }
  if (group_matches(cols, at, kAppliedColumns)) {
    layout.has_applied_ = true;
    at += kAxes;
  }
  if (at != cols.size()) {
    parse_error(line_no, "unexpected header columns from '" + std::string(cols[at]) +
                             "'; optional groups must be complete (dfx..dmz, afx..amz)");
  }
  return layout;
}

ScenarioCsvLayout::Row ScenarioCsvLayout::parse_row(const std::string& line,
                                                    std::size_t line_no) const {
  const auto cols = split(line);
  const std::size_t expected =
      kBaseColumns.size() + (has_drift_ ? kAxes : 0) + (has_applied_ ? kAxes : 0);
  if (cols.size() != expected) {
    parse_error(line_no, "expected " + std::to_string(expected) + " fields, found " +
                             std::to_string(cols.size()));
  }
  Row row;
  row.frame.time_s = parse_real(cols[0], line_no, kBaseColumns[0]);
  for (std::size_t i = 0; i < kAxes; ++i) {
    row.frame.adc[i] = parse_count(cols[1 + i], line_no, kBaseColumns[1 + i]);
  }
  row.frame.temp_c = parse_real(cols[7], line_no, kBaseColumns[7]);
  std::size_t at = kBaseColumns.size();
  if (has_drift_) {
    for (std::size_t a = 0; a < kAxes; ++a) {
      row.drift[a] = parse_real(cols[at + a], line_no, kDriftColumns[a]);
    }
    at += kAxes;
  }
  if (has_applied_) {
    for (std::size_t a = 0; a < kAxes; ++a) {
      row.applied[a] = parse_real(cols[at + a], line_no, kAppliedColumns[a]);
    }
  }
  return row;
}

std::string ScenarioCsvLayout::header(bool drift, bool applied) {
  std::string h;
  for (const char* c : kBaseColumns) {
    if (!h.empty()) h += ',';
    h += c;
  }
  if (drift) {
    for (const char* c : kDriftColumns) (h += ',') += c;
  }
  if (applied) {
    for (const char* c : kAppliedColumns) (h += ',') += c;
  }
  return h;
}

Scenario read_scenario_csv(std::istream& in, const std::string& source) {
  Scenario s;
  bool have_rate = false;
  std::optional<ScenarioCsvLayout> layout;
  std::string line;
  std::size_t line_no = 0;
  std::vector<Wrench> drift, applied;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      const auto view = trim(line);
      if (view.empty()) continue;
      if (!layout) {
        if (view.front() == '#') {
          auto body = trim(view.substr(1));
          const auto colon = body.find(':');
          if (colon == std::string_view::npos) continue;
          const auto key = trim(body.substr(0, colon));
          const auto value = trim(body.substr(colon + 1));
          if (key == "name") {
            s.name = std::string(value);
          } else if (key == "sample_rate_hz") {
            s.sample_rate_hz = parse_real(value, line_no, "sample_rate_hz");
            have_rate = true;
          } else if (key.starts_with("meta.")) {
            s.meta[std::string(key.substr(5))] = std::string(value);
          }
          continue;
        }
        layout = ScenarioCsvLayout::from_header(std::string(view), line_no);
        continue;
      }
      const auto row = layout->parse_row(std::string(view), line_no);
      if (!s.frames.empty() && !(row.frame.time_s > s.frames.back().time_s)) {
        fail(ErrorKind::Validation, "line " + std::to_string(line_no) + " (row " +
                                        std::to_string(s.frames.size() + 1) +
                                        "): time_s is not strictly increasing");
      }
      s.frames.push_back(row.frame);
      if (layout->has_drift()) drift.push_back(row.drift);
      if (layout->has_applied()) applied.push_back(row.applied);
    }
  } catch (const Error& e) {
    throw Error(e.kind(), source + ": " + e.what());
  }
  if (!layout) fail(ErrorKind::Parse, source + ": missing header line");
  if (layout->has_drift()) s.truth_drift = std::move(drift);
  if (layout->has_applied()) s.truth_applied = std::move(applied);
  if (!have_rate && s.frames.size() >= 2) {
    s.sample_rate_hz = static_cast<double>(s.frames.size() - 1) /
                       (s.frames.back().time_s - s.frames.front().time_s);
  }
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(e.kind(), source + ": " + e.what());
  }
  return s;
}

void write_scenario_csv(const Scenario& s, std::ostream& out) {
  if (!s.name.empty()) out << "# name: " << s.name << '\n';
  out << "# sample_rate_hz: " << format_double(s.sample_rate_hz) << '\n';
  for (const auto& [k, v] : s.meta) out << "# meta." << k << ": " << v << '\n';
  out << ScenarioCsvLayout::header(s.truth_drift.has_value(), s.truth_applied.has_value())
      << '\n';
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    const auto& f = s.frames[i];
    out << format_double(f.time_s);
    for (auto c : f.adc) out << ',' << c;
    out << ',' << format_double(f.temp_c);
    if (s.truth_drift) {
      for (std::size_t a = 0; a < kAxes; ++a) out << ',' << format_double((*s.truth_drift)[i][a]);
    }
    if (s.truth_applied) {
      for (std::size_t a = 0; a < kAxes; ++a) {
        out << ',' << format_double((*s.truth_applied)[i][a]);
      }
    }
    out << '\n';
  }
}

Scenario load_scenario_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open scenario file " + path.string());
  return read_scenario_csv(in, path.string());
}

void save_scenario_csv(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write scenario file " + path.string());
  write_scenario_csv(s, out);
  out.flush();
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace driftcomp
