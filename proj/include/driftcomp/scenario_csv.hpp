#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "driftcomp/datamodel.hpp"

namespace driftcomp {

// Scenario CSV layout:
//
//   # name: <scenario name>             (optional comment lines before the header)
//   # sample_rate_hz: <rate>
//   # meta.<key>: <value>
//   time_s,adc1,...,adc6,temp_c[,dfx,...,dmz][,afx,...,amz]
//
// Numbers are written in shortest round-trip form, so load(save(s)) == s.

/// Column layout decoded from a header line; parses data rows one at a time so
/// the streaming compensator can consume standard input incrementally.
class ScenarioCsvLayout {
 public:
  static ScenarioCsvLayout from_header(const std::string& header, std::size_t line_no);

  bool has_drift() const { return has_drift_; }
  bool has_applied() const { return has_applied_; }

  struct Row {
    SensorFrame frame;
    Wrench drift;
    Wrench applied;
  };
  Row parse_row(const std::string& line, std::size_t line_no) const;

  static std::string header(bool drift, bool applied);

 private:
  bool has_drift_ = false;
  bool has_applied_ = false;
};

Scenario read_scenario_csv(std::istream& in, const std::string& source = "<stream>");
void write_scenario_csv(const Scenario& s, std::ostream& out);

Scenario load_scenario_csv(const std::filesystem::path& path);
void save_scenario_csv(const Scenario& s, const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace driftcomp
