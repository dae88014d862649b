#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "driftcomp/datamodel.hpp"
#include "driftcomp/pipeline.hpp"

namespace driftcomp {

/// Per-axis root-mean-square error, N for forces and N*m for moments.
using AxisRmse = Wrench;

AxisRmse rmse_axes(std::span<const Wrench> pred, std::span<const Wrench> truth);

/// 100 * rmse / range per axis.
std::array<double, kAxes> full_scale_pct(const AxisRmse& r, const FullScale& fs = {});

inline constexpr const char* kNoCompensation = "No compensation";

struct ComparisonRow {
  std::string method;
  AxisRmse rmse;
};

struct ComparisonReport {
  std::string scenario;
  std::map<std::string, std::string> meta;
  std::vector<ComparisonRow> rows;
  /// Row with the lowest mean full-scale percentage, and its percentages.
  std::string best_method;
  std::array<double, kAxes> best_full_scale_pct{};

  const ComparisonRow& row(const std::string& method) const;
};

struct MethodRun {
  std::string method;
  std::vector<Wrench> drift;
};

struct Comparison {
  ComparisonReport report;
  std::vector<Wrench> raw;
  std::vector<Wrench> truth_drift;
  std::vector<MethodRun> runs;
};

/// Runs the streaming pipeline for each model and scores the compensated
/// wrench against the applied load (zero when the scenario has none). Rows
/// follow the fixed order No compensation, LSM, MLP, MLP-Seq, TCN, GRU.
Comparison compare_methods(const Scenario& s, const std::vector<DriftModel>& models,
                           const CalibrationMatrix& calib);

/// Aligned text table with 4 decimals and unit labels.
void write_report_table(const ComparisonReport& r, std::ostream& out);
/// `method,fx,fy,fz,mx,my,mz` with `# meta:` header lines.
void write_report_csv(const ComparisonReport& r, std::ostream& out);
/// Long-format `time_s,axis,value,series` rows for plotting.
void write_plot_csv(const Scenario& s, const Comparison& c, std::ostream& out);

}  // namespace driftcomp
