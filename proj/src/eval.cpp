#include "driftcomp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "driftcomp/scenario_csv.hpp"

namespace driftcomp {

AxisRmse rmse_axes(std::span<const Wrench> pred, std::span<const Wrench> truth) {
  require(!pred.empty(), ErrorKind::InvalidInput, "rmse_axes: empty input");
  require(pred.size() == truth.size(), ErrorKind::InvalidInput,
          "rmse_axes: " + std::to_string(pred.size()) + " predictions vs " +
              std::to_string(truth.size()) + " truth values");
  AxisRmse out;
  for (std::size_t a = 0; a < kAxes; ++a) {
    double sum = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double e = pred[i][a] - truth[i][a];
      sum += e * e;
    }
    out[a] = std::sqrt(sum / static_cast<double>(pred.size()));
  }
  return out;
}

std::array<double, kAxes> full_scale_pct(const AxisRmse& r, const FullScale& fs) {
  std::array<double, kAxes> out{};
  for (std::size_t a = 0; a < kAxes; ++a) {
    require(fs.range[a] > 0, ErrorKind::InvalidInput,
            std::string("full-scale range for ") + kAxisNames[a] + " must be positive");
    out[a] = 100.0 * r[a] / fs.range[a];
  }
  return out;
}

const ComparisonRow& ComparisonReport::row(const std::string& method) const {
  for (const auto& r : rows) {
    if (r.method == method) return r;
  }
  fail(ErrorKind::InvalidInput, "report has no row '" + method + "'");
}

Comparison compare_methods(const Scenario& s, const std::vector<DriftModel>& models,
                           const CalibrationMatrix& calib) {
  require(!s.frames.empty(), ErrorKind::InvalidInput, "compare_methods: scenario has no frames");
  require(s.truth_drift || s.truth_applied, ErrorKind::Labeling,
          "compare_methods: scenario '" + s.name + "' carries no ground truth");
  std::vector<const DriftModel*> ordered;
  for (auto family : kAllFamilies) {
    const DriftModel* found = nullptr;
    for (const auto& m : models) {
      if (m.family != family) continue;
      require(found == nullptr, ErrorKind::Usage,
              "more than one " + std::string(family_label(family)) + " model given");
      found = &m;
    }
    if (found) ordered.push_back(found);
  }

  Comparison c;
  const std::vector<Wrench> applied =
      s.truth_applied ? *s.truth_applied : std::vector<Wrench>(s.frames.size());
  c.truth_drift = drift_labels(s, calib);
  c.raw.reserve(s.frames.size());
  for (const auto& f : s.frames) c.raw.push_back(raw_to_wrench(f.adc, calib));

  auto& rep = c.report;
  rep.scenario = s.name;
  rep.meta = s.meta;
  rep.rows.push_back({kNoCompensation, rmse_axes(c.raw, applied)});
  for (const DriftModel* m : ordered) {
    auto run = run_scenario(s, std::make_shared<const DriftModel>(*m), calib);
    rep.rows.push_back({std::string(family_label(m->family)), rmse_axes(run.compensated, applied)});
    c.runs.push_back({rep.rows.back().method, std::move(run.drift)});
  }

  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : rep.rows) {
    const auto pct = full_scale_pct(r.rmse);
    double mean = 0;
    for (double p : pct) mean += p / static_cast<double>(kAxes);
    if (mean < best) {
      best = mean;
      rep.best_method = r.method;
      rep.best_full_scale_pct = pct;
    }
  }
  return c;
}

namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

void write_report_table(const ComparisonReport& r, std::ostream& out) {
  out << "Scenario: " << r.scenario;
  if (auto it = r.meta.find("seed"); it != r.meta.end()) out << " (seed " << it->second << ")";
  out << "\nRMSE per axis; forces in N, moments in N*m\n\n";
  std::size_t name_w = 6;
  for (const auto& row : r.rows) name_w = std::max(name_w, row.method.size());
  constexpr int kCol = 11;
  auto pad_left = [&](const std::string& s, std::size_t w) {
    return std::string(w > s.size() ? w - s.size() : 0, ' ') + s;
  };
  out << "Method" << std::string(name_w - 6, ' ');
  const std::array<const char*, kAxes> heads = {"Fx [N]",   "Fy [N]",   "Fz [N]",
                                                "Mx [N*m]", "My [N*m]", "Mz [N*m]"};
  for (const char* h : heads) out << pad_left(h, kCol);
  out << '\n';
  for (const auto& row : r.rows) {
    out << row.method << std::string(name_w - row.method.size(), ' ');
    for (std::size_t a = 0; a < kAxes; ++a) out << pad_left(fixed4(row.rmse[a]), kCol);
    out << '\n';
  }
  if (!r.best_method.empty()) {
    out << "\nFull-scale error of " << r.best_method << " [%]:";
    for (std::size_t a = 0; a < kAxes; ++a) {
      out << ' ' << kAxisNames[a] << '=' << fixed4(r.best_full_scale_pct[a]);
    }
    out << '\n';
  }
}

void write_report_csv(const ComparisonReport& r, std::ostream& out) {
  out << "# meta: scenario=" << r.scenario << '\n';
  for (const auto& [k, v] : r.meta) out << "# meta: " << k << '=' << v << '\n';
  out << "# units: fx,fy,fz in N; mx,my,mz in N*m\n";
  out << "method,fx,fy,fz,mx,my,mz\n";
  for (const auto& row : r.rows) {
    out << row.method;
    for (std::size_t a = 0; a < kAxes; ++a) out << ',' << fixed4(row.rmse[a]);
    out << '\n';
  }
}

void write_plot_csv(const Scenario& s, const Comparison& c, std::ostream& out) {
  out << "time_s,axis,value,series\n";
  auto emit = [&](const std::vector<Wrench>& series, const std::string& name) {
    for (std::size_t i = 0; i < series.size(); ++i) {
      const std::string t = format_double(s.frames[i].time_s);
      for (std::size_t a = 0; a < kAxes; ++a) {
        out << t << ',' << kAxisNames[a] << ',' << format_double(series[i][a]) << ',' << name
            << '\n';
      }
    }
  };
  emit(c.raw, "raw");
  emit(c.truth_drift, "truth_drift");
  for (const auto& run : c.runs) emit(run.drift, "drift:" + run.method);
  out.flush();
}

}  // namespace driftcomp
