#include "driftcomp/pipeline.hpp"

#include <fstream>
#include <json.hpp>

namespace driftcomp {

using json = nlohmann::json;

namespace {
constexpr int kCalibrationFormatVersion = 1;
}

void CalibrationMatrix::check() const {
  require(c.rows() == 6 && c.cols() == 6, ErrorKind::InvalidInput,
          "calibration matrix must be 6x6");
  require(o.size() == 6, ErrorKind::InvalidInput, "calibration offset must have 6 entries");
  require(all_finite(c) && all_finite(o), ErrorKind::InvalidInput,
          "calibration contains non-finite values");
}

CalibrationMatrix CalibrationMatrix::default_sensor() {
  CalibrationMatrix cal;
  cal.c.diagonal() << 0.01, 0.01, 0.02, 2e-4, 2e-4, 2e-4;
  return cal;
}

Wrench raw_to_wrench(const std::array<std::int32_t, kAxes>& adc, const CalibrationMatrix& calib) {
  Vector x(6);
  for (std::size_t a = 0; a < kAxes; ++a) x(static_cast<Eigen::Index>(a)) = adc[a];
  return Wrench::from_vector(calib.c * x + calib.o);
}

std::array<double, kAxes> wrench_to_raw(const Wrench& w, const CalibrationMatrix& calib) {
  const Matrix rhs = w.to_vector() - calib.o;
  const Matrix x = solve_least_squares<double>(calib.c, rhs, 0.0);
  std::array<double, kAxes> out{};
  for (std::size_t a = 0; a < kAxes; ++a) out[a] = x(static_cast<Eigen::Index>(a), 0);
  return out;
}

void write_calibration(const CalibrationMatrix& calib, std::ostream& out) {
  calib.check();
  json doc;
  doc["format"] = "driftcomp-calibration";
  doc["version"] = kCalibrationFormatVersion;
  json rows = json::array();
  for (Eigen::Index i = 0; i < 6; ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < 6; ++j) row.push_back(calib.c(i, j));
    rows.push_back(row);
  }
  doc["c"] = rows;
  doc["o"] = std::vector<double>(calib.o.data(), calib.o.data() + 6);
  out << doc.dump(1) << '\n';
}

CalibrationMatrix read_calibration(std::istream& in, const std::string& source) {
  try {
    const json doc = json::parse(in);
    require(doc.at("format") == "driftcomp-calibration", ErrorKind::Parse,
            source + ": not a calibration file");
    require(doc.at("version").get<int>() == kCalibrationFormatVersion, ErrorKind::Parse,
            source + ": unsupported calibration version");
    CalibrationMatrix cal;
    const auto& rows = doc.at("c");
    require(rows.size() == 6, ErrorKind::Parse, source + ": c must have 6 rows");
    for (std::size_t i = 0; i < 6; ++i) {
      require(rows[i].size() == 6, ErrorKind::Parse, source + ": c must have 6 columns");
      for (std::size_t j = 0; j < 6; ++j) {
        cal.c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
      }
    }
    const auto o = doc.at("o").get<std::vector<double>>();
    require(o.size() == 6, ErrorKind::Parse, source + ": o must have 6 entries");
    for (std::size_t i = 0; i < 6; ++i) cal.o(static_cast<Eigen::Index>(i)) = o[i];
    cal.check();
    return cal;
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, source + ": malformed calibration: " + e.what());
  } catch (const Error& e) {
    throw Error(e.kind() == ErrorKind::InvalidInput ? ErrorKind::Parse : e.kind(), e.what());
  }
}

void save_calibration(const CalibrationMatrix& calib, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write calibration file " + path.string());
  write_calibration(calib, out);
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

CalibrationMatrix load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open calibration file " + path.string());
  return read_calibration(in, path.string());
}

Compensator::Compensator(std::shared_ptr<const DriftModel> model, CalibrationMatrix calib)
    : predictor_(std::move(model)), calib_(std::move(calib)), n_(predictor_.model().window),
      buf_(2 * n_, 0.0) {
  calib_.check();
}

void Compensator::reset() {
  head_ = 0;
  count_ = 0;
}

std::span<const double> Compensator::window() const {
  if (count_ == 0) return {};
  return std::span<const double>(buf_).subspan(head_, n_);
}

CompensatedFrame Compensator::push_frame(const SensorFrame& frame) {
  require(std::isfinite(frame.temp_c), ErrorKind::Validation, "frame temperature not finite");
  if (count_ == 0) {
    std::fill(buf_.begin(), buf_.end(), frame.temp_c);
    head_ = 0;
  } else {
    // head_ indexes the oldest sample; overwrite it and advance.
    buf_[head_] = frame.temp_c;
    buf_[head_ + n_] = frame.temp_c;
    head_ = head_ + 1 == n_ ? 0 : head_ + 1;
  }
  ++count_;
  CompensatedFrame out;
  out.raw = raw_to_wrench(frame.adc, calib_);
  out.drift = predictor_.predict(window());
  out.compensated = compensate(out.raw, out.drift);
  return out;
}

ScenarioRun run_scenario(const Scenario& s, std::shared_ptr<const DriftModel> model,
                         const CalibrationMatrix& calib) {
  require(!s.frames.empty(), ErrorKind::InvalidInput, "run_scenario: no frames");
  Compensator comp(std::move(model), calib);
  ScenarioRun run;
  run.raw.reserve(s.frames.size());
  run.drift.reserve(s.frames.size());
  run.compensated.reserve(s.frames.size());
  for (const auto& f : s.frames) {
    const auto r = comp.push_frame(f);
    run.raw.push_back(r.raw);
    run.drift.push_back(r.drift);
    run.compensated.push_back(r.compensated);
  }
  return run;
}

std::vector<TemperatureWindow> padded_windows(const Scenario& s, std::size_t window) {
  require(window >= 1, ErrorKind::InvalidInput, "window must be at least 1");
  std::vector<TemperatureWindow> out;
  out.reserve(s.frames.size());
  std::vector<double> temps(window);
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    for (std::size_t k = 0; k < window; ++k) {
      const std::size_t back = window - 1 - k;
      temps[k] = s.frames[i >= back ? i - back : 0].temp_c;
    }
    out.emplace_back(temps);
  }
  return out;
}

std::vector<Wrench> batch_drift(const Scenario& s, const DriftModel& model) {
  return model.predict(padded_windows(s, model.window));
}

std::vector<Wrench> drift_labels(const Scenario& s, const CalibrationMatrix& calib) {
  if (s.truth_drift) return *s.truth_drift;
  require(s.truth_applied.has_value(), ErrorKind::Labeling,
          "scenario '" + s.name + "' has neither drift nor applied-load truth");
  std::vector<Wrench> out;
  out.reserve(s.frames.size());
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    out.push_back(raw_to_wrench(s.frames[i].adc, calib) - (*s.truth_applied)[i]);
  }
  return out;
}

}  // namespace driftcomp
