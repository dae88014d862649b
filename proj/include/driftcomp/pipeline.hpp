#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <vector>

#include "driftcomp/datamodel.hpp"
#include "driftcomp/models/drift_model.hpp"

namespace driftcomp {

/// Linear map from raw ADC counts to a wrench: w = c * adc + o.
struct CalibrationMatrix {
  Matrix c = Matrix::Zero(6, 6);
  Vector o = Vector::Zero(6);

  void check() const;

  /// Diagonal sensor-like default: 0.01 N/count on fx, fy, 0.02 N/count on fz
  /// and 2e-4 N*m/count on the moment axes.
  static CalibrationMatrix default_sensor();
};

Wrench raw_to_wrench(const std::array<std::int32_t, kAxes>& adc, const CalibrationMatrix& calib);

/// Nearest-count ADC vector whose calibrated image is w (before noise).
std::array<double, kAxes> wrench_to_raw(const Wrench& w, const CalibrationMatrix& calib);

inline Wrench compensate(const Wrench& measured, const Wrench& drift) { return measured - drift; }

void write_calibration(const CalibrationMatrix& calib, std::ostream& out);
CalibrationMatrix read_calibration(std::istream& in, const std::string& source = "<stream>");
void save_calibration(const CalibrationMatrix& calib, const std::filesystem::path& path);
CalibrationMatrix load_calibration(const std::filesystem::path& path);

struct CompensatedFrame {
  Wrench raw;
  Wrench drift;
  Wrench compensated;
};

/// Streaming compensator. Temperatures go into a ring buffer of the model's
/// window length; before the buffer has filled, the missing history repeats
/// the first temperature seen.
class Compensator {
 public:
  Compensator(std::shared_ptr<const DriftModel> model, CalibrationMatrix calib);

  CompensatedFrame push_frame(const SensorFrame& frame);

  /// Oldest-first view of the current window.
  std::span<const double> window() const;
  std::size_t count_seen() const { return count_; }
  void reset();

 private:
  DriftPredictor predictor_;
  CalibrationMatrix calib_;
  std::size_t n_;
  // Each temperature is written twice, n_ apart, so the window is always a
  // contiguous span of the buffer.
  std::vector<double> buf_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

struct ScenarioRun {
  std::vector<Wrench> raw, drift, compensated;
};

/// Streams every frame of `s` through a fresh compensator.
ScenarioRun run_scenario(const Scenario& s, std::shared_ptr<const DriftModel> model,
                         const CalibrationMatrix& calib);

/// Same windows as the streaming path (including warm-up padding), evaluated
/// in one batched forward pass.
std::vector<Wrench> batch_drift(const Scenario& s, const DriftModel& model);

/// Windows over every frame with the warm-up padding used while streaming.
std::vector<TemperatureWindow> padded_windows(const Scenario& s, std::size_t window);

/// Drift labels: truth_drift when present, otherwise calibrated wrench minus
/// truth_applied.
std::vector<Wrench> drift_labels(const Scenario& s, const CalibrationMatrix& calib);

}  // namespace driftcomp
