#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftcomp/linalg.hpp"

namespace driftcomp {

inline constexpr std::size_t kAxes = 6;
inline constexpr std::array<const char*, kAxes> kAxisNames = {"fx", "fy", "fz", "mx", "my", "mz"};

/// TMP117 temperature resolution in degrees Celsius.
inline constexpr double kTemperatureLsbC = 0.0078125;
inline constexpr double kTemperatureMinC = -55.0;
inline constexpr double kTemperatureMaxC = 125.0;

inline constexpr std::size_t kDefaultWindow = 10;

/// Six-axis force/torque value: forces in N, moments in N*m.
struct Wrench {
  double fx = 0, fy = 0, fz = 0;
  double mx = 0, my = 0, mz = 0;

  double& operator[](std::size_t axis);
  double operator[](std::size_t axis) const;

  static Wrench from_vector(const Vector& v);
  Vector to_vector() const;

  bool finite() const;

  Wrench& operator+=(const Wrench& o);
  Wrench& operator-=(const Wrench& o);
  friend Wrench operator+(Wrench a, const Wrench& b) { return a += b; }
  friend Wrench operator-(Wrench a, const Wrench& b) { return a -= b; }
  friend Wrench operator-(Wrench a);
  friend bool operator==(const Wrench&, const Wrench&) = default;
};

/// Per-axis measurement range; defaults are the sensor's rated full scale.
struct FullScale {
  std::array<double, kAxes> range = {600.0, 600.0, 2000.0, 14.0, 14.0, 20.0};
};

/// Throws Validation when a component is non-finite or exceeds the full scale.
void validate_wrench(const Wrench& w, const FullScale& fs = {});

struct SensorFrame {
  double time_s = 0;
  std::array<std::int32_t, kAxes> adc{};
  double temp_c = 0;

  friend bool operator==(const SensorFrame&, const SensorFrame&) = default;
};

/// Fixed-length temperature history, oldest sample first.
class TemperatureWindow {
 public:
  TemperatureWindow() = default;
  explicit TemperatureWindow(std::vector<double> temps_c);

  std::size_t size() const { return temps_.size(); }
  std::span<const double> temps() const { return temps_; }
  double last() const { return temps_.back(); }
  double operator[](std::size_t i) const { return temps_[i]; }

 private:
  std::vector<double> temps_;
};

struct Scenario {
  std::string name;
  double sample_rate_hz = 10.0;
  std::vector<SensorFrame> frames;
  std::optional<std::vector<Wrench>> truth_drift;
  std::optional<std::vector<Wrench>> truth_applied;
  std::map<std::string, std::string> meta;

  /// Checks time monotonicity, the temperature envelope, truth alignment, and
  /// sample spacing against sample_rate_hz (1 % tolerance).
  void validate() const;
};

struct SupervisedSet {
  std::vector<TemperatureWindow> inputs;
  std::vector<Wrench> targets;
  std::array<double, kAxes> axis_scale{1, 1, 1, 1, 1, 1};

  std::size_t size() const { return inputs.size(); }
  std::size_t window() const { return inputs.empty() ? 0 : inputs.front().size(); }
};

/// Per-axis max-abs of the targets, floored at 1e-6.
std::array<double, kAxes> max_abs_scale(std::span<const Wrench> targets);

SupervisedSet windows_from_scenario(const Scenario& s, std::size_t window = kDefaultWindow,
                                    std::size_t stride = 1);

/// Keeps the rows [begin, end) of a supervised set; axis_scale is carried over.
SupervisedSet slice(const SupervisedSet& set, std::size_t begin, std::size_t end);

/// Rounds to the nearest multiple of the TMP117 LSB.
double quantize_temperature(double t_c);

}  // namespace driftcomp
