#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "driftcomp/datamodel.hpp"
#include "driftcomp/pipeline.hpp"

namespace driftcomp {

/// Ground-truth drift source: the internal temperature follows the measured
/// case temperature through a first-order lag, and drift on each axis is a
/// cubic in (internal - 20 C) with no constant term.
struct ThermalModel {
  double tau_s = 2.0;
  /// Initial internal temperature; defaults to the first measured sample.
  std::optional<double> t_int_0;
  /// Per-axis coefficients of u, u^2, u^3 with u = T_int - 20.
  std::array<std::array<double, 3>, kAxes> drift_coeffs = {{
      {0.5, 0.004, 0.0002},
      {0.35, -0.003, 0.00015},
      {1.2, 0.02, 0.0009},
      {0.012, 0.0001, 0.000006},
      {0.015, -0.0001, 0.000006},
      {0.008, 0.00005, 0.000003},
  }};
  std::array<double, kAxes> axis_gain = {1, 1, 1, 1, 1, 1};

  void check() const;
  Wrench drift(double t_int_c) const;
};

enum class ProfileKind { ChamberCycle, Heater, Ice, Walking, Constant };

std::string_view profile_tag(ProfileKind k);
ProfileKind parse_profile(std::string_view tag);

struct ProfileSpec {
  ProfileKind kind = ProfileKind::ChamberCycle;
  double duration_s = 2000.0;
  std::uint64_t seed = 1;
  double noise_sigma_c = 0.05;

  // constant level, and starting temperature of the other kinds
  double start_c = 20.0;

  // chamber_cycle: linear sweeps from start_c up to high_c, down to low_c,
  // then alternating between random points of the upper and lower halves.
  // Each sweep has its own rate, log-uniform in [rate_min, rate_max], and is
  // followed by a dwell of up to dwell_max_s.
  double low_c = -20.0;
  double high_c = 60.0;
  double rate_min_c_per_s = 0.1;
  double rate_max_c_per_s = 5.0;
  double dwell_max_s = 30.0;

  // heater / ice: hold, ramp by delta_c over ramp_s, then hold
  double delta_c = 10.0;
  double ramp_s = 200.0;
  double hold_s = 20.0;

  // walking: plate contacts of contact_s each (uncompressed), with the case
  // approaching the plate temperature exponentially
  std::vector<double> plate_c = {-20.0, 70.0, -20.0};
  double contact_s = 1200.0;
  double contact_tau_s = 600.0;
  double compression = 60.0;

  void check() const;

  /// Kind-specific defaults (durations and ramps of each protocol).
  static ProfileSpec defaults(ProfileKind kind);
};

/// Square-wave stance/swing load applied during walking.
struct LoadSchedule {
  double period_s = 1.0;
  double stance_fraction = 0.6;
  Wrench stance = {15.0, 5.0, 300.0, 0.5, 0.8, 0.1};

  Wrench at(double time_s) const;
};

/// Measured (case) temperature samples, quantized to the sensor LSB.
std::vector<double> gen_profile(const ProfileSpec& spec, double rate_hz);

/// Exact discrete first-order lag; out[0] = t_int_0 (or measured[0]).
std::vector<double> internal_temperature(std::span<const double> measured, const ThermalModel& tm,
                                         double dt_s);

struct ScenarioOptions {
  double rate_hz = 10.0;
  std::optional<LoadSchedule> load;
  CalibrationMatrix calib = CalibrationMatrix::default_sensor();
  /// ADC noise is uniform over the integers in [-adc_noise, adc_noise].
  int adc_noise = 2;
};

Scenario gen_scenario(const ProfileSpec& spec, const ThermalModel& tm,
                      const ScenarioOptions& opts = {});

}  // namespace driftcomp
