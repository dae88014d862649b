#include "driftcomp/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "driftcomp/models/common.hpp"
#include "driftcomp/scenario_csv.hpp"

namespace driftcomp {

void ThermalModel::check() const {
  require(tau_s > 0 && std::isfinite(tau_s), ErrorKind::InvalidInput, "tau_s must be positive");
  if (t_int_0) {
    require(std::isfinite(*t_int_0), ErrorKind::InvalidInput, "t_int_0 must be finite");
  }
  for (std::size_t a = 0; a < kAxes; ++a) {
    require(std::isfinite(axis_gain[a]), ErrorKind::InvalidInput, "axis gain must be finite");
    for (double c : drift_coeffs[a]) {
      require(std::isfinite(c), ErrorKind::InvalidInput, "drift coefficients must be finite");
    }
  }
}

Wrench ThermalModel::drift(double t_int_c) const {
  const double u = t_int_c - 20.0;
  Wrench w;
  for (std::size_t a = 0; a < kAxes; ++a) {
    const auto& c = drift_coeffs[a];
    w[a] = axis_gain[a] * (u * (c[0] + u * (c[1] + u * c[2])));
  }
  return w;
}

std::string_view profile_tag(ProfileKind k) {
  switch (k) {
    case ProfileKind::ChamberCycle: return "chamber";
    case ProfileKind::Heater: return "heater";
    case ProfileKind::Ice: return "ice";
    case ProfileKind::Walking: return "walking";
    case ProfileKind::Constant: return "constant";
  }
  return "?";
}

ProfileKind parse_profile(std::string_view tag) {
  if (tag == "chamber" || tag == "chamber_cycle") return ProfileKind::ChamberCycle;
  if (tag == "heater" || tag == "heating") return ProfileKind::Heater;
  if (tag == "ice" || tag == "cooling") return ProfileKind::Ice;
  if (tag == "walking") return ProfileKind::Walking;
  if (tag == "constant") return ProfileKind::Constant;
  fail(ErrorKind::Usage, "unknown profile '" + std::string(tag) +
                             "' (expected chamber, heater, ice, walking or constant)");
}

void ProfileSpec::check() const {
  require(duration_s > 0 && std::isfinite(duration_s), ErrorKind::InvalidInput,
          "profile duration must be positive");
  require(noise_sigma_c >= 0, ErrorKind::InvalidInput, "noise sigma must be nonnegative");
  switch (kind) {
    case ProfileKind::ChamberCycle:
      require(high_c > low_c, ErrorKind::InvalidInput, "chamber high must exceed low");
      require(rate_min_c_per_s > 0 && rate_max_c_per_s >= rate_min_c_per_s,
              ErrorKind::InvalidInput, "chamber rates must be positive and ordered");
      require(dwell_max_s >= 0, ErrorKind::InvalidInput, "chamber dwell must be nonnegative");
      require(start_c >= low_c && start_c <= high_c, ErrorKind::InvalidInput,
              "chamber start must lie between low and high");
      break;
    case ProfileKind::Heater:
    case ProfileKind::Ice:
      require(ramp_s > 0 && hold_s >= 0, ErrorKind::InvalidInput,
              "ramp must be positive and hold nonnegative");
      break;
    case ProfileKind::Walking:
      require(!plate_c.empty(), ErrorKind::InvalidInput, "walking needs at least one plate");
      require(contact_s > 0 && contact_tau_s > 0 && compression > 0, ErrorKind::InvalidInput,
              "walking contact time, contact tau and compression must be positive");
      break;
    case ProfileKind::Constant: break;
  }
}

ProfileSpec ProfileSpec::defaults(ProfileKind kind) {
  ProfileSpec s;
  s.kind = kind;
  switch (kind) {
    case ProfileKind::ChamberCycle: break;
    case ProfileKind::Heater:
      s.start_c = 25.0;
      s.delta_c = 10.0;
      s.ramp_s = 200.0;
      s.duration_s = s.ramp_s + 2 * s.hold_s;
      break;
    case ProfileKind::Ice:
      s.start_c = 25.0;
      s.delta_c = -5.0;
      s.ramp_s = 300.0;
      s.duration_s = s.ramp_s + 2 * s.hold_s;
      break;
    case ProfileKind::Walking:
      s.start_c = 25.0;
      s.duration_s = static_cast<double>(s.plate_c.size()) * s.contact_s / s.compression;
      break;
    case ProfileKind::Constant:
      s.duration_s = 100.0;
      break;
  }
  return s;
}

Wrench LoadSchedule::at(double time_s) const {
  const double phase = std::fmod(time_s, period_s) / period_s;
  return phase < stance_fraction ? stance : Wrench{};
}

namespace {

struct Knot {
  double t, temp;
};

// Corner points of the chamber program, covering at least the profile duration.
std::vector<Knot> chamber_program(const ProfileSpec& s) {
  Rng rng(s.seed * 0x2545f4914f6cdd1dULL + 1);
  const double mid = 0.5 * (s.low_c + s.high_c);
  const double log_lo = std::log(s.rate_min_c_per_s);
  const double log_hi = std::log(s.rate_max_c_per_s);
  std::vector<Knot> knots{{0.0, s.start_c}};
  bool up = true;
  for (std::size_t leg = 0; knots.back().t < s.duration_s; ++leg, up = !up) {
    double target;
    if (leg == 0) {
      target = s.high_c;
    } else if (leg == 1) {
      target = s.low_c;
    } else {
      target = up ? rng.uniform(mid, s.high_c) : rng.uniform(s.low_c, mid);
    }
    const double rate = std::exp(rng.uniform(log_lo, log_hi));
    const Knot from = knots.back();
    const double t_end = from.t + std::abs(target - from.temp) / rate;
    knots.push_back({t_end, target});
    knots.push_back({t_end + rng.uniform(0.0, s.dwell_max_s), target});
  }
  return knots;
}

double interpolate(std::span<const Knot> knots, double t) {
  const auto it = std::upper_bound(knots.begin(), knots.end(), t,
                                   [](double v, const Knot& k) { return v < k.t; });
  if (it == knots.begin()) return knots.front().temp;
  if (it == knots.end()) return knots.back().temp;
  const Knot& a = *(it - 1);
  const Knot& b = *it;
  if (b.t <= a.t) return b.temp;
  return a.temp + (b.temp - a.temp) * (t - a.t) / (b.t - a.t);
}

double ramp_base(const ProfileSpec& s, double t) {
  if (t <= s.hold_s) return s.start_c;
  if (t >= s.hold_s + s.ramp_s) return s.start_c + s.delta_c;
  return s.start_c + s.delta_c * (t - s.hold_s) / s.ramp_s;
}

// Piecewise exponential approach to each plate temperature in compressed time;
// the last plate is held for any remaining time.
double walking_base(const ProfileSpec& s, double t) {
  const double contact = s.contact_s / s.compression;
  const double tau = s.contact_tau_s / s.compression;
  double temp = s.start_c;
  for (std::size_t i = 0; i < s.plate_c.size(); ++i) {
    const double t0 = static_cast<double>(i) * contact;
    const bool last = i + 1 == s.plate_c.size();
    if (t < t0 + contact || last) {
      return s.plate_c[i] + (temp - s.plate_c[i]) * std::exp(-(t - t0) / tau);
    }
    temp = s.plate_c[i] + (temp - s.plate_c[i]) * std::exp(-contact / tau);
  }
  return temp;
}

}  // namespace

std::vector<double> gen_profile(const ProfileSpec& spec, double rate_hz) {
  spec.check();
  require(rate_hz > 0 && std::isfinite(rate_hz), ErrorKind::InvalidInput,
          "sample rate must be positive");
  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * rate_hz));
  require(n >= 1, ErrorKind::InvalidInput, "profile shorter than one sample");
  Rng rng(spec.seed);
  std::vector<Knot> program;
  if (spec.kind == ProfileKind::ChamberCycle) program = chamber_program(spec);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / rate_hz;
    double base = spec.start_c;
    switch (spec.kind) {
      case ProfileKind::ChamberCycle: base = interpolate(program, t); break;
      case ProfileKind::Heater:
      case ProfileKind::Ice: base = ramp_base(spec, t); break;
      case ProfileKind::Walking: base = walking_base(spec, t); break;
      case ProfileKind::Constant: break;
    }
    out[k] = quantize_temperature(base + spec.noise_sigma_c * rng.normal());
  }
  return out;
}

std::vector<double> internal_temperature(std::span<const double> measured, const ThermalModel& tm,
                                         double dt_s) {
  tm.check();
  require(dt_s > 0, ErrorKind::InvalidInput, "dt must be positive");
  std::vector<double> out(measured.size());
  if (measured.empty()) return out;
  const double a = dt_s / tm.tau_s;
  double t_int = tm.t_int_0.value_or(measured.front());
  for (std::size_t k = 0; k < measured.size(); ++k) {
    out[k] = t_int;
    t_int += a * (measured[k] - t_int);
  }
  return out;
}

Scenario gen_scenario(const ProfileSpec& spec, const ThermalModel& tm,
                      const ScenarioOptions& opts) {
  opts.calib.check();
  require(opts.adc_noise >= 0, ErrorKind::InvalidInput, "ADC noise must be nonnegative");
  const std::vector<double> measured = gen_profile(spec, opts.rate_hz);
  const double dt = 1.0 / opts.rate_hz;
  const std::vector<double> t_int = internal_temperature(measured, tm, dt);

  Scenario s;
  s.name = std::string(profile_tag(spec.kind));
  s.sample_rate_hz = opts.rate_hz;
  s.frames.resize(measured.size());
  std::vector<Wrench> drift(measured.size()), applied(measured.size());

  // Separate stream for ADC noise so the temperature series does not depend
  // on the load or calibration options.
  Rng adc_rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto span = static_cast<std::uint64_t>(2 * opts.adc_noise + 1);
  for (std::size_t k = 0; k < measured.size(); ++k) {
    auto& f = s.frames[k];
    f.time_s = static_cast<double>(k) / opts.rate_hz;
    f.temp_c = measured[k];
    drift[k] = tm.drift(t_int[k]);
    if (opts.load) applied[k] = opts.load->at(f.time_s);
    const auto raw = wrench_to_raw(applied[k] + drift[k], opts.calib);
    for (std::size_t a = 0; a < kAxes; ++a) {
      const auto noise = static_cast<std::int64_t>(adc_rng.below(span)) - opts.adc_noise;
      f.adc[a] = static_cast<std::int32_t>(std::llround(raw[a]) + noise);
    }
  }
  s.truth_drift = std::move(drift);
  if (opts.load) s.truth_applied = std::move(applied);

  s.meta["profile"] = s.name;
  s.meta["seed"] = std::to_string(spec.seed);
  s.meta["duration_s"] = format_double(spec.duration_s);
  s.meta["noise_sigma_c"] = format_double(spec.noise_sigma_c);
  s.meta["tau_s"] = format_double(tm.tau_s);
  if (spec.kind == ProfileKind::Walking) s.meta["compression"] = format_double(spec.compression);
  if (spec.kind == ProfileKind::ChamberCycle) {
    s.meta["rate_min_c_per_s"] = format_double(spec.rate_min_c_per_s);
    s.meta["rate_max_c_per_s"] = format_double(spec.rate_max_c_per_s);
  }
  s.validate();
  return s;
}

}  // namespace driftcomp
