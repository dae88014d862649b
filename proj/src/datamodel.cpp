#include "driftcomp/datamodel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace driftcomp {

double& Wrench::operator[](std::size_t axis) {
  switch (axis) {
    case 0: return fx;
    case 1: return fy;
    case 2: return fz;
    case 3: return mx;
    case 4: return my;
    case 5: return mz;
  }
  fail(ErrorKind::InvalidInput, "Wrench: axis index out of range");
}

double Wrench::operator[](std::size_t axis) const { return const_cast<Wrench&>(*this)[axis]; }

Wrench Wrench::from_vector(const Vector& v) {
  require(v.size() == static_cast<Eigen::Index>(kAxes), ErrorKind::InvalidInput,
          "Wrench::from_vector: expected 6 components");
  return {v(0), v(1), v(2), v(3), v(4), v(5)};
}

Vector Wrench::to_vector() const {
  Vector v(kAxes);
  v << fx, fy, fz, mx, my, mz;
  return v;
}

bool Wrench::finite() const {
  for (std::size_t a = 0; a < kAxes; ++a) {
    if (!std::isfinite((*this)[a])) return false;
  }
  return true;
}

Wrench& Wrench::operator+=(const Wrench& o) {
  for (std::size_t a = 0; a < kAxes; ++a) (*this)[a] += o[a];
  return *this;
}

Wrench& Wrench::operator-=(const Wrench& o) {
  for (std::size_t a = 0; a < kAxes; ++a) (*this)[a] -= o[a];
  return *this;
}

Wrench operator-(Wrench a) {
  for (std::size_t i = 0; i < kAxes; ++i) a[i] = -a[i];
  return a;
}

void validate_wrench(const Wrench& w, const FullScale& fs) {
  for (std::size_t a = 0; a < kAxes; ++a) {
    if (!std::isfinite(w[a])) {
      fail(ErrorKind::Validation, std::string("wrench axis ") + kAxisNames[a] + " is not finite");
    }
    if (std::abs(w[a]) > fs.range[a]) {
      std::ostringstream os;
      os << "wrench axis " << kAxisNames[a] << " = " << w[a] << " exceeds full scale "
         << fs.range[a];
      fail(ErrorKind::Validation, os.str());
    }
  }
}

TemperatureWindow::TemperatureWindow(std::vector<double> temps_c) : temps_(std::move(temps_c)) {
  require(!temps_.empty(), ErrorKind::InvalidInput, "TemperatureWindow: empty window");
  for (double t : temps_) {
    require(std::isfinite(t), ErrorKind::InvalidInput, "TemperatureWindow: non-finite temperature");
  }
}

void Scenario::validate() const {
  if (sample_rate_hz <= 0 || !std::isfinite(sample_rate_hz)) {
    fail(ErrorKind::Validation, "scenario sample_rate_hz must be positive");
  }
  auto check_truth = [&](const std::optional<std::vector<Wrench>>& truth, const char* what) {
    if (!truth) return;
    if (truth->size() != frames.size()) {
      std::ostringstream os;
      os << what << " has " << truth->size() << " rows but scenario has " << frames.size()
         << " frames";
      fail(ErrorKind::Validation, os.str());
    }
    for (std::size_t i = 0; i < truth->size(); ++i) {
      if (!(*truth)[i].finite()) {
        fail(ErrorKind::Validation, std::string(what) + " row " + std::to_string(i) +
                                        " is not finite");
      }
    }
  };
  check_truth(truth_drift, "truth_drift");
  check_truth(truth_applied, "truth_applied");

  const double dt = 1.0 / sample_rate_hz;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (!std::isfinite(f.time_s) || f.time_s < 0) {
      fail(ErrorKind::Validation, "frame " + std::to_string(i) + ": time_s must be nonnegative");
    }
    if (!std::isfinite(f.temp_c) || f.temp_c < kTemperatureMinC || f.temp_c > kTemperatureMaxC) {
      std::ostringstream os;
      os << "frame " << i << ": temperature " << f.temp_c << " C outside [" << kTemperatureMinC
         << ", " << kTemperatureMaxC << "]";
      fail(ErrorKind::Validation, os.str());
    }
    if (i > 0) {
      const double step = f.time_s - frames[i - 1].time_s;
      if (!(step > 0)) {
        fail(ErrorKind::Validation,
             "frame " + std::to_string(i) + ": time_s is not strictly increasing");
      }
      if (std::abs(step - dt) > 0.01 * dt) {
        std::ostringstream os;
        os << "frame " << i << ": sample spacing " << step << " s inconsistent with "
           << sample_rate_hz << " Hz";
        fail(ErrorKind::Validation, os.str());
      }
    }
  }
}

std::array<double, kAxes> max_abs_scale(std::span<const Wrench> targets) {
  std::array<double, kAxes> scale;
  scale.fill(1e-6);
  for (const auto& w : targets) {
    for (std::size_t a = 0; a < kAxes; ++a) scale[a] = std::max(scale[a], std::abs(w[a]));
  }
  return scale;
}

SupervisedSet windows_from_scenario(const Scenario& s, std::size_t window, std::size_t stride) {
  if (!s.truth_drift) {
    fail(ErrorKind::Labeling, "scenario '" + s.name + "' carries no drift labels");
  }
  require(window >= 1 && stride >= 1, ErrorKind::InvalidInput,
          "windows_from_scenario: window and stride must be at least 1");
  if (s.frames.size() < window) {
    std::ostringstream os;
    os << "windows_from_scenario: " << s.frames.size() << " frames is fewer than window "
       << window;
    fail(ErrorKind::InvalidInput, os.str());
  }
  SupervisedSet set;
  const auto& drift = *s.truth_drift;
  for (std::size_t i = window - 1; i < s.frames.size(); i += stride) {
    std::vector<double> temps(window);
    for (std::size_t k = 0; k < window; ++k) temps[k] = s.frames[i + 1 - window + k].temp_c;
    set.inputs.emplace_back(std::move(temps));
    set.targets.push_back(drift[i]);
  }
  set.axis_scale = max_abs_scale(set.targets);
  return set;
}

SupervisedSet slice(const SupervisedSet& set, std::size_t begin, std::size_t end) {
  require(begin <= end && end <= set.size(), ErrorKind::InvalidInput, "slice: bad range");
  SupervisedSet out;
  out.inputs.assign(set.inputs.begin() + begin, set.inputs.begin() + end);
  out.targets.assign(set.targets.begin() + begin, set.targets.begin() + end);
  out.axis_scale = set.axis_scale;
  return out;
}

double quantize_temperature(double t_c) {
  return std::nearbyint(t_c / kTemperatureLsbC) * kTemperatureLsbC;
}

}  // namespace driftcomp
