#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "driftcomp/datamodel.hpp"
#include "driftcomp/linalg.hpp"

namespace driftcomp {

/// Feature-by-sample block: one column per sample. Column-major so that runs of
/// consecutive samples (and, for the TCN, consecutive time steps) are contiguous.
template <typename Scalar>
using Block = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class ModelFamily { Lsm, Mlp, MlpSeq, Tcn, Gru };

inline constexpr std::array<ModelFamily, 5> kAllFamilies = {
    ModelFamily::Lsm, ModelFamily::Mlp, ModelFamily::MlpSeq, ModelFamily::Tcn, ModelFamily::Gru};

/// Short tag used on the command line and in model files.
std::string_view family_tag(ModelFamily f);
/// Row label used in reports.
std::string_view family_label(ModelFamily f);
ModelFamily parse_family(std::string_view tag);

// Temperatures enter every network as (t - 20) / 40, which maps the chamber
// range [-20, 60] C onto [-1, 1].
inline constexpr double kTempCenterC = 20.0;
inline constexpr double kTempHalfRangeC = 40.0;

template <typename Scalar>
Scalar normalize_temperature(double t_c) {
  return static_cast<Scalar>((t_c - kTempCenterC) / kTempHalfRangeC);
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

/// Mean squared error over every entry and its gradient, with an explicit
/// denominator so that disjoint column chunks sum to the full-batch result.
template <typename Scalar>
Scalar squared_error_grad(const Block<Scalar>& pred, const Block<Scalar>& target, Scalar denom,
                          Block<Scalar>& dpred) {
  dpred = pred - target;
  const Scalar sse = dpred.squaredNorm();
  dpred *= Scalar(2) / denom;
  return sse / denom;
}

/// Portable pseudorandom stream: mt19937_64 with an explicit bit-to-real map, so
/// parameter initialisation is identical across standard-library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller on the portable uniform map.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Fills `m` uniformly in +-sqrt(1 / fan_in).
template <typename Derived>
void init_uniform(Eigen::DenseBase<Derived>& m, Eigen::Index fan_in, Rng& rng) {
  using Scalar = typename Derived::Scalar;
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m.derived()(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
    }
  }
}

/// Loads physical-unit windows (each oldest-first) as normalized columns.
template <typename Scalar>
Block<Scalar> window_block(std::span<const TemperatureWindow> windows) {
  require(!windows.empty(), ErrorKind::InvalidInput, "window_block: no windows");
  const auto w = static_cast<Eigen::Index>(windows.front().size());
  Block<Scalar> x(w, static_cast<Eigen::Index>(windows.size()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const auto& win = windows[static_cast<std::size_t>(c)];
    require(static_cast<Eigen::Index>(win.size()) == w, ErrorKind::InvalidInput,
            "window_block: windows differ in length");
    for (Eigen::Index r = 0; r < w; ++r) {
      x(r, c) = normalize_temperature<Scalar>(win[static_cast<std::size_t>(r)]);
    }
  }
  return x;
}

/// Targets divided by the per-axis scale, one column per sample.
template <typename Scalar>
Block<Scalar> target_block(std::span<const Wrench> targets,
                           const std::array<double, kAxes>& axis_scale) {
  Block<Scalar> y(static_cast<Eigen::Index>(kAxes), static_cast<Eigen::Index>(targets.size()));
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    for (std::size_t a = 0; a < kAxes; ++a) {
      y(static_cast<Eigen::Index>(a), c) =
          static_cast<Scalar>(targets[static_cast<std::size_t>(c)][a] / axis_scale[a]);
    }
  }
  return y;
}

}  // namespace driftcomp
