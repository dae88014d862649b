#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <variant>

#include "driftcomp/models/gru.hpp"
#include "driftcomp/models/lsm.hpp"
#include "driftcomp/models/mlp.hpp"
#include "driftcomp/models/tcn.hpp"

namespace driftcomp {

/// Every gradient-trained network family, keyed by its parameter container.
template <typename M>
concept Network = requires(const M& m, const Block<double>& x, typename M::Workspace& ws) {
  { m.forward(x, ws) } -> std::convertible_to<const Block<double>&>;
  m.check();
};

/// Same-shaped container holding d(loss)/d(parameter).
template <typename M>
using GradientBundle = M;

template <typename M>
M zeros_like(M m) {
  M::visit([](const std::string&, auto& p) { p.setZero(); }, m);
  return m;
}

/// Mean squared error over the batch and the six axes, with exact analytic
/// gradients. windows: W x B normalized temperatures; targets: 6 x B normalized drift.
template <typename M>
std::pair<double, GradientBundle<M>> backward(const M& model, const Block<double>& windows,
                                              const Block<double>& targets) {
  require(windows.cols() >= 1, ErrorKind::InvalidInput, "backward: empty batch");
  require(windows.cols() == targets.cols() && targets.rows() == static_cast<Eigen::Index>(kAxes),
          ErrorKind::InvalidInput, "backward: inputs and targets disagree in shape");
  M grad = zeros_like(model);
  typename M::Workspace ws;
  const double denom = static_cast<double>(targets.size());
  const double loss = model.backward(windows, targets, denom, grad, ws);
  return {loss, std::move(grad)};
}

using NetworkVariant =
    std::variant<LsmModel<double>, MlpModel<double>, TcnModel<double>, GruModel<double>>;

/// Default hidden width per family (MLP nodes per layer, TCN channels, GRU state).
std::size_t default_hidden(ModelFamily family);

/// A drift model of any family together with the metadata needed to turn a
/// window of physical temperatures into a physical-unit drift wrench.
struct DriftModel {
  ModelFamily family = ModelFamily::Gru;
  std::size_t window = kDefaultWindow;
  std::array<double, kAxes> axis_scale{1, 1, 1, 1, 1, 1};
  NetworkVariant net;

  void check() const;

  /// Network output for normalized windows (W x B); LSM returns physical units
  /// divided by axis_scale so every family shares the normalized convention.
  Block<double> predict_normalized(const Block<double>& windows) const;

  Wrench predict(std::span<const double> temps_c) const;
  std::vector<Wrench> predict(std::span<const TemperatureWindow> windows) const;
};

/// Deterministic pseudorandom initialisation; hidden == 0 selects the family default.
DriftModel init_model(ModelFamily family, std::uint64_t seed, std::size_t hidden = 0,
                      std::size_t window = kDefaultWindow);

/// Streaming evaluator: owns the scratch buffers so repeated calls do not allocate.
class DriftPredictor {
 public:
  explicit DriftPredictor(std::shared_ptr<const DriftModel> model);

  const DriftModel& model() const { return *model_; }
  Wrench predict(std::span<const double> temps_c);

 private:
  using WorkspaceVariant = std::variant<std::monostate, MlpModel<double>::Workspace,
                                        TcnModel<double>::Workspace, GruModel<double>::Workspace>;
  std::shared_ptr<const DriftModel> model_;
  WorkspaceVariant ws_;
  Block<double> input_;
};

// Versioned JSON document: family, architecture, normalization constants,
// axis_scale and every parameter array with its shape.
void write_model(const DriftModel& m, std::ostream& out);
DriftModel read_model(std::istream& in, const std::string& source = "<stream>");
void save_model(const DriftModel& m, const std::filesystem::path& path);
DriftModel load_model(const std::filesystem::path& path);

}  // namespace driftcomp
