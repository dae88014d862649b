#include "driftcomp/training.hpp"

#include <cstdlib>
#include <ostream>

#include "driftcomp/scenario_csv.hpp"

namespace driftcomp {

void TrainConfig::validate() const {
  require(lr > 0 && std::isfinite(lr), ErrorKind::InvalidInput, "learning rate must be positive");
  require(batch >= 1, ErrorKind::InvalidInput, "batch size must be at least 1");
  require(beta1 > 0 && beta1 < 1 && beta2 > 0 && beta2 < 1, ErrorKind::InvalidInput,
          "Adam betas must lie in (0, 1)");
  require(eps > 0, ErrorKind::InvalidInput, "Adam epsilon must be positive");
  if (early_stop_rmse) {
    require(*early_stop_rmse >= 0, ErrorKind::InvalidInput, "early-stop RMSE must be nonnegative");
  }
}

std::size_t resolve_threads(std::size_t requested) {
  std::size_t n = requested;
  if (n == 0) {
    n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("DRIFTCOMP_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end != env && v > 0) n = std::min(n, static_cast<std::size_t>(v));
    }
  }
  return std::max<std::size_t>(n, 1);
}

TrainResult train(DriftModel model, const SupervisedSet& set, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  require(set.size() >= 1, ErrorKind::InvalidInput, "train: empty supervised set");
  require(set.window() == model.window, ErrorKind::Configuration,
          "training windows have length " + std::to_string(set.window()) + " but the model expects " +
              std::to_string(model.window));
  model.axis_scale = set.axis_scale;
  TrainResult result;
  if (model.family == ModelFamily::Lsm) {
    model.net = lsm_fit<double>(set);
  } else {
    const Block<double> x = window_block<double>(set.inputs);
    const Block<double> y = target_block<double>(set.targets, set.axis_scale);
    std::visit(
        [&](auto& net) {
          using M = std::decay_t<decltype(net)>;
          if constexpr (!std::is_same_v<M, LsmModel<double>>) {
            result.history = train_network(net, x, y, cfg, on_epoch);
          }
        },
        model.net);
  }
  model.check();
  result.model = std::move(model);
  return result;
}

double normalized_mse(const DriftModel& model, const SupervisedSet& set) {
  require(set.size() >= 1, ErrorKind::InvalidInput, "normalized_mse: empty set");
  const Block<double> x = window_block<double>(set.inputs);
  const Block<double> y = target_block<double>(set.targets, model.axis_scale);
  const Block<double> pred = model.predict_normalized(x);
  return (pred - y).squaredNorm() / static_cast<double>(y.size());
}

void write_history_csv(std::span<const double> history, std::ostream& out) {
  out << "epoch,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    out << (i + 1) << ',' << format_double(history[i]) << '\n';
  }
}

}  // namespace driftcomp
