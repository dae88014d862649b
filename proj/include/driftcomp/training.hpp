#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "driftcomp/models/drift_model.hpp"

namespace driftcomp {

struct TrainConfig {
  double lr = 0.001;
  std::size_t batch = 128;
  std::size_t max_epochs = 2000;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::optional<double> early_stop_rmse;
  /// Worker cap for batch-gradient evaluation; 0 reads DRIFTCOMP_THREADS (default:
  /// hardware concurrency). Results do not depend on this value.
  std::size_t threads = 0;

  void validate() const;
};

/// Worker count after applying DRIFTCOMP_THREADS.
std::size_t resolve_threads(std::size_t requested);

template <typename M>
struct AdamState {
  M m;
  M v;
  std::uint64_t step = 0;

  explicit AdamState(const M& params) : m(zeros_like(params)), v(zeros_like(params)) {}
};

/// Standard bias-corrected Adam update, applied in place.
template <typename M>
void adam_step(M& params, const GradientBundle<M>& grads, AdamState<M>& state,
               const TrainConfig& cfg) {
  M::visit(
      [](const std::string& name, const auto& g) {
        if (!all_finite(g)) fail(ErrorKind::Divergence, "non-finite gradient in parameter " + name);
      },
      const_cast<M&>(grads));
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  M::visit(
      [&](const std::string&, auto& p, auto& g, auto& m, auto& v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseAbs2();
        p.array() -= cfg.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.eps);
      },
      params, const_cast<M&>(grads), state.m, state.v);
}

/// Samples per gradient chunk. Chunks are reduced in index order, so the batch
/// gradient is the same whether chunks run on one worker or many.
inline constexpr Eigen::Index kGradientChunk = 64;

/// Full-batch loss and gradient for the columns listed in `cols`.
template <typename M>
double batch_gradient(const M& model, const Block<double>& x, const Block<double>& y,
                      std::span<const std::size_t> cols, GradientBundle<M>& grad,
                      std::size_t threads) {
  const auto n = static_cast<Eigen::Index>(cols.size());
  const double denom = static_cast<double>(n) * static_cast<double>(kAxes);
  const Eigen::Index chunks = (n + kGradientChunk - 1) / kGradientChunk;

  struct Partial {
    M grad;
    double loss = 0;
    Block<double> xb, yb;
    typename M::Workspace ws;
  };
  std::vector<Partial> parts(static_cast<std::size_t>(chunks));
  auto work = [&](Eigen::Index c) {
    auto& p = parts[static_cast<std::size_t>(c)];
    const Eigen::Index begin = c * kGradientChunk;
    const Eigen::Index len = std::min(kGradientChunk, n - begin);
    p.xb.resize(x.rows(), len);
    p.yb.resize(y.rows(), len);
    for (Eigen::Index k = 0; k < len; ++k) {
      const auto col = static_cast<Eigen::Index>(cols[static_cast<std::size_t>(begin + k)]);
      p.xb.col(k) = x.col(col);
      p.yb.col(k) = y.col(col);
    }
    p.grad = zeros_like(model);
    p.loss = model.backward(p.xb, p.yb, denom, p.grad, p.ws);
  };

  const auto workers = std::min<std::size_t>(std::max<std::size_t>(threads, 1),
                                             static_cast<std::size_t>(chunks));
  if (workers <= 1) {
    for (Eigen::Index c = 0; c < chunks; ++c) work(c);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (auto c = static_cast<Eigen::Index>(w); c < chunks;
             c += static_cast<Eigen::Index>(workers)) {
          work(c);
        }
      });
    }
  }

  grad = std::move(parts.front().grad);
  double loss = parts.front().loss;
  for (std::size_t c = 1; c < parts.size(); ++c) {
    M::visit([](const std::string&, auto& acc, auto& part) { acc += part; }, grad, parts[c].grad);
    loss += parts[c].loss;
  }
  return loss;
}

/// Mean squared error of the model over all columns (forward only).
template <typename M>
double dataset_loss(const M& model, const Block<double>& x, const Block<double>& y) {
  constexpr Eigen::Index kChunk = 1024;
  typename M::Workspace ws;
  double sse = 0;
  for (Eigen::Index begin = 0; begin < x.cols(); begin += kChunk) {
    const Eigen::Index len = std::min(kChunk, x.cols() - begin);
    const Block<double> xb = x.middleCols(begin, len);
    const auto& pred = model.forward(xb, ws);
    sse += (pred - y.middleCols(begin, len)).squaredNorm();
  }
  return sse / static_cast<double>(y.size());
}

struct EpochReport {
  std::size_t epoch;
  double loss;
};
using EpochCallback = std::function<void(const EpochReport&)>;

/// Mini-batch Adam on normalized windows x (W x N) and targets y (6 x N). The
/// history holds the full-set loss after each epoch; the parameters with the
/// lowest such loss are returned in `model`.
template <typename M>
std::vector<double> train_network(M& model, const Block<double>& x, const Block<double>& y,
                                  const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(x.cols());
  require(n >= 1, ErrorKind::InvalidInput, "train: empty training set");
  require(y.cols() == x.cols(), ErrorKind::InvalidInput, "train: inputs and targets differ");
  const std::size_t threads = resolve_threads(cfg.threads);

  Rng shuffle_rng(cfg.seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  AdamState<M> adam(model);
  GradientBundle<M> grad = zeros_like(model);
  M best = model;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<double> history;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    for (std::size_t begin = 0; begin < n; begin += cfg.batch) {
      const std::size_t len = std::min(cfg.batch, n - begin);
      const double loss = batch_gradient(model, x, y, std::span(order).subspan(begin, len), grad,
                                         threads);
      if (!std::isfinite(loss)) {
        fail(ErrorKind::Divergence, "training diverged in epoch " + std::to_string(epoch + 1));
      }
      adam_step(model, grad, adam, cfg);
    }
    const double loss = dataset_loss(model, x, y);
    if (!std::isfinite(loss)) {
      fail(ErrorKind::Divergence, "training diverged in epoch " + std::to_string(epoch + 1));
    }
    history.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best = model;
    }
    if (on_epoch) on_epoch({epoch + 1, loss});
    if (cfg.early_stop_rmse && std::sqrt(loss) <= *cfg.early_stop_rmse) break;
  }
  model = std::move(best);
  return history;
}

struct TrainResult {
  DriftModel model;
  std::vector<double> history;
};

/// Fits any family on a supervised set: closed-form least squares for LSM
/// (empty history), Adam for the networks. The set's axis_scale is stored in
/// the model.
TrainResult train(DriftModel model, const SupervisedSet& set, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Mean squared error of a model on a supervised set, in normalized units.
double normalized_mse(const DriftModel& model, const SupervisedSet& set);

/// Writes `epoch,loss` rows.
void write_history_csv(std::span<const double> history, std::ostream& out);

}  // namespace driftcomp
