#pragma once

#include <vector>

#include "driftcomp/models/common.hpp"

namespace driftcomp {

template <typename Scalar>
struct MlpLayer {
  MatrixX<Scalar> w;
  VectorX<Scalar> b;
};

/// Fully connected ReLU network with a linear output layer of width 6. It reads
/// the newest `input_width` entries of a temperature window: 1 for the
/// single-temperature MLP, the full window for the sequence variant.
template <typename Scalar>
struct MlpModel {
  std::vector<MlpLayer<Scalar>> layers;
  std::size_t input_width = 1;

  struct Workspace {
    std::vector<Block<Scalar>> act;  // act[0] is the input, act[i+1] the output of layer i
    Block<Scalar> dpred, delta, dnext;
  };

  template <typename F, typename... Ms>
  static void visit(F&& f, Ms&... ms) {
    const auto& first = std::get<0>(std::forward_as_tuple(ms...));
    for (std::size_t i = 0; i < first.layers.size(); ++i) {
      const std::string prefix = "layer" + std::to_string(i);
      f(prefix + ".w", ms.layers[i].w...);
      f(prefix + ".b", ms.layers[i].b...);
    }
  }

  void check() const {
    require(!layers.empty(), ErrorKind::InvalidInput, "MlpModel: no layers");
    require(layers.front().w.cols() == static_cast<Eigen::Index>(input_width),
            ErrorKind::InvalidInput, "MlpModel: first layer does not match input width");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      require(layers[i].b.size() == layers[i].w.rows(), ErrorKind::InvalidInput,
              "MlpModel: bias length does not match layer width");
      if (i > 0) {
        require(layers[i].w.cols() == layers[i - 1].w.rows(), ErrorKind::InvalidInput,
                "MlpModel: consecutive layer shapes do not chain");
      }
    }
    require(layers.back().w.rows() == static_cast<Eigen::Index>(kAxes), ErrorKind::InvalidInput,
            "MlpModel: output width must be 6");
  }

  /// windows: W x B normalized temperatures, W >= input_width.
  const Block<Scalar>& forward(const Block<Scalar>& windows, Workspace& ws) const {
    const auto in = static_cast<Eigen::Index>(input_width);
    require(windows.rows() >= in, ErrorKind::InvalidInput,
            "MlpModel: window shorter than input width");
    ws.act.resize(layers.size() + 1);
    ws.act[0] = windows.bottomRows(in);
    for (std::size_t i = 0; i < layers.size(); ++i) {
      auto& out = ws.act[i + 1];
      out.resize(layers[i].w.rows(), windows.cols());
      out.noalias() = layers[i].w * ws.act[i];
      out.colwise() += layers[i].b;
      if (i + 1 < layers.size()) out = out.cwiseMax(Scalar(0));
    }
    return ws.act.back();
  }

  /// Accumulates d(loss)/d(params) into `grad` and returns this chunk's share of
  /// the loss (sum of squared errors / denom).
  Scalar backward(const Block<Scalar>& windows, const Block<Scalar>& targets, Scalar denom,
                  MlpModel& grad, Workspace& ws) const {
    const auto& pred = forward(windows, ws);
    const Scalar loss = squared_error_grad(pred, targets, denom, ws.dpred);
    ws.delta = ws.dpred;
    for (std::size_t i = layers.size(); i-- > 0;) {
      if (i + 1 < layers.size()) {
        ws.delta = (ws.act[i + 1].array() > Scalar(0)).select(ws.delta, Scalar(0));
      }
      grad.layers[i].w.noalias() += ws.delta * ws.act[i].transpose();
      grad.layers[i].b += ws.delta.rowwise().sum();
      if (i > 0) {
        ws.dnext.noalias() = layers[i].w.transpose() * ws.delta;
        ws.delta.swap(ws.dnext);
      }
    }
    return loss;
  }
};

/// Hidden layers of `hidden` nodes each; the defaults give the 3 x 36 network.
template <typename Scalar>
MlpModel<Scalar> init_mlp(std::size_t input_width, std::size_t hidden, std::size_t hidden_layers,
                          std::uint64_t seed) {
  require(input_width >= 1 && hidden >= 1 && hidden_layers >= 1, ErrorKind::InvalidInput,
          "init_mlp: widths must be positive");
  Rng rng(seed);
  MlpModel<Scalar> m;
  m.input_width = input_width;
  auto fan_in = static_cast<Eigen::Index>(input_width);
  for (std::size_t i = 0; i <= hidden_layers; ++i) {
    const auto out = static_cast<Eigen::Index>(i == hidden_layers ? kAxes : hidden);
    MlpLayer<Scalar> layer{MatrixX<Scalar>(out, fan_in), VectorX<Scalar>(out)};
    init_uniform(layer.w, fan_in, rng);
    init_uniform(layer.b, fan_in, rng);
    m.layers.push_back(std::move(layer));
    fan_in = out;
  }
  return m;
}

/// Single-sample evaluation on already-normalized inputs.
template <typename Scalar>
VectorX<Scalar> mlp_forward(const MlpModel<Scalar>& m, const VectorX<Scalar>& x) {
  require(x.size() == static_cast<Eigen::Index>(m.input_width), ErrorKind::InvalidInput,
          "mlp_forward: input width mismatch");
  typename MlpModel<Scalar>::Workspace ws;
  return m.forward(Block<Scalar>(x), ws).col(0);
}

}  // namespace driftcomp
