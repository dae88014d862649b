#pragma once

#include <vector>

#include "driftcomp/models/common.hpp"

namespace driftcomp {

/// Gated recurrent unit without gate biases:
///
///   r_t = sigma(W_xr x_t + W_hr h_{t-1})
///   z_t = sigma(W_xz x_t + W_hz h_{t-1})
///   g_t = tanh(W_hg (r_t * h_{t-1}) + W_xg x_t)
///   h_t = (1 - z_t) * g_t + z_t * h_{t-1}
///
/// followed by an affine readout head_w h_T + head_b on the last hidden state.
template <typename Scalar>
struct GruModel {
  MatrixX<Scalar> w_xr, w_hr;
  MatrixX<Scalar> w_xz, w_hz;
  MatrixX<Scalar> w_xg, w_hg;
  MatrixX<Scalar> head_w;
  VectorX<Scalar> head_b;

  Eigen::Index hidden() const { return w_hr.rows(); }
  Eigen::Index input_width() const { return w_xr.cols(); }

  struct Workspace {
    // Per time step caches for backpropagation through time; h[0] is the zero state.
    std::vector<Block<Scalar>> h, r, z, g, rh;
    Block<Scalar> x_t, pre, pred;
    Block<Scalar> dpred, dh, dg, dz, dr, drh, da, dh_next;
  };

  template <typename F, typename... Ms>
  static void visit(F&& f, Ms&... ms) {
    f("w_xr", ms.w_xr...);
    f("w_hr", ms.w_hr...);
    f("w_xz", ms.w_xz...);
    f("w_hz", ms.w_hz...);
    f("w_xg", ms.w_xg...);
    f("w_hg", ms.w_hg...);
    f("head_w", ms.head_w...);
    f("head_b", ms.head_b...);
  }

  void check() const {
    const auto h = hidden();
    const auto in = input_width();
    auto shape = [](const MatrixX<Scalar>& m, Eigen::Index r, Eigen::Index c) {
      return m.rows() == r && m.cols() == c;
    };
    require(h >= 1 && in == 1, ErrorKind::InvalidInput, "GruModel: expects scalar input");
    require(shape(w_xr, h, in) && shape(w_xz, h, in) && shape(w_xg, h, in) &&
                shape(w_hr, h, h) && shape(w_hz, h, h) && shape(w_hg, h, h),
            ErrorKind::InvalidInput, "GruModel: gate matrices inconsistent with hidden width");
    require(shape(head_w, static_cast<Eigen::Index>(kAxes), h) &&
                head_b.size() == static_cast<Eigen::Index>(kAxes),
            ErrorKind::InvalidInput, "GruModel: readout must map hidden state to 6 axes");
  }

  /// One cell update for a block of samples: x_t is 1 x B, h_prev is H x B.
  void cell(const Block<Scalar>& x_t, const Block<Scalar>& h_prev, Block<Scalar>& r,
            Block<Scalar>& z, Block<Scalar>& g, Block<Scalar>& rh, Block<Scalar>& h_out,
            Block<Scalar>& pre) const {
    const auto h = hidden();
    const auto b = x_t.cols();
    pre.resize(h, b);

    pre.noalias() = w_xr * x_t;
    pre.noalias() += w_hr * h_prev;
    r = pre.unaryExpr([](Scalar v) { return sigmoid(v); });

    pre.noalias() = w_xz * x_t;
    pre.noalias() += w_hz * h_prev;
    z = pre.unaryExpr([](Scalar v) { return sigmoid(v); });

    rh = r.cwiseProduct(h_prev);
    pre.noalias() = w_hg * rh;
    pre.noalias() += w_xg * x_t;
    g = pre.array().tanh();

    h_out = g + z.cwiseProduct(h_prev - g);
  }

  /// windows: W x B normalized temperatures, folded oldest to newest from h_0 = 0.
  const Block<Scalar>& forward(const Block<Scalar>& windows, Workspace& ws) const {
    const auto steps = static_cast<std::size_t>(windows.rows());
    require(steps >= 1, ErrorKind::InvalidInput, "gru_forward: empty window");
    const auto b = windows.cols();
    ws.h.resize(steps + 1);
    ws.r.resize(steps);
    ws.z.resize(steps);
    ws.g.resize(steps);
    ws.rh.resize(steps);
    ws.h[0].setZero(hidden(), b);
    for (std::size_t t = 0; t < steps; ++t) {
      ws.x_t = windows.row(static_cast<Eigen::Index>(t));
      cell(ws.x_t, ws.h[t], ws.r[t], ws.z[t], ws.g[t], ws.rh[t], ws.h[t + 1], ws.pre);
    }
    ws.pred.resize(static_cast<Eigen::Index>(kAxes), b);
    ws.pred.noalias() = head_w * ws.h[steps];
    ws.pred.colwise() += head_b;
    return ws.pred;
  }

  Scalar backward(const Block<Scalar>& windows, const Block<Scalar>& targets, Scalar denom,
                  GruModel& grad, Workspace& ws) const {
    const auto& pred = forward(windows, ws);
    const Scalar loss = squared_error_grad(pred, targets, denom, ws.dpred);
    const auto steps = static_cast<std::size_t>(windows.rows());

    grad.head_w.noalias() += ws.dpred * ws.h[steps].transpose();
    grad.head_b += ws.dpred.rowwise().sum();
    ws.dh.noalias() = head_w.transpose() * ws.dpred;

    for (std::size_t t = steps; t-- > 0;) {
      const auto& h_prev = ws.h[t];
      const auto& r = ws.r[t];
      const auto& z = ws.z[t];
      const auto& g = ws.g[t];
      ws.x_t = windows.row(static_cast<Eigen::Index>(t));

      // h_t = (1 - z) g + z h_prev
      ws.dg = ws.dh.cwiseProduct(Block<Scalar>::Ones(z.rows(), z.cols()) - z);
      ws.dz = ws.dh.cwiseProduct(h_prev - g);
      ws.dh_next = ws.dh.cwiseProduct(z);

      // candidate: g = tanh(W_hg rh + W_xg x)
      ws.da = ws.dg.array() * (Scalar(1) - g.array().square());
      grad.w_hg.noalias() += ws.da * ws.rh[t].transpose();
      grad.w_xg.noalias() += ws.da * ws.x_t.transpose();
      ws.drh.noalias() = w_hg.transpose() * ws.da;
      ws.dr = ws.drh.cwiseProduct(h_prev);
      ws.dh_next += ws.drh.cwiseProduct(r);

      // update gate
      ws.da = ws.dz.array() * z.array() * (Scalar(1) - z.array());
      grad.w_xz.noalias() += ws.da * ws.x_t.transpose();
      grad.w_hz.noalias() += ws.da * h_prev.transpose();
      ws.dh_next.noalias() += w_hz.transpose() * ws.da;

      // reset gate
      ws.da = ws.dr.array() * r.array() * (Scalar(1) - r.array());
      grad.w_xr.noalias() += ws.da * ws.x_t.transpose();
      grad.w_hr.noalias() += ws.da * h_prev.transpose();
      ws.dh_next.noalias() += w_hr.transpose() * ws.da;

      ws.dh.swap(ws.dh_next);
    }
    return loss;
  }
};

template <typename Scalar>
GruModel<Scalar> init_gru(std::size_t hidden, std::uint64_t seed) {
  require(hidden >= 1, ErrorKind::InvalidInput, "init_gru: hidden width must be positive");
  const auto h = static_cast<Eigen::Index>(hidden);
  const auto out = static_cast<Eigen::Index>(kAxes);
  Rng rng(seed);
  GruModel<Scalar> m{MatrixX<Scalar>(h, 1), MatrixX<Scalar>(h, h), MatrixX<Scalar>(h, 1),
                     MatrixX<Scalar>(h, h), MatrixX<Scalar>(h, 1), MatrixX<Scalar>(h, h),
                     MatrixX<Scalar>(out, h), VectorX<Scalar>(out)};
  init_uniform(m.w_xr, 1, rng);
  init_uniform(m.w_hr, h, rng);
  init_uniform(m.w_xz, 1, rng);
  init_uniform(m.w_hz, h, rng);
  init_uniform(m.w_xg, 1, rng);
  init_uniform(m.w_hg, h, rng);
  init_uniform(m.head_w, h, rng);
  init_uniform(m.head_b, h, rng);
  return m;
}

/// One step of the recurrence for a single sample.
template <typename Scalar>
VectorX<Scalar> gru_cell(const GruModel<Scalar>& m, const VectorX<Scalar>& x_t,
                         const VectorX<Scalar>& h_prev) {
  require(x_t.size() == m.input_width() && h_prev.size() == m.hidden(), ErrorKind::InvalidInput,
          "gru_cell: input or state width mismatch");
  Block<Scalar> r, z, g, rh, h, pre;
  m.cell(Block<Scalar>(x_t.transpose()), Block<Scalar>(h_prev), r, z, g, rh, h, pre);
  return h.col(0);
}

}  // namespace driftcomp
