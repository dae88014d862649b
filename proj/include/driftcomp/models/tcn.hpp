#pragma once

#include <numeric>
#include <vector>

#include "driftcomp/models/common.hpp"

namespace driftcomp {

/// Causal dilated 1-D convolution. taps[j] (out x in) multiplies the input
/// (kernel - 1 - j) * dilation steps before the output time, so taps.back()
/// sees the current sample.
template <typename Scalar>
struct CausalConv {
  std::vector<MatrixX<Scalar>> taps;
  VectorX<Scalar> bias;
  Eigen::Index dilation = 1;

  Eigen::Index kernel() const { return static_cast<Eigen::Index>(taps.size()); }
  Eigen::Index shrink() const { return (kernel() - 1) * dilation; }
};

template <typename Scalar>
struct TcnBlock {
  CausalConv<Scalar> conv1, conv2;
  // 1x1 projection on the residual path, present only when channel counts differ.
  MatrixX<Scalar> res_w;
  VectorX<Scalar> res_b;

  bool projected() const { return res_w.size() > 0; }
};

/// Residual stack of dilated causal convolutions with a linear head on the
/// last time step. Activations are laid out time-major: a sequence of L steps
/// for B samples is a C x (L * B) block whose t-th run of B columns holds step t.
template <typename Scalar>
struct TcnModel {
  std::vector<TcnBlock<Scalar>> blocks;
  MatrixX<Scalar> head_w;
  VectorX<Scalar> head_b;

  Eigen::Index channels() const { return head_w.cols(); }

  /// Trailing samples that can influence the output at the last step.
  Eigen::Index receptive_field() const {
    Eigen::Index rf = 1;
    for (const auto& b : blocks) rf += b.conv1.shrink() + b.conv2.shrink();
    return rf;
  }

  struct BlockCache {
    Block<Scalar> input, h1, h2, out;
  };
  struct Workspace {
    std::vector<BlockCache> cache;
    Block<Scalar> seq, last, pred;
    Block<Scalar> dpred, dout, dsum, dh, dh1, dinput;
  };

  template <typename F, typename... Ms>
  static void visit(F&& f, Ms&... ms) {
    const auto& first = std::get<0>(std::forward_as_tuple(ms...));
    for (std::size_t i = 0; i < first.blocks.size(); ++i) {
      const std::string p = "block" + std::to_string(i);
      for (std::size_t j = 0; j < first.blocks[i].conv1.taps.size(); ++j) {
        f(p + ".conv1.tap" + std::to_string(j), ms.blocks[i].conv1.taps[j]...);
      }
      f(p + ".conv1.bias", ms.blocks[i].conv1.bias...);
      for (std::size_t j = 0; j < first.blocks[i].conv2.taps.size(); ++j) {
        f(p + ".conv2.tap" + std::to_string(j), ms.blocks[i].conv2.taps[j]...);
      }
      f(p + ".conv2.bias", ms.blocks[i].conv2.bias...);
      if (first.blocks[i].projected()) {
        f(p + ".res_w", ms.blocks[i].res_w...);
        f(p + ".res_b", ms.blocks[i].res_b...);
      }
    }
    f("head_w", ms.head_w...);
    f("head_b", ms.head_b...);
  }

  void check() const {
    require(!blocks.empty(), ErrorKind::InvalidInput, "TcnModel: no residual blocks");
    Eigen::Index in = 1;
    Eigen::Index prev_dilation = 0;
    for (const auto& b : blocks) {
      const Eigen::Index c = b.conv1.bias.size();
      for (const auto* conv : {&b.conv1, &b.conv2}) {
        require(conv->kernel() >= 1 && conv->dilation >= 1, ErrorKind::InvalidInput,
                "TcnModel: kernel and dilation must be positive");
        require(conv->bias.size() == c, ErrorKind::InvalidInput,
                "TcnModel: inconsistent channel count");
      }
      for (const auto& w : b.conv1.taps) {
        require(w.rows() == c && w.cols() == in, ErrorKind::InvalidInput,
                "TcnModel: conv1 tap shape mismatch");
      }
      for (const auto& w : b.conv2.taps) {
        require(w.rows() == c && w.cols() == c, ErrorKind::InvalidInput,
                "TcnModel: conv2 tap shape mismatch");
      }
      require(b.projected() == (in != c), ErrorKind::InvalidInput,
              "TcnModel: residual projection required exactly when channels change");
      if (b.projected()) {
        require(b.res_w.rows() == c && b.res_w.cols() == in && b.res_b.size() == c,
                ErrorKind::InvalidInput, "TcnModel: residual projection shape mismatch");
      }
      require(b.conv1.dilation > prev_dilation, ErrorKind::InvalidInput,
              "TcnModel: dilations must strictly increase");
      prev_dilation = b.conv1.dilation;
      in = c;
    }
    require(head_w.rows() == static_cast<Eigen::Index>(kAxes) && head_w.cols() == in &&
                head_b.size() == static_cast<Eigen::Index>(kAxes),
            ErrorKind::InvalidInput, "TcnModel: head shape mismatch");
  }

  /// Builds the time-major input sequence. The window is left-padded with its
  /// oldest value up to the receptive field; entries older than the receptive
  /// field are dropped since they cannot reach the output.
  void load_sequence(const Block<Scalar>& windows, Block<Scalar>& seq) const {
    const Eigen::Index w = windows.rows();
    require(w >= 1, ErrorKind::InvalidInput, "tcn_forward: empty window");
    const Eigen::Index rf = receptive_field();
    const Eigen::Index b = windows.cols();
    seq.resize(1, rf * b);
    for (Eigen::Index t = 0; t < rf; ++t) {
      const Eigen::Index src = std::max<Eigen::Index>(0, w - rf + t);
      seq.middleCols(t * b, b) = windows.row(src);
    }
  }

  static void conv_forward(const CausalConv<Scalar>& conv, const Block<Scalar>& in,
                           Eigen::Index batch, Block<Scalar>& out) {
    const Eigen::Index steps_in = in.cols() / batch;
    const Eigen::Index steps_out = steps_in - conv.shrink();
    const Eigen::Index n = steps_out * batch;
    out.resize(conv.bias.size(), n);
    out.colwise() = conv.bias;
    for (Eigen::Index j = 0; j < conv.kernel(); ++j) {
      out.noalias() += conv.taps[static_cast<std::size_t>(j)] *
                       in.middleCols(j * conv.dilation * batch, n);
    }
  }

  /// Accumulates tap/bias gradients and adds the input gradient into `din`
  /// (which must be sized like the input and initialised by the caller).
  static void conv_backward(const CausalConv<Scalar>& conv, CausalConv<Scalar>& grad,
                            const Block<Scalar>& in, const Block<Scalar>& dout, Eigen::Index batch,
                            Block<Scalar>& din) {
    const Eigen::Index n = dout.cols();
    grad.bias += dout.rowwise().sum();
    for (Eigen::Index j = 0; j < conv.kernel(); ++j) {
      const auto off = j * conv.dilation * batch;
      grad.taps[static_cast<std::size_t>(j)].noalias() += dout * in.middleCols(off, n).transpose();
      din.middleCols(off, n).noalias() += conv.taps[static_cast<std::size_t>(j)].transpose() * dout;
    }
  }

  const Block<Scalar>& forward(const Block<Scalar>& windows, Workspace& ws) const {
    const Eigen::Index b = windows.cols();
    load_sequence(windows, ws.seq);
    ws.cache.resize(blocks.size());
    const Block<Scalar>* x = &ws.seq;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& blk = blocks[i];
      auto& c = ws.cache[i];
      c.input = *x;
      conv_forward(blk.conv1, c.input, b, c.h1);
      c.h1 = c.h1.cwiseMax(Scalar(0));
      conv_forward(blk.conv2, c.h1, b, c.h2);
      c.h2 = c.h2.cwiseMax(Scalar(0));
      const Eigen::Index n = c.h2.cols();
      const Eigen::Index off = c.input.cols() - n;
      c.out = c.h2;
      if (blk.projected()) {
        c.out.noalias() += blk.res_w * c.input.middleCols(off, n);
        c.out.colwise() += blk.res_b;
      } else {
        c.out += c.input.middleCols(off, n);
      }
      c.out = c.out.cwiseMax(Scalar(0));
      x = &c.out;
    }
    ws.last = x->rightCols(b);
    ws.pred.resize(static_cast<Eigen::Index>(kAxes), b);
    ws.pred.noalias() = head_w * ws.last;
    ws.pred.colwise() += head_b;
    return ws.pred;
  }

  Scalar backward(const Block<Scalar>& windows, const Block<Scalar>& targets, Scalar denom,
                  TcnModel& grad, Workspace& ws) const {
    const auto& pred = forward(windows, ws);
    const Scalar loss = squared_error_grad(pred, targets, denom, ws.dpred);
    const Eigen::Index b = windows.cols();

    grad.head_w.noalias() += ws.dpred * ws.last.transpose();
    grad.head_b += ws.dpred.rowwise().sum();
    ws.dout.setZero(channels(), ws.cache.back().out.cols());
    ws.dout.rightCols(b).noalias() = head_w.transpose() * ws.dpred;

    for (std::size_t i = blocks.size(); i-- > 0;) {
      const auto& blk = blocks[i];
      auto& gblk = grad.blocks[i];
      const auto& c = ws.cache[i];
      const Eigen::Index n = c.out.cols();
      const Eigen::Index off = c.input.cols() - n;

      ws.dsum = (c.out.array() > Scalar(0)).select(ws.dout, Scalar(0));
      ws.dinput.setZero(c.input.rows(), c.input.cols());
      if (blk.projected()) {
        gblk.res_w.noalias() += ws.dsum * c.input.middleCols(off, n).transpose();
        gblk.res_b += ws.dsum.rowwise().sum();
        ws.dinput.middleCols(off, n).noalias() += blk.res_w.transpose() * ws.dsum;
      } else {
        ws.dinput.middleCols(off, n) += ws.dsum;
      }

      ws.dh = (c.h2.array() > Scalar(0)).select(ws.dsum, Scalar(0));
      ws.dh1.setZero(c.h1.rows(), c.h1.cols());
      conv_backward(blk.conv2, gblk.conv2, c.h1, ws.dh, b, ws.dh1);
      ws.dh = (c.h1.array() > Scalar(0)).select(ws.dh1, Scalar(0));
      conv_backward(blk.conv1, gblk.conv1, c.input, ws.dh, b, ws.dinput);
      ws.dout.swap(ws.dinput);
    }
    return loss;
  }
};

/// Kernel 2 with dilations 1, 2, 4, 8 and 16 channels gives a receptive field of 31.
template <typename Scalar>
TcnModel<Scalar> init_tcn(std::size_t channels, std::uint64_t seed,
                          const std::vector<Eigen::Index>& dilations = {1, 2, 4, 8},
                          Eigen::Index kernel = 2) {
  require(channels >= 1 && kernel >= 1 && !dilations.empty(), ErrorKind::InvalidInput,
          "init_tcn: channels, kernel and dilations must be positive");
  const auto c = static_cast<Eigen::Index>(channels);
  Rng rng(seed);
  TcnModel<Scalar> m;
  Eigen::Index in = 1;
  auto make_conv = [&](Eigen::Index cin, Eigen::Index d) {
    CausalConv<Scalar> conv;
    conv.dilation = d;
    const Eigen::Index fan_in = cin * kernel;
    for (Eigen::Index j = 0; j < kernel; ++j) {
      MatrixX<Scalar> w(c, cin);
      init_uniform(w, fan_in, rng);
      conv.taps.push_back(std::move(w));
    }
    conv.bias.resize(c);
    init_uniform(conv.bias, fan_in, rng);
    return conv;
  };
  for (const auto d : dilations) {
    TcnBlock<Scalar> blk;
    blk.conv1 = make_conv(in, d);
    blk.conv2 = make_conv(c, d);
    if (in != c) {
      blk.res_w.resize(c, in);
      blk.res_b.resize(c);
      init_uniform(blk.res_w, in, rng);
      init_uniform(blk.res_b, in, rng);
    }
    m.blocks.push_back(std::move(blk));
    in = c;
  }
  m.head_w.resize(static_cast<Eigen::Index>(kAxes), c);
  m.head_b.resize(static_cast<Eigen::Index>(kAxes));
  init_uniform(m.head_w, c, rng);
  init_uniform(m.head_b, c, rng);
  m.check();
  return m;
}

}  // namespace driftcomp
