#pragma once

#include "grucnn/ops.hpp"

namespace grucnn::model {

/// Gate kernels of one convolutional GRU layer. Hidden-side kernels map
/// C -> C, input-side kernels Cin -> C; every kernel is [3 x in x out] along
/// frequency. Only the hidden-side convolutions carry the per-gate biases.
struct GruCnnParams {
  Tensor w_zh, w_zx;  // update gate
  Tensor w_rh, w_rx;  // reset gate
  Tensor w_hh, w_hx;  // candidate
  Tensor b_z, b_r, b_h;

  std::size_t in_channels() const { return w_zx.dim(1); }
  std::size_t channels() const { return w_zh.dim(2); }

  void validate() const {
    const std::size_t c = channels();
    const std::size_t cin = in_channels();
    for (const Tensor* w : {&w_zh, &w_rh, &w_hh}) {
      if (w->shape() != Shape{3, c, c})
        throw ContractError(str_cat("GruCnnParams: hidden kernel ", shape_str(w->shape()), " must be [3 x ", c,
                                    " x ", c, "]"));
    }
    for (const Tensor* w : {&w_zx, &w_rx, &w_hx}) {
      if (w->shape() != Shape{3, cin, c})
        throw ContractError(str_cat("GruCnnParams: input kernel ", shape_str(w->shape()), " must be [3 x ", cin,
                                    " x ", c, "]"));
    }
    for (const Tensor* b : {&b_z, &b_r, &b_h}) {
      if (b->shape() != Shape{c})
        throw ContractError(str_cat("GruCnnParams: bias ", shape_str(b->shape()), " must be [", c, "]"));
    }
  }
};

/// Hidden feature map carried between frames, [K x C].
struct GruCnnState {
  Tensor h;

  static GruCnnState zeros(std::size_t bins, std::size_t channels) {
    return {Tensor::zeros({bins, channels})};
  }
};

/// Every intermediate of one gruCNN update, for inspection and tests.
struct GruCnnStep {
  Tensor update;     // Z_t
  Tensor reset;      // R_t
  Tensor candidate;  // H^_t
  Tensor h;          // H_t
};

/// One frame of the convolutional GRU:
///   Z  = sigmoid(W_zh * H + W_zx * X)
///   R  = sigmoid(W_rh * H + W_rx * X)
///   H^ = tanh(W_hh * (R . H) + W_hx * X)
///   H' = Z . H + (1 - Z) . H^
/// where * is conv1d_freq and . is the elementwise product.
inline GruCnnStep grucnn_step_detailed(const GruCnnParams& p, const GruCnnState& state, const Tensor& x_t) {
  if (x_t.rank() != 2 || state.h.rank() != 2 || x_t.dim(0) != state.h.dim(0) || x_t.dim(1) != p.in_channels() ||
      state.h.dim(1) != p.channels())
    throw ContractError(str_cat("grucnn_step: input ", shape_str(x_t.shape()), " and state ",
                                shape_str(state.h.shape()), " incompatible with ", p.in_channels(), " -> ",
                                p.channels(), " channel cell"));
  const Tensor& h = state.h;
  GruCnnStep s;
  s.update = ops::sigmoid(ops::add(ops::conv1d_freq(h, p.w_zh, p.b_z), ops::conv1d_freq(x_t, p.w_zx)));
  s.reset = ops::sigmoid(ops::add(ops::conv1d_freq(h, p.w_rh, p.b_r), ops::conv1d_freq(x_t, p.w_rx)));
  s.candidate =
      ops::tanh(ops::add(ops::conv1d_freq(ops::hadamard(s.reset, h), p.w_hh, p.b_h), ops::conv1d_freq(x_t, p.w_hx)));
  s.h = ops::affine_combination(s.update, h, s.candidate);
  return s;
}

inline GruCnnState grucnn_step(const GruCnnParams& p, const GruCnnState& state, const Tensor& x_t) {
  return {grucnn_step_detailed(p, state, x_t).h};
}

/// Fully connected LSTM. Gate blocks in the 4H axis are ordered
/// input, forget, cell candidate, output.
struct LstmParams {
  Tensor w_x;   // [N x 4H]
  Tensor w_h;   // [H x 4H]
  Tensor bias;  // [4H]

  std::size_t hidden() const { return w_h.dim(0); }
};

struct LstmState {
  Tensor h, c;

  static LstmState zeros(std::size_t hidden) { return {Tensor::zeros({hidden}), Tensor::zeros({hidden})}; }
};

/// LSTM update from a precomputed input projection W_x x + b ([4H]).
inline LstmState lstm_step_projected(const LstmParams& p, const LstmState& state, const Tensor& x_proj) {
  const std::size_t hs = p.hidden();
  if (x_proj.shape() != Shape{4 * hs} || state.h.shape() != Shape{hs} || state.c.shape() != Shape{hs})
    throw ContractError(str_cat("lstm_step: projection ", shape_str(x_proj.shape()), " / state ",
                                shape_str(state.h.shape()), " incompatible with hidden size ", hs));
  const Tensor gates = ops::add(x_proj, ops::dense(state.h, p.w_h));
  const Tensor i = ops::sigmoid(ops::slice(gates, 0, hs));
  const Tensor f = ops::sigmoid(ops::slice(gates, hs, hs));
  const Tensor g = ops::tanh(ops::slice(gates, 2 * hs, hs));
  const Tensor o = ops::sigmoid(ops::slice(gates, 3 * hs, hs));
  LstmState next;
  next.c = ops::add(ops::hadamard(f, state.c), ops::hadamard(i, g));
  next.h = ops::hadamard(o, ops::tanh(next.c));
  return next;
}

inline LstmState lstm_step(const LstmParams& p, const LstmState& state, const Tensor& x_t) {
  if (x_t.rank() != 1 || p.w_x.dim(0) != x_t.dim(0))
    throw ContractError(str_cat("lstm_step: input ", shape_str(x_t.shape()), " does not match W_x ",
                                shape_str(p.w_x.shape())));
  return lstm_step_projected(p, state, ops::dense(x_t, p.w_x, p.bias));
}

}  // namespace grucnn::model
