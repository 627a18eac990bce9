#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "grucnn/model/cells.hpp"
#include "grucnn/model/spec.hpp"

namespace grucnn::model {

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// Per-layer output shapes in [batch, bins, frames, channels] form.
struct ShapeTrace {
  struct Entry {
    LayerSpec layer;
    Shape shape;
  };
  std::vector<Entry> entries;

  void record(const LayerSpec& layer, std::size_t bins, std::size_t frames, std::size_t channels) {
    entries.push_back({layer, {1, bins, frames, channels}});
  }
};

/// Fills parameters per their descriptors, drawing in layout order.
inline std::vector<NamedTensor> initialize_parameters(const ModelSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<NamedTensor> params;
  for (const auto& d : parameter_layout(spec)) {
    std::vector<double> values(shape_numel(d.shape), 0.0);
    switch (d.init) {
      case InitKind::glorot: {
        const double limit = std::sqrt(6.0 / (d.fan_in + d.fan_out));
        for (double& v : values) v = rng.uniform(-limit, limit);
        break;
      }
      case InitKind::constant:
        std::fill(values.begin(), values.end(), d.value);
        break;
      case InitKind::lstm_bias: {
        const std::size_t h = values.size() / 4;
        std::fill(values.begin() + static_cast<std::ptrdiff_t>(h), values.begin() + static_cast<std::ptrdiff_t>(2 * h),
                  kLstmForgetBias);
        break;
      }
      case InitKind::zeros:
        break;
    }
    params.push_back({d.name, Tensor::from(d.shape, std::move(values), true)});
  }
  return params;
}

/// One of the three enhancement networks with its parameters.
///
/// The network maps log-power features [bins x T] to predicted log-power
/// [bins x T]. Every layer is causal in time, so output frame t depends only
/// on input frames 0..t.
class Model {
 public:
  explicit Model(ModelSpec spec, std::uint64_t seed = 0)
      : Model(spec, initialize_parameters(spec, seed)) {}

  Model(ModelSpec spec, std::vector<NamedTensor> params) : spec_(std::move(spec)), params_(std::move(params)) {
    const auto layout = parameter_layout(spec_);
    if (layout.size() != params_.size())
      throw ContractError(str_cat("Model: spec ", spec_.canonical(), " expects ", layout.size(), " parameters, got ",
                                  params_.size()));
    for (std::size_t i = 0; i < layout.size(); ++i) {
      if (params_[i].name != layout[i].name)
        throw ContractError(str_cat("Model: parameter ", i, " is '", params_[i].name, "', expected '",
                                    layout[i].name, "'"));
      if (params_[i].value.shape() != layout[i].shape)
        throw ContractError(str_cat("Model: parameter '", layout[i].name, "' has shape ",
                                    shape_str(params_[i].value.shape()), ", expected ",
                                    shape_str(layout[i].shape)));
    }
  }

  const ModelSpec& spec() const { return spec_; }
  const std::vector<NamedTensor>& parameters() const { return params_; }

  const Tensor& param(std::string_view name) const {
    for (const auto& p : params_)
      if (p.name == name) return p.value;
    throw ContractError(str_cat("Model: no parameter named '", name, "'"));
  }

  GruCnnParams grucnn_params(const std::string& layer) const {
    GruCnnParams p{param(layer + ".w_zh"), param(layer + ".w_zx"), param(layer + ".w_rh"),
                   param(layer + ".w_rx"), param(layer + ".w_hh"), param(layer + ".w_hx"),
                   param(layer + ".b_z"),  param(layer + ".b_r"),  param(layer + ".b_h")};
    return p;
  }

  LstmParams lstm_params() const { return {param("lstm.w_x"), param("lstm.w_h"), param("lstm.bias")}; }

  /// features: [input_bins x T] -> predicted log-power [output_bins x T].
  Tensor forward(const Tensor& features, ShapeTrace* trace = nullptr) const {
    if (features.rank() != 2 || features.dim(0) != spec_.input_bins)
      throw ContractError(str_cat("Model::forward: features ", shape_str(features.shape()), " must be [",
                                  spec_.input_bins, " x T]"));
    return spec_.arch == Architecture::grucnn_fc ? forward_recurrent(features, trace)
                                                 : forward_convolutional(features, trace);
  }

 private:
  Tensor forward_recurrent(const Tensor& features, ShapeTrace* trace) const {
    const auto layers = spec_.layers();
    const std::size_t bins = features.dim(0);
    const std::size_t frames = features.dim(1);
    std::vector<GruCnnParams> cells(layers.size());
    std::vector<GruCnnState> states(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i].kind != LayerKind::grucnn) continue;
      cells[i] = grucnn_params(layers[i].name);
      cells[i].validate();
      // H_0 is a zero map at every layer.
      states[i] = GruCnnState::zeros(layers[i].in_bins, layers[i].out_channels);
    }
    const Tensor& head_w = param("head.weight");
    const Tensor& head_b = param("head.bias");

    std::vector<std::pair<std::size_t, std::size_t>> observed(layers.size());  // per-frame [bins, channels]
    std::vector<Tensor> outputs;
    outputs.reserve(frames);
    auto fdata = features.data();
    for (std::size_t t = 0; t < frames; ++t) {
      std::vector<double> column(bins);
      for (std::size_t k = 0; k < bins; ++k) column[k] = fdata[k * frames + t];
      Tensor x = Tensor::from({bins, 1}, std::move(column));
      for (std::size_t i = 0; i < layers.size(); ++i) {
        switch (layers[i].kind) {
          case LayerKind::grucnn:
            states[i] = grucnn_step(cells[i], states[i], x);
            x = states[i].h;
            break;
          case LayerKind::maxpool:
            x = ops::maxpool_freq2(x);
            break;
          case LayerKind::dense:
            x = ops::dense(ops::reshape(x, {x.numel()}), head_w, head_b);
            break;
          default:
            throw ContractError("Model: unexpected layer in recurrent stack");
        }
        if (t == 0) observed[i] = {x.dim(0), x.rank() == 2 ? x.dim(1) : 1};
      }
      outputs.push_back(std::move(x));
    }
    if (trace)
      for (std::size_t i = 0; i < layers.size(); ++i)
        trace->record(layers[i], observed[i].first, frames, observed[i].second);
    return ops::transpose2d(ops::stack(outputs));
  }

  Tensor forward_convolutional(const Tensor& features, ShapeTrace* trace) const {
    const auto layers = spec_.layers();
    const std::size_t frames = features.dim(1);
    Tensor x = ops::reshape(features, {features.dim(0), frames, 1});
    Tensor rows;  // [T x features] once past the conv stack
    for (const auto& l : layers) {
      switch (l.kind) {
        case LayerKind::conv2d:
          x = ops::prelu(ops::conv2d_causal(x, param(l.name + ".kernel"), param(l.name + ".bias")),
                         param(l.name + ".prelu"));
          if (trace) trace->record(l, x.dim(0), x.dim(1), x.dim(2));
          break;
        case LayerKind::maxpool:
          x = ops::maxpool_freq2(x);
          if (trace) trace->record(l, x.dim(0), x.dim(1), x.dim(2));
          break;
        case LayerKind::lstm: {
          rows = ops::reshape(ops::time_major(x), {frames, l.in_channels});
          const LstmParams p = lstm_params();
          const Tensor projected = ops::dense(rows, p.w_x, p.bias);
          auto state = LstmState::zeros(l.out_channels);
          std::vector<Tensor> hs;
          hs.reserve(frames);
          for (std::size_t t = 0; t < frames; ++t) {
            state = lstm_step_projected(p, state, ops::row(projected, t));
            hs.push_back(state.h);
          }
          rows = ops::stack(hs);
          if (trace) trace->record(l, rows.dim(1), rows.dim(0), 1);
          break;
        }
        case LayerKind::dense: {
          if (!rows.defined()) rows = ops::reshape(ops::time_major(x), {frames, l.in_channels});
          rows = ops::dense(rows, param("head.weight"), param("head.bias"));
          if (trace) trace->record(l, rows.dim(1), rows.dim(0), 1);
          break;
        }
        case LayerKind::grucnn:
          throw ContractError("Model: unexpected gruCNN layer in convolutional stack");
      }
    }
    return ops::transpose2d(rows);
  }

  ModelSpec spec_;
  std::vector<NamedTensor> params_;
};

/// Zeroes accumulated gradients of every parameter.
inline void zero_grad(const Model& model) {
  for (auto p : model.parameters()) p.value.zero_grad();
}

}  // namespace grucnn::model
