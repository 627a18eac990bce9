#pragma once

#include <charconv>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "grucnn/common.hpp"

namespace grucnn::model {

enum class Architecture { cnn_fc, cnn_lstm, grucnn_fc };

inline std::string_view arch_name(Architecture a) {
  switch (a) {
    case Architecture::cnn_fc: return "cnn-fc";
    case Architecture::cnn_lstm: return "cnn-lstm";
    case Architecture::grucnn_fc: return "grucnn-fc";
  }
  return "?";
}

inline std::string_view arch_display_name(Architecture a) {
  switch (a) {
    case Architecture::cnn_fc: return "CNN_FC-SE";
    case Architecture::cnn_lstm: return "CNN_LSTM-SE";
    case Architecture::grucnn_fc: return "gruCNN_FC-SE";
  }
  return "?";
}

inline Architecture parse_architecture(std::string_view s) {
  for (auto a : {Architecture::cnn_fc, Architecture::cnn_lstm, Architecture::grucnn_fc})
    if (s == arch_name(a)) return a;
  throw ContractError(str_cat("unknown architecture '", s, "' (expected cnn-fc, cnn-lstm or grucnn-fc)"));
}

enum class LayerKind { conv2d, grucnn, maxpool, lstm, dense };

inline std::string_view layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::conv2d: return "[3x3] CNN";
    case LayerKind::grucnn: return "[3x3] gruCNN";
    case LayerKind::maxpool: return "[2x1] Maxpool";
    case LayerKind::lstm: return "LSTM";
    case LayerKind::dense: return "FC";
  }
  return "?";
}

/// One entry of the layer stack. For conv-like layers bins/channels describe
/// the feature map; for LSTM and FC layers `in_channels` is the per-frame
/// input width and `out_channels` the number of units.
struct LayerSpec {
  LayerKind kind;
  std::size_t table_row;  // row of the layer table, 1-based; LSTM and FC share the last row
  std::string name;
  std::size_t in_bins, out_bins;
  std::size_t in_channels, out_channels;
};

/// Declarative description of one of the three enhancement networks.
///
/// Defaults reproduce the full-size configuration: six conv-like layers of
/// 256 channels, 2x1 max pooling after the second and fourth, a 161-bin
/// head, and a 1024-unit LSTM for the CNN_LSTM variant. `channels`,
/// `conv_layers`, `input_bins` and `lstm_hidden` may be reduced for small runs.
struct ModelSpec {
  Architecture arch = Architecture::grucnn_fc;
  std::size_t channels = 256;
  std::size_t conv_layers = 6;
  std::size_t input_bins = 161;
  std::size_t lstm_hidden = 1024;

  static ModelSpec full_scale(Architecture arch) {
    ModelSpec s;
    s.arch = arch;
    return s;
  }

  bool is_full_scale() const {
    return channels == 256 && conv_layers == 6 && input_bins == 161 &&
           (arch != Architecture::cnn_lstm || lstm_hidden == 1024);
  }

  std::size_t output_bins() const { return input_bins; }

  void validate() const {
    if (channels == 0 || conv_layers == 0 || input_bins == 0 || lstm_hidden == 0)
      throw ContractError(str_cat("ModelSpec: all sizes must be positive (", canonical(), ")"));
  }

  std::vector<LayerSpec> layers() const {
    validate();
    std::vector<LayerSpec> out;
    const LayerKind conv_kind = arch == Architecture::grucnn_fc ? LayerKind::grucnn : LayerKind::conv2d;
    const std::string prefix = arch == Architecture::grucnn_fc ? "grucnn" : "conv";
    std::size_t bins = input_bins;
    std::size_t in_ch = 1;
    std::size_t row = 1;
    for (std::size_t i = 1; i <= conv_layers; ++i) {
      out.push_back({conv_kind, row++, prefix + std::to_string(i), bins, bins, in_ch, channels});
      in_ch = channels;
      if (i % 2 == 0 && i <= 4 && i < conv_layers) {
        out.push_back({LayerKind::maxpool, row++, "pool" + std::to_string(i / 2), bins, (bins + 1) / 2, channels,
                       channels});
        bins = (bins + 1) / 2;
      }
    }
    const std::size_t features = bins * channels;
    if (arch == Architecture::cnn_lstm) {
      out.push_back({LayerKind::lstm, row, "lstm", bins, 1, features, lstm_hidden});
      out.push_back({LayerKind::dense, row, "head", 1, output_bins(), lstm_hidden, output_bins()});
    } else {
      out.push_back({LayerKind::dense, row, "head", bins, output_bins(), features, output_bins()});
    }
    return out;
  }

  /// Stable textual form, used for digests and checkpoint headers.
  std::string canonical() const {
    return str_cat("arch=", arch_name(arch), ";channels=", channels, ";conv_layers=", conv_layers,
                   ";input_bins=", input_bins, ";lstm_hidden=", lstm_hidden);
  }

  static ModelSpec parse(std::string_view text) {
    std::map<std::string, std::string, std::less<>> kv;
    while (!text.empty()) {
      const auto semi = text.find(';');
      const auto item = text.substr(0, semi);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw ContractError(str_cat("ModelSpec::parse: malformed item '", item, "'"));
      kv.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
      if (semi == std::string_view::npos) break;
      text.remove_prefix(semi + 1);
    }
    auto number = [&](const char* key) {
      auto it = kv.find(key);
      if (it == kv.end()) throw ContractError(str_cat("ModelSpec::parse: missing '", key, "'"));
      std::size_t v = 0;
      const auto& s = it->second;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size())
        throw ContractError(str_cat("ModelSpec::parse: bad value for '", key, "': ", s));
      return v;
    };
    auto it = kv.find("arch");
    if (it == kv.end()) throw ContractError("ModelSpec::parse: missing 'arch'");
    ModelSpec s;
    s.arch = parse_architecture(it->second);
    s.channels = number("channels");
    s.conv_layers = number("conv_layers");
    s.input_bins = number("input_bins");
    s.lstm_hidden = number("lstm_hidden");
    s.validate();
    return s;
  }

  std::uint64_t digest() const {
    const std::string c = canonical();
    return fnv1a64(c.data(), c.size());
  }

  bool operator==(const ModelSpec&) const = default;
};

enum class InitKind { glorot, zeros, constant, lstm_bias };

/// Shape and initializer of one named parameter.
struct ParamDescriptor {
  std::string name;
  std::string layer;
  Shape shape;
  InitKind init = InitKind::zeros;
  double fan_in = 0, fan_out = 0;  // glorot only
  double value = 0;                // constant only
};

inline constexpr double kPreluInitialSlope = 0.25;
inline constexpr double kLstmForgetBias = 1.0;

/// Ordered parameter list for a spec; this order is the checkpoint order.
inline std::vector<ParamDescriptor> parameter_layout(const ModelSpec& spec) {
  std::vector<ParamDescriptor> out;
  auto glorot = [&](const std::string& layer, const char* leaf, Shape shape, double fi, double fo) {
    out.push_back({layer + "." + leaf, layer, std::move(shape), InitKind::glorot, fi, fo, 0});
  };
  auto zeros = [&](const std::string& layer, const char* leaf, std::size_t n) {
    out.push_back({layer + "." + leaf, layer, {n}, InitKind::zeros, 0, 0, 0});
  };
  for (const auto& l : spec.layers()) {
    const auto ci = l.in_channels;
    const auto co = l.out_channels;
    switch (l.kind) {
      case LayerKind::conv2d:
        glorot(l.name, "kernel", {3, 3, ci, co}, 9.0 * ci, 9.0 * co);
        zeros(l.name, "bias", co);
        out.push_back({l.name + ".prelu", l.name, {co}, InitKind::constant, 0, 0, kPreluInitialSlope});
        break;
      case LayerKind::grucnn:
        glorot(l.name, "w_zh", {3, co, co}, 3.0 * co, 3.0 * co);
        glorot(l.name, "w_zx", {3, ci, co}, 3.0 * ci, 3.0 * co);
        glorot(l.name, "w_rh", {3, co, co}, 3.0 * co, 3.0 * co);
        glorot(l.name, "w_rx", {3, ci, co}, 3.0 * ci, 3.0 * co);
        glorot(l.name, "w_hh", {3, co, co}, 3.0 * co, 3.0 * co);
        glorot(l.name, "w_hx", {3, ci, co}, 3.0 * ci, 3.0 * co);
        zeros(l.name, "b_z", co);
        zeros(l.name, "b_r", co);
        zeros(l.name, "b_h", co);
        break;
      case LayerKind::maxpool:
        break;
      case LayerKind::lstm:
        glorot(l.name, "w_x", {ci, 4 * co}, static_cast<double>(ci), 4.0 * co);
        glorot(l.name, "w_h", {co, 4 * co}, static_cast<double>(co), 4.0 * co);
        out.push_back({l.name + ".bias", l.name, {4 * co}, InitKind::lstm_bias, 0, 0, 0});
        break;
      case LayerKind::dense:
        glorot(l.name, "weight", {ci, co}, static_cast<double>(ci), static_cast<double>(co));
        zeros(l.name, "bias", co);
        break;
    }
  }
  return out;
}

struct LayerParamCount {
  std::size_t table_row;
  std::string layer;
  std::string kind;
  std::string formula;
  std::size_t count;
};

struct ParamReport {
  std::vector<LayerParamCount> rows;
  std::size_t total = 0;
};

/// Exact scalar parameter count, itemized per layer.
inline ParamReport count_params(const ModelSpec& spec) {
  const auto layout = parameter_layout(spec);
  ParamReport report;
  for (const auto& l : spec.layers()) {
    if (l.kind == LayerKind::maxpool) continue;
    std::size_t n = 0;
    for (const auto& p : layout)
      if (p.layer == l.name) n += shape_numel(p.shape);
    const auto ci = l.in_channels, co = l.out_channels;
    std::string formula;
    switch (l.kind) {
      case LayerKind::conv2d: formula = str_cat("3*3*", ci, "*", co, " + ", co, " + ", co); break;
      case LayerKind::grucnn: formula = str_cat("3*(3*", ci, "*", co, ") + 3*(3*", co, "*", co, ") + 3*", co); break;
      case LayerKind::lstm: formula = str_cat("4*", co, "*(", ci, " + ", co, ") + 4*", co); break;
      case LayerKind::dense: formula = str_cat(ci, "*", co, " + ", co); break;
      case LayerKind::maxpool: break;
    }
    report.rows.push_back({l.table_row, l.name, std::string(layer_kind_name(l.kind)), formula, n});
    report.total += n;
  }
  return report;
}

/// Published full-size parameter totals, for the informational comparison.
inline double reference_param_count(Architecture a) {
  switch (a) {
    case Architecture::cnn_fc: return 11.13e6;
    case Architecture::cnn_lstm: return 36.10e6;
    case Architecture::grucnn_fc: return 27.22e6;
  }
  return 0;
}

}  // namespace grucnn::model
