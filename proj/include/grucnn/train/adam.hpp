#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "grucnn/model/checkpoint.hpp"

namespace grucnn::train {

struct AdamConfig {
  double lr0 = 1e-3;
  double decay_steps = 20000;
  double decay_rate = 0.99;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// lr(step) = lr0 * decay_rate^(step / decay_steps), continuous exponent.
inline double learning_rate(const AdamConfig& c, std::uint64_t step) {
  return c.lr0 * std::pow(c.decay_rate, static_cast<double>(step) / c.decay_steps);
}

/// Adam with bias correction. The update applied at global step t uses lr(t)
/// and the correction factors 1 - beta^(t+1).
class Adam {
 public:
  Adam(AdamConfig config, const std::vector<model::NamedTensor>& params) : config_(config) {
    for (const auto& p : params) {
      m_.emplace_back(p.value.numel(), 0.0);
      v_.emplace_back(p.value.numel(), 0.0);
    }
  }

  const AdamConfig& config() const { return config_; }
  std::uint64_t steps() const { return step_; }

  /// Applies one update from the accumulated gradients. Parameters that
  /// received no gradient are treated as having a zero gradient.
  void step(const std::vector<model::NamedTensor>& params) {
    if (params.size() != m_.size()) throw ContractError("Adam::step: parameter list changed size");
    const double lr = learning_rate(config_, step_);
    const double t = static_cast<double>(step_ + 1);
    const double c1 = 1.0 - std::pow(config_.beta1, t);
    const double c2 = 1.0 - std::pow(config_.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor p = params[i].value;
      auto g = p.grad();
      auto w = p.mutable_data();
      auto& m = m_[i];
      auto& v = v_[i];
      if (m.size() != w.size()) throw ContractError(str_cat("Adam::step: size of '", params[i].name, "' changed"));
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double gj = g.empty() ? 0.0 : g[j];
        if (!std::isfinite(gj))
          throw RuntimeError(str_cat("Adam::step: non-finite gradient in '", params[i].name, "'"));
        m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * gj;
        v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * gj * gj;
        w[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + config_.epsilon);
      }
    }
    ++step_;
  }

  model::OptimizerMoments moments() const { return {m_, v_}; }

  void restore(const model::OptimizerMoments& moments, std::uint64_t step) {
    if (moments.first.size() != m_.size() || moments.second.size() != v_.size())
      throw ContractError("Adam::restore: moment list does not match parameters");
    for (std::size_t i = 0; i < m_.size(); ++i)
      if (moments.first[i].size() != m_[i].size() || moments.second[i].size() != v_[i].size())
        throw ContractError("Adam::restore: moment sizes do not match parameters");
    m_ = moments.first;
    v_ = moments.second;
    step_ = step;
  }

 private:

  AdamConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::uint64_t step_ = 0;
};

}  // namespace grucnn::train
