#pragma once

#include <algorithm>
#include <cmath>

#include "grucnn/ops.hpp"

namespace grucnn::train {

/// Pre-exponential clamp on predicted log-power.
inline constexpr double kLogPowerClamp = 40.0;

/// Mean squared error between magnitudes:
///   L = 1/(T K) * sum_{k,t} (|Y(k,t)| - |Yhat(k,t)|)^2,
/// with |Yhat| = exp(clamp(pred_log_power, -40, 40) / 2).
/// Gradients flow to `pred_log_power` only; outside the clamp they are zero.
inline Tensor loss_mse_magnitude(const Tensor& pred_log_power, const Tensor& target_magnitude) {
  if (pred_log_power.shape() != target_magnitude.shape())
    throw ContractError(str_cat("loss_mse_magnitude: prediction ", shape_str(pred_log_power.shape()),
                                " vs target ", shape_str(target_magnitude.shape())));
  const std::size_t n = pred_log_power.numel();
  auto p = pred_log_power.data();
  auto y = target_magnitude.data();
  auto residual = std::make_shared<std::vector<double>>(n);  // |Yhat| - |Y|
  auto mag = std::make_shared<std::vector<double>>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    (*mag)[i] = std::exp(0.5 * std::clamp(p[i], -kLogPowerClamp, kLogPowerClamp));
    (*residual)[i] = (*mag)[i] - y[i];
    total += (*residual)[i] * (*residual)[i];
  }
  const double loss = total / static_cast<double>(n);
  if (!std::isfinite(loss)) throw RuntimeError(str_cat("loss_mse_magnitude: non-finite loss ", loss));
  auto pi = pred_log_power.impl_ptr();
  return grucnn::detail::make_result(
      "loss_mse_magnitude", {1}, {loss}, {&pred_log_power, &target_magnitude},
      [pi, residual, mag, n](const grucnn::detail::TensorImpl& out) {
        if (!pi->requires_grad) return;
        auto& g = pi->ensure_grad();
        const double scale = out.grad[0] / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double v = pi->data[i];
          if (v > -kLogPowerClamp && v < kLogPowerClamp) g[i] += scale * (*residual)[i] * (*mag)[i];
        }
      });
}

}  // namespace grucnn::train
