#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "grucnn/tensor.hpp"

namespace grucnn {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace ops {

namespace detail {

using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using StridedMap = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;
using grucnn::detail::TensorImpl;

inline void require(bool ok, const char* op, const std::string& what) {
  if (!ok) throw ContractError(str_cat(op, ": ", what));
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), op,
          str_cat("operand shapes differ: ", shape_str(a.shape()), " vs ", shape_str(b.shape())));
}

inline bool wants_grad(const std::shared_ptr<TensorImpl>& t) { return t && t->requires_grad; }

// Adds the three frequency taps of a width-3 kernel applied to `x` into `y`.
// Taps index k-1, k, k+1; out-of-range bins are zero.
template <typename Out, typename In>
void accumulate_freq_taps(Out&& y, const In& x, const double* kernel, Eigen::Index cin,
                          Eigen::Index cout, Eigen::Index tap_stride) {
  const Eigen::Index k = x.rows();
  ConstMatMap w0(kernel, cin, cout);
  ConstMatMap w1(kernel + tap_stride, cin, cout);
  ConstMatMap w2(kernel + 2 * tap_stride, cin, cout);
  if (k > 1) {
    y.bottomRows(k - 1).noalias() += x.topRows(k - 1) * w0;
    y.topRows(k - 1).noalias() += x.bottomRows(k - 1) * w2;
  }
  y.noalias() += x * w1;
}

// Backward of accumulate_freq_taps for the input and the kernel.
template <typename GIn, typename In, typename GOut>
void accumulate_freq_taps_grad(GIn* gx, double* gkernel, const In& x, const GOut& gy,
                               const double* kernel, Eigen::Index cin, Eigen::Index cout,
                               Eigen::Index tap_stride) {
  const Eigen::Index k = x.rows();
  ConstMatMap w0(kernel, cin, cout);
  ConstMatMap w1(kernel + tap_stride, cin, cout);
  ConstMatMap w2(kernel + 2 * tap_stride, cin, cout);
  if (gx != nullptr) {
    gx->noalias() += gy * w1.transpose();
    if (k > 1) {
      gx->topRows(k - 1).noalias() += gy.bottomRows(k - 1) * w0.transpose();
      gx->bottomRows(k - 1).noalias() += gy.topRows(k - 1) * w2.transpose();
    }
  }
  if (gkernel != nullptr) {
    MatMap g0(gkernel, cin, cout);
    MatMap g1(gkernel + tap_stride, cin, cout);
    MatMap g2(gkernel + 2 * tap_stride, cin, cout);
    g1.noalias() += x.transpose() * gy;
    if (k > 1) {
      g0.noalias() += x.topRows(k - 1).transpose() * gy.bottomRows(k - 1);
      g2.noalias() += x.bottomRows(k - 1).transpose() * gy.topRows(k - 1);
    }
  }
}

inline void check_bias(const Tensor& bias, std::size_t cout, const char* op) {
  if (!bias.defined()) return;
  require(bias.rank() == 1 && bias.dim(0) == cout, op,
          str_cat("bias shape ", shape_str(bias.shape()), " does not match ", cout, " output channels"));
}

template <typename UnaryFwd, typename UnaryDeriv>
Tensor unary(const char* kind, const Tensor& x, UnaryFwd f, UnaryDeriv dfdy) {
  std::vector<double> out(x.numel());
  auto xs = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(xs[i]);
  auto xi = x.impl_ptr();
  return grucnn::detail::make_result(kind, x.shape(), std::move(out), {&x},
                                     [xi, dfdy](const TensorImpl& y) {
                                       auto& gx = xi->ensure_grad();
                                       for (std::size_t i = 0; i < gx.size(); ++i)
                                         gx[i] += y.grad[i] * dfdy(xi->data[i], y.data[i]);
                                     });
}

}  // namespace detail

/// Width-3 convolution along frequency.
///
/// input [K x Cin], kernel [3 x Cin x Cout], optional bias [Cout] -> [K x Cout].
/// out[k, o] = bias[o] + sum_{d in -1..1, i} input[k+d, i] * kernel[d+1, i, o],
/// with zero padding of one bin at both frequency edges.
inline Tensor conv1d_freq(const Tensor& input, const Tensor& kernel, const Tensor& bias = {}) {
  using namespace detail;
  constexpr const char* op = "conv1d_freq";
  require(input.rank() == 2, op, str_cat("input must be [K x Cin], got ", shape_str(input.shape())));
  require(kernel.rank() == 3 && kernel.dim(0) == 3 && kernel.dim(1) == input.dim(1), op,
          str_cat("kernel ", shape_str(kernel.shape()), " incompatible with input ", shape_str(input.shape()),
                  " (expected [3 x ", input.dim(1), " x Cout])"));
  const auto k = static_cast<Eigen::Index>(input.dim(0));
  const auto cin = static_cast<Eigen::Index>(input.dim(1));
  const auto cout = static_cast<Eigen::Index>(kernel.dim(2));
  check_bias(bias, kernel.dim(2), op);

  std::vector<double> out(static_cast<std::size_t>(k * cout), 0.0);
  MatMap y(out.data(), k, cout);
  if (bias.defined()) y.rowwise() = Eigen::Map<const Eigen::RowVectorXd>(bias.data().data(), cout);
  ConstMatMap x(input.data().data(), k, cin);
  accumulate_freq_taps(y, x, kernel.data().data(), cin, cout, cin * cout);

  auto xi = input.impl_ptr();
  auto wi = kernel.impl_ptr();
  auto bi = bias.defined() ? bias.impl_ptr() : nullptr;
  return grucnn::detail::make_result(
      op, {input.dim(0), kernel.dim(2)}, std::move(out), {&input, &kernel, &bias},
      [xi, wi, bi, k, cin, cout](const TensorImpl& out) {
        ConstMatMap gy(out.grad.data(), k, cout);
        ConstMatMap xm(xi->data.data(), k, cin);
        MatMap* gx_ptr = nullptr;
        std::optional<MatMap> gx;
        if (wants_grad(xi)) {
          gx.emplace(xi->ensure_grad().data(), k, cin);
          gx_ptr = &*gx;
        }
        double* gw = wants_grad(wi) ? wi->ensure_grad().data() : nullptr;
        accumulate_freq_taps_grad(gx_ptr, gw, xm, gy, wi->data.data(), cin, cout, cin * cout);
        if (wants_grad(bi)) {
          Eigen::Map<Eigen::RowVectorXd> gb(bi->ensure_grad().data(), cout);
          gb += gy.colwise().sum();
        }
      });
}

/// 3 x 3 convolution over (frequency, time), causal in time.
///
/// input [K x T x Cin], kernel [3 x 3 x Cin x Cout] indexed (frequency tap,
/// time tap), optional bias [Cout] -> [K x T x Cout]. Frequency is
/// same-padded with zeros; time tap j reads frame t + j - 2, so frame t only
/// sees frames t-2..t. Each output frame is computed with products whose sizes
/// do not depend on T, so a prefix of the sequence yields identical frames.
inline Tensor conv2d_causal(const Tensor& input, const Tensor& kernel, const Tensor& bias = {}) {
  using namespace detail;
  constexpr const char* op = "conv2d_causal";
  require(input.rank() == 3, op, str_cat("input must be [K x T x Cin], got ", shape_str(input.shape())));
  require(kernel.rank() == 4 && kernel.dim(0) == 3 && kernel.dim(1) == 3 && kernel.dim(2) == input.dim(2), op,
          str_cat("kernel ", shape_str(kernel.shape()), " incompatible with input ", shape_str(input.shape()),
                  " (expected [3 x 3 x ", input.dim(2), " x Cout])"));
  const auto k = static_cast<Eigen::Index>(input.dim(0));
  const auto t_len = static_cast<Eigen::Index>(input.dim(1));
  const auto cin = static_cast<Eigen::Index>(input.dim(2));
  const auto cout = static_cast<Eigen::Index>(kernel.dim(3));
  check_bias(bias, kernel.dim(3), op);

  std::vector<double> out(static_cast<std::size_t>(k * t_len * cout), 0.0);
  const double* xd = input.data().data();
  const double* wd = kernel.data().data();
  // Kernel element (f, j, i, o) lives at ((f*3 + j)*Cin + i)*Cout + o.
  const Eigen::Index freq_stride = 3 * cin * cout;
  for (Eigen::Index t = 0; t < t_len; ++t) {
    StridedMap y(out.data() + t * cout, k, cout, Eigen::OuterStride<>(t_len * cout));
    if (bias.defined()) y.rowwise() = Eigen::Map<const Eigen::RowVectorXd>(bias.data().data(), cout);
    for (Eigen::Index j = 0; j < 3; ++j) {
      const Eigen::Index s = t + j - 2;
      if (s < 0) continue;
      ConstStridedMap x(xd + s * cin, k, cin, Eigen::OuterStride<>(t_len * cin));
      accumulate_freq_taps(y, x, wd + j * cin * cout, cin, cout, freq_stride);
    }
  }

  auto xi = input.impl_ptr();
  auto wi = kernel.impl_ptr();
  auto bi = bias.defined() ? bias.impl_ptr() : nullptr;
  return grucnn::detail::make_result(
      op, {input.dim(0), input.dim(1), kernel.dim(3)}, std::move(out), {&input, &kernel, &bias},
      [xi, wi, bi, k, t_len, cin, cout, freq_stride](const TensorImpl& out) {
        double* gxd = wants_grad(xi) ? xi->ensure_grad().data() : nullptr;
        double* gwd = wants_grad(wi) ? wi->ensure_grad().data() : nullptr;
        for (Eigen::Index t = 0; t < t_len; ++t) {
          ConstStridedMap gy(out.grad.data() + t * cout, k, cout, Eigen::OuterStride<>(t_len * cout));
          for (Eigen::Index j = 0; j < 3; ++j) {
            const Eigen::Index s = t + j - 2;
            if (s < 0) continue;
            ConstStridedMap x(xi->data.data() + s * cin, k, cin, Eigen::OuterStride<>(t_len * cin));
            std::optional<StridedMap> gx;
            if (gxd) gx.emplace(gxd + s * cin, k, cin, Eigen::OuterStride<>(t_len * cin));
            accumulate_freq_taps_grad(gx ? &*gx : static_cast<StridedMap*>(nullptr),
                                      gwd ? gwd + j * cin * cout : nullptr, x, gy,
                                      wi->data.data() + j * cin * cout, cin, cout, freq_stride);
          }
          if (wants_grad(bi)) {
            Eigen::Map<Eigen::RowVectorXd> gb(bi->ensure_grad().data(), cout);
            gb += gy.colwise().sum();
          }
        }
      });
}

inline Tensor sigmoid(const Tensor& x) {
  return detail::unary(
      "sigmoid", x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

inline Tensor tanh(const Tensor& x) {
  return detail::unary(
      "tanh", x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

/// Parametric ReLU with one slope per channel (last axis).
inline Tensor prelu(const Tensor& x, const Tensor& alpha) {
  using namespace detail;
  constexpr const char* op = "prelu";
  require(alpha.rank() == 1 && alpha.dim(0) == x.shape().back(), op,
          str_cat("slope shape ", shape_str(alpha.shape()), " does not match channels of ", shape_str(x.shape())));
  const std::size_t channels = alpha.dim(0);
  std::vector<double> out(x.numel());
  auto xs = x.data();
  auto as = alpha.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xs[i] > 0 ? xs[i] : as[i % channels] * xs[i];
  auto xi = x.impl_ptr();
  auto ai = alpha.impl_ptr();
  return grucnn::detail::make_result(op, x.shape(), std::move(out), {&x, &alpha},
                                     [xi, ai, channels](const TensorImpl& y) {
                                       const auto& xv = xi->data;
                                       if (wants_grad(xi)) {
                                         auto& gx = xi->ensure_grad();
                                         for (std::size_t i = 0; i < gx.size(); ++i)
                                           gx[i] += xv[i] > 0 ? y.grad[i] : ai->data[i % channels] * y.grad[i];
                                       }
                                       if (wants_grad(ai)) {
                                         auto& ga = ai->ensure_grad();
                                         for (std::size_t i = 0; i < xv.size(); ++i)
                                           if (xv[i] <= 0) ga[i % channels] += y.grad[i] * xv[i];
                                       }
                                     });
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  using namespace detail;
  require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  auto ai = a.impl_ptr();
  auto bi = b.impl_ptr();
  return grucnn::detail::make_result("add", a.shape(), std::move(out), {&a, &b}, [ai, bi](const TensorImpl& y) {
    for (const auto& in : {ai, bi}) {
      if (!wants_grad(in)) continue;
      auto& g = in->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += y.grad[i];
    }
  });
}

/// Elementwise product.
inline Tensor hadamard(const Tensor& a, const Tensor& b) {
  using namespace detail;
  require_same_shape(a, b, "hadamard");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  auto ai = a.impl_ptr();
  auto bi = b.impl_ptr();
  return grucnn::detail::make_result("hadamard", a.shape(), std::move(out), {&a, &b},
                                     [ai, bi](const TensorImpl& y) {
                                       if (wants_grad(ai)) {
                                         auto& g = ai->ensure_grad();
                                         for (std::size_t i = 0; i < g.size(); ++i) g[i] += y.grad[i] * bi->data[i];
                                       }
                                       if (wants_grad(bi)) {
                                         auto& g = bi->ensure_grad();
                                         for (std::size_t i = 0; i < g.size(); ++i) g[i] += y.grad[i] * ai->data[i];
                                       }
                                     });
}

/// z * a + (1 - z) * b, elementwise. This is the gated blend of a GRU update.
inline Tensor affine_combination(const Tensor& z, const Tensor& a, const Tensor& b) {
  using namespace detail;
  require_same_shape(z, a, "affine_combination");
  require_same_shape(z, b, "affine_combination");
  std::vector<double> out(z.numel());
  auto zs = z.data();
  auto as = a.data();
  auto bs = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = zs[i] * as[i] + (1.0 - zs[i]) * bs[i];
  auto zi = z.impl_ptr();
  auto ai = a.impl_ptr();
  auto bi = b.impl_ptr();
  return grucnn::detail::make_result(
      "affine_combination", z.shape(), std::move(out), {&z, &a, &b}, [zi, ai, bi](const TensorImpl& y) {
        const auto& zv = zi->data;
        if (wants_grad(zi)) {
          auto& g = zi->ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += y.grad[i] * (ai->data[i] - bi->data[i]);
        }
        if (wants_grad(ai)) {
          auto& g = ai->ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += y.grad[i] * zv[i];
        }
        if (wants_grad(bi)) {
          auto& g = bi->ensure_grad();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += y.grad[i] * (1.0 - zv[i]);
        }
      });
}

/// Non-overlapping max pooling of width 2 along the leading (frequency) axis,
/// ceil mode: an odd trailing bin forms its own window. Trailing axes are kept.
inline Tensor maxpool_freq2(const Tensor& x) {
  const std::size_t k = x.dim(0);
  const std::size_t rest = x.numel() / k;
  const std::size_t ko = (k + 1) / 2;
  std::vector<double> out(ko * rest);
  auto argmax = std::make_shared<std::vector<std::size_t>>(ko * rest);
  auto xs = x.data();
  for (std::size_t p = 0; p < ko; ++p) {
    for (std::size_t r = 0; r < rest; ++r) {
      std::size_t best = 2 * p * rest + r;
      if (2 * p + 1 < k) {
        const std::size_t other = (2 * p + 1) * rest + r;
        if (xs[other] > xs[best]) best = other;
      }
      out[p * rest + r] = xs[best];
      (*argmax)[p * rest + r] = best;
    }
  }
  Shape shape = x.shape();
  shape[0] = ko;
  auto xi = x.impl_ptr();
  return grucnn::detail::make_result("maxpool_freq2", std::move(shape), std::move(out), {&x},
                                     [xi, argmax](const detail::TensorImpl& y) {
                                       auto& g = xi->ensure_grad();
                                       for (std::size_t i = 0; i < y.grad.size(); ++i) g[(*argmax)[i]] += y.grad[i];
                                     });
}

/// Rows per block in batched dense products. Every row is computed in a
/// block of this exact size, so row results do not depend on how many rows
/// the caller passes (needed for bit-exact causal truncation).
inline constexpr Eigen::Index kDenseRowBlock = 16;

/// Affine map. input [N] -> [M] or [R x N] -> [R x M] (same map per row);
/// weight [N x M]; optional bias [M].
inline Tensor dense(const Tensor& input, const Tensor& weight, const Tensor& bias = {}) {
  using namespace detail;
  constexpr const char* op = "dense";
  require(input.rank() == 1 || input.rank() == 2, op,
          str_cat("input must be [N] or [R x N], got ", shape_str(input.shape())));
  const auto n = static_cast<Eigen::Index>(input.shape().back());
  require(weight.rank() == 2 && static_cast<Eigen::Index>(weight.dim(0)) == n, op,
          str_cat("weight ", shape_str(weight.shape()), " incompatible with input ", shape_str(input.shape())));
  const auto m = static_cast<Eigen::Index>(weight.dim(1));
  check_bias(bias, weight.dim(1), op);
  const auto rows = static_cast<Eigen::Index>(input.rank() == 1 ? 1 : input.dim(0));

  std::vector<double> out(static_cast<std::size_t>(rows * m), 0.0);
  ConstMatMap w(weight.data().data(), n, m);
  if (input.rank() == 1) {
    Eigen::Map<Eigen::RowVectorXd> y(out.data(), m);
    y.noalias() = Eigen::Map<const Eigen::RowVectorXd>(input.data().data(), n) * w;
  } else {
    RowMatrix block_in(kDenseRowBlock, n);
    RowMatrix block_out(kDenseRowBlock, m);
    for (Eigen::Index r0 = 0; r0 < rows; r0 += kDenseRowBlock) {
      const Eigen::Index cnt = std::min(kDenseRowBlock, rows - r0);
      block_in.setZero();
      block_in.topRows(cnt) = ConstMatMap(input.data().data() + r0 * n, cnt, n);
      block_out.noalias() = block_in * w;
      MatMap(out.data() + r0 * m, cnt, m) = block_out.topRows(cnt);
    }
  }
  if (bias.defined()) {
    MatMap y(out.data(), rows, m);
    y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.data().data(), m);
  }

  Shape shape = input.rank() == 1 ? Shape{weight.dim(1)} : Shape{input.dim(0), weight.dim(1)};
  auto xi = input.impl_ptr();
  auto wi = weight.impl_ptr();
  auto bi = bias.defined() ? bias.impl_ptr() : nullptr;
  return grucnn::detail::make_result(op, std::move(shape), std::move(out), {&input, &weight, &bias},
                                     [xi, wi, bi, rows, n, m](const TensorImpl& y) {
                                       ConstMatMap gy(y.grad.data(), rows, m);
                                       ConstMatMap x(xi->data.data(), rows, n);
                                       if (wants_grad(xi)) {
                                         MatMap gx(xi->ensure_grad().data(), rows, n);
                                         gx.noalias() += gy * ConstMatMap(wi->data.data(), n, m).transpose();
                                       }
                                       if (wants_grad(wi)) {
                                         MatMap gw(wi->ensure_grad().data(), n, m);
                                         gw.noalias() += x.transpose() * gy;
                                       }
                                       if (wants_grad(bi)) {
                                         Eigen::Map<Eigen::RowVectorXd> gb(bi->ensure_grad().data(), m);
                                         gb += gy.colwise().sum();
                                       }
                                     });
}

inline Tensor reshape(const Tensor& x, Shape shape) {
  detail::require(shape_numel(shape) == x.numel(), "reshape",
                  str_cat("cannot view ", shape_str(x.shape()), " as ", shape_str(shape)));
  std::vector<double> out(x.data().begin(), x.data().end());
  auto xi = x.impl_ptr();
  return grucnn::detail::make_result("reshape", std::move(shape), std::move(out), {&x},
                                     [xi](const detail::TensorImpl& y) {
                                       auto& g = xi->ensure_grad();
                                       for (std::size_t i = 0; i < g.size(); ++i) g[i] += y.grad[i];
                                     });
}

/// [R x C] -> [C x R].
inline Tensor transpose2d(const Tensor& x) {
  detail::require(x.rank() == 2, "transpose2d", str_cat("needs a matrix, got ", shape_str(x.shape())));
  const auto r = static_cast<Eigen::Index>(x.dim(0));
  const auto c = static_cast<Eigen::Index>(x.dim(1));
  std::vector<double> out(x.numel());
  detail::MatMap(out.data(), c, r) = detail::ConstMatMap(x.data().data(), r, c).transpose();
  auto xi = x.impl_ptr();
  return grucnn::detail::make_result("transpose2d", {x.dim(1), x.dim(0)}, std::move(out), {&x},
                                     [xi, r, c](const detail::TensorImpl& y) {
                                       detail::MatMap g(xi->ensure_grad().data(), r, c);
                                       g += detail::ConstMatMap(y.grad.data(), c, r).transpose();
                                     });
}

/// [K x T x C] -> [T x K x C].
inline Tensor time_major(const Tensor& x) {
  detail::require(x.rank() == 3, "time_major", str_cat("needs [K x T x C], got ", shape_str(x.shape())));
  const std::size_t k = x.dim(0), t = x.dim(1), c = x.dim(2);
  std::vector<double> out(x.numel());
  auto xs = x.data();
  for (std::size_t f = 0; f < k; ++f)
    for (std::size_t s = 0; s < t; ++s)
      std::copy_n(xs.begin() + static_cast<std::ptrdiff_t>((f * t + s) * c), c,
                  out.begin() + static_cast<std::ptrdiff_t>((s * k + f) * c));
  auto xi = x.impl_ptr();
  return grucnn::detail::make_result("time_major", {t, k, c}, std::move(out), {&x},
                                     [xi, k, t, c](const detail::TensorImpl& y) {
                                       auto& g = xi->ensure_grad();
                                       for (std::size_t f = 0; f < k; ++f)
                                         for (std::size_t s = 0; s < t; ++s)
                                           for (std::size_t ch = 0; ch < c; ++ch)
                                             g[(f * t + s) * c + ch] += y.grad[(s * k + f) * c + ch];
                                     });
}

/// Stacks equally shaped tensors along a new leading axis.
inline Tensor stack(std::span<const Tensor> parts) {
  detail::require(!parts.empty(), "stack", "nothing to stack");
  const Shape& inner = parts.front().shape();
  const std::size_t n = parts.front().numel();
  std::vector<double> out;
  out.reserve(n * parts.size());
  for (const auto& p : parts) {
    detail::require(p.shape() == inner, "stack",
                    str_cat("mixed shapes ", shape_str(inner), " and ", shape_str(p.shape())));
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  Shape shape{parts.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  std::vector<std::shared_ptr<detail::TensorImpl>> impls;
  for (const auto& p : parts) impls.push_back(p.impl_ptr());
  return grucnn::detail::make_result("stack", std::move(shape), std::move(out), parts,
                                     [impls, n](const detail::TensorImpl& y) {
                                       for (std::size_t i = 0; i < impls.size(); ++i) {
                                         if (!impls[i]->requires_grad) continue;
                                         auto& g = impls[i]->ensure_grad();
                                         for (std::size_t j = 0; j < n; ++j) g[j] += y.grad[i * n + j];
                                       }
                                     });
}

/// Row r of [R x N] as [N].
inline Tensor row(const Tensor& x, std::size_t r) {
  detail::require(x.rank() == 2 && r < x.dim(0), "row",
                  str_cat("row ", r, " out of range for ", shape_str(x.shape())));
  const std::size_t n = x.dim(1);
  std::vector<double> out(x.data().begin() + static_cast<std::ptrdiff_t>(r * n),
                          x.data().begin() + static_cast<std::ptrdiff_t>((r + 1) * n));
  auto xi = x.impl_ptr();
  return grucnn::detail::make_result("row", {n}, std::move(out), {&x}, [xi, r, n](const detail::TensorImpl& y) {
    auto& g = xi->ensure_grad();
    for (std::size_t j = 0; j < n; ++j) g[r * n + j] += y.grad[j];
  });
}

/// Contiguous range [offset, offset + length) of a vector.
inline Tensor slice(const Tensor& x, std::size_t offset, std::size_t length) {
  detail::require(x.rank() == 1 && length > 0 && offset + length <= x.dim(0), "slice",
                  str_cat("range [", offset, ", ", offset + length, ") invalid for ", shape_str(x.shape())));
  std::vector<double> out(x.data().begin() + static_cast<std::ptrdiff_t>(offset),
                          x.data().begin() + static_cast<std::ptrdiff_t>(offset + length));
  auto xi = x.impl_ptr();
  return grucnn::detail::make_result("slice", {length}, std::move(out), {&x},
                                     [xi, offset, length](const detail::TensorImpl& y) {
                                       auto& g = xi->ensure_grad();
                                       for (std::size_t j = 0; j < length; ++j) g[offset + j] += y.grad[j];
                                     });
}

inline Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  auto xi = x.impl_ptr();
  return grucnn::detail::make_result("sum", {1}, {total}, {&x}, [xi](const detail::TensorImpl& y) {
    auto& g = xi->ensure_grad();
    for (double& v : g) v += y.grad[0];
  });
}

}  // namespace ops
}  // namespace grucnn
