#pragma once

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <vector>

#include "grucnn/dsp/fft.hpp"
#include "grucnn/dsp/wav.hpp"

namespace grucnn::metrics {

inline constexpr int kStoiRate = 10000;
inline constexpr std::size_t kStoiFrame = 256;
inline constexpr std::size_t kStoiFft = 512;
inline constexpr std::size_t kStoiBands = 15;
inline constexpr double kStoiLowestCenter = 150.0;
inline constexpr std::size_t kStoiSegment = 30;  // frames, 384 ms
inline constexpr double kStoiBeta = -15.0;       // lower SDR bound, dB
inline constexpr double kStoiDynamicRange = 40.0;

/// Kaiser-windowed sinc lowpass for rational resampling by up/down.
///
/// Cutoff is 1/(2 max(up, down)) of the upsampled rate, transition width a
/// tenth of that, 60 dB stopband. The taps are scaled to sum to `up`.
inline std::vector<double> resampling_filter(std::size_t up, std::size_t down) {
  const std::size_t g = std::gcd(up, down);
  up /= g;
  down /= g;
  const double cutoff = 1.0 / (2.0 * static_cast<double>(std::max(up, down)));
  const double width = cutoff / 10.0;
  const double attenuation = 60.0;
  const auto half = static_cast<std::size_t>(std::ceil((attenuation - 8.0) / (28.714 * width)));
  const double beta = 0.1102 * (attenuation - 8.7);
  const std::size_t n = 2 * half + 1;
  std::vector<double> h(n);
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) - static_cast<double>(half);
    const double x = 2.0 * std::numbers::pi * cutoff * t;
    const double sinc = t == 0.0 ? 1.0 : std::sin(x) / x;
    const double r = t / static_cast<double>(half);
    const double kaiser = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[i] = 2.0 * static_cast<double>(up) * cutoff * sinc * kaiser;
  }
  const double sum = std::accumulate(h.begin(), h.end(), 0.0);
  for (double& v : h) v *= static_cast<double>(up) / sum;
  return h;
}

/// Polyphase rational resampling with a zero-delay linear-phase filter.
/// Output length is ceil(n * up / down).
inline std::vector<double> resample(std::span<const double> x, std::size_t up, std::size_t down) {
  const std::size_t g = std::gcd(up, down);
  up /= g;
  down /= g;
  const auto h = resampling_filter(up, down);
  const auto half = static_cast<long long>(h.size() / 2);
  const std::size_t n_out = (x.size() * up + down - 1) / down;
  std::vector<double> y(n_out, 0.0);
  const auto U = static_cast<long long>(up), D = static_cast<long long>(down);
  const auto taps = static_cast<long long>(h.size());
  for (std::size_t m = 0; m < n_out; ++m) {
    // y[m] = sum_n x[n] h[half + m D - n U]
    const long long center = half + static_cast<long long>(m) * D;
    long long n_lo = (center - (taps - 1) + U - 1) / U;
    if (center - (taps - 1) < 0) n_lo = 0;
    n_lo = std::max(0LL, n_lo);
    const long long n_hi = std::min(static_cast<long long>(x.size()) - 1, center / U);
    double acc = 0.0;
    for (long long n = n_lo; n <= n_hi; ++n) acc += x[static_cast<std::size_t>(n)] * h[static_cast<std::size_t>(center - n * U)];
    y[m] = acc;
  }
  return y;
}

namespace detail {

/// Symmetric Hann without the zero end points (MATLAB hanning).
inline std::vector<double> stoi_window() {
  std::vector<double> w(kStoiFrame);
  for (std::size_t n = 0; n < kStoiFrame; ++n)
    w[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n + 1) / (kStoiFrame + 1)));
  return w;
}

inline std::vector<std::size_t> frame_starts(std::size_t n) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i + kStoiFrame < n; i += kStoiFrame / 2) s.push_back(i);
  return s;
}

/// Drops frames more than 40 dB below the loudest reference frame from both
/// signals and overlap-adds the rest.
inline void remove_silent_frames(std::vector<double>& x, std::vector<double>& y) {
  const auto w = stoi_window();
  const auto starts = frame_starts(x.size());
  std::vector<double> energy(starts.size());
  for (std::size_t f = 0; f < starts.size(); ++f) {
    double e = 0.0;
    for (std::size_t n = 0; n < kStoiFrame; ++n) {
      const double v = w[n] * x[starts[f] + n];
      e += v * v;
    }
    energy[f] = 20.0 * std::log10(std::sqrt(e) + DBL_EPSILON);
  }
  const double top = energy.empty() ? 0.0 : *std::max_element(energy.begin(), energy.end());
  std::vector<std::size_t> kept;
  for (std::size_t f = 0; f < starts.size(); ++f)
    if (top - kStoiDynamicRange - energy[f] < 0) kept.push_back(starts[f]);
  const std::size_t hop = kStoiFrame / 2;
  const std::size_t len = kept.empty() ? 0 : (kept.size() - 1) * hop + kStoiFrame;
  std::vector<double> xs(len, 0.0), ys(len, 0.0);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t n = 0; n < kStoiFrame; ++n) {
      xs[i * hop + n] += w[n] * x[kept[i] + n];
      ys[i * hop + n] += w[n] * y[kept[i] + n];
    }
  }
  x = std::move(xs);
  y = std::move(ys);
}

/// Band edges (FFT bin ranges [lo, hi)) of the one-third-octave bands.
inline std::vector<std::pair<std::size_t, std::size_t>> third_octave_bands() {
  const std::size_t bins = kStoiFft / 2 + 1;
  std::vector<double> f(bins);
  for (std::size_t i = 0; i < bins; ++i) f[i] = static_cast<double>(i) * kStoiRate / kStoiFft;
  auto nearest = [&](double target) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < bins; ++i)
      if ((f[i] - target) * (f[i] - target) < (f[best] - target) * (f[best] - target)) best = i;
    return best;
  };
  std::vector<std::pair<std::size_t, std::size_t>> bands;
  for (std::size_t b = 0; b < kStoiBands; ++b) {
    const double center = kStoiLowestCenter * std::pow(2.0, static_cast<double>(b) / 3.0);
    const double lo = center * std::pow(2.0, -1.0 / 6.0);
    const double hi = center * std::pow(2.0, 1.0 / 6.0);
    bands.emplace_back(nearest(lo), nearest(hi));
  }
  return bands;
}

/// [bands x frames] one-third-octave envelope.
inline std::vector<std::vector<double>> band_envelopes(const std::vector<double>& x) {
  const auto w = stoi_window();
  const auto bands = third_octave_bands();
  const auto starts = frame_starts(x.size());
  dsp::RealFft fft(kStoiFft);
  std::vector<std::vector<double>> env(kStoiBands, std::vector<double>(starts.size()));
  std::vector<double> frame(kStoiFft);
  for (std::size_t f = 0; f < starts.size(); ++f) {
    std::fill(frame.begin(), frame.end(), 0.0);
    for (std::size_t n = 0; n < kStoiFrame; ++n) frame[n] = w[n] * x[starts[f] + n];
    const auto spec = fft.forward(frame);
    for (std::size_t b = 0; b < kStoiBands; ++b) {
      double e = 0.0;
      for (std::size_t k = bands[b].first; k < bands[b].second; ++k) e += std::norm(spec[k]);
      env[b][f] = std::sqrt(e);
    }
  }
  return env;
}

}  // namespace detail

/// Short-time objective intelligibility of `test` against `reference`.
inline double stoi(const dsp::AudioClip& reference, const dsp::AudioClip& test) {
  if (reference.samples.size() != test.samples.size())
    throw ContractError(str_cat("stoi: length mismatch (", reference.samples.size(), " vs ", test.samples.size(), ")"));
  if (reference.sample_rate != test.sample_rate) throw ContractError("stoi: sample rate mismatch");
  const auto rate = static_cast<std::size_t>(reference.sample_rate);
  auto x = resample(reference.samples, kStoiRate, rate);
  auto y = resample(test.samples, kStoiRate, rate);
  detail::remove_silent_frames(x, y);
  const auto X = detail::band_envelopes(x);
  const auto Y = detail::band_envelopes(y);
  const std::size_t frames = X.front().size();
  if (frames < kStoiSegment)
    throw ContractError(str_cat("stoi: clip too short after silence removal (", frames, " frames, need ",
                                kStoiSegment, ")"));

  const double clip = 1.0 + std::pow(10.0, -kStoiBeta / 20.0);
  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> xs(kStoiSegment), ys(kStoiSegment);
  for (std::size_t m = kStoiSegment; m <= frames; ++m) {
    for (std::size_t b = 0; b < kStoiBands; ++b) {
      double nx = 0.0, ny = 0.0;
      for (std::size_t i = 0; i < kStoiSegment; ++i) {
        xs[i] = X[b][m - kStoiSegment + i];
        ys[i] = Y[b][m - kStoiSegment + i];
        nx += xs[i] * xs[i];
        ny += ys[i] * ys[i];
      }
      const double scale = std::sqrt(nx) / (std::sqrt(ny) + DBL_EPSILON);
      for (std::size_t i = 0; i < kStoiSegment; ++i) ys[i] = std::min(ys[i] * scale, xs[i] * clip);
      const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / kStoiSegment;
      const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / kStoiSegment;
      double sx = 0.0, sy = 0.0, sxy = 0.0;
      for (std::size_t i = 0; i < kStoiSegment; ++i) {
        sx += (xs[i] - mx) * (xs[i] - mx);
        sy += (ys[i] - my) * (ys[i] - my);
      }
      const double dx = std::sqrt(sx) + DBL_EPSILON, dy = std::sqrt(sy) + DBL_EPSILON;
      for (std::size_t i = 0; i < kStoiSegment; ++i) sxy += ((xs[i] - mx) / dx) * ((ys[i] - my) / dy);
      total += sxy;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace grucnn::metrics
