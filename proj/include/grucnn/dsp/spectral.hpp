#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "grucnn/dsp/fft.hpp"
#include "grucnn/dsp/wav.hpp"
#include "grucnn/ops.hpp"

namespace grucnn::dsp {

inline constexpr std::size_t kFrameLength = 320;  // 20 ms at 16 kHz
inline constexpr std::size_t kHop = 160;          // 10 ms
inline constexpr std::size_t kBins = kFrameLength / 2 + 1;
inline constexpr double kPowerFloor = 1e-10;

/// Log-power features of one utterance plus what is needed to invert them.
struct SpectroFrameSequence {
  RowMatrix log_power;  // [kBins x T], natural log of floored |X|^2
  RowMatrix phase;      // [kBins x T], radians in (-pi, pi]
  std::size_t frame_len = kFrameLength;
  std::size_t hop = kHop;
  std::size_t num_samples_original = 0;

  std::size_t frames() const { return static_cast<std::size_t>(log_power.cols()); }
};

/// Periodic Hann window of length n.
inline std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

/// Length after right zero-padding so frames tile the signal exactly.
inline std::size_t padded_length(std::size_t num_samples) {
  if (num_samples <= kFrameLength) return kFrameLength;
  const std::size_t extra = num_samples - kFrameLength;
  return kFrameLength + (extra + kHop - 1) / kHop * kHop;
}

inline std::size_t frame_count(std::size_t num_samples) {
  return (padded_length(num_samples) - kFrameLength) / kHop + 1;
}

namespace detail {

inline RealFft& frame_fft() {
  thread_local RealFft fft(kFrameLength);
  return fft;
}

}  // namespace detail

/// Hann-windowed 320-point transform with hop 160.
///
/// Each windowed frame is rotated by half a frame before the transform
/// (zero-phase windowing), so phases are measured from the frame centre.
inline SpectroFrameSequence stft(const AudioClip& clip) {
  if (clip.samples.empty()) throw ContractError("stft: empty clip");
  if (clip.sample_rate != kSampleRate)
    throw ContractError(str_cat("stft: unsupported sample rate ", clip.sample_rate, " Hz"));
  const std::size_t padded = padded_length(clip.size());
  const std::size_t frames = frame_count(clip.size());
  std::vector<double> x(padded, 0.0);
  std::copy(clip.samples.begin(), clip.samples.end(), x.begin());
  static const std::vector<double> window = periodic_hann(kFrameLength);

  SpectroFrameSequence seq;
  seq.num_samples_original = clip.size();
  seq.log_power.resize(kBins, static_cast<Eigen::Index>(frames));
  seq.phase.resize(kBins, static_cast<Eigen::Index>(frames));
  auto& fft = detail::frame_fft();
  std::vector<double> buf(kFrameLength);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * kHop;
    for (std::size_t n = 0; n < kFrameLength; ++n) {
      const std::size_t j = (n + kFrameLength / 2) % kFrameLength;
      buf[n] = window[j] * x[start + j];
    }
    const auto spec = fft.forward(buf);
    for (std::size_t k = 0; k < kBins; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const auto tt = static_cast<Eigen::Index>(t);
      seq.log_power(kk, tt) = std::log(std::max(std::norm(spec[k]), kPowerFloor));
      double ph = std::arg(spec[k]);
      if (ph <= -std::numbers::pi) ph = std::numbers::pi;
      seq.phase(kk, tt) = ph;
    }
  }
  return seq;
}

/// Rebuilds audio from log-power and phase by weighted overlap-add with the
/// analysis window, normalized by the summed squared window.
inline AudioClip istft_with_phase(const RowMatrix& log_power, const RowMatrix& phase, std::size_t num_samples) {
  if (log_power.rows() != static_cast<Eigen::Index>(kBins) || log_power.rows() != phase.rows() ||
      log_power.cols() != phase.cols() || log_power.cols() == 0)
    throw ContractError(str_cat("istft_with_phase: shape mismatch, log_power [", log_power.rows(), " x ",
                                log_power.cols(), "], phase [", phase.rows(), " x ", phase.cols(), "], expected ",
                                kBins, " bins"));
  const auto frames = static_cast<std::size_t>(log_power.cols());
  const std::size_t span = (frames - 1) * kHop + kFrameLength;
  static const std::vector<double> window = periodic_hann(kFrameLength);
  std::vector<double> acc(span, 0.0), norm(span, 0.0);
  std::vector<std::complex<double>> spec(kBins);
  auto& fft = detail::frame_fft();
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < kBins; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const auto tt = static_cast<Eigen::Index>(t);
      spec[k] = std::polar(std::exp(0.5 * log_power(kk, tt)), phase(kk, tt));
    }
    const auto buf = fft.inverse(spec);
    const std::size_t start = t * kHop;
    for (std::size_t n = 0; n < kFrameLength; ++n) {
      const std::size_t j = (n + kFrameLength / 2) % kFrameLength;
      acc[start + j] += window[j] * buf[n];
      norm[start + j] += window[j] * window[j];
    }
  }
  AudioClip out;
  out.samples.assign(num_samples, 0.0);
  for (std::size_t i = 0; i < std::min(num_samples, span); ++i)
    out.samples[i] = norm[i] > 1e-12 ? acc[i] / norm[i] : 0.0;
  return out;
}

inline AudioClip istft_with_phase(const SpectroFrameSequence& seq) {
  return istft_with_phase(seq.log_power, seq.phase, seq.num_samples_original);
}

/// |X| = exp(log_power / 2), elementwise.
inline RowMatrix magnitude(const SpectroFrameSequence& seq) {
  return (seq.log_power.array() * 0.5).exp().matrix();
}

}  // namespace grucnn::dsp
