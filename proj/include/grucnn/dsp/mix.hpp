#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "grucnn/dsp/wav.hpp"

namespace grucnn::dsp {

inline double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

struct MixResult {
  AudioClip mixture;
  double noise_gain = 0.0;
  std::size_t noise_offset = 0;
  std::size_t clipped_samples = 0;
};

/// Adds noise to clean speech at a target SNR over full-utterance RMS.
///
/// The noise segment starts at a seeded random offset and wraps around
/// circularly. Its gain is rms(clean) / (rms(segment) * 10^(snr/20)), so
/// 10 log10(sum clean^2 / sum (gain * segment)^2) equals snr_db up to rounding.
inline MixResult mix_at_snr_detailed(const AudioClip& clean, const AudioClip& noise, double snr_db,
                                     std::uint64_t seed) {
  if (!std::isfinite(snr_db)) throw ContractError(str_cat("mix_at_snr: SNR must be finite, got ", snr_db));
  if (clean.sample_rate != kSampleRate || noise.sample_rate != kSampleRate)
    throw ContractError("mix_at_snr: both clips must be 16 kHz");
  if (noise.size() < clean.size())
    throw ContractError(str_cat("mix_at_snr: noise has ", noise.size(), " samples, clean needs ", clean.size()));
  const double clean_rms = rms(clean.samples);
  if (clean_rms == 0.0) throw ContractError("mix_at_snr: clean signal is silent");

  Rng rng(seed);
  MixResult result;
  result.noise_offset = rng.index(noise.size());
  std::vector<double> segment(clean.size());
  for (std::size_t i = 0; i < segment.size(); ++i)
    segment[i] = noise.samples[(result.noise_offset + i) % noise.size()];
  const double noise_rms = rms(segment);
  if (noise_rms == 0.0) throw ContractError("mix_at_snr: noise segment is silent");

  result.noise_gain = clean_rms / (noise_rms * std::pow(10.0, snr_db / 20.0));
  result.mixture.samples.resize(clean.size());
  for (std::size_t i = 0; i < segment.size(); ++i)
    result.mixture.samples[i] = clean.samples[i] + result.noise_gain * segment[i];
  result.clipped_samples = clip_to_unit(result.mixture);
  return result;
}

inline AudioClip mix_at_snr(const AudioClip& clean, const AudioClip& noise, double snr_db, std::uint64_t seed) {
  return mix_at_snr_detailed(clean, noise, snr_db, seed).mixture;
}

}  // namespace grucnn::dsp
