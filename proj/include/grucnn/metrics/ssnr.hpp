#pragma once

#include <algorithm>
#include <cmath>

#include "grucnn/dsp/wav.hpp"

namespace grucnn::metrics {

inline constexpr std::size_t kSsnrSegment = 320;  // 20 ms at 16 kHz, non-overlapping
inline constexpr double kSsnrMinDb = -10.0;
inline constexpr double kSsnrMaxDb = 35.0;
inline constexpr double kSsnrSilenceEnergy = 1e-8;

/// One-line description of the SSNR variant, for report headers.
inline std::string ssnr_variant() {
  return "ssnr: 20 ms non-overlapping segments, per-segment SNR clipped to [-10, 35] dB, "
         "segments with reference energy < 1e-8 excluded, trailing partial segment ignored";
}

/// Segmental SNR in dB. A trailing partial segment is ignored.
inline double ssnr(const dsp::AudioClip& reference, const dsp::AudioClip& test) {
  if (reference.samples.size() != test.samples.size())
    throw ContractError(str_cat("ssnr: length mismatch (", reference.samples.size(), " vs ", test.samples.size(), ")"));
  if (reference.sample_rate != test.sample_rate) throw ContractError("ssnr: sample rate mismatch");
  const std::size_t segments = reference.samples.size() / kSsnrSegment;
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t s = 0; s < segments; ++s) {
    double sig = 0.0, err = 0.0;
    for (std::size_t i = s * kSsnrSegment; i < (s + 1) * kSsnrSegment; ++i) {
      const double r = reference.samples[i];
      const double d = r - test.samples[i];
      sig += r * r;
      err += d * d;
    }
    if (sig < kSsnrSilenceEnergy) continue;
    // err == 0 gives +inf, which clips to the upper bound.
    total += std::clamp(10.0 * std::log10(sig / err), kSsnrMinDb, kSsnrMaxDb);
    ++used;
  }
  if (used == 0) throw ContractError("ssnr: every segment of the reference is silent");
  return total / static_cast<double>(used);
}

}  // namespace grucnn::metrics
