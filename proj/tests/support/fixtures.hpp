#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "support/oracles.hpp"

namespace grucnn::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / (tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

/// Writes `n_clean` harmonic clips to <root>/clean and `n_noise` noise clips
/// (white, with a different colouring per file) to <root>/noise.
inline void write_corpus(const std::filesystem::path& root, std::size_t n_clean, std::size_t n_noise,
                         std::size_t clean_samples = 8000, std::size_t noise_samples = 24000) {
  std::filesystem::create_directories(root / "clean");
  std::filesystem::create_directories(root / "noise");
  Rng rng(2024);
  for (std::size_t i = 0; i < n_clean; ++i) {
    auto clip = harmonic_clip(clean_samples, 120.0 + 23.0 * static_cast<double>(i), 0.3 * static_cast<double>(i), rng);
    dsp::write_wav(root / "clean" / ("utt" + std::to_string(i) + ".wav"), clip);
  }
  for (std::size_t i = 0; i < n_noise; ++i) {
    auto clip = white_noise(noise_samples, rng, 0.4);
    // One-pole smoothing gives each file its own spectral tilt.
    const double a = 0.1 * static_cast<double>(i % 8);
    for (std::size_t k = 1; k < clip.size(); ++k) clip.samples[k] = (1 - a) * clip.samples[k] + a * clip.samples[k - 1];
    dsp::write_wav(root / "noise" / ("noise" + std::to_string(i) + ".wav"), clip);
  }
}

}  // namespace grucnn::testing
