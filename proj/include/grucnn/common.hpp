#pragma once

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace grucnn {

/// Raised when a caller violates a documented precondition (shapes, ranges,
/// file formats). The CLI maps it to exit code 2.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for failures that happen while doing valid work (I/O, numerical
/// blow-up during training).
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename... Args>
std::string str_cat(Args&&... args) {
  std::ostringstream os;
  (os << ... << std::forward<Args>(args));
  return os.str();
}

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

inline std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += " x ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

/// Seedable generator with platform-independent range mapping. The standard
/// distributions are implementation-defined, so they are avoided wherever
/// results must be reproducible bit-for-bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Unbiased integer in [0, n).
  std::size_t index(std::size_t n) {
    if (n == 0) throw ContractError("Rng::index: empty range");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

  std::string state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void restore(const std::string& state) {
    std::istringstream is(state);
    is >> engine_;
    if (is.fail()) throw ContractError("Rng::restore: malformed generator state");
  }

 private:
  std::mt19937_64 engine_;
};

// Logging. GRUCNN_LOG selects verbosity: quiet, info (default), debug.
enum class LogLevel { quiet = 0, info = 1, debug = 2 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("GRUCNN_LOG");
    if (env == nullptr) return LogLevel::info;
    const std::string_view v(env);
    if (v == "quiet" || v == "0") return LogLevel::quiet;
    if (v == "debug" || v == "2") return LogLevel::debug;
    return LogLevel::info;
  }();
  return level;
}

template <typename... Args>
void log_info(Args&&... args) {
  if (log_level() >= LogLevel::info)
    std::cerr << "[grucnn] " << str_cat(std::forward<Args>(args)...) << '\n';
}

template <typename... Args>
void log_debug(Args&&... args) {
  if (log_level() >= LogLevel::debug)
    std::cerr << "[grucnn:debug] " << str_cat(std::forward<Args>(args)...) << '\n';
}

/// 64-bit FNV-1a, used for spec digests and checkpoint checksums.
inline std::uint64_t fnv1a64(const void* bytes, std::size_t n,
                             std::uint64_t hash = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < n; ++i) {
    hash ^= p[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace grucnn
