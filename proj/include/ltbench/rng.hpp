#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace lt {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream. Draw number `i` of the stream keyed by
/// (seed, stream, substream) is a pure function of those four integers, so
/// rows can be generated in any order or on any thread and still agree.
///
/// The distributions are implemented here rather than taken from <random>
/// because the standard ones are not specified bit-for-bit across libraries.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0,
                      std::uint64_t substream = 0) noexcept
      : key_(mix64(mix64(mix64(seed) ^ stream) ^ (substream * 0xD1B54A32D192ED03ULL))) {}

  std::uint64_t next_u64() noexcept { return mix64(key_ + counter_++ * 0x9E3779B97F4A7C15ULL); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n > 0 (multiply-shift reduction).
  std::uint64_t uniform_index(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller; consumes two draws.
  double normal() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Fisher-Yates shuffle of `idx` driven by `rng`.
void shuffle(std::span<std::size_t> idx, CounterRng& rng) noexcept;

/// Stream identifiers used by the generators. Keeping them in one place avoids
/// two subsystems accidentally sharing a stream.
namespace streams {
inline constexpr std::uint64_t kScmParameters = 0x5C40;
inline constexpr std::uint64_t kScmRows = 0x5C41;
inline constexpr std::uint64_t kSplit = 0x5B17;
inline constexpr std::uint64_t kTemporal = 0x7E40;
inline constexpr std::uint64_t kIidEval = 0x1DE0;
inline constexpr std::uint64_t kInit = 0x1417;
inline constexpr std::uint64_t kShuffle = 0x5F1E;
inline constexpr std::uint64_t kReadout = 0x4EAD;
inline constexpr std::uint64_t kNoise = 0x4015;
}  // namespace streams

}  // namespace lt
