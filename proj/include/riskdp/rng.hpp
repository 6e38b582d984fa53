#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace riskdp {

/// Counter-based generator built on the SplitMix64 finalizer.
///
/// Output i of a stream is mix(key + (i + 1) * golden), so a stream is fully
/// described by (key, counter). Child streams are derived by hashing a stream
/// id into the key, which lets independent work cells (seeds, (h,s,a) cells,
/// workers) draw from reproducible streams regardless of scheduling.
///
/// Doubles are produced from the top 53 bits, never through
/// std::uniform_real_distribution, so results are bit-identical across
/// standard libraries.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  static constexpr std::string_view kName = "splitmix64-ctr";
  static constexpr int kVersion = 1;

  explicit CounterRng(std::uint64_t seed = 0) : key_(mix(seed ^ kSeedSalt)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Independent child stream keyed by `stream`; does not advance this stream.
  [[nodiscard]] CounterRng split(std::uint64_t stream) const {
    CounterRng child;
    child.key_ = mix(key_ ^ mix(stream * kGolden + kSplitSalt));
    child.counter_ = 0;
    return child;
  }

  template <typename... Ids>
  [[nodiscard]] CounterRng split(std::uint64_t first, std::uint64_t second, Ids... rest) const {
    return split(first).split(second, static_cast<std::uint64_t>(rest)...);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  friend bool operator==(const CounterRng&, const CounterRng&) = default;

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kSeedSalt = 0x6a09e667f3bcc909ULL;
  static constexpr std::uint64_t kSplitSalt = 0xbb67ae8584caa73bULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace riskdp
