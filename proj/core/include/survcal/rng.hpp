#pragma once

#include <cmath>
#include <cstdint>

namespace survcal {

// Counter-based 64-bit generator (splitmix64 output function applied to a keyed
// counter). Streams are derived from (seed, stream id), so adding a new stream
// to a generator never perturbs the draws of existing streams.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ull))) {}

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ull;
    return mix(key_ + counter_);
  }

  // Strictly inside (0, 1); safe under log().
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, two uniforms per draw (no cached spare, so draw count per call
  // is fixed and streams stay aligned).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // [0, n), multiply-shift mapping.
  std::uint32_t uniform_int(std::uint32_t n) {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Fixed stream ids used by the data generators; per-replication streams are
// derived as stream_id + kReplicationStride * replication.
namespace streams {
inline constexpr std::uint64_t kCovariatesNormal = 1;
inline constexpr std::uint64_t kCovariatesBinary3 = 2;
inline constexpr std::uint64_t kCovariatesBinary4 = 3;
inline constexpr std::uint64_t kFailure = 4;
inline constexpr std::uint64_t kCensoring = 5;
inline constexpr std::uint64_t kDomain = 6;
inline constexpr std::uint64_t kSplit = 7;
inline constexpr std::uint64_t kForestBase = 1000;
inline constexpr std::uint64_t kReplicationStride = 1ull << 20;
}  // namespace streams

}  // namespace survcal
