#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <vector>

namespace kgmm {

/// Seedable generator with platform-independent output: mt19937_64 for the
/// raw stream, with the uniform, normal and bounded-integer transforms done
/// here rather than by <random> distributions (whose output is
/// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Seed for an independent sub-stream; splitmix64 of (seed, stream).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Box-Muller, one draw per call).
  double normal();
  /// Uniform integer in [0, n), unbiased. n > 0.
  std::uint64_t below(std::uint64_t n);

  /// k distinct indices from [0, n), returned in ascending order.
  std::vector<Eigen::Index> sample_without_replacement(Eigen::Index n, Eigen::Index k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace kgmm
