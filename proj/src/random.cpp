#include "kgmm/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "kgmm/error.hpp"

namespace kgmm {

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "Rng::below needs n > 0");
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % n;
  }
}

std::vector<Eigen::Index> Rng::sample_without_replacement(Eigen::Index n, Eigen::Index k) {
  if (k < 0 || k > n) throw Error(ErrorKind::InvalidArgument, "sample size exceeds population");
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Eigen::Index>(below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace kgmm
