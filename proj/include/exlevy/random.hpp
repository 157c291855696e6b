#pragma once

#include <cstdint>
#include <random>

namespace exlevy {

/// One step of the splitmix64 mixer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for block `block` of a run seeded with `seed`. Independent of thread layout.
std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block) noexcept;

/// Random stream handed explicitly to every sampler; one per block or thread.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);
  RandomStream(std::uint64_t seed, std::uint64_t block);

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal();
  /// Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 through the U^{1/shape} boost.
  double gamma(double shape);
  std::uint64_t poisson(double mean);
  /// P(S = n) = C(shape+n-1, n) p^shape (1-p)^n, n = 0, 1, ...
  std::uint64_t negative_binomial(double shape, double p);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace exlevy
