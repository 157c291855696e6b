#include "exlevy/random.hpp"

#include <cmath>

#include "exlevy/errors.hpp"

namespace exlevy {

namespace {

// below this negative-binomial mean the CDF is inverted term by term
constexpr double kInversionMeanLimit = 40.0;

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(block + 0x632be59bd9b4e019ULL));
}

RandomStream::RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t block)
    : engine_(block_seed(seed, block)) {}

double RandomStream::uniform() noexcept {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() { return normal_(engine_); }

double RandomStream::gamma(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw DomainError("gamma variate: shape must be positive and finite");
  }
  if (shape < 1.0) {
    // G(k) = G(k+1) U^{1/k}
    const double g = gamma(shape + 1.0);
    return g * std::exp(std::log(uniform()) / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

std::uint64_t RandomStream::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("poisson variate: bad mean");
  if (mean == 0.0) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(engine_);
}

std::uint64_t RandomStream::negative_binomial(double shape, double p) {
  if (!(shape > 0.0) || !(p > 0.0) || !(p <= 1.0)) {
    throw DomainError("negative binomial variate: need shape > 0 and p in (0, 1]");
  }
  if (p == 1.0) return 0;
  const double q = 1.0 - p;
  const double mean = shape * q / p;
  if (mean <= kInversionMeanLimit) {
    const double u = uniform();
    double prob = std::exp(shape * std::log(p));
    double cdf = prob;
    std::uint64_t n = 0;
    while (cdf < u && cdf < 1.0 - 1e-12) {
      prob *= (shape + static_cast<double>(n)) / static_cast<double>(n + 1) * q;
      cdf += prob;
      ++n;
      if (prob == 0.0 && static_cast<double>(n) > mean) break;
    }
    return n;
  }
  // Poisson mixture: S | L ~ Poisson(L), L ~ Gamma(shape, q/p)
  return poisson(gamma(shape) * q / p);
}

}  // namespace exlevy
