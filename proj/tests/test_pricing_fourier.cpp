#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "exlevy/errors.hpp"
#include "exlevy/pricing_closed.hpp"
#include "exlevy/pricing_fourier.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace exlevy;
using models::Kind;
using pricing::FourierGrid;

TEST_CASE("grid validation") {
  auto check = [](int n, double eta, double damping) { FourierGrid{n, eta, damping}.validate(); };
  CHECK_NOTHROW(check(4096, 0.05, 0.75));
  CHECK_THROWS_AS(check(128, 0.05, 0.75), DomainError);
  CHECK_THROWS_AS(check(1000, 0.05, 0.75), DomainError);
  CHECK_THROWS_AS(check(4096, 0.0, 0.75), DomainError);
  CHECK_THROWS_AS(check(4096, 0.05, -1.0), DomainError);
}

TEST_CASE("vanilla calls: Black-Scholes marginal") {
  const models::MarginalVGppParams bs{-0.5 * 0.3 * 0.3, 0.3, std::nullopt};
  std::vector<double> strikes;
  for (double k = 85.0; k <= 115.0; k += 2.5) strikes.push_back(k);
  const auto calls = pricing::price_vanilla_calls(bs, 0.02, 100.0, 0.8, strikes);
  for (std::size_t i = 0; i < strikes.size(); ++i) {
    CHECK(std::abs(calls[i] - oracle::bs_call(100.0, strikes[i], 0.02, 0.8, 0.3)) < 1e-6);
    CHECK(calls[i] == doctest::Approx(pricing::price_vanilla_call(bs, 0.02, 100.0, strikes[i], 0.8)).epsilon(1e-12));
  }
}

TEST_CASE("vanilla calls: tiny strike recovers the spot") {
  const auto m = models::marginal(fixture::vgpp_fit(), 0);
  CHECK(pricing::price_vanilla_call(m, 0.015, 100.0, 1e-3, 1.0) == doctest::Approx(100.0).epsilon(1e-3));
}

TEST_CASE("vanilla put-call parity") {
  const FourierGrid fine{16384, 0.05, 0.75};
  for (const auto& spec : {fixture::vg_fit(), fixture::vgpp_fit(), fixture::pricing_setup(0.3)}) {
    const auto m = models::marginal(spec, 1);
    for (double k : {85.0, 100.0, 115.0}) {
      const double call = pricing::price_vanilla_call(m, 0.015, 100.0, k, 0.6, fine);
      const double put = pricing::price_vanilla_put(m, 0.015, 100.0, k, 0.6, fine);
      CHECK(std::abs(call - put - (100.0 - k * std::exp(-0.015 * 0.6))) < 1e-8);
      // default grid
      const double c0 = pricing::price_vanilla_call(m, 0.015, 100.0, k, 0.6);
      const double p0 = pricing::price_vanilla_put(m, 0.015, 100.0, k, 0.6);
      CHECK(std::abs(c0 - p0 - (100.0 - k * std::exp(-0.015 * 0.6))) < 1e-6);
    }
  }
}

TEST_CASE("vanilla calls: VG marginal against simulation") {
  // theta G + sigma W(G), G ~ Gamma(alpha T, alpha), drawn with the standard library
  const double theta = -0.1712, sigma = 0.3, alpha = 2.0, r = 0.01, T = 1.0, s0 = 100.0;
  const models::MarginalVGppParams m{theta, sigma, gammapp::GammaPPParams{0.0, alpha, alpha}};
  const double omega = alpha * std::log(1.0 - theta / alpha - 0.5 * sigma * sigma / alpha);
  std::mt19937_64 gen(99);
  std::gamma_distribution<double> G(alpha * T, 1.0 / alpha);
  std::normal_distribution<double> N;
  const std::vector<double> strikes{90.0, 100.0, 110.0};
  std::vector<double> sum(3, 0.0), sum2(3, 0.0);
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double g = G(gen);
    const double s = s0 * std::exp((r + omega) * T + theta * g + sigma * std::sqrt(g) * N(gen));
    for (std::size_t k = 0; k < 3; ++k) {
      const double p = std::max(0.0, s - strikes[k]);
      sum[k] += p;
      sum2[k] += p * p;
    }
  }
  const auto calls = pricing::price_vanilla_calls(m, r, s0, T, strikes);
  for (std::size_t k = 0; k < 3; ++k) {
    const double mean = sum[k] / n;
    const double se = std::sqrt((sum2[k] / n - mean * mean) / n);
    CHECK(std::abs(calls[k] - std::exp(-r * T) * mean) < 3.0 * std::exp(-r * T) * se);
  }
}

TEST_CASE("vanilla damping outside the strip is rejected") {
  const auto m = models::marginal(fixture::vg_fit(), 0);
  CHECK_THROWS_AS(pricing::price_vanilla_call(m, 0.015, 100.0, 100.0, 1.0, {4096, 0.05, 40.0}), DomainError);
  CHECK_THROWS_AS(pricing::price_vanilla_call(m, 0.015, 100.0, -1.0, 1.0), DomainError);
}

TEST_CASE("exchange: zero strike matches the closed forms") {
  for (double s2 : {40.0, 50.0, 60.0}) {
    const ExchangeContract c{50.0, s2, 1.0, 0.0};
    const auto vg = fixture::pricing_setup(0.0);
    const double f = pricing::price_exchange_fourier(c, vg).price;
    CHECK(f == doctest::Approx(pricing::price_vg_exchange_closed(c, vg).price).epsilon(1e-3));
  }
  for (double a : {0.05, 0.3, 0.7, 0.95}) {
    const ExchangeContract c{100.0, 105.0, 1.0, 0.0};
    const auto spec = fixture::pricing_setup(a);
    const double f = pricing::price_exchange_fourier(c, spec).price;
    CHECK(f == doctest::Approx(pricing::price_vgpp_exchange_closed(c, spec).price).epsilon(5e-3));
  }
  const ExchangeContract c{100.0, 100.0, 1.0, 0.0};
  const auto bs = fixture::bs_fit();
  const auto fr = pricing::price_exchange_fourier(c, bs);
  CHECK(fr.price == doctest::Approx(pricing::price_margrabe_bs(c, bs).price).epsilon(1e-6));
  CHECK(fr.method == "fourier");
  CHECK(fr.diagnostics.at("kappa") == 1.0);
}

TEST_CASE("exchange: grid refinement moves the price by less than the residual") {
  const ExchangeContract c{100.0, 100.0, 1.0, 0.0};
  for (const auto& spec : {fixture::vgpp_fit(), fixture::semeraro_fit(Kind::LS), fixture::bb_fit()}) {
    const auto coarse = pricing::price_exchange_fourier(c, spec);
    FourierGrid g = FourierGrid::spread_default();
    g.n_points *= 2;
    const auto fine = pricing::price_exchange_fourier(c, spec, g);
    CHECK(std::abs(fine.price - coarse.price) <= coarse.diagnostics.at("oscillation_residual") + 1e-10);
    CHECK(coarse.warnings.empty());
  }
}

TEST_CASE("exchange: nonzero strike is a lower bound, decreasing in K") {
  const auto spec = fixture::pricing_setup(0.3);
  double prev = 1e300;
  for (double K : {0.0, 2.0, 5.0, 10.0}) {
    const auto r = pricing::price_exchange_fourier({100.0, 105.0, 1.0, K}, spec);
    CHECK(r.price <= prev + 1e-12);
    if (K > 0.0) {
      CHECK(r.diagnostics.count("lower_bound") == 1);
      CHECK(!r.warnings.empty());
    }
    prev = r.price;
  }
}

TEST_CASE("exchange: bad arguments") {
  CHECK_THROWS_AS(pricing::price_exchange_fourier({100, 100, 1, 0}, fixture::vg_fit(), {4096, 0.05, -0.5}),
                  DomainError);
  CHECK_THROWS_AS(pricing::price_exchange_fourier({100, 100, -1, 0}, fixture::vg_fit()), DomainError);
}
