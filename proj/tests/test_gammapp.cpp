#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "exlevy/errors.hpp"
#include "exlevy/gammapp.hpp"
#include "oracles.hpp"

using namespace exlevy;
using gammapp::GammaPPParams;
using cd = std::complex<double>;

TEST_CASE("validate") {
  auto check = [](double a, double alpha, double beta) { GammaPPParams{a, alpha, beta}.validate(); };
  CHECK_NOTHROW(check(0.0, 1.0, 1.0));
  CHECK_THROWS_AS(check(1.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(check(-0.1, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(check(0.2, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(check(0.2, 1.0, -1.0), DomainError);
}

TEST_CASE("cf basics") {
  const GammaPPParams p{0.3, 2.0, 1.4};
  CHECK(std::abs(gammapp::cf(p, 0.0) - cd(1.0, 0.0)) < 1e-15);
  for (double u : {-5.0, 0.5, 3.0}) {
    CHECK(std::abs(gammapp::cf({1.0 - 1e-12, 2.0, 1.4}, u) - cd(1.0, 0.0)) < 1e-9);
    CHECK(std::abs(gammapp::cf(p, u)) <= 1.0 + 1e-15);
  }
  const cd gamma_cf = std::pow(cd(3.0, 0.0) / cd(3.0, -1.0), 2.0);
  CHECK(std::abs(gammapp::cf({0.0, 2.0, 3.0}, 1.0) - gamma_cf) < 1e-15);
  CHECK(std::abs(std::exp(gammapp::log_cf(p, cd(0.7, 0.0))) - gammapp::cf(p, 0.7)) < 1e-14);
}

TEST_CASE("cf on a large-u grid stays on the principal branch consistently") {
  // alpha large enough that arg(cf) wraps several times
  const GammaPPParams p{0.2, 9.5, 3.0};
  for (double u = -200.0; u <= 200.0; u += 3.7) {
    const cd direct = std::pow((cd(p.beta, 0.0) - cd(0.0, u * p.a)) / cd(p.beta, -u), p.alpha);
    CHECK(std::abs(gammapp::cf(p, u) - direct) < 1e-12);
  }
}

TEST_CASE("self-decomposability identity") {
  for (double a : {0.01, 0.3, 0.8}) {
    for (double alpha : {0.5, 2.0, 7.0}) {
      const GammaPPParams g{0.0, alpha, 1.7};
      const GammaPPParams r{a, alpha, 1.7};
      for (double u = -30.0; u <= 30.0; u += 0.61) {
        const cd lhs = gammapp::cf(g, u);
        const cd rhs = gammapp::cf(g, a * u) * gammapp::cf(r, u);
        CHECK(std::abs(lhs - rhs) < 1e-12);
      }
    }
  }
}

TEST_CASE("moments") {
  auto m = gammapp::moments({0.0, 3.0, 2.0});
  CHECK(m.mean == doctest::Approx(1.5));
  CHECK(m.variance == doctest::Approx(0.75));
  m = gammapp::moments({0.5, 2.0, 4.0});
  CHECK(m.mean == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(m.variance == doctest::Approx(0.09375).epsilon(1e-15));
  m = gammapp::moments({1.0 - 1e-10, 2.0, 4.0});
  CHECK(m.mean < 1e-9);
  CHECK(m.variance < 1e-9);
}

TEST_CASE("moments agree with finite differences of log cf") {
  const GammaPPParams p{0.35, 2.6, 1.9};
  const double h = 1e-4;
  // cumulants from derivatives of log phi(-i s) = log E[e^{sZ}]
  auto k = [&](double s) { return gammapp::log_cf(p, cd(0.0, -s)).real(); };
  const double k1 = (k(h) - k(-h)) / (2.0 * h);
  const double k2 = (k(h) - 2.0 * k(0.0) + k(-h)) / (h * h);
  const auto m = gammapp::moments(p);
  CHECK(k1 == doctest::Approx(m.mean).epsilon(1e-7));
  CHECK(k2 == doctest::Approx(m.variance).epsilon(1e-5));
}

TEST_CASE("density atom and normalization") {
  const auto d = gammapp::density({0.04, 2.43, 2.43 * 0.96}, 0.0);
  CHECK(d.atom_mass == doctest::Approx(std::pow(0.04, 2.43)).epsilon(1e-14));

  for (auto p : {GammaPPParams{0.3, 2.0, 2.0}, GammaPPParams{0.05, 0.7, 0.665}, GammaPPParams{0.8, 4.0, 0.8}}) {
    const double atom = gammapp::density(p, 0.0).atom_mass;
    const double mean = gammapp::moments(p).mean;
    auto f = [&](double x) { return gammapp::density(p, x).continuous_density; };
    const double mass = oracle::integrate_half_line(f, {0.05 * mean, mean, 5.0 * mean}, 1e-11);
    CHECK(mass + atom == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("density tends to the gamma density as a vanishes") {
  const GammaPPParams p{1e-4, 2.5, 2.0 * (1.0 - 1e-4)};
  for (double x : {0.1, 0.8, 2.0, 5.0}) {
    const auto d = gammapp::density(p, x);
    CHECK(d.atom_mass < 1e-9);
    CHECK(d.continuous_density == doctest::Approx(oracle::gamma_density(x, 2.5, 2.0)).epsilon(1e-3));
  }
  const auto g = gammapp::density({0.0, 0.5, 1.0}, 0.0);
  CHECK(g.singular);
  CHECK(g.atom_mass == 0.0);
  CHECK(gammapp::density({0.0, 2.0, 3.0}, 1.2).continuous_density ==
        doctest::Approx(oracle::gamma_density(1.2, 2.0, 3.0)).epsilon(1e-13));
}

TEST_CASE("scale") {
  const GammaPPParams p{0.1, 3.0, 6.0};
  const auto s = gammapp::scale(p, 2.0);
  CHECK(s.a == 0.1);
  CHECK(s.alpha == 3.0);
  CHECK(s.beta == 3.0);
  const auto id = gammapp::scale(p, 1.0);
  CHECK(id.beta == p.beta);
  for (int i = 0; i < 50; ++i) {
    const double u = -10.0 + 0.4 * i;
    CHECK(std::abs(gammapp::cf(s, u) - gammapp::cf(p, 2.0 * u)) < 1e-12);
  }
  CHECK_THROWS_AS(gammapp::scale(p, 0.0), DomainError);
}

TEST_CASE("convolve") {
  const GammaPPParams p1{0.1, 1.0, 2.0};
  const GammaPPParams p2{0.1, 2.0, 2.0};
  const auto c = gammapp::convolve(p1, p2);
  CHECK(c.a == 0.1);
  CHECK(c.alpha == 3.0);
  CHECK(c.beta == 2.0);
  for (double u = -12.0; u <= 12.0; u += 0.5) {
    CHECK(std::abs(gammapp::cf(c, u) - gammapp::cf(p1, u) * gammapp::cf(p2, u)) < 1e-12);
  }
  const auto n = gammapp::convolve(p2, {0.1, 1e-15, 2.0});
  CHECK(n.alpha == doctest::Approx(p2.alpha).epsilon(1e-14));
  const GammaPPParams bad_a{0.2, 1.0, 2.0};
  const GammaPPParams bad_beta{0.1, 1.0, 2.5};
  CHECK_THROWS_AS(gammapp::convolve(p1, bad_a), DomainError);
  CHECK_THROWS_AS(gammapp::convolve(p1, bad_beta), DomainError);
}

TEST_CASE("negative binomial weights sum to one and match the tail") {
  for (double shape : {0.3, 2.43, 11.0}) {
    for (double a : {0.04, 0.5, 0.93}) {
      double s = 0.0;
      long long n = 0;
      for (; n < 200000; ++n) {
        s += std::exp(gammapp::log_nb_weight(shape, a, n));
        if (1.0 - s < 1e-14) break;
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
      const long long m = std::max(1LL, n / 3);
      double head = 0.0;
      for (long long k = 0; k <= m; ++k) head += std::exp(gammapp::log_nb_weight(shape, a, k));
      CHECK(std::abs(gammapp::nb_tail(shape, a, m) - (1.0 - head)) < 1e-12);
    }
  }
}

TEST_CASE("at_time and unit_mean_beta") {
  const GammaPPParams p{0.2, 2.0, 1.6};
  const auto q = gammapp::at_time(p, 0.25);
  CHECK(q.alpha == doctest::Approx(0.5));
  CHECK(q.beta == p.beta);
  const double b = gammapp::unit_mean_beta(0.2, 2.0);
  CHECK(gammapp::moments({0.2, 2.0, b}).mean == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("sampler: atom frequency, moments and characteristic function") {
  const GammaPPParams p{0.2, 2.0, 1.6};
  const int n = 200000;
  RandomStream rng(2024);
  std::vector<double> xs(n);
  int atoms = 0;
  for (int i = 0; i < n; ++i) {
    const auto s = gammapp::sample(p, 1.0, rng);
    if (s.atom_hit) {
      CHECK(s.value == 0.0);
      ++atoms;
    }
    xs[static_cast<std::size_t>(i)] = s.value;
  }
  const double q = 0.04;
  CHECK(std::abs(atoms / double(n) - q) < 3.0 * std::sqrt(q * (1 - q) / n));
  double m = 0.0, v = 0.0;
  for (double x : xs) m += x;
  m /= n;
  for (double x : xs) v += (x - m) * (x - m);
  v /= n - 1;
  const auto mo = gammapp::moments(p);
  CHECK(m == doctest::Approx(mo.mean).epsilon(0.01));
  CHECK(v == doctest::Approx(mo.variance).epsilon(0.02));
  for (int k = 1; k <= 20; ++k) {
    const double u = 0.25 * k;
    cd e(0.0, 0.0);
    for (double x : xs) e += std::exp(cd(0.0, u * x));
    e /= double(n);
    CHECK(std::abs(e - gammapp::cf(p, u)) < 4.0 / std::sqrt(double(n)));
  }
}

TEST_CASE("sampler at tiny a is close to the gamma law (two-sample KS)") {
  const GammaPPParams p{0.001, 1.7, 1.3};
  const int n = 20000;
  RandomStream r1(5), r2(6);
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = gammapp::sample(p, 1.0, r1).value;
    y[static_cast<std::size_t>(i)] = r2.gamma(1.7) / 1.3;
  }
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] <= y[j]) ++i;
    else ++j;
    d = std::max(d, std::abs(double(i) / n - double(j) / n));
  }
  // 1% critical value for equal sample sizes
  CHECK(d < 1.628 * std::sqrt(2.0 / n));
}

TEST_CASE("sampler respects the time scale") {
  const GammaPPParams p{0.5, 3.0, 1.5};
  RandomStream rng(77);
  const int n = 100000;
  int atoms = 0;
  for (int i = 0; i < n; ++i) atoms += gammapp::sample(p, 0.25, rng).atom_hit ? 1 : 0;
  const double q = std::pow(0.5, 0.75);
  CHECK(std::abs(atoms / double(n) - q) < 3.0 * std::sqrt(q * (1 - q) / n));
}
