#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "exlevy/errors.hpp"
#include "exlevy/gammapp.hpp"
#include "exlevy/models.hpp"
#include "fixtures.hpp"

using namespace exlevy;
using models::Kind;
using models::ModelSpec;
using cd = std::complex<double>;

namespace {

const cd I(0.0, 1.0);

// Gamma++ CF written out independently of gammapp::cf.
cd gpp_cf(double a, double alpha, double beta, cd u) {
  return std::exp(alpha * (std::log(beta - I * u * a) - std::log(beta - I * u)));
}

std::vector<std::vector<double>> u_grid2() {
  std::vector<std::vector<double>> g;
  for (double u1 : {-3.0, -1.1, 0.0, 0.4, 2.5}) {
    for (double u2 : {-2.2, -0.3, 0.0, 0.9, 3.1}) g.push_back({u1, u2});
  }
  return g;
}

std::vector<ModelSpec> all_fixtures() {
  return {fixture::bs_fit(),          fixture::vg_fit(),         fixture::vgpp_fit(),
          fixture::semeraro_fit(Kind::LS),     fixture::semeraro_fit(Kind::Semeraro), fixture::bb_fit(),
          fixture::pricing_setup(0.3)};
}

}  // namespace

TEST_CASE("kind names round trip") {
  for (Kind k : {Kind::BS, Kind::VG, Kind::VGPP, Kind::Semeraro, Kind::LS, Kind::BB}) {
    CHECK(models::kind_from_string(models::to_string(k)) == k);
  }
  CHECK_THROWS_AS(models::kind_from_string("heston"), DataError);
}

TEST_CASE("validation") {
  CHECK_NOTHROW(fixture::vgpp_fit().validate());
  // rho outside [-1, 1]
  CHECK_THROWS_AS(models::make_bivariate(Kind::VG, 0.0, {0.0, 0.2}, {0.0, 0.2}, 1.2, {0.0, 2.0, 2.0}), DomainError);
  // VGPP needs a > 0, VG needs a = 0
  CHECK_THROWS_AS(models::make_bivariate(Kind::VGPP, 0.0, {0.0, 0.2}, {0.0, 0.2}, 0.5, {0.0, 2.0, 2.0}), DomainError);
  CHECK_THROWS_AS(models::make_bivariate(Kind::VG, 0.0, {0.0, 0.2}, {0.0, 0.2}, 0.5, {0.1, 2.0, 1.8}), DomainError);
  // beta - (theta + sigma^2/2) <= 0
  CHECK_THROWS_AS(models::make_bivariate(Kind::VG, 0.0, {0.9, 1.0}, {0.0, 0.2}, 0.5, {0.0, 1.0, 1.0}), DomainError);
  Eigen::MatrixXd bad(3, 3);
  bad << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;
  CHECK_THROWS_AS(models::check_correlation_matrix(bad), DomainError);
  Eigen::MatrixXd ok(2, 2);
  ok << 1, 1, 1, 1;
  CHECK_NOTHROW(models::check_correlation_matrix(ok));
}

TEST_CASE("drift corrector") {
  const models::MarginalVGppParams vg{-0.2012, 0.2, gammapp::GammaPPParams{0.0, 2.0, 2.0}};
  CHECK(models::drift_corrector(vg) == doctest::Approx(2.0 * std::log(1.0 + 0.2012 / 2.0 - 0.04 / 4.0)).epsilon(1e-14));
  const models::MarginalVGppParams tiny{0.0, 1e-9, gammapp::GammaPPParams{0.3, 2.0, 1.4}};
  CHECK(std::abs(models::drift_corrector(tiny)) < 1e-15);
  const models::MarginalVGppParams bs{0.1, 0.3, std::nullopt};
  CHECK(models::drift_corrector(bs) == doctest::Approx(-(0.1 + 0.045)));
  const models::MarginalVGppParams bad{0.9, 1.0, gammapp::GammaPPParams{0.0, 1.0, 1.0}};
  CHECK_THROWS_AS(models::drift_corrector(bad), DomainError);

  // the joint-CF rule agrees with the marginal rule for every kind
  for (const auto& s : all_fixtures()) {
    const auto w = models::drift_correctors(s);
    for (std::size_t j = 0; j < s.dim(); ++j) {
      CHECK(w[j] == doctest::Approx(models::drift_corrector(models::marginal(s, j))).epsilon(1e-12));
    }
  }
}

TEST_CASE("cf_joint: origin, modulus, Hermitian symmetry") {
  for (const auto& s : all_fixtures()) {
    CHECK(std::abs(models::cf_joint(s, 1.0, std::vector<double>{0.0, 0.0}) - cd(1.0, 0.0)) < 1e-15);
    for (const auto& u : u_grid2()) {
      const cd c = models::cf_joint(s, 0.7, u);
      const cd m = models::cf_joint(s, 0.7, std::vector<double>{-u[0], -u[1]});
      CHECK(std::abs(c) <= 1.0 + 1e-12);
      CHECK(std::abs(m - std::conj(c)) < 1e-13);
    }
  }
  CHECK_THROWS_AS(models::cf_joint(fixture::vg_fit(), 1.0, std::vector<double>{1.0}), DomainError);
}

TEST_CASE("cf_joint marginal consistency") {
  for (const auto& s : all_fixtures()) {
    for (std::size_t j = 0; j < 2; ++j) {
      const auto m = models::marginal(s, j);
      for (double u : {-4.0, -0.6, 0.3, 1.7, 5.0}) {
        std::vector<double> v(2, 0.0);
        v[j] = u;
        CHECK(std::abs(models::cf_joint(s, 1.3, v) - models::cf_marginal(m, 1.3, u)) < 1e-12);
      }
    }
  }
}

TEST_CASE("common-subordinator cf matches the written-out formula") {
  const auto s = fixture::pricing_setup(0.25);
  const double t = 0.8;
  for (const auto& u : u_grid2()) {
    const double th = u[0] * -0.2012 + u[1] * -0.1712;
    const double q = 0.04 * u[0] * u[0] + 0.09 * u[1] * u[1] + 2.0 * 0.8 * 0.2 * 0.3 * u[0] * u[1];
    const cd ref = gpp_cf(0.25, 2.0 * t, 1.5, th + 0.5 * I * q);
    CHECK(std::abs(models::cf_joint(s, t, u) - ref) < 1e-13);
  }
}

TEST_CASE("Semeraro cf matches the product formula") {
  const auto s = fixture::semeraro_fit(Kind::Semeraro);
  const double t = 0.5;
  for (const auto& u : u_grid2()) {
    cd ref(1.0, 0.0);
    cd zarg(0.0, 0.0);
    for (std::size_t j = 0; j < 2; ++j) {
      const auto& a = s.assets[j];
      const cd arg = u[j] * a.theta + 0.5 * I * a.sigma * a.sigma * u[j] * u[j];
      ref *= gpp_cf(s.sem.a, s.sem.A_j[j] * t, s.sem.B / s.sem.alpha[j], arg);
      zarg += s.sem.alpha[j] * arg;
    }
    ref *= gpp_cf(s.sem.a, s.sem.A * t, s.sem.B, zarg);
    CHECK(std::abs(models::cf_joint(s, t, u) - ref) < 1e-12);
  }
}

TEST_CASE("LS with zero Brownian correlation reduces to Semeraro") {
  const auto ls = fixture::semeraro_fit(Kind::LS, 0.0);
  const auto sem = fixture::semeraro_fit(Kind::Semeraro);
  for (const auto& u : u_grid2()) {
    CHECK(std::abs(models::cf_joint(ls, 1.0, u) - models::cf_joint(sem, 1.0, u)) < 1e-12);
  }
  CHECK(models::linear_correlation(ls, 1.0, 0, 1) == doctest::Approx(models::linear_correlation(sem, 1.0, 0, 1)));
}

TEST_CASE("linear correlation") {
  auto zero = fixture::semeraro_fit(Kind::Semeraro);
  for (auto& a : zero.assets) a.theta = 0.0;
  CHECK(models::linear_correlation(zero, 1.0, 0, 1) == 0.0);

  // VG: cov = th1 th2 Var[G] + rho s1 s2 E[G]
  const auto vg = fixture::vg_fit();
  const double eg = 1.0, vgv = 1.0 / 2.04;
  const double v1 = 0.27 * 0.27 * vgv + 0.98 * 0.98 * eg;
  const double v2 = 0.24 * 0.24 * vgv + 0.92 * 0.92 * eg;
  const double c = (0.27 * 0.24 * vgv + 0.96 * 0.98 * 0.92 * eg) / std::sqrt(v1 * v2);
  CHECK(models::linear_correlation(vg, 1.0, 0, 1) == doctest::Approx(c).epsilon(1e-14));
  CHECK(models::linear_correlation(fixture::bs_fit(), 2.0, 0, 1) == doctest::Approx(0.96));

  CHECK_THROWS_AS(models::linear_correlation(vg, 1.0, 0, 0), DomainError);
}

TEST_CASE("marginal moments agree with finite differences of the cf") {
  for (const auto& s : all_fixtures()) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double h = 1e-4;
      auto k = [&](double x) {
        std::vector<double> v(2, 0.0);
        v[j] = x;
        return models::log_cf_joint(s, 1.0, models::cvec{cd(0.0, -v[0]), cd(0.0, -v[1])}).real();
      };
      const double k1 = (k(h) - k(-h)) / (2.0 * h);
      const double k2 = (k(h) - 2.0 * k(0.0) + k(-h)) / (h * h);
      const auto mm = models::marginal_moments(s, 1.0, j);
      CHECK(k1 == doctest::Approx(mm.mean).epsilon(1e-6));
      CHECK(k2 == doctest::Approx(mm.variance).epsilon(1e-4));
    }
  }
}

TEST_CASE("BB convolution solution") {
  const double A_x = 0.141, B_x = 12.20, A_z = 1.4438, B_z = 62.77, a1 = 4.80, bz = -3.15, gz = 1.34, a = 0.001;
  const auto sol = models::bb_solve_convolution(A_x, B_x, A_z, B_z, a1, bz, gz, a);
  CHECK(sol.A_y == doctest::Approx(A_x + A_z).epsilon(1e-15));
  // reference value quoted to four decimals
  CHECK(std::abs(sol.A_y - 1.5839) < 1e-3);
  CHECK(!sol.degenerate);

  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double u = -10.0 + 0.2 * k;
    const cd y = gpp_cf(a, sol.A_y, sol.B_y, u * sol.theta + 0.5 * I * sol.sigma * sol.sigma * u * u);
    const cd x = gpp_cf(a, A_x, B_x, u * sol.beta_x + 0.5 * I * sol.gamma_x * sol.gamma_x * u * u);
    const cd z = gpp_cf(a, A_z, B_z, a1 * u * bz + 0.5 * I * gz * gz * a1 * a1 * u * u);
    worst = std::max(worst, std::abs(y - x * z));
  }
  CHECK(worst < 1e-10);

  const double mean_y = sol.theta * (1 - a) * sol.A_y / sol.B_y;
  const double mean_xz = sol.beta_x * (1 - a) * A_x / B_x + a1 * bz * (1 - a) * A_z / B_z;
  CHECK(std::abs(mean_y - mean_xz) < 1e-10);

  const double var_y = sol.theta * sol.theta * (1 - a * a) * sol.A_y / (sol.B_y * sol.B_y) +
                       sol.sigma * sol.sigma * (1 - a) * sol.A_y / sol.B_y;
  const double var_xz = sol.beta_x * sol.beta_x * (1 - a * a) * A_x / (B_x * B_x) +
                        sol.gamma_x * sol.gamma_x * (1 - a) * A_x / B_x +
                        a1 * a1 * (bz * bz * (1 - a * a) * A_z / (B_z * B_z) + gz * gz * (1 - a) * A_z / B_z);
  CHECK(std::abs(var_y - var_xz) < 1e-10);
}

TEST_CASE("BB convolution: degenerate load and inconsistent legs") {
  const auto d = models::bb_solve_convolution(0.5, 2.0, -0.1, 0.3, 1.0, 3.0, 0.0, -1.0, 1.0, 0.1);
  CHECK(d.degenerate);
  CHECK(d.theta == -0.1);
  CHECK(d.sigma == 0.3);
  CHECK(d.A_y == 0.5);
  CHECK_THROWS_AS(models::bb_solve_convolution(0.141, 12.20, -2.95, 2.84, 1.4438, 62.77, 4.80, -3.15, 1.34, 0.001),
                  DomainError);

  const auto bb = fixture::bb_fit();
  for (std::size_t j = 0; j < 2; ++j) CHECK(models::bb_convolution_residual(bb, j) < 1e-10);
  // reference X-leg values, two or three significant digits
  CHECK(bb.bb.beta[0] == doctest::Approx(-2.95).epsilon(0.01));
  CHECK(bb.bb.gamma[0] == doctest::Approx(2.84).epsilon(0.01));
  CHECK(bb.bb.gamma[1] == doctest::Approx(0.062).epsilon(0.02));
}

TEST_CASE("BB theta^2 / (sigma^2 A_y) is common across assets") {
  const auto bb = fixture::bb_fit();
  const auto m0 = models::marginal(bb, 0);
  const auto m1 = models::marginal(bb, 1);
  const double r0 = m0.theta * m0.theta / (m0.sigma * m0.sigma * m0.sub->alpha);
  const double r1 = m1.theta * m1.theta / (m1.sigma * m1.sigma * m1.sub->alpha);
  CHECK(r0 == doctest::Approx(r1).epsilon(1e-12));
}

TEST_CASE("atoms") {
  CHECK(models::joint_atom(fixture::pricing_setup(0.3), 0.5) == doctest::Approx(std::pow(0.3, 1.0)));
  CHECK(models::joint_atom(fixture::vg_fit(), 1.0) == 0.0);
  const auto sem = fixture::semeraro_fit(Kind::Semeraro);
  CHECK(models::joint_atom(sem, 1.0) ==
        doctest::Approx(std::pow(0.01, sem.sem.A + sem.sem.A_j[0] + sem.sem.A_j[1])).epsilon(1e-12));
  CHECK(models::marginal_atom(models::marginal(fixture::vgpp_fit(), 0), 1.0) ==
        doctest::Approx(std::pow(0.04, 2.43)));
}
