#include "exlevy/gammapp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "exlevy/errors.hpp"

namespace exlevy::gammapp {

namespace {

constexpr long long kMaxDensityTerms = 50'000'000;

}  // namespace

void GammaPPParams::validate() const {
  if (!(a >= 0.0 && a < 1.0)) throw DomainError("Gamma++ parameter a must lie in [0, 1), got " + std::to_string(a));
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("Gamma++ shape alpha must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("Gamma++ rate beta must be > 0");
}

std::complex<double> log_cf(const GammaPPParams& p, std::complex<double> u) {
  if (!(u.imag() > -p.beta)) {
    throw DomainError("Gamma++ characteristic function evaluated outside its strip Im u > -beta");
  }
  const std::complex<double> i(0.0, 1.0);
  // difference of principal logs: both arguments have positive real part in the strip
  const std::complex<double> den = std::log(p.beta - i * u);
  if (p.a == 0.0) return p.alpha * (std::log(p.beta) - den);
  return p.alpha * (std::log(p.beta - i * u * p.a) - den);
}

std::complex<double> cf(const GammaPPParams& p, std::complex<double> u) { return std::exp(log_cf(p, u)); }

double log_nb_weight(double shape, double a, long long n) {
  const double nd = static_cast<double>(n);
  double lw = shape * std::log(a) + std::lgamma(shape + nd) - std::lgamma(shape) - std::lgamma(nd + 1.0);
  if (n > 0) lw += nd * std::log1p(-a);
  return lw;
}

double nb_tail(double shape, double a, long long n) {
  if (n < 0) return 1.0;
  // P(S <= n) = I_a(shape, n + 1)
  return boost::math::ibetac(shape, static_cast<double>(n) + 1.0, a);
}

Density density(const GammaPPParams& p, double x, double series_tol) {
  p.validate();
  if (!(x >= 0.0)) throw DomainError("Gamma++ density: x must be >= 0");
  if (!(series_tol > 0.0)) throw DomainError("Gamma++ density: series_tol must be > 0");
  Density out;
  if (p.a == 0.0) {
    if (x == 0.0) {
      if (p.alpha < 1.0) {
        out.continuous_density = std::numeric_limits<double>::infinity();
        out.singular = true;
      } else {
        out.continuous_density = p.alpha == 1.0 ? p.beta : 0.0;
      }
      return out;
    }
    out.continuous_density = std::exp(p.alpha * std::log(p.beta) + (p.alpha - 1.0) * std::log(x) -
                                      p.beta * x - std::lgamma(p.alpha));
    out.terms = 1;
    return out;
  }
  const double lambda = p.beta / p.a;
  const double log_lambda = std::log(lambda);
  const double log_x = x > 0.0 ? std::log(x) : 0.0;
  out.atom_mass = std::exp(p.alpha * std::log(p.a));
  double dens = 0.0;
  // past the NB mode and the Erlang mode at x the remaining terms are bounded by the NB tail
  const double start_checks = std::max(p.alpha * (1.0 - p.a) / p.a, lambda * x);
  bool done = false;
  for (long long n = 1; n <= kMaxDensityTerms; ++n) {
    const double lw = log_nb_weight(p.alpha, p.a, n);
    const double nd = static_cast<double>(n);
    if (x > 0.0) {
      dens += std::exp(lw + nd * log_lambda + (nd - 1.0) * log_x - lambda * x - std::lgamma(nd));
    } else if (n == 1) {
      dens += std::exp(lw) * lambda;
    }
    out.terms = static_cast<int>(n);
    if (nd > start_checks && n % 64 == 0 && nb_tail(p.alpha, p.a, n) < series_tol) {
      done = true;
      break;
    }
  }
  if (!done) {
    throw NumericalError("Gamma++ density: series did not reach tolerance within " +
                         std::to_string(kMaxDensityTerms) + " terms");
  }
  out.continuous_density = dens;
  return out;
}

Moments moments(const GammaPPParams& p) {
  p.validate();
  return {p.alpha * (1.0 - p.a) / p.beta, p.alpha * (1.0 - p.a * p.a) / (p.beta * p.beta)};
}

GammaPPParams at_time(const GammaPPParams& p, double t) {
  if (!(t > 0.0)) throw DomainError("time must be > 0");
  return {p.a, p.alpha * t, p.beta};
}

double unit_mean_beta(double a, double alpha) {
  if (!(a >= 0.0 && a < 1.0) || !(alpha > 0.0)) throw DomainError("unit_mean_beta: need 0 <= a < 1 and alpha > 0");
  return alpha * (1.0 - a);
}

GammaPPSample sample(const GammaPPParams& p, double t, RandomStream& rng) {
  if (!(t > 0.0)) throw DomainError("Gamma++ sample: t must be > 0");
  const double shape = p.alpha * t;
  if (p.a == 0.0) return {rng.gamma(shape) / p.beta, false};
  const std::uint64_t s = rng.negative_binomial(shape, p.a);
  if (s == 0) return {0.0, true};
  return {rng.gamma(static_cast<double>(s)) * p.a / p.beta, false};
}

GammaPPParams scale(const GammaPPParams& p, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("Gamma++ scale: c must be > 0");
  return {p.a, p.alpha, p.beta / c};
}

GammaPPParams convolve(const GammaPPParams& p1, const GammaPPParams& p2) {
  constexpr double kTol = 1e-12;
  if (std::abs(p1.a - p2.a) > kTol) throw DomainError("Gamma++ convolve: the two laws must share a");
  if (std::abs(p1.beta - p2.beta) > kTol * std::max(1.0, std::abs(p1.beta))) {
    throw DomainError("Gamma++ convolve: the two laws must share beta");
  }
  return {p1.a, p1.alpha + p2.alpha, p1.beta};
}

}  // namespace exlevy::gammapp
