#pragma once

#include <complex>

#include "exlevy/random.hpp"

namespace exlevy::gammapp {

/// Law of the a-remainder of Gamma(alpha, beta). a = 0 is the gamma law itself.
struct GammaPPParams {
  double a = 0.0;
  double alpha = 1.0;
  double beta = 1.0;

  /// Throws DomainError unless 0 <= a < 1, alpha > 0, beta > 0.
  void validate() const;
};

struct GammaPPSample {
  double value = 0.0;
  bool atom_hit = false;
};

struct Density {
  double atom_mass = 0.0;
  double continuous_density = 0.0;
  int terms = 0;
  /// gamma density at x = 0 with alpha < 1
  bool singular = false;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// ((beta - i u a)/(beta - i u))^alpha, continued analytically to Im u > -beta.
std::complex<double> cf(const GammaPPParams& p, std::complex<double> u);
std::complex<double> log_cf(const GammaPPParams& p, std::complex<double> u);
inline std::complex<double> cf(const GammaPPParams& p, double u) { return cf(p, std::complex<double>(u, 0.0)); }

/// Point mass a^alpha plus the negative-binomial mixture of Erlang(n, beta/a) densities,
/// truncated once the remaining mixture weight drops below series_tol.
Density density(const GammaPPParams& p, double x, double series_tol = 1e-12);

Moments moments(const GammaPPParams& p);

/// Law at time t: shape alpha t.
GammaPPParams at_time(const GammaPPParams& p, double t);

/// Rate making the subordinator mean equal to one per unit time.
double unit_mean_beta(double a, double alpha);

/// One draw of Z(t): S ~ NB(alpha t, a), then Gamma(S, beta/a), or zero when S = 0.
GammaPPSample sample(const GammaPPParams& p, double t, RandomStream& rng);

/// Law of c Z.
GammaPPParams scale(const GammaPPParams& p, double c);

/// Law of Z1 + Z2 for independent terms sharing a and beta.
GammaPPParams convolve(const GammaPPParams& p1, const GammaPPParams& p2);

/// Negative-binomial weight C(shape+n-1, n) a^shape (1-a)^n in log space.
double log_nb_weight(double shape, double a, long long n);

/// P(S > n) for S ~ NB(shape, a).
double nb_tail(double shape, double a, long long n);

}  // namespace exlevy::gammapp
