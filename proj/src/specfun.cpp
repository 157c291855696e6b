#include "exlevy/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "exlevy/errors.hpp"

namespace exlevy::specfun {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kSmallY = 1e-6;

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// x^e in log space with 0^0 = 1.
double log_pow(double x, int e) { return e == 0 ? 0.0 : e * std::log(x); }

// log M(a, b, z) for Kummer's confluent hypergeometric function, b >= a > 0.
// Negative z goes through Kummer's transformation so every series term is positive.
double log_kummer(double a, double b, double z) {
  if (z < 0.0) return z + log_kummer(b - a, b, -z);
  constexpr double kRescale = 1e250;
  const double log_rescale = std::log(kRescale);
  double term = 1.0;
  double sum = 1.0;
  double offset = 0.0;
  const int max_terms = 200000 + static_cast<int>(4.0 * z);
  for (int j = 0; j < max_terms; ++j) {
    term *= (a + j) / (b + j) * z / (j + 1.0);
    sum += term;
    if (sum > kRescale) {
      sum /= kRescale;
      term /= kRescale;
      offset += log_rescale;
    }
    if (j > z && term <= 1e-17 * sum) return offset + std::log(sum);
  }
  throw NumericalError("Kummer series did not converge for z = " + std::to_string(z));
}

// int_0^1 u^m e^{uy} du for m = 0..m_max from the exact antiderivative
//   e^{uy} sum_{j=0}^{m} (-1)^j m!/(m-j)! u^{m-j} / y^{j+1},
// paired with the sum of absolute contributions (conditioning estimate).
struct MomentTable {
  std::vector<double> value;
  std::vector<double> magnitude;
};

MomentTable exp_moments_closed(int m_max, double y) {
  MomentTable t{std::vector<double>(m_max + 1), std::vector<double>(m_max + 1)};
  const double ey = std::exp(y);
  for (int m = 0; m <= m_max; ++m) {
    double s = 0.0;
    double mag = 0.0;
    double falling = 1.0;  // m!/(m-j)!
    double ypow = y;       // y^{j+1}
    for (int j = 0; j <= m; ++j) {
      const double term = (j % 2 == 0 ? 1.0 : -1.0) * falling / ypow * ey;
      s += term;
      mag += std::abs(term);
      falling *= (m - j);
      ypow *= y;
    }
    // lower limit u = 0 only keeps the j = m term
    double factorial = std::exp(std::lgamma(m + 1.0));
    const double lower = (m % 2 == 0 ? 1.0 : -1.0) * factorial / std::pow(y, m + 1);
    s -= lower;
    mag += std::abs(lower);
    t.value[m] = s;
    t.magnitude[m] = mag;
  }
  return t;
}

struct ClosedForm {
  double value;
  double magnitude;
};

// Binomial expansion of (1 - ux)^q against the exact exponential moments.
ClosedForm poly_exp_closed(int p, int q, double x, double y) {
  const MomentTable mom = exp_moments_closed(p + q, y);
  double s = 0.0;
  double mag = 0.0;
  double coef = 1.0;  // C(q,k) (-x)^k
  for (int k = 0; k <= q; ++k) {
    s += coef * mom.value[p + k];
    mag += std::abs(coef) * mom.magnitude[p + k];
    coef *= -x * (q - k) / (k + 1.0);
  }
  return {s, mag};
}

bool well_conditioned(const ClosedForm& cf) {
  return std::isfinite(cf.value) && std::isfinite(cf.magnitude) && cf.value != 0.0 &&
         cf.magnitude * kEps <= 1e-13 * std::abs(cf.value);
}

// int_0^1 u^p (1 - ux)^q du.
double poly_moment(int p, int q, double x) {
  if (x >= 0.0 && x <= 1.0) {
    // (1 - ux) = (1 - x) + x (1 - u): nonnegative Beta-weighted terms
    double s = 0.0;
    for (int k = 0; k <= q; ++k) {
      s += std::exp(log_choose(q, k) + log_pow(1.0 - x, q - k) + log_pow(x, k) +
                    log_beta(p + 1.0, k + 1.0));
    }
    return s;
  }
  double s = 0.0;
  double coef = 1.0;
  for (int k = 0; k <= q; ++k) {
    s += coef / (p + k + 1.0);
    coef *= -x * (q - k) / (k + 1.0);
  }
  return s;
}

// Series in y: sum_m y^m/m! int_0^1 u^{p+m} (1-ux)^q du, for |y| small.
double poly_exp_small_y(int p, int q, double x, double y) {
  double sum = poly_moment(p, q, x);
  double ypow = 1.0;
  for (int m = 1; m < 64; ++m) {
    ypow *= y / m;
    const double term = ypow * poly_moment(p + m, q, x);
    sum += term;
    if (std::abs(term) < 1e-14 * std::abs(sum)) break;
  }
  return sum;
}

// log int_0^1 u^p (1-ux)^q e^{uy} du for 0 <= x <= 1 via
// sum_k C(q,k) (1-x)^{q-k} x^k B(p+1, k+1) M(p+1, p+k+2, y).
double log_poly_exp_split(int p, int q, double x, double y) {
  std::vector<double> logs;
  logs.reserve(q + 1);
  for (int k = 0; k <= q; ++k) {
    if ((x == 0.0 && k > 0) || (x == 1.0 && k < q)) continue;
    logs.push_back(log_choose(q, k) + log_pow(1.0 - x, q - k) + log_pow(x, k) +
                   log_beta(p + 1.0, k + 1.0) + log_kummer(p + 1.0, p + k + 2.0, y));
  }
  const double mx = *std::max_element(logs.begin(), logs.end());
  double s = 0.0;
  for (double l : logs) s += std::exp(l - mx);
  return mx + std::log(s);
}

double poly_exp_quadrature(int p, int q, double x, double y) {
  auto f = [&](double u) { return std::pow(u, p) * std::pow(1.0 - u * x, q) * std::exp(u * y); };
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15,
                                                                                  1e-13, &err);
  if (err > 1e-9 * std::max(std::abs(v), 1e-300)) {
    throw NumericalError("quadrature of Humbert integrand did not converge");
  }
  return v;
}

// int_0^1 u^p (1-ux)^q e^{uy} du, any real x.
double poly_exp_integral(int p, int q, double x, double y) {
  if (std::abs(y) < kSmallY) return poly_exp_small_y(p, q, x, y);
  const ClosedForm cf = poly_exp_closed(p, q, x, y);
  if (well_conditioned(cf)) return cf.value;
  if (x >= 0.0 && x <= 1.0) return std::exp(log_poly_exp_split(p, q, x, y));
  return poly_exp_quadrature(p, q, x, y);
}

// Same integral in log space, 0 <= x <= 1 (positive integrand).
double log_poly_exp_integral_unit(int p, int q, double x, double y) {
  if (std::abs(y) < kSmallY) return std::log(poly_exp_small_y(p, q, x, y));
  // the closed form is only worth trying while factorial growth stays moderate
  if (p + q <= 24) {
    const ClosedForm cf = poly_exp_closed(p, q, x, y);
    if (well_conditioned(cf) && cf.value > 0.0) return std::log(cf.value);
  }
  return log_poly_exp_split(p, q, x, y);
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw DomainError(std::string(name) + " must be finite");
}

bool is_positive_integer(double g) { return g >= 1.0 && g == std::floor(g) && g < 1e7; }

double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

double normal_cdf(double x) {
  if (std::isnan(x)) throw DomainError("normal_cdf: argument is NaN");
  if (!std::isfinite(x)) throw DomainError("normal_cdf: argument is not finite");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double log_bessel_k_half_integer(int n, double x) {
  if (n < 0) throw DomainError("bessel_k_half_integer: order index must be nonnegative");
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("bessel_k_half_integer: x must be > 0");
  const double log2x = std::log(2.0 * x);
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(n + 1);
  for (int k = 0; k <= n; ++k) {
    logs[k] = std::lgamma(n + k + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - k * log2x;
    mx = std::max(mx, logs[k]);
  }
  double s = 0.0;
  for (double l : logs) s += std::exp(l - mx);
  return 0.5 * std::log(std::numbers::pi / (2.0 * x)) - x + mx + std::log(s);
}

double bessel_k_half_integer(int n, double x) {
  const double lk = log_bessel_k_half_integer(n, x);
  const double v = std::exp(lk);
  if (!std::isfinite(v)) {
    // report the dominating term of the finite sum
    const double log2x = std::log(2.0 * x);
    int worst = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n; ++k) {
      const double l = std::lgamma(n + k + 1.0) - std::lgamma(k + 1.0) -
                       std::lgamma(n - k + 1.0) - k * log2x;
      if (l > best) {
        best = l;
        worst = k;
      }
    }
    throw OverflowError("bessel_k_half_integer overflows at n = " + std::to_string(n), worst);
  }
  return v;
}

double bessel_k_half_integer_minus(int n, double x) {
  if (n < 0) throw DomainError("bessel_k_half_integer_minus: order index must be nonnegative");
  return bessel_k_half_integer(n == 0 ? 0 : n - 1, x);
}

double humbert_phi_integer(int n, double x, double y) {
  if (n < 1) throw DomainError("humbert_phi_integer: n must be >= 1");
  require_finite(x, "x");
  require_finite(y, "y");
  return n * poly_exp_integral(n - 1, n - 1, x, y);
}

double humbert_phi_integer_shifted(int n, double x, double y) {
  if (n < 1) throw DomainError("humbert_phi_integer_shifted: n must be >= 1");
  require_finite(x, "x");
  require_finite(y, "y");
  return (n + 1.0) * poly_exp_integral(n, n - 1, x, y);
}

double humbert_phi_general(double alpha, double beta, double gamma_p, double x, double y) {
  if (!(alpha > 0.0) || !(gamma_p > alpha)) {
    throw DomainError("humbert_phi_general: requires gamma > alpha > 0");
  }
  if (!(x < 1.0)) throw DomainError("humbert_phi_general: requires x < 1");
  require_finite(beta, "beta");
  require_finite(y, "y");
  const double log_norm = std::lgamma(gamma_p) - std::lgamma(alpha) - std::lgamma(gamma_p - alpha);
  auto f = [&](double u, double dc) {
    // dc is the signed distance to the nearest endpoint; exact 1 - u on the right half
    const double uc = u > 0.5 ? dc : 1.0 - u;
    if (u <= 0.0 || uc <= 0.0) return 0.0;
    return std::exp(log_norm + (alpha - 1.0) * std::log(u) + (gamma_p - alpha - 1.0) * std::log(uc) -
                    beta * std::log1p(-u * x) + u * y);
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  double err = 0.0;
  double l1 = 0.0;
  std::size_t levels = 0;
  const double v = integrator.integrate(f, 0.0, 1.0, 1e-12, &err, &l1, &levels);
  if (!std::isfinite(v) || err > 1e-10 * std::max(l1, 1e-300)) {
    throw NumericalError("humbert_phi_general: quadrature did not converge after " +
                         std::to_string(levels) + " refinement levels");
  }
  return v;
}

double psi_kernel_quadrature(const PsiKernelArgs& args) {
  require_finite(args.a_arg, "a_arg");
  require_finite(args.b_arg, "b_arg");
  if (!(args.gamma > 0.0)) throw DomainError("psi_kernel: gamma must be > 0");
  const double a = args.a_arg;
  const double b = args.b_arg;
  const double g = args.gamma;
  const double lg = std::lgamma(g);
  // u = s tan(t) puts the gamma mode near t = pi/4
  const double s = std::max(1.0, g - 1.0);
  auto f = [&](double t) {
    const double tt = std::tan(t);
    const double u = s * tt;
    if (!(u > 0.0) || !std::isfinite(u)) return 0.0;
    const double su = std::sqrt(u);
    const double dens = std::exp((g - 1.0) * std::log(u) - u - lg) * s * (1.0 + tt * tt);
    if (dens == 0.0) return 0.0;
    return normal_cdf(a / su + b * su) * dens;
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  double err = 0.0;
  double l1 = 0.0;
  std::size_t levels = 0;
  const double v =
      integrator.integrate(f, 0.0, std::numbers::pi / 2.0, 1e-11, &err, &l1, &levels);
  if (!std::isfinite(v) || err > 1e-9 * std::max(std::abs(v), 1e-12)) {
    throw NumericalError("psi_kernel: quadrature did not converge after " + std::to_string(levels) +
                         " refinement levels");
  }
  return clamp_unit(v);
}

double psi_kernel(const PsiKernelArgs& args) {
  require_finite(args.a_arg, "a_arg");
  require_finite(args.b_arg, "b_arg");
  if (!(args.gamma > 0.0)) throw DomainError("psi_kernel: gamma must be > 0");
  if (!is_positive_integer(args.gamma)) return psi_kernel_quadrature(args);

  const int n = static_cast<int>(args.gamma);
  const double c = args.c();
  if (c == 0.0 || c < 1e-150) {
    // a = 0: the Bessel/Humbert factors degenerate; the ladder has the exact limit
    PsiLadder ladder(0.0, args.b_arg);
    double v = 0.0;
    for (int k = 0; k < n; ++k) v = ladder.next();
    return clamp_unit(v);
  }
  const double u = args.u();
  const double s = args.sign();
  const double x = 0.5 * (1.0 + u);
  const double y = -s * c * (1.0 + u);
  const double log1pu = std::log1p(u);
  const double log_pre = (n + 0.5) * std::log(c) + s * c - 0.5 * std::log(2.0 * std::numbers::pi) -
                         std::lgamma(static_cast<double>(n));
  // Phi(n,1-n,1+n)/n and Phi(1+n,1-n,2+n)/(1+n) as raw integrals
  const double log_i1 = log_poly_exp_integral_unit(n - 1, n - 1, x, y);
  const double log_i2 = log_poly_exp_integral_unit(n, n - 1, x, y);
  const double log_k_plus = log_bessel_k_half_integer(n, c);
  const double log_k_minus = log_bessel_k_half_integer(n - 1, c);

  const double t1 = std::exp(log_pre + n * log1pu + log_k_plus + log_i1);
  const double t2 = -s * std::exp(log_pre + (n + 1.0) * log1pu + log_k_minus + log_i2);
  const double t3 = s * std::exp(log_pre + n * log1pu + log_k_minus + log_i1);
  const double v = t1 + t2 + t3;
  if (!std::isfinite(v)) throw NumericalError("psi_kernel: closed form is not finite");
  return clamp_unit(v);
}

PsiLadder::PsiLadder(double a_arg, double b_arg) : a_(a_arg), b_(b_arg) {
  require_finite(a_arg, "a_arg");
  require_finite(b_arg, "b_arg");
  zero_a_ = std::abs(a_arg) < 1e-150;
  const double q = 1.0 + 0.5 * b_arg * b_arg;
  log_q_ = std::log(q);
  log_prefactor_ = -a_arg * b_arg - 0.5 * std::log(2.0 * std::numbers::pi);
  if (zero_a_) {
    a_ = 0.0;
    c_ = 0.0;
    half_log_ratio_ = 0.0;
    log_k_prev_ = log_k_ = 0.0;
    value_ = 0.5;
    return;
  }
  c_ = std::abs(a_arg) * std::sqrt(2.0 + b_arg * b_arg);
  half_log_ratio_ = 0.5 * (std::log(0.5 * a_arg * a_arg) - log_q_);
  // K_{-1/2} = K_{1/2} = sqrt(pi/(2c)) e^{-c}
  log_k_ = 0.5 * std::log(std::numbers::pi / (2.0 * c_)) - c_;
  log_k_prev_ = log_k_;
  value_ = a_arg > 0.0 ? 1.0 : 0.0;
}

double PsiLadder::next() {
  const int k = order_;
  const double lf = log_prefactor_ - std::lgamma(k + 1.0);
  if (zero_a_) {
    // I(nu) -> Gamma(nu) q^{-nu} as a -> 0
    value_ += 0.5 * b_ * std::exp(lf + std::lgamma(k + 0.5) - (k + 0.5) * log_q_);
  } else {
    const double t1 = b_ * std::exp(lf + (k + 0.5) * half_log_ratio_ + log_k_);
    const double t2 = a_ * std::exp(lf + (k - 0.5) * half_log_ratio_ + log_k_prev_);
    value_ += t1 - t2;
    // K_{nu+1} = K_{nu-1} + (2 nu / c) K_nu with nu = k + 1/2
    const double nu = k + 0.5;
    const double next = log_k_ + std::log(std::exp(log_k_prev_ - log_k_) + 2.0 * nu / c_);
    log_k_prev_ = log_k_;
    log_k_ = next;
  }
  ++order_;
  return value_;
}

}  // namespace exlevy::specfun
