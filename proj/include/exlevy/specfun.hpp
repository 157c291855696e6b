#pragma once

#include <cmath>

namespace exlevy::specfun {

/// Standard normal cumulative distribution function.
double normal_cdf(double x);

/// K_{n+1/2}(x) from the terminating sum
///   sqrt(pi/(2x)) e^{-x} sum_{k=0}^{n} (n+k)! / (k! (n-k)!) (2x)^{-k}.
/// Throws OverflowError when the value is not representable.
double bessel_k_half_integer(int n, double x);

/// K_{n-1/2}(x) = K_{(n-1)+1/2}(x); n = 0 gives K_{-1/2} = K_{1/2}.
double bessel_k_half_integer_minus(int n, double x);

/// log K_{n+1/2}(x); never overflows for finite n and x > 0.
double log_bessel_k_half_integer(int n, double x);

/// Humbert Phi(n, 1-n, 1+n; x, y) = n * int_0^1 u^{n-1} (1-ux)^{n-1} e^{uy} du.
double humbert_phi_integer(int n, double x, double y);

/// Humbert Phi(1+n, 1-n, 2+n; x, y) = (1+n) * int_0^1 u^n (1-ux)^{n-1} e^{uy} du.
double humbert_phi_integer_shifted(int n, double x, double y);

/// Humbert Phi(alpha, beta, gamma; x, y) by adaptive quadrature of its Euler integral.
/// Requires gamma > alpha > 0 and x < 1.
double humbert_phi_general(double alpha, double beta, double gamma_p, double x, double y);

/// Arguments of the gamma-weighted normal kernel
///   Psi(a, b; gamma) = int_0^inf N(a/sqrt(u) + b sqrt(u)) u^{gamma-1} e^{-u} / Gamma(gamma) du.
struct PsiKernelArgs {
  double a_arg = 0.0;
  double b_arg = 0.0;
  double gamma = 1.0;

  double c() const { return std::abs(a_arg) * std::sqrt(2.0 + b_arg * b_arg); }
  double u() const { return b_arg / std::sqrt(2.0 + b_arg * b_arg); }
  /// sign(0) := +1
  double sign() const { return a_arg >= 0.0 ? 1.0 : -1.0; }
};

/// Psi kernel. Integer gamma uses the Bessel-K / Humbert-Phi closed form;
/// other gamma use tanh-sinh quadrature of the defining integral (u = tan t).
double psi_kernel(const PsiKernelArgs& args);

/// Quadrature evaluation of Psi for any gamma > 0 (relative target 1e-9).
double psi_kernel_quadrature(const PsiKernelArgs& args);

/// Yields Psi(a, b; n) for n = 1, 2, 3, ... at O(1) cost per order.
///
/// Integrating by parts against the regularized upper incomplete gamma
/// function gives
///   Psi_n = Psi_{n-1} + e^{-ab} / ((n-1)! sqrt(2 pi)) [ b/2 I(n-1/2) - a/2 I(n-3/2) ],
///   I(nu) = 2 (p/q)^{nu/2} K_nu(c),  p = a^2/2, q = 1 + b^2/2,
/// with Psi_0 = N(a/sqrt(0+)). Half-integer K orders advance by the upward
/// recurrence, which is stable, and everything is carried in log space.
class PsiLadder {
 public:
  PsiLadder(double a_arg, double b_arg);

  /// Advances to the next order and returns Psi(a, b; order()).
  double next();
  int order() const noexcept { return order_; }
  double value() const noexcept { return value_; }

 private:
  double a_;
  double b_;
  bool zero_a_;
  double log_prefactor_;   // -ab - log(sqrt(2 pi))
  double half_log_ratio_;  // 0.5 log(p/q)
  double log_q_;
  double c_;
  double log_k_prev_;  // log K_{order-1/2}(c)
  double log_k_;       // log K_{order+1/2}(c)
  int order_ = 0;
  double value_;
};

}  // namespace exlevy::specfun
