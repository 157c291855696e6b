#pragma once
// Reference computations for the tests. Nothing here calls into the library's numerics.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>

namespace oracle {

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// Gauss-Kronrod 7/15 on one interval.
inline Segment gk15(const std::function<double(double)>& f, double a, double b) {
  static constexpr std::array<double, 8> xgk{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                             0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                             0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                             0.207784955007898467600689403773245, 0.0};
  static constexpr std::array<double, 8> wgk{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                             0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                             0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                             0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                            0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k = wgk[7] * fc;
  double g = wg[3] * fc;
  for (std::size_t i = 0; i < 7; ++i) {
    const double f1 = f(c - h * xgk[i]);
    const double f2 = f(c + h * xgk[i]);
    k += wgk[i] * (f1 + f2);
    if (i % 2 == 1) g += wg[i / 2] * (f1 + f2);
  }
  return {a, b, k * h, std::abs(k - g) * h};
}

// Globally adaptive: bisect the segment with the largest error estimate until the total error
// drops below tol * max(1, |I|) or the segment budget runs out.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12,
                        int max_segments = 4000) {
  std::priority_queue<Segment> heap;
  heap.push(gk15(f, a, b));
  double value = heap.top().value;
  double error = heap.top().error;
  while (error > tol * std::max(1.0, std::abs(value)) && static_cast<int>(heap.size()) < max_segments) {
    const Segment s = heap.top();
    heap.pop();
    const double m = 0.5 * (s.a + s.b);
    const Segment l = gk15(f, s.a, m);
    const Segment r = gk15(f, m, s.b);
    value += l.value + r.value - s.value;
    error += l.error + r.error - s.error;
    heap.push(l);
    heap.push(r);
  }
  return value;
}

// Integral over [0, inf) split at the given breakpoints, tail mapped by x = b + t/(1-t).
inline double integrate_half_line(const std::function<double(double)>& f, std::initializer_list<double> breaks,
                                  double tol = 1e-12) {
  double lo = 0.0;
  double s = 0.0;
  for (double b : breaks) {
    s += integrate(f, lo, b, tol);
    lo = b;
  }
  const double start = lo;
  s += integrate(
      [&](double t) {
        if (t >= 1.0) return 0.0;
        const double x = start + t / (1.0 - t);
        const double v = f(x);
        return v == 0.0 ? 0.0 : v / ((1.0 - t) * (1.0 - t));
      },
      0.0, 1.0, tol);
  return s;
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double gamma_density(double x, double shape, double rate) {
  if (x <= 0.0) return 0.0;
  return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x - std::lgamma(shape));
}

// E[(X2 - X1)^+] for lognormals with forwards f1, f2 and log-spread variance v.
inline double margrabe_forward(double f1, double f2, double v) {
  if (v <= 0.0) return std::max(0.0, f2 - f1);
  const double s = std::sqrt(v);
  const double d1 = (std::log(f2 / f1) + 0.5 * v) / s;
  return f2 * norm_cdf(d1) - f1 * norm_cdf(d1 - s);
}

inline double bs_call(double s, double k, double r, double t, double vol) {
  const double sd = vol * std::sqrt(t);
  const double d1 = (std::log(s / k) + (r + 0.5 * vol * vol) * t) / sd;
  return s * norm_cdf(d1) - k * std::exp(-r * t) * norm_cdf(d1 - sd);
}

struct TwoAsset {
  double r, s1, s2, T, th1, th2, sg1, sg2, rho;
};

// omega per unit time for theta G + sigma W(G), G(1) with E[e^{k G}] = ((b - a k)/(b - k))^alpha.
inline double omega_gpp(double a, double alpha, double beta, double theta, double sigma) {
  const double k = theta + 0.5 * sigma * sigma;
  return -alpha * std::log((beta - a * k) / (beta - k));
}

// Discounted exchange price conditional on G(T) = g, forwards carried at rate r.
inline double conditional_exchange(const TwoAsset& p, double w1, double w2, double g) {
  const double f1 = p.s1 * std::exp(w1 * p.T + (p.th1 + 0.5 * p.sg1 * p.sg1) * g);
  const double f2 = p.s2 * std::exp(w2 * p.T + (p.th2 + 0.5 * p.sg2 * p.sg2) * g);
  const double v = (p.sg1 * p.sg1 + p.sg2 * p.sg2 - 2.0 * p.rho * p.sg1 * p.sg2) * g;
  return margrabe_forward(f1, f2, v);
}

// VG: conditional price integrated against the Gamma(alpha T, beta) law.
inline double vg_exchange(const TwoAsset& p, double alpha, double beta) {
  const double w1 = omega_gpp(0.0, alpha, beta, p.th1, p.sg1);
  const double w2 = omega_gpp(0.0, alpha, beta, p.th2, p.sg2);
  const double shape = alpha * p.T;
  const double mean = shape / beta;
  // u = g^{shape} removes the endpoint singularity for shape < 1
  auto f = [&](double g) {
    const double d = gamma_density(g, shape, beta);
    return d == 0.0 ? 0.0 : d * conditional_exchange(p, w1, w2, g);
  };
  if (shape < 1.0) {
    const double ub = std::pow(mean, shape);
    auto h = [&](double u) {
      if (u <= 0.0) return 0.0;
      const double g = std::pow(u, 1.0 / shape);
      const double d = std::exp(shape * std::log(beta) - beta * g - std::lgamma(shape + 1.0));
      return d == 0.0 ? 0.0 : d * conditional_exchange(p, w1, w2, g);
    };
    return integrate(h, 0.0, ub, 1e-13) + integrate_half_line([&](double g) { return f(g + mean); }, {}, 1e-13);
  }
  return integrate_half_line(f, {mean, 4.0 * mean}, 1e-13);
}

// VG++: atom plus negative-binomial mixture of Erlang(n, beta/a) laws.
inline double vgpp_exchange(const TwoAsset& p, double a, double alpha, double beta, double tail_tol = 1e-12) {
  const double w1 = omega_gpp(a, alpha, beta, p.th1, p.sg1);
  const double w2 = omega_gpp(a, alpha, beta, p.th2, p.sg2);
  const double k = alpha * p.T;
  const double lam = beta / a;
  double total = std::pow(a, k) * conditional_exchange(p, w1, w2, 0.0);
  double mass = std::pow(a, k);
  for (int n = 1; n < 100000; ++n) {
    const double lw = std::lgamma(k + n) - std::lgamma(k) - std::lgamma(n + 1.0) + k * std::log(a) + n * std::log1p(-a);
    const double w = std::exp(lw);
    const double mean = n / lam;
    auto f = [&](double g) {
      const double d = gamma_density(g, n, lam);
      return d == 0.0 ? 0.0 : d * conditional_exchange(p, w1, w2, g);
    };
    total += w * integrate_half_line(f, {mean, 3.0 * mean}, 1e-12);
    mass += w;
    // conditional prices grow at most like e^{c g}; stop once the remaining weight is negligible
    if (1.0 - mass < tail_tol && n > k * (1.0 - a) / a) break;
  }
  return total;
}

// Psi(a, b; gamma) from its defining integral.
inline double psi(double a, double b, double gamma) {
  auto f = [&](double u) {
    if (u <= 0.0) return 0.0;
    return norm_cdf(a / std::sqrt(u) + b * std::sqrt(u)) * gamma_density(u, gamma, 1.0);
  };
  return integrate_half_line(f, {gamma, 3.0 * gamma + 10.0}, 1e-13);
}

// n int_0^1 u^{n-1} (1-ux)^{n-1} e^{uy} du
inline double humbert_integral(int n, double x, double y) {
  auto f = [&](double u) { return n * std::pow(u, n - 1) * std::pow(1.0 - u * x, n - 1) * std::exp(u * y); };
  return integrate(f, 0.0, 1.0, 1e-14);
}

}  // namespace oracle
