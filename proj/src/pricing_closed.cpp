#include "exlevy/pricing_closed.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "exlevy/errors.hpp"
#include "exlevy/specfun.hpp"

namespace exlevy {

void ExchangeContract::validate() const {
  if (!(s1_0 > 0.0) || !(s2_0 > 0.0)) throw DomainError("initial asset values must be > 0");
  if (!(maturity_T > 0.0)) throw DomainError("maturity must be > 0");
  if (!(strike_K >= 0.0)) throw DomainError("strike must be >= 0");
}

}  // namespace exlevy

namespace exlevy::pricing {

namespace {

using Clock = std::chrono::steady_clock;
using models::Kind;
using models::ModelSpec;
using specfun::normal_cdf;

constexpr double kZeroVar = 1e-14;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Quantities shared by the conditional Margrabe prices given G(T) = g:
//   price(g) = F2 e^{kappa2 g} N(d1(g)) - F1 e^{kappa1 g} N(d2(g)),
//   d1(g) = (L + (kappa2 - kappa1) g + sbar^2 g / 2) / (sbar sqrt g),  F_i = S_i e^{omega_i T}.
struct Setup {
  double f1 = 0.0;
  double f2 = 0.0;
  double log_f1 = 0.0;
  double log_f2 = 0.0;
  double L = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double sbar2 = 0.0;
  double sbar = 0.0;
  double khat = 0.0;
  double T = 0.0;
};

Setup make_setup(const ExchangeContract& c, const ModelSpec& spec) {
  c.validate();
  spec.validate();
  if (c.strike_K != 0.0) throw DomainError("closed-form pricers require a zero strike");
  if (spec.dim() != 2) throw DomainError("exchange pricing needs a two-asset model");
  const auto m1 = models::marginal(spec, 0);
  const auto m2 = models::marginal(spec, 1);
  const double w1 = models::drift_corrector(m1);
  const double w2 = models::drift_corrector(m2);
  const double rho = spec.correlation()(0, 1);
  Setup s;
  s.T = c.maturity_T;
  s.log_f1 = std::log(c.s1_0) + w1 * s.T;
  s.log_f2 = std::log(c.s2_0) + w2 * s.T;
  s.f1 = std::exp(s.log_f1);
  s.f2 = std::exp(s.log_f2);
  s.L = s.log_f2 - s.log_f1;
  s.kappa1 = m1.theta + 0.5 * m1.sigma * m1.sigma;
  s.kappa2 = m2.theta + 0.5 * m2.sigma * m2.sigma;
  s.sbar2 = std::max(0.0, m1.sigma * m1.sigma + m2.sigma * m2.sigma - 2.0 * rho * m1.sigma * m2.sigma);
  s.sbar = std::sqrt(s.sbar2);
  if (s.sbar2 > kZeroVar) s.khat = (s.kappa2 - s.kappa1 + 0.5 * s.sbar2) / s.sbar;
  return s;
}

bool degenerate(const Setup& s) { return s.sbar2 <= kZeroVar; }

double conditional_price(const Setup& s, double g) {
  if (g <= 0.0) return s.L > 0.0 ? s.f2 - s.f1 : 0.0;
  if (degenerate(s)) return std::max(0.0, s.f2 * std::exp(s.kappa2 * g) - s.f1 * std::exp(s.kappa1 * g));
  const double sg = s.sbar * std::sqrt(g);
  const double d1 = (s.L + (s.kappa2 - s.kappa1) * g + 0.5 * s.sbar2 * g) / sg;
  return s.f2 * std::exp(s.kappa2 * g) * normal_cdf(d1) - s.f1 * std::exp(s.kappa1 * g) * normal_cdf(d1 - sg);
}

// E[e^{kappa g} 1{g in region}] / E[e^{kappa g}] for g ~ Gamma(shape, rate - kappa), where the
// region {L + dk g > 0} is where the deterministic conditional payoff is positive.
double tilted_region_probability(double shape, double tilted_rate, double L, double dk) {
  if (dk == 0.0) return L > 0.0 ? 1.0 : 0.0;
  const double g_star = -L / dk;
  if (dk > 0.0) {
    // region g > g_star
    if (g_star <= 0.0) return 1.0;
    return boost::math::gamma_q(shape, tilted_rate * g_star);
  }
  // region g < g_star
  if (g_star <= 0.0) return 0.0;
  return boost::math::gamma_p(shape, tilted_rate * g_star);
}

struct Legs {
  double a2 = 0.0;  // tilted rate of the S2 leg
  double a1 = 0.0;  // tilted rate of the S1 leg
};

void check_rates(const Legs& l) {
  if (!(l.a2 > 0.0) || !(l.a1 > 0.0)) {
    std::ostringstream os;
    os << "admissibility violated: tilted rates A = " << l.a2 << ", C = " << l.a1 << " must be > 0";
    throw DomainError(os.str());
  }
}

}  // namespace

PriceReport price_margrabe_bs(const ExchangeContract& c, const ModelSpec& spec) {
  const auto t0 = Clock::now();
  if (spec.kind != Kind::BS) throw DomainError("price_margrabe_bs needs a BS model");
  const Setup s = make_setup(c, spec);
  PriceReport r;
  r.method = "closed";
  // calendar time: the conditional price at g = T is the whole answer
  r.price = std::max(0.0, conditional_price(s, s.T));
  r.runtime = seconds_since(t0);
  return r;
}

PriceReport price_vg_exchange_quadrature(const ExchangeContract& c, const ModelSpec& spec, double tol) {
  const auto t0 = Clock::now();
  if (spec.kind != Kind::VG) throw DomainError("price_vg_exchange_quadrature needs a VG model");
  const Setup s = make_setup(c, spec);
  const double alpha_t = spec.sub.alpha * s.T;
  const double beta = spec.sub.beta;
  check_rates({beta - s.kappa2, beta - s.kappa1});
  // g = v^{1/(alpha T)} removes the g^{alpha T - 1} endpoint singularity
  const double inv_k = 1.0 / alpha_t;
  const double log_norm = alpha_t * std::log(beta) - std::lgamma(alpha_t + 1.0);
  std::size_t evaluations = 0;
  auto f = [&](double v) {
    ++evaluations;
    if (v <= 0.0) return conditional_price(s, 0.0) * std::exp(log_norm);
    const double g = std::exp(inv_k * std::log(v));
    if (!std::isfinite(g)) return 0.0;
    const double w = std::exp(log_norm - beta * g);
    if (w == 0.0) return 0.0;
    return conditional_price(s, g) * w;
  };
  // the conditional price has a g^{1/2}-type endpoint term when s2 > s1; double-exponential nodes absorb it
  double err = 0.0;
  double l1 = 0.0;
  boost::math::quadrature::exp_sinh<double> rule;
  const double v = rule.integrate(f, tol, &err, &l1);
  PriceReport r;
  r.method = "quadrature";
  r.price = std::max(0.0, v);
  r.diagnostics["quadrature_nodes"] = static_cast<double>(evaluations);
  r.diagnostics["quadrature_error"] = err;
  if (err > std::max(tol * std::abs(v), 1e-14)) {
    r.warnings.push_back("quadrature error estimate above tolerance");
  }
  r.runtime = seconds_since(t0);
  return r;
}

PriceReport price_vg_exchange_closed(const ExchangeContract& c, const ModelSpec& spec) {
  const auto t0 = Clock::now();
  if (spec.kind != Kind::VG) throw DomainError("price_vg_exchange_closed needs a VG model");
  const Setup s = make_setup(c, spec);
  const double k = spec.sub.alpha * s.T;
  const double beta = spec.sub.beta;
  const Legs l{beta - s.kappa2, beta - s.kappa1};
  check_rates(l);
  PriceReport r;
  r.method = "closed";
  // leg_i = F_i (beta / A_i)^{alpha T} E_i[...]; F_i (beta/A_i)^k = S_i exactly by the choice of omega
  const double m2 = std::exp(s.log_f2 + k * (std::log(beta) - std::log(l.a2)));
  const double m1 = std::exp(s.log_f1 + k * (std::log(beta) - std::log(l.a1)));
  if (degenerate(s)) {
    const double dk = s.kappa2 - s.kappa1;
    r.price = m2 * tilted_region_probability(k, l.a2, s.L, dk) - m1 * tilted_region_probability(k, l.a1, s.L, dk);
  } else {
    const double psi2 = specfun::psi_kernel({s.L * std::sqrt(l.a2) / s.sbar, s.khat / std::sqrt(l.a2), k});
    const double psi1 = specfun::psi_kernel({s.L * std::sqrt(l.a1) / s.sbar, (s.khat - s.sbar) / std::sqrt(l.a1), k});
    r.price = m2 * psi2 - m1 * psi1;
  }
  r.price = std::max(0.0, r.price);
  r.runtime = seconds_since(t0);
  return r;
}

PriceReport price_vgpp_exchange_closed(const ExchangeContract& c, const ModelSpec& spec, const SeriesOptions& opt) {
  const auto t0 = Clock::now();
  if (spec.kind != Kind::VGPP) throw DomainError("price_vgpp_exchange_closed needs a VGPP model");
  const Setup s = make_setup(c, spec);
  const double a = spec.sub.a;
  const double k = spec.sub.alpha * s.T;
  const double beta = spec.sub.beta;
  const double lambda = beta / a;
  const Legs l{lambda - s.kappa2, lambda - s.kappa1};
  check_rates(l);
  if (!(beta - s.kappa2 > 0.0) || !(beta - s.kappa1 > 0.0)) {
    throw DomainError("admissibility violated: beta - (theta + sigma^2/2) must be > 0 for both assets");
  }
  PriceReport r;
  r.method = "closed";
  if (a < opt.small_a_warning) {
    std::ostringstream os;
    os << "a = " << a << " is small: the series converges slowly and may be unstable; prefer the Fourier or MC pricer";
    r.warnings.push_back(os.str());
  }
  // term n of leg i: C(k+n-1, n) a^k q_i^n Psi_i(n),  q_i = (1-a) lambda / A_i < 1
  const double log_q2 = std::log1p(-a) + std::log(lambda) - std::log(l.a2);
  const double log_q1 = std::log1p(-a) + std::log(lambda) - std::log(l.a1);
  const double q2 = std::exp(log_q2);
  const double q1 = std::exp(log_q1);
  const double log_atom = k * std::log(a);
  const double ind = s.L > 0.0 ? 1.0 : 0.0;

  const bool degen = degenerate(s);
  const double dk = s.kappa2 - s.kappa1;
  std::optional<specfun::PsiLadder> lad2;
  std::optional<specfun::PsiLadder> lad1;
  specfun::PsiKernelArgs args2{};
  specfun::PsiKernelArgs args1{};
  if (!degen) {
    args2 = {s.L * std::sqrt(l.a2) / s.sbar, s.khat / std::sqrt(l.a2), 1.0};
    args1 = {s.L * std::sqrt(l.a1) / s.sbar, (s.khat - s.sbar) / std::sqrt(l.a1), 1.0};
    if (opt.kernel == SeriesKernel::Ladder) {
      lad2.emplace(args2.a_arg, args2.b_arg);
      lad1.emplace(args1.a_arg, args1.b_arg);
    }
  }
  auto kernel = [&](int leg, long long n) {
    if (degen) {
      return tilted_region_probability(static_cast<double>(n), leg == 2 ? l.a2 : l.a1, s.L, dk);
    }
    if (opt.kernel == SeriesKernel::Ladder) {
      auto& lad = leg == 2 ? *lad2 : *lad1;
      return std::clamp(lad.next(), 0.0, 1.0);
    }
    auto args = leg == 2 ? args2 : args1;
    args.gamma = static_cast<double>(n);
    return specfun::psi_kernel(args);
  };

  double sum2 = 0.0;
  double sum1 = 0.0;
  double lw = log_atom;  // log C(k+n-1, n) a^k, updated in place
  long long n = 0;
  double tail2 = 1.0;
  double tail1 = 1.0;
  // the weights C(k+n-1,n) a^k q^n sum to (a/(1-q))^k, i.e. NB(k, 1-q) probabilities up to that factor
  while (true) {
    ++n;
    if (n > opt.max_terms) {
      std::ostringstream os;
      os << "VG++ series did not reach tolerance within " << opt.max_terms << " terms (partial price "
         << std::exp(s.log_f2) * (std::exp(log_atom) * ind + sum2) - std::exp(s.log_f1) * (std::exp(log_atom) * ind + sum1)
         << ", tail bound " << std::max(tail1, tail2) << ")";
      throw NumericalError(os.str());
    }
    const double nd = static_cast<double>(n);
    lw += std::log((k + nd - 1.0) / nd);
    const double p2 = kernel(2, n);
    const double p1 = kernel(1, n);
    sum2 += std::exp(lw + nd * log_q2) * p2;
    sum1 += std::exp(lw + nd * log_q1) * p1;
    const double mean2 = k * q2 / (1.0 - q2);
    const double mean1 = k * q1 / (1.0 - q1);
    if (nd > mean2 && nd > mean1 && (n % 64 == 0)) {
      tail2 = gammapp::nb_tail(k, 1.0 - q2, n);
      tail1 = gammapp::nb_tail(k, 1.0 - q1, n);
      if (tail2 < opt.series_tol && tail1 < opt.series_tol) break;
    }
  }
  const double leg2 = std::exp(s.log_f2) * (std::exp(log_atom) * ind + sum2);
  const double leg1 = std::exp(s.log_f1) * (std::exp(log_atom) * ind + sum1);
  r.price = std::max(0.0, leg2 - leg1);
  r.diagnostics["series_terms"] = static_cast<double>(n);
  // leg multipliers F_i (a/(1-q_i))^k equal S_i, so the price error is bounded by S_i times the tails
  r.diagnostics["tail_bound"] = c.s2_0 * tail2 + c.s1_0 * tail1;
  r.diagnostics["atom_mass"] = std::exp(log_atom);
  r.runtime = seconds_since(t0);
  return r;
}

PriceReport price_vgpp_exchange_quadrature(const ExchangeContract& c, const ModelSpec& spec, double series_tol) {
  const auto t0 = Clock::now();
  if (spec.kind != Kind::VGPP) throw DomainError("price_vgpp_exchange_quadrature needs a VGPP model");
  const Setup s = make_setup(c, spec);
  const double a = spec.sub.a;
  const double k = spec.sub.alpha * s.T;
  const double lambda = spec.sub.beta / a;
  double total = std::exp(k * std::log(a)) * conditional_price(s, 0.0);
  double mass = std::exp(k * std::log(a));
  std::size_t evaluations = 0;
  long long n = 0;
  // price-weighted tail: conditional prices are bounded by S2 e^{kappa2 g}, so stop on the tilted NB tail
  const double q2 = (1.0 - a) * lambda / (lambda - s.kappa2);
  const double mean_tilted = k * q2 / (1.0 - q2);
  while (true) {
    ++n;
    const double nd = static_cast<double>(n);
    const double lw = gammapp::log_nb_weight(k, a, n);
    const double log_norm = lw + nd * std::log(lambda) - std::lgamma(nd);
    auto f = [&](double g) {
      ++evaluations;
      if (g <= 0.0) return n == 1 ? std::exp(log_norm) * conditional_price(s, 0.0) : 0.0;
      const double w = std::exp(log_norm + (nd - 1.0) * std::log(g) - lambda * g);
      // far out the weight underflows before the conditional price overflows
      return w == 0.0 ? 0.0 : w * conditional_price(s, g);
    };
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, 0.0, std::numeric_limits<double>::infinity(), 20, 1e-12);
    total += v;
    mass += std::exp(lw);
    if (nd > mean_tilted && gammapp::nb_tail(k, 1.0 - q2, n) < series_tol) break;
    if (n > 1'000'000) throw NumericalError("VG++ quadrature series did not converge");
  }
  PriceReport r;
  r.method = "quadrature";
  r.price = std::max(0.0, total);
  r.diagnostics["series_terms"] = static_cast<double>(n);
  r.diagnostics["quadrature_nodes"] = static_cast<double>(evaluations);
  r.diagnostics["weight_mass"] = mass;
  r.runtime = seconds_since(t0);
  return r;
}

PriceReport price_exchange_closed(const ExchangeContract& c, const ModelSpec& spec) {
  switch (spec.kind) {
    case Kind::BS: return price_margrabe_bs(c, spec);
    case Kind::VG: return price_vg_exchange_closed(c, spec);
    case Kind::VGPP: return price_vgpp_exchange_closed(c, spec);
    default: throw DomainError("no closed-form exchange price for model kind " + models::to_string(spec.kind));
  }
}

}  // namespace exlevy::pricing
