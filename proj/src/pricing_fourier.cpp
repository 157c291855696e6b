#include "exlevy/pricing_fourier.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "exlevy/errors.hpp"

namespace exlevy::pricing {

namespace {

using cd = std::complex<double>;
constexpr cd kI(0.0, 1.0);
constexpr double kPi = std::numbers::pi;
constexpr double kResidualTol = 1e-6;
constexpr int kMaxSpreadPoints = 1 << 20;

double simpson_weight(int j, double eta) {
  if (j == 0) return eta / 3.0;
  return eta / 3.0 * (j % 2 == 1 ? 4.0 : 2.0);
}

double trapezoid_weight(int j, double eta) { return j == 0 ? 0.5 * eta : eta; }

}  // namespace

void FourierGrid::validate() const {
  if (n_points < 256 || (n_points & (n_points - 1)) != 0) {
    throw DomainError("Fourier grid: n_points must be a power of two >= 256");
  }
  if (!(eta > 0.0)) throw DomainError("Fourier grid: eta must be > 0");
  if (!std::isfinite(damping) || damping == 0.0 || damping == -1.0) {
    throw DomainError("Fourier grid: damping must be finite and not 0 or -1");
  }
}

std::vector<double> price_vanilla_calls(const models::MarginalVGppParams& m, double rate, double s0, double T,
                                        const std::vector<double>& strikes, const FourierGrid& grid) {
  grid.validate();
  if (!(s0 > 0.0) || !(T > 0.0)) throw DomainError("vanilla pricing needs s0 > 0 and T > 0");
  const double omega = models::drift_corrector(m);
  const double mlog = std::log(s0) + (rate + omega) * T;
  const double ad = grid.damping;
  const double disc = std::exp(-rate * T);
  const double p0 = models::marginal_atom(m, T);
  // psi(v) = e^{-rT} phi(v - (ad+1) i) / (ad^2 + ad - v^2 + i (2 ad + 1) v), atom part removed
  std::vector<cd> psi(static_cast<std::size_t>(grid.n_points));
  for (int j = 0; j < grid.n_points; ++j) {
    const double v = j * grid.eta;
    const cd u(v, -(ad + 1.0));
    cd phi;
    try {
      phi = models::cf_marginal(m, T, u);
    } catch (const DomainError&) {
      std::ostringstream os;
      os << "damping " << ad << " lies outside the characteristic function's analyticity strip";
      throw DomainError(os.str());
    }
    if (!std::isfinite(phi.real()) || !std::isfinite(phi.imag())) {
      throw DomainError("damping lies outside the characteristic function's analyticity strip");
    }
    const cd denom = ad * ad + ad - v * v + kI * (2.0 * ad + 1.0) * v;
    psi[static_cast<std::size_t>(j)] = disc * std::exp(kI * u * mlog) * (phi - p0) / denom;
  }
  std::vector<double> out;
  out.reserve(strikes.size());
  for (double strike : strikes) {
    if (!(strike > 0.0)) throw DomainError("vanilla strike must be > 0");
    const double k = std::log(strike);
    double acc = 0.0;
    for (int j = 0; j < grid.n_points; ++j) {
      const double v = j * grid.eta;
      acc += simpson_weight(j, grid.eta) * (std::exp(-kI * v * k) * psi[static_cast<std::size_t>(j)]).real();
    }
    double price = std::exp(-ad * k) / kPi * acc;
    const double fwd_atom = std::exp(mlog);
    // the point mass at Y = 0 contributes its payoff exactly
    price += disc * p0 * (ad > 0.0 ? std::max(0.0, fwd_atom - strike) : std::max(0.0, strike - fwd_atom));
    out.push_back(price);
  }
  return out;
}

double price_vanilla_call(const models::MarginalVGppParams& m, double rate, double s0, double strike, double T,
                          const FourierGrid& grid) {
  return price_vanilla_calls(m, rate, s0, T, {strike}, grid).front();
}

double price_vanilla_put(const models::MarginalVGppParams& m, double rate, double s0, double strike, double T,
                         const FourierGrid& grid) {
  FourierGrid g = grid;
  g.damping = -1.0 - std::abs(grid.damping);
  return price_vanilla_calls(m, rate, s0, T, {strike}, g).front();
}

PriceReport price_exchange_fourier(const ExchangeContract& c, const models::ModelSpec& spec,
                                   const FourierGrid& grid) {
  const auto t0 = std::chrono::steady_clock::now();
  c.validate();
  spec.validate();
  grid.validate();
  if (spec.dim() != 2) throw DomainError("exchange pricing needs a two-asset model");
  if (!(grid.damping > 0.0)) throw DomainError("spread damping must be > 0");
  const double T = c.maturity_T;
  const double r = spec.rate;
  const auto omega = models::drift_correctors(spec);
  const double m1 = std::log(c.s1_0) + (r + omega[0]) * T;
  const double m2 = std::log(c.s2_0) + (r + omega[1]) * T;
  const double K = c.strike_K;
  const double p0 = models::joint_atom(spec, T);

  double kappa = 1.0;
  double k0 = 0.0;
  if (K > 0.0) {
    const double f1 = std::exp(m1);
    kappa = f1 / (f1 + K);
    k0 = std::log(f1 + K) - kappa * m1;
  }

  PriceReport rep;
  rep.method = "fourier";
  std::vector<cd> h;  // (E01 - E10 - K E00)/(delta + i v), atom removed
  double delta = grid.damping;
  // E_w(v) = E[exp(c . X)], c = w + (delta + i v)(-kappa, 1), X = m + Y(T)
  auto transform = [&](double d, double v, const std::array<double, 2>& w) {
    const cd z(d, v);
    const cd c1 = w[0] - z * kappa;
    const cd c2 = w[1] + z;
    const models::cvec u{-kI * c1, -kI * c2};
    const cd cm = c1 * m1 + c2 * m2;
    const cd l = models::log_cf_joint(spec, T, u);
    return std::exp(cm + l) - p0 * std::exp(cm);
  };
  for (;;) {
    try {
      for (const auto& w : {std::array<double, 2>{0.0, 1.0}, std::array<double, 2>{1.0, 0.0},
                            std::array<double, 2>{0.0, 0.0}}) {
        const cd e = transform(delta, 0.0, w);
        if (!std::isfinite(e.real())) throw DomainError("non-finite transform");
      }
      break;
    } catch (const DomainError&) {
      delta *= 0.5;
      if (delta < 0.05) {
        throw DomainError("no admissible damping: the joint characteristic function is not analytic at the shifted arguments");
      }
    }
  }
  if (delta != grid.damping) {
    std::ostringstream os;
    os << "damping reduced to " << delta << " to stay inside the analyticity strip";
    rep.warnings.push_back(os.str());
  }
  auto extend = [&](int n) {
    for (int j = static_cast<int>(h.size()); j < n; ++j) {
      const double v = j * grid.eta;
      const cd e01 = transform(delta, v, {0.0, 1.0});
      const cd e10 = transform(delta, v, {1.0, 0.0});
      const cd e00 = K > 0.0 ? transform(delta, v, {0.0, 0.0}) : cd(0.0);
      h.push_back((e01 - e10 - K * e00) / cd(delta, v));
    }
  };
  int n_used = grid.n_points;
  extend(n_used);
  const double disc = std::exp(-r * T);
  const double atom_payoff = std::exp(m2) - std::exp(m1) - K;
  const double atom_z = m2 - kappa * m1;
  auto integrals = [&](double k, double& simpson, double& trapezoid) {
    simpson = 0.0;
    trapezoid = 0.0;
    for (int j = 0; j < n_used; ++j) {
      const double v = j * grid.eta;
      const double val = (std::exp(-kI * v * k) * h[static_cast<std::size_t>(j)]).real();
      simpson += simpson_weight(j, grid.eta) * val;
      trapezoid += trapezoid_weight(j, grid.eta) * val;
    }
  };
  auto bound = [&](double k) {
    double s = 0.0;
    double t = 0.0;
    integrals(k, s, t);
    return disc * (std::exp(-delta * k) / kPi * s + p0 * atom_payoff * (atom_z > k ? 1.0 : 0.0));
  };

  // end-of-grid integrand size times the grid extent, plus the Simpson/trapezoid gap
  auto residual_at = [&](double k, double& simpson) {
    double t = 0.0;
    integrals(k, simpson, t);
    const double vmax = grid.eta * (n_used - 1);
    return disc * std::exp(-delta * k) / kPi * (std::abs(h.back()) * vmax + std::abs(simpson - t));
  };
  auto tolerance = [](double price) { return kResidualTol * std::max(1.0, price); };
  // slowly decaying transforms (near-atomic legs) get a longer frequency grid
  for (;;) {
    double sk = 0.0;
    const double res = residual_at(k0, sk);
    const double approx = disc * std::exp(-delta * k0) / kPi * sk;
    if (res <= tolerance(std::abs(approx)) || n_used >= kMaxSpreadPoints) break;
    n_used *= 2;
    extend(n_used);
  }

  double k_best = k0;
  if (K > 0.0) {
    // golden section on the lower bound around the forward-matched boundary
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = k0 - 0.5;
    double hi = k0 + 0.5;
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = bound(x1);
    double f2 = bound(x2);
    for (int it = 0; it < 60 && hi - lo > 1e-9; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = bound(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = bound(x1);
      }
    }
    k_best = 0.5 * (lo + hi);
    rep.warnings.push_back("nonzero strike: price is the single-inversion lower bound");
    rep.diagnostics["lower_bound"] = 1.0;
  }
  double s = 0.0;
  const double residual = residual_at(k_best, s);
  const double scale = disc * std::exp(-delta * k_best) / kPi;
  rep.price = std::max(0.0, scale * s + disc * p0 * atom_payoff * (atom_z > k_best ? 1.0 : 0.0));
  rep.diagnostics["oscillation_residual"] = residual;
  rep.diagnostics["n_points"] = n_used;
  rep.diagnostics["damping"] = delta;
  rep.diagnostics["kappa"] = kappa;
  rep.diagnostics["boundary_k"] = k_best;
  rep.diagnostics["atom_mass"] = p0;
  if (residual > tolerance(rep.price)) {
    rep.warnings.push_back("Fourier grid may be too coarse: oscillation residual above tolerance");
  }
  rep.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace exlevy::pricing
