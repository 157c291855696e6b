#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "exlevy/models.hpp"

namespace exlevy {

/// Payoff (S2(T) - S1(T) - K)^+; asset index 0 is S1 and index 1 is S2.
struct ExchangeContract {
  double s1_0 = 100.0;
  double s2_0 = 100.0;
  double maturity_T = 1.0;
  double strike_K = 0.0;

  void validate() const;
};

struct PriceReport {
  double price = 0.0;
  std::string method;
  std::optional<double> std_error;
  double runtime = 0.0;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> warnings;
};

}  // namespace exlevy

namespace exlevy::pricing {

/// Margrabe formula under correlated geometric Brownian motions.
PriceReport price_margrabe_bs(const ExchangeContract& c, const models::ModelSpec& spec);

/// Gauss-Kronrod integration of the conditional Margrabe price against the gamma law of G(T).
PriceReport price_vg_exchange_quadrature(const ExchangeContract& c, const models::ModelSpec& spec,
                                         double tol = 1e-10);

/// Two Psi kernels at gamma = alpha T.
PriceReport price_vg_exchange_closed(const ExchangeContract& c, const models::ModelSpec& spec);

enum class SeriesKernel {
  /// O(1) recurrence in n (default)
  Ladder,
  /// Bessel/Humbert closed form at each n; slow, kept for cross-checks
  Humbert,
};

struct SeriesOptions {
  double series_tol = 1e-12;
  long long max_terms = 2'000'000;
  SeriesKernel kernel = SeriesKernel::Ladder;
  /// a below this emits an instability warning
  double small_a_warning = 0.01;
};

/// Atom term plus the negative-binomial series of Erlang-conditioned Margrabe prices.
PriceReport price_vgpp_exchange_closed(const ExchangeContract& c, const models::ModelSpec& spec,
                                       const SeriesOptions& opt = {});

/// Conditional Margrabe integral against the Gamma++ mixture, term by term quadrature.
/// Independent of the Psi kernels; used as a test oracle.
PriceReport price_vgpp_exchange_quadrature(const ExchangeContract& c, const models::ModelSpec& spec,
                                           double series_tol = 1e-10);

/// Dispatches on spec.kind (BS, VG, VGPP).
PriceReport price_exchange_closed(const ExchangeContract& c, const models::ModelSpec& spec);

}  // namespace exlevy::pricing
