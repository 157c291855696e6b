#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exlevy/models.hpp"

namespace exlevy::calibration {

struct VanillaQuote {
  double strike = 0.0;
  double maturity = 0.0;
  double mid = 0.0;
};

struct AssetMarket {
  std::string product;
  double forward = 0.0;
  std::vector<VanillaQuote> quotes;
  std::vector<double> log_returns;
};

/// Forwards, call quotes on the forwards and aligned daily log-returns.
struct MarketSnapshot {
  std::string as_of;
  double rate = 0.015;
  std::vector<AssetMarket> assets;
  std::vector<std::string> return_dates;

  /// Positive forwards and quotes, equal-length return series. Throws DataError.
  void validate() const;
  /// Copy keeping only strikes within +-band of each forward.
  MarketSnapshot filtered(double band) const;
  /// Pearson correlation of the return series of assets i and j.
  double empirical_correlation(std::size_t i, std::size_t j) const;
};

struct Options {
  int max_iterations = 200;
  /// Latin-hypercube starts in addition to the initial guess
  int lhs_starts = 8;
  std::uint64_t seed = 7;
  double tolerance = 1e-14;
  double moneyness_band = 15.0;
};

struct CalibrationResult {
  models::ModelSpec spec;
  std::vector<std::string> param_names;
  std::vector<double> params;
  /// sum of squared price errors
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  int best_start = 0;
  double target_correlation = 0.0;
  double model_correlation = 0.0;
  double correlation_residual = 0.0;
  bool at_boundary = false;
  std::vector<std::string> warnings;
};

/// Model call prices for the quotes of asset j, in quote order.
std::vector<double> model_prices(const MarketSnapshot& snapshot, const models::ModelSpec& spec, std::size_t j);

/// Sum over assets and quotes of (model - mid)^2.
double objective(const MarketSnapshot& snapshot, const models::ModelSpec& spec);

/// Least-squares fit of the marginal parameters to the vanilla quotes. The subordinators keep
/// unit mean. Dependence parameters of `initial` are carried over (clipped where the new
/// marginals require it).
CalibrationResult calibrate_marginals(const MarketSnapshot& snapshot, const models::ModelSpec& initial,
                                      const Options& opt = {});

/// Fits the dependence block of `marginal_fit.spec` to the empirical return correlation,
/// leaving every marginal law unchanged.
CalibrationResult calibrate_dependence(const MarketSnapshot& snapshot, const CalibrationResult& marginal_fit);

/// Both steps.
CalibrationResult calibrate(const MarketSnapshot& snapshot, const models::ModelSpec& initial, const Options& opt = {});

/// BB spec from marginal laws (theta_j, sigma_j, A_yj) sharing a, plus Z-leg (A_z, B_z, gamma_z).
/// Requires theta_j^2 / (sigma_j^2 A_yj) equal across assets.
models::ModelSpec make_bb_from_marginals(double rate, double a, const std::vector<models::AssetParams>& marginals,
                                         const std::vector<double>& A_y, double A_z, double B_z, double gamma_z);

/// Semeraro or LS spec from unit-mean marginal shapes s_j = A_j + A sharing a and B.
models::ModelSpec make_semeraro_from_marginals(models::Kind kind, double rate, double a,
                                               const std::vector<models::AssetParams>& marginals,
                                               const std::vector<double>& shapes, double A, double B,
                                               double rho);

struct SyntheticOptions {
  std::vector<double> forwards{100.0, 100.0};
  double maturity = 0.6;
  double strike_step = 5.0;
  double band = 15.0;
  double target_correlation = 0.96;
  int n_returns = 500;
  std::uint64_t seed = 11;
};

/// Noise-free quotes priced by `spec` and Gaussian returns whose sample correlation equals the target.
MarketSnapshot synthetic_snapshot(const models::ModelSpec& spec, const SyntheticOptions& opt = {});

}  // namespace exlevy::calibration
