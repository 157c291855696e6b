#pragma once

#include <vector>

#include "exlevy/models.hpp"
#include "exlevy/pricing_closed.hpp"

namespace exlevy::pricing {

struct FourierGrid {
  int n_points = 4096;
  double eta = 0.05;
  double damping = 0.75;

  void validate() const;
  static FourierGrid vanilla_default() { return {4096, 0.05, 0.75}; }
  static FourierGrid spread_default() { return {4096, 0.05, 0.5}; }
};

/// Damped-call transform inverted by a Simpson sum. One pass over the frequency grid
/// serves every strike. damping < -1 returns put prices instead of calls.
std::vector<double> price_vanilla_calls(const models::MarginalVGppParams& m, double rate, double s0, double T,
                                        const std::vector<double>& strikes, const FourierGrid& grid = {});

double price_vanilla_call(const models::MarginalVGppParams& m, double rate, double s0, double strike, double T,
                          const FourierGrid& grid = {});

/// Put through the same transform at damping -1 - grid.damping.
double price_vanilla_put(const models::MarginalVGppParams& m, double rate, double s0, double strike, double T,
                         const FourierGrid& grid = {});

/// Single-inversion lower bound for (S2 - S1 - K)^+ from the joint characteristic function.
/// The exercise region is {log S2 - kappa log S1 > k}; for K = 0 it is exact (kappa = 1, k = 0).
/// For K > 0, kappa is set from the forwards and k maximizes the bound.
PriceReport price_exchange_fourier(const ExchangeContract& c, const models::ModelSpec& spec,
                                   const FourierGrid& grid = FourierGrid::spread_default());

}  // namespace exlevy::pricing
