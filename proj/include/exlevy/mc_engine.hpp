#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "exlevy/models.hpp"
#include "exlevy/pricing_closed.hpp"
#include "exlevy/random.hpp"

namespace exlevy::mc {

struct SimPlan {
  std::uint64_t n_paths = 1'000'000;
  std::uint64_t seed = 42;
  bool antithetic = false;
  int n_steps = 1;
  /// paths per random stream; the estimate does not depend on how blocks map to threads
  std::uint64_t block_size = 8192;

  void validate() const;
};

/// Increments Y(t_k) - Y(t_{k-1}) laid out as [path][step][asset].
struct IncrementMatrix {
  std::uint64_t n_paths = 0;
  int n_steps = 0;
  std::size_t n_assets = 0;
  std::vector<double> data;

  double at(std::uint64_t path, int step, std::size_t asset) const {
    return data[(path * static_cast<std::uint64_t>(n_steps) + static_cast<std::uint64_t>(step)) * n_assets + asset];
  }
};

/// Draws one increment over dt for every asset. Antithetic partners reuse the subordinators
/// and flip the Gaussian draws.
class IncrementSampler {
 public:
  explicit IncrementSampler(const models::ModelSpec& spec);

  std::size_t dim() const noexcept { return n_; }
  void draw(RandomStream& rng, double dt, double* out);
  void draw_pair(RandomStream& rng, double dt, double* out, double* out_anti);

 private:
  void draw_shocks(RandomStream& rng, double dt);
  void assemble(double sign, double dt, double* out) const;

  models::ModelSpec spec_;
  std::size_t n_;
  Eigen::MatrixXd chol_;  // lower factor of the Brownian correlation
  // per-draw scratch
  std::vector<double> sub_;    // per-asset subordinator draws (I_j or G_Xj)
  double common_ = 0.0;        // common subordinator draw
  std::vector<double> z_;      // independent normals
  std::vector<double> w_;      // normals for the common leg
  mutable std::vector<double> lz_;
};

/// Lower Cholesky factor of a PSD matrix; zero pivots are allowed.
Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& m);

/// Worker threads: OpenMP default, capped by LEVY_EXCHANGE_THREADS.
int worker_threads();

IncrementMatrix simulate_increments(const models::ModelSpec& spec, const std::vector<double>& t_grid,
                                    const SimPlan& plan);
IncrementMatrix simulate_increments_serial(const models::ModelSpec& spec, const std::vector<double>& t_grid,
                                           const SimPlan& plan);

/// Mean and standard error of f(Y(T)) over plan.n_paths terminal draws.
/// With antithetic sampling the error comes from pair averages.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};
using TerminalFunctional = std::function<double(const double* y)>;
Estimate expectation(const models::ModelSpec& spec, double T, const SimPlan& plan, const TerminalFunctional& f);
Estimate expectation_serial(const models::ModelSpec& spec, double T, const SimPlan& plan,
                            const TerminalFunctional& f);

/// e^{-rT} E[(S2(T) - S1(T) - K)^+] with S_i(T) = S_i(0) exp((r + omega_i) T + Y_i(T)).
PriceReport price_exchange_mc(const ExchangeContract& c, const models::ModelSpec& spec, const SimPlan& plan);
/// Single-threaded reference; bit-identical to price_exchange_mc.
PriceReport price_exchange_mc_serial(const ExchangeContract& c, const models::ModelSpec& spec,
                                     const SimPlan& plan);

}  // namespace exlevy::mc
