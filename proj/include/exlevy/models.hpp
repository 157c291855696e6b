#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "exlevy/gammapp.hpp"

namespace exlevy::models {

using gammapp::GammaPPParams;
using cvec = std::vector<std::complex<double>>;

enum class Kind { BS, VG, VGPP, Semeraro, LS, BB };

std::string to_string(Kind kind);
Kind kind_from_string(const std::string& name);

/// theta Z(t) + sigma W(Z(t)); no subordinator means calendar time (Brownian motion).
struct MarginalVGppParams {
  double theta = 0.0;
  double sigma = 0.0;
  std::optional<GammaPPParams> sub;

  /// Martingale admissibility: beta - (theta + sigma^2/2) > 0.
  void validate() const;
};

/// Per-asset Brownian drift/volatility for the subordinated kinds.
struct AssetParams {
  double theta = 0.0;
  double sigma = 0.0;
};

/// G_j = I_j + alpha_j Z,  I_j ~ G++(a, A_j t, B/alpha_j),  Z ~ G++(a, A t, B).
struct SemeraroBlock {
  double a = 0.0;
  std::vector<double> alpha;
  std::vector<double> A_j;
  double A = 1.0;
  double B = 1.0;
};

/// Y_j = X_j + load_j Z,  X_j = beta_j G_Xj + gamma_j W(G_Xj),  Z = beta_z Z_a + gamma_z W(Z_a).
struct BBBlock {
  double a = 0.0;
  std::vector<double> beta;
  std::vector<double> gamma;
  std::vector<double> A_x;
  std::vector<double> B_x;
  std::vector<double> load;
  double beta_z = 0.0;
  double gamma_z = 0.0;
  double A_z = 1.0;
  double B_z = 1.0;
};

struct ModelSpec {
  Kind kind = Kind::BS;
  double rate = 0.0;
  /// BS, VG, VGPP, Semeraro, LS (mu_j in the multivariate constructions). Unused for BB.
  std::vector<AssetParams> assets;
  /// Common subordinator for VG (a = 0) and VGPP.
  GammaPPParams sub;
  /// Brownian correlation: BS, VG, VGPP and the LS common leg. Empty means identity.
  Eigen::MatrixXd rho;
  SemeraroBlock sem;
  BBBlock bb;

  std::size_t dim() const;
  /// Shape, positivity, PSD and admissibility checks. Throws DomainError.
  void validate() const;
  Eigen::MatrixXd correlation() const;
};

/// Two-asset common-subordinator spec with a single Brownian correlation.
ModelSpec make_bivariate(Kind kind, double rate, AssetParams asset1, AssetParams asset2, double rho,
                         GammaPPParams sub = {});

/// Marginal law of asset j. For BB this requires the convolution conditions to hold.
MarginalVGppParams marginal(const ModelSpec& spec, std::size_t j);

/// omega such that E[exp(omega + Y(1))] = 1.
double drift_corrector(const MarginalVGppParams& m);
/// omega_j = -log E[exp(Y_j(1))] through the joint characteristic function.
std::vector<double> drift_correctors(const ModelSpec& spec);

/// E[exp(i <u, Y(t)>)] for the de-drifted log-returns, continued to complex u where finite.
std::complex<double> cf_joint(const ModelSpec& spec, double t, const cvec& u);
std::complex<double> cf_joint(const ModelSpec& spec, double t, const std::vector<double>& u);
std::complex<double> log_cf_joint(const ModelSpec& spec, double t, const cvec& u);

/// Characteristic function of one marginal, theta Z + sigma W(Z) at time t.
std::complex<double> cf_marginal(const MarginalVGppParams& m, double t, std::complex<double> u);

/// Probability that every component of Y(t) is exactly zero.
double joint_atom(const ModelSpec& spec, double t);
/// Probability that Y_j(t) is exactly zero.
double marginal_atom(const MarginalVGppParams& m, double t);

/// Mean and variance of Y_j(t).
struct MarginalMoments {
  double mean = 0.0;
  double variance = 0.0;
};
MarginalMoments marginal_moments(const ModelSpec& spec, double t, std::size_t j);

double linear_correlation(const ModelSpec& spec, double t, std::size_t i, std::size_t j);

struct BBConvolutionSolution {
  double theta = 0.0;
  double sigma = 0.0;
  double A_y = 0.0;
  double B_y = 0.0;
  /// X-leg drift and diffusion implied by the matching conditions
  double beta_x = 0.0;
  double gamma_x = 0.0;
  /// load a1 = 0: the Z leg drops out and Y = X
  bool degenerate = false;
};

/// Parameters of Y = theta G_Y + sigma W(G_Y) with Y =d X + a1 Z.
/// B_y follows the unit-mean convention (1 - a) A_y.
BBConvolutionSolution bb_solve_convolution(double A_x, double B_x, double A_z, double B_z, double a1,
                                           double beta_z, double gamma_z, double a);

/// Same, but checks user-supplied X-leg parameters against the matching conditions.
/// Throws DomainError reporting the residual when they are inconsistent.
BBConvolutionSolution bb_solve_convolution(double A_x, double B_x, double beta_x, double gamma_x,
                                           double A_z, double B_z, double a1, double beta_z,
                                           double gamma_z, double a);

/// BB spec whose X legs are derived from the matching conditions.
ModelSpec make_bb(double rate, double a, const std::vector<double>& A_x, const std::vector<double>& B_x,
                  const std::vector<double>& load, double beta_z, double gamma_z, double A_z, double B_z);

/// Largest |cf_Y - cf_X cf_{a_j Z}| on a u-grid for asset j of a BB spec.
double bb_convolution_residual(const ModelSpec& spec, std::size_t j);

/// Smallest eigenvalue check with floor -1e-12, unit diagonal, entries in [-1, 1].
void check_correlation_matrix(const Eigen::MatrixXd& rho);

}  // namespace exlevy::models
