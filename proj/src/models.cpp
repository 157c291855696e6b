#include "exlevy/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "exlevy/errors.hpp"

namespace exlevy::models {

namespace {

using cd = std::complex<double>;
constexpr cd kI(0.0, 1.0);

void require(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

// sum_ij u_i u_j S_ij, bilinear so it continues analytically in u
cd quad_form(const Eigen::MatrixXd& s, const cvec& u) {
  cd acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t k = 0; k < u.size(); ++k) acc += u[i] * u[k] * s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
  }
  return acc;
}

Eigen::MatrixXd brownian_covariance(const ModelSpec& spec, const std::vector<double>& scale) {
  const Eigen::MatrixXd rho = spec.correlation();
  const auto n = static_cast<Eigen::Index>(scale.size());
  Eigen::MatrixXd s(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) s(i, k) = scale[i] * scale[k] * rho(i, k);
  }
  return s;
}

std::vector<double> sigmas(const ModelSpec& spec) {
  std::vector<double> s;
  for (const auto& a : spec.assets) s.push_back(a.sigma);
  return s;
}

GammaPPParams idiosyncratic(const ModelSpec& spec, std::size_t j, double t) {
  return {spec.sem.a, spec.sem.A_j[j] * t, spec.sem.B / spec.sem.alpha[j]};
}

GammaPPParams common_z(const ModelSpec& spec, double t) { return {spec.sem.a, spec.sem.A * t, spec.sem.B}; }

double safe_pow(double a, double e) { return a == 0.0 ? 0.0 : std::exp(e * std::log(a)); }

}  // namespace

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::BS: return "BS";
    case Kind::VG: return "VG";
    case Kind::VGPP: return "VGPP";
    case Kind::Semeraro: return "SemeraroVGPP";
    case Kind::LS: return "LSVGPP";
    case Kind::BB: return "BBVGPP";
  }
  return "?";
}

Kind kind_from_string(const std::string& name) {
  for (Kind k : {Kind::BS, Kind::VG, Kind::VGPP, Kind::Semeraro, Kind::LS, Kind::BB}) {
    if (to_string(k) == name) return k;
  }
  throw DataError("unknown model kind '" + name + "'");
}

void MarginalVGppParams::validate() const {
  require(std::isfinite(theta), "theta must be finite");
  require(sigma >= 0.0 && std::isfinite(sigma), "sigma must be >= 0");
  if (!sub) return;
  sub->validate();
  const double kappa = theta + 0.5 * sigma * sigma;
  if (!(sub->beta - kappa > 0.0)) {
    std::ostringstream os;
    os << "martingale admissibility violated: beta - (theta + sigma^2/2) = " << sub->beta - kappa << " <= 0";
    throw DomainError(os.str());
  }
}

std::size_t ModelSpec::dim() const { return kind == Kind::BB ? bb.load.size() : assets.size(); }

Eigen::MatrixXd ModelSpec::correlation() const {
  const auto n = static_cast<Eigen::Index>(dim());
  if (rho.size() == 0) return Eigen::MatrixXd::Identity(n, n);
  return rho;
}

void check_correlation_matrix(const Eigen::MatrixXd& rho) {
  require(rho.rows() == rho.cols(), "correlation matrix must be square");
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    require(std::abs(rho(i, i) - 1.0) < 1e-12, "correlation matrix must have unit diagonal");
    for (Eigen::Index k = 0; k < rho.cols(); ++k) {
      require(std::abs(rho(i, k)) <= 1.0 + 1e-15, "correlation entries must lie in [-1, 1]");
      require(std::abs(rho(i, k) - rho(k, i)) < 1e-12, "correlation matrix must be symmetric");
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12) {
    std::ostringstream os;
    os << "correlation matrix is not positive semidefinite (min eigenvalue " << es.eigenvalues().minCoeff() << ")";
    throw DomainError(os.str());
  }
}

void ModelSpec::validate() const {
  require(std::isfinite(rate), "rate must be finite");
  const std::size_t n = dim();
  require(n >= 1, "model needs at least one asset");
  if (kind != Kind::BB) {
    for (const auto& a : assets) {
      require(std::isfinite(a.theta), "theta must be finite");
      require(a.sigma >= 0.0 && std::isfinite(a.sigma), "sigma must be >= 0");
    }
  }
  if (kind == Kind::BS || kind == Kind::VG || kind == Kind::VGPP || kind == Kind::LS) {
    if (rho.size() != 0) {
      require(rho.rows() == static_cast<Eigen::Index>(n), "correlation matrix size does not match the asset count");
      check_correlation_matrix(rho);
    }
  }
  switch (kind) {
    case Kind::BS:
      break;
    case Kind::VG:
      sub.validate();
      require(sub.a == 0.0, "VG requires a = 0 (use VGPP for a > 0)");
      break;
    case Kind::VGPP:
      sub.validate();
      require(sub.a > 0.0, "VGPP requires a in (0, 1)");
      break;
    case Kind::Semeraro:
    case Kind::LS:
      require(sem.alpha.size() == n && sem.A_j.size() == n, "alpha_j and A_j need one entry per asset");
      require(sem.a >= 0.0 && sem.a < 1.0, "a must lie in [0, 1)");
      require(sem.A > 0.0 && sem.B > 0.0, "A and B must be > 0");
      for (std::size_t j = 0; j < n; ++j) {
        require(sem.alpha[j] > 0.0, "alpha_j must be > 0");
        require(sem.A_j[j] > 0.0, "A_j must be > 0");
      }
      break;
    case Kind::BB:
      require(bb.beta.size() == n && bb.gamma.size() == n && bb.A_x.size() == n && bb.B_x.size() == n,
              "BB per-asset vectors must have equal length");
      require(bb.a >= 0.0 && bb.a < 1.0, "a must lie in [0, 1)");
      require(bb.A_z > 0.0 && bb.B_z > 0.0, "A_z and B_z must be > 0");
      require(bb.gamma_z >= 0.0 && std::isfinite(bb.beta_z), "gamma_z must be >= 0");
      for (std::size_t j = 0; j < n; ++j) {
        require(bb.A_x[j] > 0.0 && bb.B_x[j] > 0.0, "A_x and B_x must be > 0");
        require(bb.gamma[j] >= 0.0 && std::isfinite(bb.beta[j]) && std::isfinite(bb.load[j]),
                "BB leg parameters must be finite with gamma >= 0");
      }
      break;
  }
  // finite drift correctors are exactly the martingale admissibility conditions
  try {
    const auto w = drift_correctors(*this);
    for (double v : w) require(std::isfinite(v), "drift corrector is not finite");
  } catch (const DomainError& e) {
    throw DomainError(std::string("martingale admissibility violated: ") + e.what());
  }
}

ModelSpec make_bivariate(Kind kind, double rate, AssetParams asset1, AssetParams asset2, double rho,
                         GammaPPParams sub) {
  ModelSpec s;
  s.kind = kind;
  s.rate = rate;
  s.assets = {asset1, asset2};
  s.sub = sub;
  s.rho = Eigen::MatrixXd::Identity(2, 2);
  s.rho(0, 1) = s.rho(1, 0) = rho;
  s.validate();
  return s;
}

MarginalVGppParams marginal(const ModelSpec& spec, std::size_t j) {
  require(j < spec.dim(), "asset index out of range");
  switch (spec.kind) {
    case Kind::BS:
      return {spec.assets[j].theta, spec.assets[j].sigma, std::nullopt};
    case Kind::VG:
    case Kind::VGPP:
      return {spec.assets[j].theta, spec.assets[j].sigma, spec.sub};
    case Kind::Semeraro:
    case Kind::LS:
      return {spec.assets[j].theta, spec.assets[j].sigma,
              GammaPPParams{spec.sem.a, spec.sem.A_j[j] + spec.sem.A, spec.sem.B / spec.sem.alpha[j]}};
    case Kind::BB: {
      const auto& b = spec.bb;
      const auto sol = bb_solve_convolution(b.A_x[j], b.B_x[j], b.beta[j], b.gamma[j], b.A_z, b.B_z, b.load[j],
                                            b.beta_z, b.gamma_z, b.a);
      return {sol.theta, sol.sigma, GammaPPParams{b.a, sol.A_y, sol.B_y}};
    }
  }
  throw DomainError("unknown model kind");
}

std::complex<double> cf_marginal(const MarginalVGppParams& m, double t, std::complex<double> u) {
  const cd arg = u * m.theta + 0.5 * kI * m.sigma * m.sigma * u * u;
  if (!m.sub) return std::exp(kI * arg * t);
  return gammapp::cf(gammapp::at_time(*m.sub, t), arg);
}

double drift_corrector(const MarginalVGppParams& m) {
  m.validate();
  const double kappa = m.theta + 0.5 * m.sigma * m.sigma;
  if (!m.sub) return -kappa;
  const auto& p = *m.sub;
  return p.alpha * (std::log(p.beta - kappa) - std::log(p.beta - p.a * kappa));
}

std::complex<double> log_cf_joint(const ModelSpec& spec, double t, const cvec& u) {
  require(t > 0.0, "time must be > 0");
  const std::size_t n = spec.dim();
  if (u.size() != n) throw DomainError("cf_joint: argument dimension does not match the asset count");
  switch (spec.kind) {
    case Kind::BS: {
      cd drift = 0.0;
      for (std::size_t j = 0; j < n; ++j) drift += u[j] * spec.assets[j].theta;
      return kI * drift * t - 0.5 * t * quad_form(brownian_covariance(spec, sigmas(spec)), u);
    }
    case Kind::VG:
    case Kind::VGPP: {
      cd drift = 0.0;
      for (std::size_t j = 0; j < n; ++j) drift += u[j] * spec.assets[j].theta;
      const cd arg = drift + 0.5 * kI * quad_form(brownian_covariance(spec, sigmas(spec)), u);
      return gammapp::log_cf(gammapp::at_time(spec.sub, t), arg);
    }
    case Kind::Semeraro:
    case Kind::LS: {
      cd acc = 0.0;
      cd z_arg = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const auto& a = spec.assets[j];
        const cd zj = u[j] * a.theta + 0.5 * kI * a.sigma * a.sigma * u[j] * u[j];
        acc += gammapp::log_cf(idiosyncratic(spec, j, t), zj);
        if (spec.kind == Kind::Semeraro) z_arg += spec.sem.alpha[j] * zj;
      }
      if (spec.kind == Kind::LS) {
        std::vector<double> scale(n);
        for (std::size_t j = 0; j < n; ++j) {
          scale[j] = std::sqrt(spec.sem.alpha[j]) * spec.assets[j].sigma;
          z_arg += spec.sem.alpha[j] * spec.assets[j].theta * u[j];
        }
        z_arg += 0.5 * kI * quad_form(brownian_covariance(spec, scale), u);
      }
      return acc + gammapp::log_cf(common_z(spec, t), z_arg);
    }
    case Kind::BB: {
      const auto& b = spec.bb;
      cd acc = 0.0;
      cd s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const cd xj = b.beta[j] * u[j] + 0.5 * kI * b.gamma[j] * b.gamma[j] * u[j] * u[j];
        acc += gammapp::log_cf(GammaPPParams{b.a, b.A_x[j] * t, b.B_x[j]}, xj);
        s += b.load[j] * u[j];
      }
      const cd z_arg = s * b.beta_z + 0.5 * kI * s * s * b.gamma_z * b.gamma_z;
      return acc + gammapp::log_cf(GammaPPParams{b.a, b.A_z * t, b.B_z}, z_arg);
    }
  }
  throw DomainError("unknown model kind");
}

std::complex<double> cf_joint(const ModelSpec& spec, double t, const cvec& u) {
  return std::exp(log_cf_joint(spec, t, u));
}

std::complex<double> cf_joint(const ModelSpec& spec, double t, const std::vector<double>& u) {
  cvec cu(u.begin(), u.end());
  return cf_joint(spec, t, cu);
}

std::vector<double> drift_correctors(const ModelSpec& spec) {
  const std::size_t n = spec.dim();
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    cvec u(n, 0.0);
    u[j] = cd(0.0, -1.0);
    const cd l = log_cf_joint(spec, 1.0, u);
    w[j] = -l.real();
  }
  return w;
}

double marginal_atom(const MarginalVGppParams& m, double t) {
  if (!m.sub || m.sub->a == 0.0) return 0.0;
  return safe_pow(m.sub->a, m.sub->alpha * t);
}

double joint_atom(const ModelSpec& spec, double t) {
  switch (spec.kind) {
    case Kind::BS:
    case Kind::VG:
      return 0.0;
    case Kind::VGPP:
      return safe_pow(spec.sub.a, spec.sub.alpha * t);
    case Kind::Semeraro:
    case Kind::LS: {
      double shape = spec.sem.A;
      for (double aj : spec.sem.A_j) shape += aj;
      return safe_pow(spec.sem.a, shape * t);
    }
    case Kind::BB: {
      double shape = 0.0;
      for (double ax : spec.bb.A_x) shape += ax;
      const bool z_loaded = std::any_of(spec.bb.load.begin(), spec.bb.load.end(), [](double l) { return l != 0.0; });
      if (z_loaded) shape += spec.bb.A_z;
      return safe_pow(spec.bb.a, shape * t);
    }
  }
  return 0.0;
}

MarginalMoments marginal_moments(const ModelSpec& spec, double t, std::size_t j) {
  require(j < spec.dim(), "asset index out of range");
  if (spec.kind == Kind::BB) {
    const auto& b = spec.bb;
    const auto gx = gammapp::moments({b.a, b.A_x[j] * t, b.B_x[j]});
    const auto gz = gammapp::moments({b.a, b.A_z * t, b.B_z});
    const double zm = b.beta_z * gz.mean;
    const double zv = b.beta_z * b.beta_z * gz.variance + b.gamma_z * b.gamma_z * gz.mean;
    return {b.beta[j] * gx.mean + b.load[j] * zm,
            b.beta[j] * b.beta[j] * gx.variance + b.gamma[j] * b.gamma[j] * gx.mean + b.load[j] * b.load[j] * zv};
  }
  const auto m = marginal(spec, j);
  if (!m.sub) return {m.theta * t, m.sigma * m.sigma * t};
  const auto g = gammapp::moments(gammapp::at_time(*m.sub, t));
  return {m.theta * g.mean, m.theta * m.theta * g.variance + m.sigma * m.sigma * g.mean};
}

double linear_correlation(const ModelSpec& spec, double t, std::size_t i, std::size_t j) {
  require(spec.dim() >= 2, "linear correlation needs a multivariate model");
  require(i != j && i < spec.dim() && j < spec.dim(), "linear correlation needs two distinct asset indices");
  require(t > 0.0, "time must be > 0");
  const Eigen::MatrixXd rho = spec.correlation();
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  double cov = 0.0;
  switch (spec.kind) {
    case Kind::BS:
      cov = rho(ii, jj) * spec.assets[i].sigma * spec.assets[j].sigma * t;
      break;
    case Kind::VG:
    case Kind::VGPP: {
      const auto g = gammapp::moments(gammapp::at_time(spec.sub, t));
      cov = spec.assets[i].theta * spec.assets[j].theta * g.variance +
            rho(ii, jj) * spec.assets[i].sigma * spec.assets[j].sigma * g.mean;
      break;
    }
    case Kind::Semeraro:
    case Kind::LS: {
      const auto z = gammapp::moments(common_z(spec, t));
      const double ai = spec.sem.alpha[i];
      const double aj = spec.sem.alpha[j];
      cov = spec.assets[i].theta * spec.assets[j].theta * ai * aj * z.variance;
      if (spec.kind == Kind::LS) {
        cov += rho(ii, jj) * spec.assets[i].sigma * spec.assets[j].sigma * std::sqrt(ai * aj) * z.mean;
      }
      break;
    }
    case Kind::BB: {
      const auto& b = spec.bb;
      const auto gz = gammapp::moments({b.a, b.A_z * t, b.B_z});
      cov = b.load[i] * b.load[j] * (b.beta_z * b.beta_z * gz.variance + b.gamma_z * b.gamma_z * gz.mean);
      break;
    }
  }
  const double vi = marginal_moments(spec, t, i).variance;
  const double vj = marginal_moments(spec, t, j).variance;
  if (!(vi > 0.0) || !(vj > 0.0)) return 0.0;
  return std::clamp(cov / std::sqrt(vi * vj), -1.0, 1.0);
}

BBConvolutionSolution bb_solve_convolution(double A_x, double B_x, double A_z, double B_z, double a1,
                                           double beta_z, double gamma_z, double a) {
  require(A_x > 0.0 && B_x > 0.0 && A_z > 0.0 && B_z > 0.0, "BB convolution: A_x, B_x, A_z, B_z must be > 0");
  require(a >= 0.0 && a < 1.0, "BB convolution: a must lie in [0, 1)");
  require(gamma_z >= 0.0 && std::isfinite(beta_z) && std::isfinite(a1), "BB convolution: bad Z-leg parameters");
  BBConvolutionSolution s;
  // x/B_x = z/B_z with z = u a1 beta_z + i u^2 a1^2 gamma_z^2 / 2
  const double ratio_x = B_x / B_z;
  s.beta_x = ratio_x * a1 * beta_z;
  s.gamma_x = std::sqrt(ratio_x) * std::abs(a1) * gamma_z;
  s.A_y = A_x + A_z;
  s.B_y = (1.0 - a) * s.A_y;
  // y/B_y = x/B_x
  const double ratio_y = s.B_y / B_z;
  s.theta = ratio_y * a1 * beta_z;
  s.sigma = std::sqrt(ratio_y) * std::abs(a1) * gamma_z;
  s.degenerate = a1 == 0.0;
  return s;
}

BBConvolutionSolution bb_solve_convolution(double A_x, double B_x, double beta_x, double gamma_x, double A_z,
                                           double B_z, double a1, double beta_z, double gamma_z, double a) {
  if (a1 == 0.0) {
    require(A_x > 0.0 && B_x > 0.0 && gamma_x >= 0.0, "BB convolution: bad X-leg parameters");
    // Y = X exactly
    BBConvolutionSolution s;
    s.beta_x = beta_x;
    s.gamma_x = gamma_x;
    s.theta = beta_x;
    s.sigma = gamma_x;
    s.A_y = A_x;
    s.B_y = B_x;
    s.degenerate = true;
    return s;
  }
  BBConvolutionSolution s = bb_solve_convolution(A_x, B_x, A_z, B_z, a1, beta_z, gamma_z, a);
  const double rb = std::abs(beta_x - s.beta_x);
  const double rg = std::abs(gamma_x * gamma_x - s.gamma_x * s.gamma_x);
  const double scale = 1e-9 * std::max({1.0, std::abs(s.beta_x), s.gamma_x * s.gamma_x});
  if (rb > scale || rg > scale) {
    std::ostringstream os;
    os << "BB convolution conditions do not hold: X-leg drift residual " << rb << ", variance residual " << rg
       << " (required beta_x = " << s.beta_x << ", gamma_x = " << s.gamma_x << ")";
    throw DomainError(os.str());
  }
  s.beta_x = beta_x;
  s.gamma_x = gamma_x;
  return s;
}

ModelSpec make_bb(double rate, double a, const std::vector<double>& A_x, const std::vector<double>& B_x,
                  const std::vector<double>& load, double beta_z, double gamma_z, double A_z, double B_z) {
  require(A_x.size() == B_x.size() && A_x.size() == load.size(), "BB per-asset vectors must have equal length");
  ModelSpec s;
  s.kind = Kind::BB;
  s.rate = rate;
  s.bb.a = a;
  s.bb.A_x = A_x;
  s.bb.B_x = B_x;
  s.bb.load = load;
  s.bb.beta_z = beta_z;
  s.bb.gamma_z = gamma_z;
  s.bb.A_z = A_z;
  s.bb.B_z = B_z;
  for (std::size_t j = 0; j < A_x.size(); ++j) {
    const auto sol = bb_solve_convolution(A_x[j], B_x[j], A_z, B_z, load[j], beta_z, gamma_z, a);
    s.bb.beta.push_back(sol.beta_x);
    s.bb.gamma.push_back(sol.gamma_x);
  }
  s.validate();
  return s;
}

double bb_convolution_residual(const ModelSpec& spec, std::size_t j) {
  require(spec.kind == Kind::BB && j < spec.dim(), "bb_convolution_residual needs a BB spec and a valid index");
  const auto& b = spec.bb;
  const auto sol = bb_solve_convolution(b.A_x[j], b.B_x[j], b.A_z, b.B_z, b.load[j], b.beta_z, b.gamma_z, b.a);
  const MarginalVGppParams y{sol.theta, sol.sigma, GammaPPParams{b.a, sol.A_y, sol.B_y}};
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double u = -10.0 + 20.0 * k / 99.0;
    cvec uu(spec.dim(), 0.0);
    uu[j] = u;
    worst = std::max(worst, std::abs(cf_marginal(y, 1.0, u) - cf_joint(spec, 1.0, uu)));
  }
  return worst;
}

}  // namespace exlevy::models
