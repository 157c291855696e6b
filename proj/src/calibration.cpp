#include "exlevy/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "exlevy/errors.hpp"
#include "exlevy/pricing_fourier.hpp"
#include "exlevy/random.hpp"

namespace exlevy::calibration {

namespace {

using models::AssetParams;
using models::Kind;
using models::ModelSpec;

constexpr double kShapeCap = 1.0 - 1e-6;

// Maps the marginal block of a model kind to a flat box-constrained vector.
// Shape parameters are optimized in log space.
struct Layout {
  ModelSpec base;
  std::size_t n = 0;
  std::vector<std::string> names;
  std::vector<double> lo;
  std::vector<double> hi;

  explicit Layout(const ModelSpec& b) : base(b), n(b.dim()) {
    auto add = [&](const std::string& name, double l, double h) {
      names.push_back(name);
      lo.push_back(l);
      hi.push_back(h);
    };
    auto idx = [](const char* p, std::size_t j) { return std::string(p) + "_" + std::to_string(j + 1); };
    switch (base.kind) {
      case Kind::BS:
        for (std::size_t j = 0; j < n; ++j) add(idx("sigma", j), 1e-3, 4.0);
        break;
      case Kind::VG:
      case Kind::VGPP:
        for (std::size_t j = 0; j < n; ++j) add(idx("theta", j), -3.0, 3.0);
        for (std::size_t j = 0; j < n; ++j) add(idx("sigma", j), 1e-3, 4.0);
        add("log_alpha", std::log(0.05), std::log(100.0));
        if (base.kind == Kind::VGPP) add("a", 1e-4, 0.9);
        break;
      case Kind::Semeraro:
      case Kind::LS:
        for (std::size_t j = 0; j < n; ++j) add(idx("theta", j), -3.0, 3.0);
        for (std::size_t j = 0; j < n; ++j) add(idx("sigma", j), 1e-3, 4.0);
        for (std::size_t j = 0; j < n; ++j) add(idx("log_shape", j), std::log(0.05), std::log(1e4));
        add("a", 0.0, 0.9);
        break;
      case Kind::BB:
        for (std::size_t j = 0; j < n; ++j) add(idx("sigma", j), 1e-3, 4.0);
        for (std::size_t j = 0; j < n; ++j) add(idx("log_A_y", j), std::log(0.05), std::log(1e4));
        add("a", 0.0, 0.9);
        add("lambda", -3.0, 3.0);
        break;
    }
  }

  std::vector<double> pack(const ModelSpec& s) const {
    std::vector<double> x;
    switch (s.kind) {
      case Kind::BS:
        for (const auto& a : s.assets) x.push_back(a.sigma);
        break;
      case Kind::VG:
      case Kind::VGPP:
        for (const auto& a : s.assets) x.push_back(a.theta);
        for (const auto& a : s.assets) x.push_back(a.sigma);
        x.push_back(std::log(s.sub.alpha));
        if (s.kind == Kind::VGPP) x.push_back(s.sub.a);
        break;
      case Kind::Semeraro:
      case Kind::LS:
        for (const auto& a : s.assets) x.push_back(a.theta);
        for (const auto& a : s.assets) x.push_back(a.sigma);
        for (std::size_t j = 0; j < n; ++j) x.push_back(std::log(s.sem.A_j[j] + s.sem.A));
        x.push_back(s.sem.a);
        break;
      case Kind::BB: {
        std::vector<models::MarginalVGppParams> m;
        for (std::size_t j = 0; j < n; ++j) m.push_back(models::marginal(s, j));
        for (const auto& mj : m) x.push_back(mj.sigma);
        for (const auto& mj : m) x.push_back(std::log(mj.sub->alpha));
        x.push_back(s.bb.a);
        const double denom = m[0].sigma * std::sqrt(m[0].sub->alpha);
        x.push_back(denom > 0.0 ? m[0].theta / denom : 0.0);
        break;
      }
    }
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
  }

  ModelSpec unpack(const std::vector<double>& x) const {
    ModelSpec s = base;
    switch (base.kind) {
      case Kind::BS:
        for (std::size_t j = 0; j < n; ++j) s.assets[j].sigma = x[j];
        break;
      case Kind::VG:
      case Kind::VGPP: {
        for (std::size_t j = 0; j < n; ++j) s.assets[j] = {x[j], x[n + j]};
        const double alpha = std::exp(x[2 * n]);
        const double a = base.kind == Kind::VGPP ? x[2 * n + 1] : 0.0;
        s.sub = {a, alpha, gammapp::unit_mean_beta(a, alpha)};
        break;
      }
      case Kind::Semeraro:
      case Kind::LS: {
        std::vector<AssetParams> m(n);
        std::vector<double> shapes(n);
        for (std::size_t j = 0; j < n; ++j) {
          m[j] = {x[j], x[n + j]};
          shapes[j] = std::exp(x[2 * n + j]);
        }
        const double cap = kShapeCap * *std::min_element(shapes.begin(), shapes.end());
        const double rho = base.kind == Kind::LS && base.rho.size() != 0 && n > 1 ? base.rho(0, 1) : 0.0;
        s = make_semeraro_from_marginals(base.kind, base.rate, x[3 * n], m, shapes, std::min(base.sem.A, cap),
                                         base.sem.B, rho);
        break;
      }
      case Kind::BB: {
        const double a = x[2 * n];
        const double lambda = x[2 * n + 1];
        std::vector<AssetParams> m(n);
        std::vector<double> A_y(n);
        for (std::size_t j = 0; j < n; ++j) {
          A_y[j] = std::exp(x[n + j]);
          m[j] = {lambda * x[j] * std::sqrt(A_y[j]), x[j]};
        }
        const double cap = kShapeCap * *std::min_element(A_y.begin(), A_y.end());
        s = make_bb_from_marginals(base.rate, a, m, A_y, std::min(base.bb.A_z, cap), base.bb.B_z,
                                   base.bb.gamma_z > 0.0 ? base.bb.gamma_z : 1.0);
        break;
      }
    }
    return s;
  }

  // Parameters in natural units for reporting.
  void report(const std::vector<double>& x, std::vector<std::string>& out_names, std::vector<double>& out) const {
    out_names.clear();
    out.clear();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const std::string& nm = names[i];
      if (nm.rfind("log_", 0) == 0) {
        out_names.push_back(nm.substr(4));
        out.push_back(std::exp(x[i]));
      } else {
        out_names.push_back(nm);
        out.push_back(x[i]);
      }
    }
  }
};

using ResidualFn = std::function<bool(const std::vector<double>&, Eigen::VectorXd&)>;

struct LmOutcome {
  std::vector<double> x;
  double cost = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  bool feasible = false;
};

// Projected Levenberg-Marquardt with forward-difference Jacobian.
LmOutcome levenberg_marquardt(const ResidualFn& f, std::vector<double> x, const std::vector<double>& lo,
                              const std::vector<double>& hi, const Options& opt) {
  LmOutcome out;
  const std::size_t p = x.size();
  for (std::size_t i = 0; i < p; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
  Eigen::VectorXd r;
  if (!f(x, r)) return out;
  out.feasible = true;
  double cost = r.squaredNorm();
  double mu = 1e-3;
  Eigen::MatrixXd J(r.size(), static_cast<Eigen::Index>(p));
  Eigen::VectorXd rp;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (cost == 0.0) {
      out.converged = true;
      break;
    }
    for (std::size_t i = 0; i < p; ++i) {
      const double h = 1e-7 * std::max(1.0, std::abs(x[i]));
      std::vector<double> xp = x;
      double step = x[i] + h <= hi[i] ? h : -h;
      xp[i] = x[i] + step;
      bool ok = f(xp, rp);
      if (!ok) {
        step = -step;
        xp[i] = x[i] + step;
        ok = xp[i] >= lo[i] && xp[i] <= hi[i] && f(xp, rp);
      }
      J.col(static_cast<Eigen::Index>(i)) = ok ? Eigen::VectorXd((rp - r) / step) : Eigen::VectorXd::Zero(r.size());
    }
    const Eigen::VectorXd g = J.transpose() * r;
    const Eigen::MatrixXd A = J.transpose() * J;
    if (g.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + cost)) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    std::vector<double> xn(p);
    Eigen::VectorXd rn;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd M = A;
      for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, i) += mu * std::max(A(i, i), 1e-12);
      const Eigen::VectorXd delta = M.ldlt().solve(-g);
      for (std::size_t i = 0; i < p; ++i) xn[i] = std::clamp(x[i] + delta(static_cast<Eigen::Index>(i)), lo[i], hi[i]);
      if (xn != x && f(xn, rn) && rn.squaredNorm() < cost) {
        accepted = true;
        break;
      }
      mu *= 4.0;
    }
    if (!accepted) {
      out.converged = true;
      break;
    }
    const double old = cost;
    double step = 0.0;
    for (std::size_t i = 0; i < p; ++i) step = std::max(step, std::abs(xn[i] - x[i]) / std::max(1.0, std::abs(x[i])));
    x = xn;
    r = rn;
    cost = r.squaredNorm();
    mu = std::max(mu / 3.0, 1e-12);
    if (old - cost <= opt.tolerance * old && step < 1e-10) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.x = x;
  out.cost = cost;
  out.iterations = it;
  return out;
}

std::vector<std::vector<double>> latin_hypercube(const std::vector<double>& lo, const std::vector<double>& hi, int m,
                                                 std::uint64_t seed) {
  RandomStream rng(seed);
  const std::size_t p = lo.size();
  std::vector<std::vector<double>> pts(static_cast<std::size_t>(m), std::vector<double>(p));
  std::vector<int> perm(static_cast<std::size_t>(m));
  for (std::size_t d = 0; d < p; ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = m - 1; i > 0; --i) {
      const auto k = static_cast<int>(rng.uniform() * (i + 1));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(std::min(k, i))]);
    }
    for (int i = 0; i < m; ++i) {
      const double u = (perm[static_cast<std::size_t>(i)] + rng.uniform()) / m;
      pts[static_cast<std::size_t>(i)][d] = lo[d] + u * (hi[d] - lo[d]);
    }
  }
  return pts;
}

void require_data(bool ok, const std::string& msg) {
  if (!ok) throw DataError(msg);
}

}  // namespace

void MarketSnapshot::validate() const {
  require_data(std::isfinite(rate), "market rate must be finite");
  require_data(!assets.empty(), "market snapshot has no assets");
  const std::size_t len = assets.front().log_returns.size();
  for (const auto& a : assets) {
    require_data(a.forward > 0.0, "forward price for " + a.product + " must be > 0");
    for (const auto& q : a.quotes) {
      require_data(q.strike > 0.0 && q.maturity > 0.0 && q.mid >= 0.0 && std::isfinite(q.mid),
                   "bad vanilla quote for " + a.product);
    }
    require_data(a.log_returns.size() == len, "return series must have equal length");
    for (double r : a.log_returns) require_data(std::isfinite(r), "non-finite log-return for " + a.product);
  }
  require_data(return_dates.empty() || return_dates.size() == len, "return dates do not match the series length");
}

MarketSnapshot MarketSnapshot::filtered(double band) const {
  MarketSnapshot out = *this;
  for (auto& a : out.assets) {
    std::erase_if(a.quotes, [&](const VanillaQuote& q) { return std::abs(q.strike - a.forward) > band + 1e-12; });
  }
  return out;
}

double MarketSnapshot::empirical_correlation(std::size_t i, std::size_t j) const {
  require_data(i < assets.size() && j < assets.size(), "asset index out of range");
  const auto& x = assets[i].log_returns;
  const auto& y = assets[j].log_returns;
  require_data(x.size() == y.size() && x.size() >= 3, "need at least 3 aligned returns for a correlation");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  require_data(sxx > 0.0 && syy > 0.0, "constant return series");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> model_prices(const MarketSnapshot& snapshot, const ModelSpec& spec, std::size_t j) {
  const auto m = models::marginal(spec, j);
  const auto& asset = snapshot.assets.at(j);
  std::vector<double> out(asset.quotes.size());
  // one transform pass per maturity
  std::map<double, std::vector<std::size_t>> by_maturity;
  for (std::size_t k = 0; k < asset.quotes.size(); ++k) by_maturity[asset.quotes[k].maturity].push_back(k);
  for (const auto& [T, idx] : by_maturity) {
    std::vector<double> strikes;
    for (auto k : idx) strikes.push_back(asset.quotes[k].strike);
    const double s0 = asset.forward * std::exp(-snapshot.rate * T);
    const auto p = pricing::price_vanilla_calls(m, snapshot.rate, s0, T, strikes);
    for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = p[i];
  }
  return out;
}

double objective(const MarketSnapshot& snapshot, const ModelSpec& spec) {
  double s = 0.0;
  for (std::size_t j = 0; j < snapshot.assets.size(); ++j) {
    const auto p = model_prices(snapshot, spec, j);
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double e = p[k] - snapshot.assets[j].quotes[k].mid;
      s += e * e;
    }
  }
  return s;
}

ModelSpec make_semeraro_from_marginals(Kind kind, double rate, double a, const std::vector<AssetParams>& marginals,
                                       const std::vector<double>& shapes, double A, double B, double rho) {
  if (kind != Kind::Semeraro && kind != Kind::LS) throw DomainError("expected a Semeraro or LS kind");
  if (marginals.size() != shapes.size()) throw DomainError("one shape per asset required");
  ModelSpec s;
  s.kind = kind;
  s.rate = rate;
  s.assets = marginals;
  s.sem.a = a;
  s.sem.A = A;
  s.sem.B = B;
  for (double sh : shapes) {
    if (!(sh > A)) throw DomainError("marginal shape must exceed the common shape A");
    s.sem.alpha.push_back(B / ((1.0 - a) * sh));
    s.sem.A_j.push_back(sh - A);
  }
  if (kind == Kind::LS) {
    const auto n = static_cast<Eigen::Index>(marginals.size());
    s.rho = Eigen::MatrixXd::Constant(n, n, rho);
    s.rho.diagonal().setOnes();
  }
  s.validate();
  return s;
}

ModelSpec make_bb_from_marginals(double rate, double a, const std::vector<AssetParams>& marginals,
                                 const std::vector<double>& A_y, double A_z, double B_z, double gamma_z) {
  const std::size_t n = marginals.size();
  if (n == 0 || A_y.size() != n) throw DomainError("one A_y per asset required");
  if (!(gamma_z > 0.0) || !(B_z > 0.0) || !(A_z > 0.0)) throw DomainError("Z leg needs A_z, B_z, gamma_z > 0");
  std::vector<double> B_y(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(marginals[j].sigma > 0.0)) throw DomainError("BB marginals need sigma > 0");
    if (!(A_y[j] > A_z)) throw DomainError("BB marginals need A_y > A_z");
    B_y[j] = (1.0 - a) * A_y[j];
  }
  // a_j gamma_z = sigma_j sqrt(B_z / B_yj), a_j beta_z = theta_j B_z / B_yj
  const double beta_z = marginals[0].theta * gamma_z * std::sqrt(B_z) / (marginals[0].sigma * std::sqrt(B_y[0]));
  std::vector<double> load(n);
  std::vector<double> A_x(n);
  for (std::size_t j = 0; j < n; ++j) {
    load[j] = marginals[j].sigma * std::sqrt(B_z / B_y[j]) / gamma_z;
    const double implied = marginals[j].theta * B_z / (B_y[j] * load[j]);
    if (std::abs(implied - beta_z) > 1e-9 * std::max(1.0, std::abs(beta_z))) {
      std::ostringstream os;
      os << "BB marginals are not jointly attainable: theta^2/(sigma^2 A_y) differs across assets (asset " << j + 1
         << ")";
      throw DomainError(os.str());
    }
    A_x[j] = A_y[j] - A_z;
  }
  return models::make_bb(rate, a, A_x, B_y, load, beta_z, gamma_z, A_z, B_z);
}

CalibrationResult calibrate_marginals(const MarketSnapshot& snapshot_in, const ModelSpec& initial, const Options& opt) {
  snapshot_in.validate();
  initial.validate();
  const MarketSnapshot snap = snapshot_in.filtered(opt.moneyness_band);
  require_data(snap.assets.size() == initial.dim(), "market and model asset counts differ");
  for (const auto& a : snap.assets) {
    require_data(a.quotes.size() >= 4, "need at least 4 quotes per asset within the moneyness band for " + a.product);
  }
  ModelSpec base = initial;
  base.rate = snap.rate;
  const Layout layout(base);

  std::size_t n_quotes = 0;
  for (const auto& a : snap.assets) n_quotes += a.quotes.size();
  const ResidualFn residuals = [&](const std::vector<double>& x, Eigen::VectorXd& r) {
    try {
      const ModelSpec s = layout.unpack(x);
      r.resize(static_cast<Eigen::Index>(n_quotes));
      Eigen::Index k = 0;
      for (std::size_t j = 0; j < snap.assets.size(); ++j) {
        const auto p = model_prices(snap, s, j);
        for (std::size_t q = 0; q < p.size(); ++q) r(k++) = p[q] - snap.assets[j].quotes[q].mid;
      }
      return r.allFinite();
    } catch (const DomainError&) {
      return false;
    } catch (const NumericalError&) {
      return false;
    }
  };

  std::vector<std::vector<double>> starts{layout.pack(base)};
  for (auto& p : latin_hypercube(layout.lo, layout.hi, opt.lhs_starts, opt.seed)) starts.push_back(std::move(p));
  std::vector<LmOutcome> outcomes(starts.size());
  const auto ns = static_cast<std::int64_t>(starts.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < ns; ++i) {
    try {
      outcomes[static_cast<std::size_t>(i)] =
          levenberg_marquardt(residuals, starts[static_cast<std::size_t>(i)], layout.lo, layout.hi, opt);
    } catch (...) {
      outcomes[static_cast<std::size_t>(i)] = LmOutcome{};
    }
  }
  int best = -1;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].feasible && (best < 0 || outcomes[i].cost < outcomes[static_cast<std::size_t>(best)].cost)) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw NumericalError("calibration: no start point gives admissible model prices");
  const LmOutcome& o = outcomes[static_cast<std::size_t>(best)];

  CalibrationResult res;
  res.spec = layout.unpack(o.x);
  layout.report(o.x, res.param_names, res.params);
  res.objective = o.cost;
  res.iterations = o.iterations;
  res.converged = o.converged;
  res.best_start = best;
  if (!o.converged) res.warnings.push_back("optimizer hit the iteration limit; best point so far returned");
  for (std::size_t i = 0; i < o.x.size(); ++i) {
    if (o.x[i] <= layout.lo[i] || o.x[i] >= layout.hi[i]) {
      res.warnings.push_back("parameter " + layout.names[i] + " is at its bound");
    }
  }
  return res;
}

CalibrationResult calibrate_dependence(const MarketSnapshot& snapshot, const CalibrationResult& fit) {
  snapshot.validate();
  CalibrationResult res = fit;
  ModelSpec& s = res.spec;
  const std::size_t n = s.dim();
  require_data(snapshot.assets.size() == n, "market and model asset counts differ");
  if (n < 2) throw DomainError("dependence calibration needs at least two assets");
  res.target_correlation = snapshot.empirical_correlation(0, 1);
  const double target = res.target_correlation;
  bool clipped = false;

  switch (s.kind) {
    case Kind::BS:
    case Kind::VG:
    case Kind::VGPP: {
      // Cov = theta_i theta_j Var[G] + rho sigma_i sigma_j E[G], solved pairwise
      Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      double eg = 1.0;
      double vg = 0.0;
      if (s.kind != Kind::BS) {
        const auto mom = gammapp::moments(s.sub);
        eg = mom.mean;
        vg = mom.variance;
      }
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double t = snapshot.empirical_correlation(i, j);
          const auto& ai = s.assets[i];
          const auto& aj = s.assets[j];
          const double vi = ai.theta * ai.theta * vg + ai.sigma * ai.sigma * eg;
          const double vj = aj.theta * aj.theta * vg + aj.sigma * aj.sigma * eg;
          const double denom = ai.sigma * aj.sigma * eg;
          double r = denom > 0.0 ? (t * std::sqrt(vi * vj) - ai.theta * aj.theta * vg) / denom : 0.0;
          if (r > 1.0 || r < -1.0 || denom <= 0.0) clipped = true;
          r = std::clamp(r, -1.0, 1.0);
          rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r;
          rho(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = r;
        }
      }
      try {
        models::check_correlation_matrix(rho);
      } catch (const DomainError& e) {
        throw DataError(std::string("fitted Brownian correlation matrix is not admissible: ") + e.what());
      }
      s.rho = rho;
      break;
    }
    case Kind::Semeraro:
    case Kind::LS: {
      if (n != 2) throw DomainError("dependence calibration for this kind supports two assets");
      // Marginals fix A_j + A and B / alpha_j; the correlation is A (c0 + rho c1).
      std::vector<double> shapes(n);
      for (std::size_t j = 0; j < n; ++j) shapes[j] = s.sem.A_j[j] + s.sem.A;
      const double cap = kShapeCap * std::min(shapes[0], shapes[1]);
      const double rho0 = s.kind == Kind::LS && s.rho.size() != 0 ? s.rho(0, 1) : 0.0;
      auto build = [&](double A, double rho) {
        return make_semeraro_from_marginals(s.kind, s.rate, s.sem.a, s.assets, shapes, A, s.sem.B, rho);
      };
      const double A_ref = 0.5 * cap;
      const double c0 = models::linear_correlation(build(A_ref, 0.0), 1.0, 0, 1) / A_ref;
      const double c1 =
          s.kind == Kind::LS ? models::linear_correlation(build(A_ref, 1.0), 1.0, 0, 1) / A_ref - c0 : 0.0;
      double A = std::min(s.sem.A, cap);
      double rho = rho0;
      if (s.kind == Kind::LS) {
        // rho first at the current A, then A at the clipped rho
        rho = c1 != 0.0 ? (target / A - c0) / c1 : 0.0;
        if (rho > 1.0 || rho < -1.0) {
          rho = std::clamp(rho, -1.0, 1.0);
          const double slope = c0 + rho * c1;
          A = slope != 0.0 ? target / slope : cap;
          if (slope == 0.0) clipped = target != 0.0;
        }
      } else {
        A = c0 != 0.0 ? target / c0 : cap;
        if (c0 == 0.0) clipped = target != 0.0;
      }
      if (!(A > 0.0) || A > cap) {
        clipped = true;
        A = A > cap ? cap : std::min(s.sem.A, cap);
      }
      s = build(A, rho);
      break;
    }
    case Kind::BB: {
      if (n != 2) throw DomainError("dependence calibration for this kind supports two assets");
      std::vector<AssetParams> m(n);
      std::vector<double> A_y(n);
      for (std::size_t j = 0; j < n; ++j) {
        const auto mj = models::marginal(s, j);
        m[j] = {mj.theta, mj.sigma};
        A_y[j] = mj.sub->alpha;
      }
      const double cap = kShapeCap * std::min(A_y[0], A_y[1]);
      auto build = [&](double A_z) {
        return make_bb_from_marginals(s.rate, s.bb.a, m, A_y, A_z, s.bb.B_z, s.bb.gamma_z);
      };
      // the covariance is linear in A_z
      const double A_ref = 0.5 * cap;
      const double slope = models::linear_correlation(build(A_ref), 1.0, 0, 1) / A_ref;
      double A_z = slope != 0.0 ? target / slope : cap;
      if (slope == 0.0) clipped = target != 0.0;
      if (!(A_z > 0.0) || A_z > cap) {
        clipped = true;
        A_z = A_z > cap ? cap : std::min(s.bb.A_z, cap);
      }
      s = build(A_z);
      break;
    }
  }
  s.validate();
  res.model_correlation = models::linear_correlation(s, 1.0, 0, 1);
  res.correlation_residual = std::abs(target - res.model_correlation);
  res.at_boundary = clipped;
  if (clipped) {
    std::ostringstream os;
    os << "target correlation " << target << " is not attainable; closest model correlation "
       << res.model_correlation;
    res.warnings.push_back(os.str());
  }
  return res;
}

CalibrationResult calibrate(const MarketSnapshot& snapshot, const ModelSpec& initial, const Options& opt) {
  return calibrate_dependence(snapshot, calibrate_marginals(snapshot, initial, opt));
}

MarketSnapshot synthetic_snapshot(const ModelSpec& spec, const SyntheticOptions& opt) {
  spec.validate();
  const std::size_t n = spec.dim();
  if (opt.forwards.size() != n) throw DomainError("one forward per asset required");
  if (!(opt.maturity > 0.0) || !(opt.strike_step > 0.0) || opt.n_returns < 3) {
    throw DomainError("synthetic snapshot needs maturity > 0, strike_step > 0 and at least 3 returns");
  }
  MarketSnapshot snap;
  snap.as_of = "2022-05-19";
  snap.rate = spec.rate;
  snap.assets.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto& a = snap.assets[j];
    a.product = "P" + std::to_string(j + 1);
    a.forward = opt.forwards[j];
    const int steps = static_cast<int>(std::floor(opt.band / opt.strike_step + 1e-9));
    for (int k = -steps; k <= steps; ++k) {
      const double K = a.forward + k * opt.strike_step;
      if (K > 0.0) a.quotes.push_back({K, opt.maturity, 0.0});
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const auto p = model_prices(snap, spec, j);
    for (std::size_t k = 0; k < p.size(); ++k) snap.assets[j].quotes[k].mid = p[k];
  }

  // Gaussian returns rotated so that the sample correlation equals the target
  const auto m = static_cast<Eigen::Index>(opt.n_returns);
  const auto nn = static_cast<Eigen::Index>(n);
  RandomStream rng(opt.seed);
  Eigen::MatrixXd z(m, nn);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < nn; ++j) z(i, j) = rng.normal();
  }
  z.rowwise() -= z.colwise().mean();
  const Eigen::MatrixXd cov = z.transpose() * z / static_cast<double>(m - 1);
  const Eigen::MatrixXd white = z * Eigen::MatrixXd(cov.llt().matrixU()).inverse();
  Eigen::MatrixXd target = Eigen::MatrixXd::Constant(nn, nn, opt.target_correlation);
  target.diagonal().setOnes();
  const Eigen::MatrixXd ret = 0.02 * white * Eigen::MatrixXd(target.llt().matrixU());
  for (std::size_t j = 0; j < n; ++j) {
    auto& r = snap.assets[j].log_returns;
    r.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) r[static_cast<std::size_t>(i)] = ret(i, static_cast<Eigen::Index>(j));
  }
  using namespace std::chrono;
  const sys_days start = year_month_day{year{2021}, month{1}, day{4}};
  for (Eigen::Index i = 0; i < m; ++i) {
    const year_month_day d{start + days{i}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    snap.return_dates.emplace_back(buf);
  }
  return snap;
}

}  // namespace exlevy::calibration
