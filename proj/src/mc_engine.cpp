#include "exlevy/mc_engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <string>

#include <omp.h>

#include "exlevy/errors.hpp"

namespace exlevy::mc {

namespace {

using models::Kind;

// Running mean and sum of squared deviations for one block.
struct Welford {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
};

// Chan et al. pairwise merge.
Welford merge(const Welford& a, const Welford& b) {
  if (a.n == 0) return b;
  if (b.n == 0) return a;
  Welford out;
  out.n = a.n + b.n;
  const double na = static_cast<double>(a.n);
  const double nb = static_cast<double>(b.n);
  const double d = b.mean - a.mean;
  out.mean = a.mean + d * nb / static_cast<double>(out.n);
  out.m2 = a.m2 + b.m2 + d * d * na * nb / static_cast<double>(out.n);
  return out;
}

std::uint64_t block_count(const SimPlan& plan) { return (plan.n_paths + plan.block_size - 1) / plan.block_size; }

std::uint64_t block_paths(const SimPlan& plan, std::uint64_t b) {
  return std::min(plan.block_size, plan.n_paths - b * plan.block_size);
}

Welford run_block(const models::ModelSpec& spec, double T, const SimPlan& plan, const TerminalFunctional& f,
                  std::uint64_t b) {
  IncrementSampler sampler(spec);
  RandomStream rng(plan.seed, b);
  const std::size_t n = sampler.dim();
  std::vector<double> y(n);
  std::vector<double> ya(n);
  Welford w;
  const std::uint64_t count = block_paths(plan, b);
  if (plan.antithetic) {
    for (std::uint64_t p = 0; p < count; p += 2) {
      sampler.draw_pair(rng, T, y.data(), ya.data());
      w.push(0.5 * (f(y.data()) + f(ya.data())));
    }
  } else {
    for (std::uint64_t p = 0; p < count; ++p) {
      sampler.draw(rng, T, y.data());
      w.push(f(y.data()));
    }
  }
  return w;
}

Estimate finish(const std::vector<Welford>& blocks) {
  Welford total;
  for (const auto& b : blocks) total = merge(total, b);
  Estimate e;
  e.mean = total.mean;
  e.samples = total.n;
  if (total.n > 1) {
    const double var = total.m2 / static_cast<double>(total.n - 1);
    e.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(total.n));
  }
  return e;
}

void simulate_block(const models::ModelSpec& spec, const std::vector<double>& t_grid, const SimPlan& plan,
                    std::uint64_t b, IncrementMatrix& out) {
  IncrementSampler sampler(spec);
  RandomStream rng(plan.seed, b);
  const std::size_t n = sampler.dim();
  const auto steps = static_cast<std::uint64_t>(t_grid.size());
  const std::uint64_t first = b * plan.block_size;
  const std::uint64_t count = block_paths(plan, b);
  auto slot = [&](std::uint64_t path, std::uint64_t step) { return out.data.data() + (path * steps + step) * n; };
  if (plan.antithetic) {
    for (std::uint64_t p = 0; p < count; p += 2) {
      double prev = 0.0;
      for (std::uint64_t s = 0; s < steps; ++s) {
        sampler.draw_pair(rng, t_grid[s] - prev, slot(first + p, s), slot(first + p + 1, s));
        prev = t_grid[s];
      }
    }
  } else {
    for (std::uint64_t p = 0; p < count; ++p) {
      double prev = 0.0;
      for (std::uint64_t s = 0; s < steps; ++s) {
        sampler.draw(rng, t_grid[s] - prev, slot(first + p, s));
        prev = t_grid[s];
      }
    }
  }
}

IncrementMatrix allocate(const models::ModelSpec& spec, const std::vector<double>& t_grid, const SimPlan& plan) {
  plan.validate();
  spec.validate();
  if (t_grid.empty()) throw DomainError("time grid must not be empty");
  double prev = 0.0;
  for (double t : t_grid) {
    if (!(t > prev)) throw DomainError("time grid must be strictly increasing and start after 0");
    prev = t;
  }
  IncrementMatrix m;
  m.n_paths = plan.n_paths;
  m.n_steps = static_cast<int>(t_grid.size());
  m.n_assets = spec.dim();
  m.data.assign(plan.n_paths * t_grid.size() * spec.dim(), 0.0);
  return m;
}

TerminalFunctional exchange_payoff(const ExchangeContract& c, const models::ModelSpec& spec) {
  const auto omega = models::drift_correctors(spec);
  const double T = c.maturity_T;
  const double l1 = std::log(c.s1_0) + (spec.rate + omega[0]) * T;
  const double l2 = std::log(c.s2_0) + (spec.rate + omega[1]) * T;
  const double K = c.strike_K;
  return [l1, l2, K](const double* y) { return std::max(0.0, std::exp(l2 + y[1]) - std::exp(l1 + y[0]) - K); };
}

PriceReport report(const ExchangeContract& c, const models::ModelSpec& spec, const SimPlan& plan, const Estimate& e,
                   std::chrono::steady_clock::time_point t0, int threads) {
  const double disc = std::exp(-spec.rate * c.maturity_T);
  PriceReport r;
  r.method = "mc";
  r.price = disc * e.mean;
  r.std_error = disc * e.std_error;
  r.diagnostics["paths"] = static_cast<double>(plan.n_paths);
  r.diagnostics["blocks"] = static_cast<double>(block_count(plan));
  r.diagnostics["threads"] = threads;
  r.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void check_exchange(const ExchangeContract& c, const models::ModelSpec& spec) {
  c.validate();
  if (spec.dim() != 2) throw DomainError("exchange pricing needs a two-asset model");
}

}  // namespace

void SimPlan::validate() const {
  if (n_paths < 2) throw DomainError("simulation needs at least 2 paths");
  if (n_steps < 1) throw DomainError("simulation needs at least one step");
  if (block_size < 2) throw DomainError("block size must be >= 2");
  if (antithetic && (n_paths % 2 != 0 || block_size % 2 != 0)) {
    throw DomainError("antithetic sampling needs an even path count and block size");
  }
}

Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = m(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d < -1e-10) throw DomainError("matrix is not positive semidefinite");
    const double ljj = d > 1e-14 ? std::sqrt(d) : 0.0;
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = ljj > 0.0 ? s / ljj : 0.0;
    }
  }
  return l;
}

int worker_threads() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("LEVY_EXCHANGE_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, n);
}

IncrementSampler::IncrementSampler(const models::ModelSpec& spec) : spec_(spec), n_(spec.dim()) {
  chol_ = psd_cholesky(spec_.correlation());
  sub_.assign(n_, 0.0);
  z_.assign(n_, 0.0);
  w_.assign(n_, 0.0);
  lz_.assign(n_, 0.0);
}

void IncrementSampler::draw_shocks(RandomStream& rng, double dt) {
  switch (spec_.kind) {
    case Kind::BS:
      break;
    case Kind::VG:
    case Kind::VGPP:
      common_ = gammapp::sample(spec_.sub, dt, rng).value;
      break;
    case Kind::Semeraro:
    case Kind::LS:
      for (std::size_t j = 0; j < n_; ++j) {
        sub_[j] = gammapp::sample({spec_.sem.a, spec_.sem.A_j[j], spec_.sem.B / spec_.sem.alpha[j]}, dt, rng).value;
      }
      common_ = gammapp::sample({spec_.sem.a, spec_.sem.A, spec_.sem.B}, dt, rng).value;
      break;
    case Kind::BB:
      for (std::size_t j = 0; j < n_; ++j) {
        sub_[j] = gammapp::sample({spec_.bb.a, spec_.bb.A_x[j], spec_.bb.B_x[j]}, dt, rng).value;
      }
      common_ = gammapp::sample({spec_.bb.a, spec_.bb.A_z, spec_.bb.B_z}, dt, rng).value;
      break;
  }
  for (std::size_t j = 0; j < n_; ++j) z_[j] = rng.normal();
  if (spec_.kind == Kind::LS) {
    for (std::size_t j = 0; j < n_; ++j) w_[j] = rng.normal();
  } else if (spec_.kind == Kind::BB) {
    w_[0] = rng.normal();
  }
}

void IncrementSampler::assemble(double sign, double dt, double* out) const {
  const auto& a = spec_.assets;
  auto correlate = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k <= i; ++k) s += chol_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * x[k];
      y[i] = s;
    }
  };
  std::vector<double>& lz = lz_;
  switch (spec_.kind) {
    case Kind::BS: {
      correlate(z_, lz);
      const double sd = std::sqrt(dt);
      for (std::size_t j = 0; j < n_; ++j) out[j] = a[j].theta * dt + sign * a[j].sigma * sd * lz[j];
      break;
    }
    case Kind::VG:
    case Kind::VGPP: {
      correlate(z_, lz);
      const double sg = std::sqrt(common_);
      for (std::size_t j = 0; j < n_; ++j) out[j] = a[j].theta * common_ + sign * a[j].sigma * sg * lz[j];
      break;
    }
    case Kind::Semeraro:
      for (std::size_t j = 0; j < n_; ++j) {
        const double g = sub_[j] + spec_.sem.alpha[j] * common_;
        out[j] = a[j].theta * g + sign * a[j].sigma * std::sqrt(g) * z_[j];
      }
      break;
    case Kind::LS: {
      correlate(w_, lz);
      const double sz = std::sqrt(common_);
      for (std::size_t j = 0; j < n_; ++j) {
        const double al = spec_.sem.alpha[j];
        out[j] = a[j].theta * sub_[j] + sign * a[j].sigma * std::sqrt(sub_[j]) * z_[j] + al * a[j].theta * common_ +
                 sign * std::sqrt(al) * a[j].sigma * sz * lz[j];
      }
      break;
    }
    case Kind::BB: {
      const auto& b = spec_.bb;
      const double zp = b.beta_z * common_ + sign * b.gamma_z * std::sqrt(common_) * w_[0];
      for (std::size_t j = 0; j < n_; ++j) {
        out[j] = b.beta[j] * sub_[j] + sign * b.gamma[j] * std::sqrt(sub_[j]) * z_[j] + b.load[j] * zp;
      }
      break;
    }
  }
}

void IncrementSampler::draw(RandomStream& rng, double dt, double* out) {
  draw_shocks(rng, dt);
  assemble(1.0, dt, out);
}

void IncrementSampler::draw_pair(RandomStream& rng, double dt, double* out, double* out_anti) {
  draw_shocks(rng, dt);
  assemble(1.0, dt, out);
  assemble(-1.0, dt, out_anti);
}

IncrementMatrix simulate_increments(const models::ModelSpec& spec, const std::vector<double>& t_grid,
                                    const SimPlan& plan) {
  IncrementMatrix m = allocate(spec, t_grid, plan);
  const auto nb = static_cast<std::int64_t>(block_count(plan));
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads())
  for (std::int64_t b = 0; b < nb; ++b) simulate_block(spec, t_grid, plan, static_cast<std::uint64_t>(b), m);
  return m;
}

IncrementMatrix simulate_increments_serial(const models::ModelSpec& spec, const std::vector<double>& t_grid,
                                           const SimPlan& plan) {
  IncrementMatrix m = allocate(spec, t_grid, plan);
  for (std::uint64_t b = 0; b < block_count(plan); ++b) simulate_block(spec, t_grid, plan, b, m);
  return m;
}

Estimate expectation(const models::ModelSpec& spec, double T, const SimPlan& plan, const TerminalFunctional& f) {
  plan.validate();
  spec.validate();
  if (!(T > 0.0)) throw DomainError("horizon must be > 0");
  const auto nb = static_cast<std::int64_t>(block_count(plan));
  std::vector<Welford> blocks(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads())
  for (std::int64_t b = 0; b < nb; ++b) {
    blocks[static_cast<std::size_t>(b)] = run_block(spec, T, plan, f, static_cast<std::uint64_t>(b));
  }
  return finish(blocks);
}

Estimate expectation_serial(const models::ModelSpec& spec, double T, const SimPlan& plan,
                            const TerminalFunctional& f) {
  plan.validate();
  spec.validate();
  if (!(T > 0.0)) throw DomainError("horizon must be > 0");
  std::vector<Welford> blocks(block_count(plan));
  for (std::uint64_t b = 0; b < blocks.size(); ++b) blocks[b] = run_block(spec, T, plan, f, b);
  return finish(blocks);
}

PriceReport price_exchange_mc(const ExchangeContract& c, const models::ModelSpec& spec, const SimPlan& plan) {
  const auto t0 = std::chrono::steady_clock::now();
  check_exchange(c, spec);
  const Estimate e = expectation(spec, c.maturity_T, plan, exchange_payoff(c, spec));
  return report(c, spec, plan, e, t0, worker_threads());
}

PriceReport price_exchange_mc_serial(const ExchangeContract& c, const models::ModelSpec& spec,
                                     const SimPlan& plan) {
  const auto t0 = std::chrono::steady_clock::now();
  check_exchange(c, spec);
  const Estimate e = expectation_serial(spec, c.maturity_T, plan, exchange_payoff(c, spec));
  return report(c, spec, plan, e, t0, 1);
}

}  // namespace exlevy::mc
