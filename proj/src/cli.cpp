#include "exlevy/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "exlevy/calibration.hpp"
#include "exlevy/errors.hpp"
#include "exlevy/io.hpp"
#include "exlevy/mc_engine.hpp"
#include "exlevy/pricing_closed.hpp"
#include "exlevy/pricing_fourier.hpp"

namespace exlevy::cli {

namespace {

using models::Kind;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string model;
  std::string contract = "s1=100,s2=100,T=1,K=0";
  std::string methods = "default";
  std::string out;
  std::uint64_t paths = 1'000'000;
  std::uint64_t seed = 42;
  bool antithetic = false;
  bool no_runtime = false;
};

ExchangeContract parse_contract(const std::string& text) {
  ExchangeContract c;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("contract field '" + item + "' is not key=value");
    const std::string key = item.substr(0, eq);
    double v = 0.0;
    try {
      v = io::parse_double(item.substr(eq + 1), "contract " + key);
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
    if (key == "s1") c.s1_0 = v;
    else if (key == "s2") c.s2_0 = v;
    else if (key == "T") c.maturity_T = v;
    else if (key == "K") c.strike_K = v;
    else throw UsageError("unknown contract field '" + key + "' (expected s1, s2, T, K)");
  }
  return c;
}

bool closed_available(Kind k) { return k == Kind::BS || k == Kind::VG || k == Kind::VGPP; }

std::vector<std::string> parse_methods(const std::string& text, const models::ModelSpec& spec,
                                       const ExchangeContract& c) {
  std::vector<std::string> out;
  if (text == "default") {
    if (closed_available(spec.kind) && c.strike_K == 0.0) out.emplace_back("closed");
    out.emplace_back("fourier");
    out.emplace_back("mc");
    return out;
  }
  std::istringstream is(text);
  std::string m;
  while (std::getline(is, m, ',')) {
    if (m.empty()) continue;
    if (m != "closed" && m != "quadrature" && m != "fourier" && m != "mc") {
      throw UsageError("unknown method '" + m + "' (expected closed, quadrature, fourier, mc)");
    }
    if (m == "closed" && !closed_available(spec.kind)) {
      throw UsageError("method closed is not available for model kind " + models::to_string(spec.kind));
    }
    if (m == "quadrature" && spec.kind != Kind::VG && spec.kind != Kind::VGPP) {
      throw UsageError("method quadrature is only available for VG and VGPP");
    }
    if ((m == "closed" || m == "quadrature") && c.strike_K != 0.0) {
      throw UsageError("method " + m + " needs K = 0");
    }
    out.push_back(m);
  }
  if (out.empty()) throw UsageError("method set is empty");
  return out;
}

PriceReport price_with(const std::string& method, const ExchangeContract& c, const models::ModelSpec& spec,
                       const mc::SimPlan& plan) {
  if (method == "closed") return pricing::price_exchange_closed(c, spec);
  if (method == "quadrature") {
    return spec.kind == Kind::VG ? pricing::price_vg_exchange_quadrature(c, spec)
                                 : pricing::price_vgpp_exchange_quadrature(c, spec);
  }
  if (method == "fourier") return pricing::price_exchange_fourier(c, spec);
  return mc::price_exchange_mc(c, spec, plan);
}

std::string clean(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n') ch = ';';
  }
  return s;
}

mc::SimPlan make_plan(const Common& o) {
  mc::SimPlan p;
  p.n_paths = o.paths;
  p.seed = o.seed;
  p.antithetic = o.antithetic;
  return p;
}

// Writes to --out when given, else to the command's stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw DataError("cannot write " + path);
      os_ = &file_;
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

void add_common(CLI::App* sub, Common& o, bool pricing) {
  sub->add_option("--model", o.model, "model JSON file")->required();
  if (pricing) {
    sub->add_option("--contract", o.contract, "s1=..,s2=..,T=..,K=..");
    sub->add_option("--methods", o.methods, "comma list of closed, quadrature, fourier, mc");
  }
  sub->add_option("--paths", o.paths, "Monte Carlo paths");
  sub->add_option("--seed", o.seed, "random seed");
  sub->add_flag("--antithetic", o.antithetic, "antithetic Gaussian draws");
  sub->add_option("--out", o.out, "output file (default stdout)");
}

int cmd_price(const Common& o, std::ostream& out, std::ostream& err) {
  const auto spec = io::load_model(o.model);
  spec.validate();
  const auto c = parse_contract(o.contract);
  c.validate();
  const auto methods = parse_methods(o.methods, spec, c);
  const auto plan = make_plan(o);
  Sink sink(o.out, out);
  *sink << "method,price,std_error" << (o.no_runtime ? "" : ",runtime") << ",diagnostics,warnings\n";
  for (const auto& m : methods) {
    const auto r = price_with(m, c, spec, plan);
    std::string diag;
    for (const auto& [k, v] : r.diagnostics) diag += (diag.empty() ? "" : ";") + k + "=" + io::format_double(v);
    std::string warn;
    for (const auto& w : r.warnings) {
      warn += (warn.empty() ? "" : "|") + clean(w);
      err << "warning: " << m << ": " << w << '\n';
    }
    *sink << r.method << ',' << io::format_double(r.price) << ','
          << (r.std_error ? io::format_double(*r.std_error) : std::string());
    if (!o.no_runtime) *sink << ',' << io::format_double(r.runtime);
    *sink << ',' << diag << ',' << warn << '\n';
  }
  return kOk;
}

struct Sweep {
  std::string param;
  std::vector<double> values;
};

Sweep parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw UsageError("sweep must look like param=start:end:count");
  Sweep s;
  s.param = text.substr(0, eq);
  std::vector<std::string> parts;
  std::istringstream is(text.substr(eq + 1));
  std::string p;
  while (std::getline(is, p, ':')) parts.push_back(p);
  if (parts.size() != 3) throw UsageError("sweep must look like param=start:end:count");
  double lo = 0.0;
  double hi = 0.0;
  double cnt = 0.0;
  try {
    lo = io::parse_double(parts[0], "sweep start");
    hi = io::parse_double(parts[1], "sweep end");
    cnt = io::parse_double(parts[2], "sweep count");
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  if (cnt < 1 || cnt != std::floor(cnt)) throw UsageError("sweep count must be a positive integer");
  const int n = static_cast<int>(cnt);
  for (int i = 0; i < n; ++i) s.values.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return s;
}

void apply(const std::string& param, double v, models::ModelSpec& spec, ExchangeContract& c) {
  auto unit_mean = [](const models::GammaPPParams& p) {
    return std::abs(p.beta - p.alpha * (1.0 - p.a)) <= 1e-12 * p.beta;
  };
  if (param == "s1") c.s1_0 = v;
  else if (param == "s2") c.s2_0 = v;
  else if (param == "T") c.maturity_T = v;
  else if (param == "K") c.strike_K = v;
  else if (param == "a" || param == "alpha") {
    if (spec.kind == Kind::VG || spec.kind == Kind::VGPP) {
      if (param == "a" && spec.kind == Kind::VG) throw UsageError("sweeping a needs a VGPP model");
      const bool um = unit_mean(spec.sub);
      (param == "a" ? spec.sub.a : spec.sub.alpha) = v;
      // keep the unit-mean convention when the model uses it
      if (um) spec.sub.beta = gammapp::unit_mean_beta(spec.sub.a, spec.sub.alpha);
    } else if (param == "a" && (spec.kind == Kind::Semeraro || spec.kind == Kind::LS)) {
      spec.sem.a = v;
    } else if (param == "a" && spec.kind == Kind::BB) {
      spec.bb.a = v;
    } else {
      throw UsageError("parameter " + param + " cannot be swept for model kind " + models::to_string(spec.kind));
    }
  } else if (param == "rho") {
    if (spec.dim() < 2 || spec.kind == Kind::Semeraro || spec.kind == Kind::BB) {
      throw UsageError("rho cannot be swept for model kind " + models::to_string(spec.kind));
    }
    spec.rho = spec.correlation();
    spec.rho(0, 1) = spec.rho(1, 0) = v;
  } else if ((param == "theta1" || param == "theta2" || param == "sigma1" || param == "sigma2") &&
             spec.kind != Kind::BB) {
    const std::size_t j = param.back() == '1' ? 0 : 1;
    if (j >= spec.assets.size()) throw UsageError("model has too few assets for " + param);
    (param[0] == 't' ? spec.assets[j].theta : spec.assets[j].sigma) = v;
  } else {
    throw UsageError("unknown sweep parameter '" + param + "'");
  }
}

int cmd_compare(const Common& o, const std::string& sweep_text, std::ostream& out, std::ostream& err) {
  const auto base = io::load_model(o.model);
  const auto c0 = parse_contract(o.contract);
  const auto methods = parse_methods(o.methods, base, c0);
  const auto sw = parse_sweep(sweep_text);
  const auto plan = make_plan(o);
  // validate the sweep parameter before any pricing
  {
    auto s = base;
    auto c = c0;
    apply(sw.param, sw.values.front(), s, c);
  }
  Sink sink(o.out, out);
  *sink << sw.param;
  for (const auto& m : methods) *sink << ',' << m << (m == "mc" ? ",mc_se" : "");
  *sink << '\n';
  for (double v : sw.values) {
    auto spec = base;
    auto c = c0;
    apply(sw.param, v, spec, c);
    *sink << io::format_double(v);
    for (const auto& m : methods) {
      std::string cell;
      std::string se;
      try {
        spec.validate();
        c.validate();
        const auto r = price_with(m, c, spec, plan);
        cell = io::format_double(r.price);
        if (r.std_error) se = io::format_double(*r.std_error);
        for (const auto& w : r.warnings) err << "warning: " << sw.param << "=" << v << ": " << m << ": " << w << '\n';
      } catch (const DomainError& e) {
        err << "warning: " << sw.param << "=" << v << ": " << m << " failed: " << e.what() << '\n';
      } catch (const NumericalError& e) {
        err << "warning: " << sw.param << "=" << v << ": " << m << " failed: " << e.what() << '\n';
      }
      *sink << ',' << cell;
      if (m == "mc") *sink << ',' << se;
    }
    *sink << '\n';
  }
  return kOk;
}

int cmd_calibrate(const std::string& model, const std::string& market, const std::string& out_path, int starts,
                  std::uint64_t seed, std::ostream& out, std::ostream& err) {
  const auto initial = io::load_model(model);
  initial.validate();
  const auto snap = io::load_market(market, initial.rate);
  calibration::Options opt;
  opt.lhs_starts = starts;
  opt.seed = seed;
  const auto r = calibration::calibrate(snap, initial, opt);
  for (const auto& w : r.warnings) err << "warning: " << w << '\n';
  Sink sink(out_path, out);
  *sink << io::to_json(r).dump(2) << '\n';
  return r.converged ? kOk : kNumerical;
}

int cmd_simulate(const Common& o, const std::string& times, std::ostream& out) {
  const auto spec = io::load_model(o.model);
  spec.validate();
  std::vector<double> grid;
  {
    std::istringstream is(times);
    std::string t;
    while (std::getline(is, t, ',')) {
      try {
        grid.push_back(io::parse_double(t, "time grid"));
      } catch (const DataError& e) {
        throw UsageError(e.what());
      }
    }
  }
  auto plan = make_plan(o);
  plan.n_steps = static_cast<int>(grid.size());
  const auto inc = mc::simulate_increments(spec, grid, plan);
  Sink sink(o.out, out);
  *sink << "path,step,t";
  for (std::size_t j = 0; j < inc.n_assets; ++j) *sink << ",y" << j + 1;
  *sink << '\n';
  for (std::uint64_t p = 0; p < inc.n_paths; ++p) {
    for (int s = 0; s < inc.n_steps; ++s) {
      *sink << p << ',' << s << ',' << io::format_double(grid[static_cast<std::size_t>(s)]);
      for (std::size_t j = 0; j < inc.n_assets; ++j) *sink << ',' << io::format_double(inc.at(p, s, j));
      *sink << '\n';
    }
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exchange option pricing under VG and VG++ models"};
  app.require_subcommand(1);

  Common price_o;
  auto* price = app.add_subcommand("price", "price an exchange option with one or more methods");
  add_common(price, price_o, true);
  price->add_flag("--no-runtime", price_o.no_runtime, "omit the runtime column");

  Common cmp_o;
  std::string sweep;
  auto* compare = app.add_subcommand("compare", "sweep a parameter and tabulate prices per method");
  add_common(compare, cmp_o, true);
  compare->add_option("--sweep", sweep, "param=start:end:count")->required();

  std::string cal_model;
  std::string cal_market;
  std::string cal_out;
  int cal_starts = 8;
  std::uint64_t cal_seed = 7;
  auto* calibrate = app.add_subcommand("calibrate", "two-step calibration to vanillas and return correlation");
  calibrate->add_option("--model", cal_model, "initial model JSON")->required();
  calibrate->add_option("--market", cal_market, "directory with forwards.csv, quotes.csv, returns.csv")->required();
  calibrate->add_option("--out", cal_out, "output JSON (default stdout)");
  calibrate->add_option("--starts", cal_starts, "Latin-hypercube starts")->check(CLI::NonNegativeNumber);
  calibrate->add_option("--seed", cal_seed, "seed for the start points");

  Common sim_o;
  sim_o.paths = 10'000;
  std::string times = "1";
  auto* simulate = app.add_subcommand("simulate", "sample log-price increments on a time grid");
  add_common(simulate, sim_o, false);
  simulate->add_option("--times", times, "comma list of increasing times");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*price) return cmd_price(price_o, out, err);
    if (*compare) return cmd_compare(cmp_o, sweep, out, err);
    if (*calibrate) return cmd_calibrate(cal_model, cal_market, cal_out, cal_starts, cal_seed, out, err);
    if (*simulate) return cmd_simulate(sim_o, times, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kData;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}

}  // namespace exlevy::cli
