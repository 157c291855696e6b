#include "exlevy/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "exlevy/errors.hpp"

namespace exlevy::io {

namespace {

using json = nlohmann::json;
using models::Kind;

void need(bool ok, const std::string& msg) {
  if (!ok) throw DataError(msg);
}

double num(const json& j, const char* key) {
  need(j.contains(key), std::string("model: missing field '") + key + "'");
  need(j.at(key).is_number(), std::string("model: field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

std::vector<double> vec(const json& j, const char* key) {
  need(j.contains(key), std::string("model: missing field '") + key + "'");
  const json& v = j.at(key);
  need(v.is_array(), std::string("model: field '") + key + "' must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    need(e.is_number(), std::string("model: field '") + key + "' must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

// rho as a scalar (all off-diagonal entries) or a full matrix
Eigen::MatrixXd rho_from_json(const json& j, std::size_t n) {
  const auto nn = static_cast<Eigen::Index>(n);
  if (!j.contains("rho")) return Eigen::MatrixXd();
  const json& r = j.at("rho");
  if (r.is_number()) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(nn, nn, r.get<double>());
    m.diagonal().setOnes();
    return m;
  }
  need(r.is_array() && r.size() == n, "model: 'rho' must be a number or an n x n array");
  Eigen::MatrixXd m(nn, nn);
  for (std::size_t i = 0; i < n; ++i) {
    need(r[i].is_array() && r[i].size() == n, "model: 'rho' must be a number or an n x n array");
    for (std::size_t k = 0; k < n; ++k) {
      need(r[i][k].is_number(), "model: 'rho' entries must be numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = r[i][k].get<double>();
    }
  }
  return m;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) {
    const auto b = cur.find_first_not_of(" \t\r");
    const auto e = cur.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string where(const std::filesystem::path& p, int line) { return p.string() + ":" + std::to_string(line) + ": "; }

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || s.empty()) {
    throw DataError(what + ": '" + s + "' is not a number");
  }
  return v;
}

json to_json(const models::ModelSpec& s) {
  json j;
  j["kind"] = models::to_string(s.kind);
  j["rate"] = s.rate;
  if (s.kind != Kind::BB) {
    json th = json::array();
    json sg = json::array();
    for (const auto& a : s.assets) {
      th.push_back(a.theta);
      sg.push_back(a.sigma);
    }
    j["theta"] = th;
    j["sigma"] = sg;
  }
  switch (s.kind) {
    case Kind::BS:
      break;
    case Kind::VG:
    case Kind::VGPP:
      j["a"] = s.sub.a;
      j["alpha"] = s.sub.alpha;
      j["beta"] = s.sub.beta;
      break;
    case Kind::Semeraro:
    case Kind::LS:
      j["a"] = s.sem.a;
      j["alpha"] = s.sem.alpha;
      j["A_j"] = s.sem.A_j;
      j["A"] = s.sem.A;
      j["B"] = s.sem.B;
      break;
    case Kind::BB:
      j["a"] = s.bb.a;
      j["A_x"] = s.bb.A_x;
      j["B_x"] = s.bb.B_x;
      j["beta"] = s.bb.beta;
      j["gamma"] = s.bb.gamma;
      j["a_j"] = s.bb.load;
      j["beta_z"] = s.bb.beta_z;
      j["gamma_z"] = s.bb.gamma_z;
      j["A_z"] = s.bb.A_z;
      j["B_z"] = s.bb.B_z;
      break;
  }
  if ((s.kind == Kind::BS || s.kind == Kind::VG || s.kind == Kind::VGPP || s.kind == Kind::LS) && s.rho.size() != 0) {
    j["rho"] = matrix_json(s.rho);
  }
  return j;
}

models::ModelSpec model_from_json(const json& j) {
  need(j.is_object(), "model: top level must be an object");
  need(j.contains("kind") && j.at("kind").is_string(), "model: missing string field 'kind'");
  models::ModelSpec s;
  s.kind = models::kind_from_string(j.at("kind").get<std::string>());
  s.rate = j.contains("rate") ? num(j, "rate") : 0.0;
  if (s.kind != Kind::BB) {
    const auto th = vec(j, "theta");
    const auto sg = vec(j, "sigma");
    need(th.size() == sg.size() && !th.empty(), "model: 'theta' and 'sigma' need the same nonzero length");
    for (std::size_t i = 0; i < th.size(); ++i) s.assets.push_back({th[i], sg[i]});
  }
  switch (s.kind) {
    case Kind::BS:
      break;
    case Kind::VG:
    case Kind::VGPP:
      s.sub.a = j.contains("a") ? num(j, "a") : 0.0;
      s.sub.alpha = num(j, "alpha");
      s.sub.beta = j.contains("beta") ? num(j, "beta") : s.sub.alpha * (1.0 - s.sub.a);
      break;
    case Kind::Semeraro:
    case Kind::LS:
      s.sem.a = num(j, "a");
      s.sem.alpha = vec(j, "alpha");
      s.sem.A_j = vec(j, "A_j");
      s.sem.A = num(j, "A");
      s.sem.B = num(j, "B");
      break;
    case Kind::BB: {
      const double a = num(j, "a");
      const auto A_x = vec(j, "A_x");
      const auto B_x = vec(j, "B_x");
      const auto load = vec(j, "a_j");
      need(A_x.size() == B_x.size() && A_x.size() == load.size() && !A_x.empty(),
           "model: 'A_x', 'B_x' and 'a_j' need the same nonzero length");
      if (j.contains("beta") || j.contains("gamma")) {
        s.bb.a = a;
        s.bb.A_x = A_x;
        s.bb.B_x = B_x;
        s.bb.load = load;
        s.bb.beta = vec(j, "beta");
        s.bb.gamma = vec(j, "gamma");
        s.bb.beta_z = num(j, "beta_z");
        s.bb.gamma_z = num(j, "gamma_z");
        s.bb.A_z = num(j, "A_z");
        s.bb.B_z = num(j, "B_z");
      } else {
        // X legs derived from the convolution conditions
        s = models::make_bb(j.contains("rate") ? num(j, "rate") : 0.0, a, A_x, B_x, load, num(j, "beta_z"),
                            num(j, "gamma_z"), num(j, "A_z"), num(j, "B_z"));
      }
      break;
    }
  }
  if (s.kind == Kind::BS || s.kind == Kind::VG || s.kind == Kind::VGPP || s.kind == Kind::LS) {
    s.rho = rho_from_json(j, s.dim());
  }
  return s;
}

models::ModelSpec load_model(const std::filesystem::path& path) {
  std::ifstream is(path);
  need(static_cast<bool>(is), "cannot open model file " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_model(const std::filesystem::path& path, const models::ModelSpec& spec) {
  std::ofstream os(path);
  need(static_cast<bool>(os), "cannot write " + path.string());
  os << to_json(spec).dump(2) << '\n';
}

json to_json(const calibration::CalibrationResult& r) {
  json j;
  j["model"] = to_json(r.spec);
  json p = json::object();
  for (std::size_t i = 0; i < r.params.size(); ++i) p[r.param_names[i]] = r.params[i];
  j["marginal_params"] = p;
  j["objective_value"] = r.objective;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["best_start"] = r.best_start;
  j["target_correlation"] = r.target_correlation;
  j["model_correlation"] = r.model_correlation;
  j["correlation_residual"] = r.correlation_residual;
  j["at_boundary"] = r.at_boundary;
  j["warnings"] = r.warnings;
  return j;
}

json to_json(const PriceReport& r) {
  json j;
  j["method"] = r.method;
  j["price"] = r.price;
  j["std_error"] = r.std_error ? json(*r.std_error) : json(nullptr);
  j["runtime"] = r.runtime;
  j["diagnostics"] = r.diagnostics;
  j["warnings"] = r.warnings;
  return j;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("missing CSV column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  need(static_cast<bool>(is), "cannot open " + path.string());
  CsvTable t;
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split(line, ',');
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw DataError(where(path, n) + "expected " + std::to_string(t.header.size()) + " fields, found " +
                      std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
    t.lines.push_back(n);
  }
  need(!t.header.empty(), path.string() + ": empty file");
  return t;
}

void write_csv(std::ostream& os, const CsvTable& t) {
  auto row = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  };
  row(t.header);
  for (const auto& r : t.rows) row(r);
}

calibration::MarketSnapshot load_market(const std::filesystem::path& dir, double rate) {
  need(std::filesystem::is_directory(dir), "market path " + dir.string() + " is not a directory");
  calibration::MarketSnapshot snap;
  snap.rate = rate;
  std::map<std::string, std::size_t> index;

  const auto fpath = dir / "forwards.csv";
  const CsvTable fw = read_csv(fpath);
  {
    const auto cd = fw.column("date");
    const auto cp = fw.column("product");
    const auto cv = fw.column("price");
    std::map<std::string, std::string> latest;
    for (std::size_t r = 0; r < fw.rows.size(); ++r) {
      const auto& row = fw.rows[r];
      const double price = parse_double(row[cv], where(fpath, fw.lines[r]) + "price");
      auto [it, fresh] = index.try_emplace(row[cp], snap.assets.size());
      if (fresh) {
        snap.assets.push_back({row[cp], price, {}, {}});
        latest[row[cp]] = row[cd];
      } else if (row[cd] >= latest[row[cp]]) {
        snap.assets[it->second].forward = price;
        latest[row[cp]] = row[cd];
      }
      snap.as_of = std::max(snap.as_of, row[cd]);
    }
  }
  need(!snap.assets.empty(), fpath.string() + ": no forwards");

  const auto qpath = dir / "quotes.csv";
  const CsvTable qt = read_csv(qpath);
  {
    const auto cp = qt.column("product");
    const auto cm = qt.column("maturity");
    const auto ck = qt.column("strike");
    const auto cv = qt.column("mid");
    for (std::size_t r = 0; r < qt.rows.size(); ++r) {
      const auto& row = qt.rows[r];
      const auto it = index.find(row[cp]);
      need(it != index.end(), where(qpath, qt.lines[r]) + "product '" + row[cp] + "' has no forward");
      const std::string at = where(qpath, qt.lines[r]);
      snap.assets[it->second].quotes.push_back(
          {parse_double(row[ck], at + "strike"), parse_double(row[cm], at + "maturity"), parse_double(row[cv], at + "mid")});
    }
  }

  const auto rpath = dir / "returns.csv";
  if (std::filesystem::exists(rpath)) {
    const CsvTable rt = read_csv(rpath);
    const auto cd = rt.column("date");
    const auto cp = rt.column("product");
    const auto cv = rt.column("log_return");
    // aligned on dates present for every product
    std::map<std::string, std::vector<std::pair<std::string, double>>> series;
    for (std::size_t r = 0; r < rt.rows.size(); ++r) {
      const auto& row = rt.rows[r];
      need(index.count(row[cp]) == 1, where(rpath, rt.lines[r]) + "product '" + row[cp] + "' has no forward");
      series[row[cp]].emplace_back(row[cd], parse_double(row[cv], where(rpath, rt.lines[r]) + "log_return"));
    }
    std::map<std::string, std::size_t> count;
    for (auto& [p, s] : series) {
      std::map<std::string, double> seen;
      for (const auto& [d, v] : s) {
        need(seen.emplace(d, v).second, rpath.string() + ": duplicate date " + d + " for " + p);
      }
      for (const auto& [d, v] : seen) ++count[d];
    }
    for (const auto& [d, c] : count) {
      if (c == snap.assets.size()) snap.return_dates.push_back(d);
    }
    for (auto& a : snap.assets) {
      std::map<std::string, double> m(series[a.product].begin(), series[a.product].end());
      for (const auto& d : snap.return_dates) a.log_returns.push_back(m.at(d));
    }
  }
  snap.validate();
  return snap;
}

void save_market(const std::filesystem::path& dir, const calibration::MarketSnapshot& snap) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream os(dir / name);
    need(static_cast<bool>(os), "cannot write " + (dir / name).string());
    return os;
  };
  {
    auto os = open("forwards.csv");
    os << "date,product,price\n";
    for (const auto& a : snap.assets) os << snap.as_of << ',' << a.product << ',' << format_double(a.forward) << '\n';
  }
  {
    auto os = open("quotes.csv");
    os << "product,maturity,strike,mid\n";
    for (const auto& a : snap.assets) {
      for (const auto& q : a.quotes) {
        os << a.product << ',' << format_double(q.maturity) << ',' << format_double(q.strike) << ','
           << format_double(q.mid) << '\n';
      }
    }
  }
  {
    auto os = open("returns.csv");
    os << "date,product,log_return\n";
    for (const auto& a : snap.assets) {
      for (std::size_t i = 0; i < a.log_returns.size(); ++i) {
        char fallback[16];
        std::snprintf(fallback, sizeof fallback, "t%08zu", i);
        const std::string d = i < snap.return_dates.size() ? snap.return_dates[i] : std::string(fallback);
        os << d << ',' << a.product << ',' << format_double(a.log_returns[i]) << '\n';
      }
    }
  }
}

}  // namespace exlevy::io
