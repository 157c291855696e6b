#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "exlevy/calibration.hpp"
#include "exlevy/models.hpp"
#include "exlevy/pricing_closed.hpp"

namespace exlevy::io {

/// Shortest decimal that parses back to the same double.
std::string format_double(double x);
/// Strict full-string parse; throws DataError naming `what`.
double parse_double(const std::string& s, const std::string& what);

/// Flat parameter map keyed by kind. Field names: theta, sigma, a, alpha, beta, rho, A_j, A, B,
/// a_j, beta_z, gamma_z, A_z, B_z, A_x, B_x (BB may also give the X-leg beta and gamma).
nlohmann::json to_json(const models::ModelSpec& spec);
/// Throws DataError on missing or malformed fields; does not check admissibility.
models::ModelSpec model_from_json(const nlohmann::json& j);
models::ModelSpec load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const models::ModelSpec& spec);

nlohmann::json to_json(const calibration::CalibrationResult& r);
nlohmann::json to_json(const PriceReport& r);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row
  std::vector<int> lines;

  std::size_t column(const std::string& name) const;
};

/// Comma-separated, no quoting; blank lines skipped. Throws DataError with file and line.
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(std::ostream& os, const CsvTable& table);

/// Directory with forwards.csv (date,product,price), quotes.csv (product,maturity,strike,mid) and
/// returns.csv (date,product,log_return). The latest forward per product is used; product order
/// follows first appearance in forwards.csv.
calibration::MarketSnapshot load_market(const std::filesystem::path& dir, double rate);
void save_market(const std::filesystem::path& dir, const calibration::MarketSnapshot& snap);

}  // namespace exlevy::io
