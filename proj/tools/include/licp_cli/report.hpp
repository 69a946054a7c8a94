#pragma once

// Deterministic report assembly. Numbers are rounded to 12 significant digits
// before serialization so repeated runs are byte-identical.

#include <string>
#include <vector>

#include "json.hpp"
#include "licp/linalg.hpp"

namespace licp::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSignificantDigits = 12;

/// x rounded to 12 significant digits; -0 becomes 0 and non-finite values
/// become null.
Json num(double x);
Json num_array(const Vector& v);
Json num_array(const std::vector<double>& v);
/// Array of rows.
Json num_matrix(const Matrix& m);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

class Report {
 public:
  Report(std::string command, std::string inputs_digest);

  Json& flags() { return flags_; }
  Json& results() { return results_; }
  void warn(const std::string& message) { warnings_.push_back(message); }
  void add_table(Table table) { tables_.push_back(std::move(table)); }

  const std::vector<std::string>& warnings() const { return warnings_; }

  std::string to_json() const;
  /// Scalars as a path,value table followed by every plot table.
  std::string to_csv() const;

 private:
  std::string command_;
  std::string digest_;
  Json flags_ = Json::object();
  Json results_ = Json::object();
  std::vector<std::string> warnings_;
  std::vector<Table> tables_;
};

std::string tool_version();

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(const std::string& bytes);

}  // namespace licp::cli
