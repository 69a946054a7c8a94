#include "licp_cli/report.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "licp/error.hpp"

#ifndef LICP_VERSION
#define LICP_VERSION "0.0.0"
#endif

namespace licp::cli {
namespace {

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", kSignificantDigits, x);
  return buf;
}

Json table_json(const Table& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) rows.push_back(num_array(r));
  return Json{{"columns", t.columns}, {"rows", std::move(rows)}};
}

void flatten(const Json& node, const std::string& path, std::ostringstream& out) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) {
      flatten(value, path.empty() ? key : path + "." + key, out);
    }
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      flatten(node[i], path + "[" + std::to_string(i) + "]", out);
    }
  } else if (node.is_string()) {
    out << path << "," << node.get<std::string>() << "\n";
  } else {
    out << path << "," << node.dump() << "\n";
  }
}

}  // namespace

Json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  const double r = std::strtod(format_number(x).c_str(), nullptr);
  return r == 0.0 ? 0.0 : r;
}

Json num_array(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v(i)));
  return out;
}

Json num_array(const std::vector<double>& v) {
  Json out = Json::array();
  for (const double x : v) out.push_back(num(x));
  return out;
}

Json num_matrix(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(num_array(Vector(m.row(r).transpose())));
  return out;
}

Report::Report(std::string command, std::string inputs_digest)
    : command_(std::move(command)), digest_(std::move(inputs_digest)) {}

std::string Report::to_json() const {
  Json doc;
  doc["command"] = command_;
  doc["tool_version"] = tool_version();
  doc["inputs_digest"] = digest_;
  doc["flags"] = flags_;
  doc["warnings"] = warnings_;
  Json results = results_;
  if (!tables_.empty()) {
    Json tables = Json::object();
    for (const Table& t : tables_) tables[t.name] = table_json(t);
    results["tables"] = std::move(tables);
  }
  doc["results"] = std::move(results);
  return doc.dump(2) + "\n";
}

std::string Report::to_csv() const {
  std::ostringstream out;
  out << "# summary\npath,value\n";
  out << "command," << command_ << "\n";
  out << "tool_version," << tool_version() << "\n";
  out << "inputs_digest," << digest_ << "\n";
  flatten(flags_, "flags", out);
  for (std::size_t i = 0; i < warnings_.size(); ++i) {
    out << "warnings[" << i << "],\"" << warnings_[i] << "\"\n";
  }
  flatten(results_, "results", out);
  for (const Table& t : tables_) {
    out << "\n# " << t.name << "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
    out << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << num(row[c]).dump();
      out << "\n";
    }
  }
  return out.str();
}

std::string tool_version() { return std::string("licp ") + LICP_VERSION; }

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(Errc::NumericalFailure, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace licp::cli
