#include "licp_cli/spec_file.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "licp/error.hpp"

namespace licp::cli {
namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  fail(Errc::ParseError, field + ": " + what);
}

// Re-raises a core validation error with the field path prepended.
template <typename F>
auto addressed(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), field + ": " + e.detail());
  }
}

std::vector<double> number_list(const json& node, const std::string& field) {
  if (!node.is_array()) field_error(field, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) {
      field_error(field + "[" + std::to_string(i) + "]", "expected a number");
    }
    out.push_back(node[i].get<double>());
  }
  return out;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view bytes, std::size_t offset) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < offset && i < bytes.size(); ++i) {
    if (bytes[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

ChannelSpec parse_channel(const json& node, std::size_t index, std::size_t nx) {
  const std::string field = "channels[" + std::to_string(index) + "]";
  if (!node.is_object()) field_error(field, "expected an object");
  for (const auto& [key, value] : node.items()) {
    (void)value;
    if (key == "input_dist") {
      field_error(field + ".input_dist",
                  "per-channel input distributions are not supported; use the shared input_dist");
    }
    if (key != "name" && key != "matrix") field_error(field + "." + key, "unknown field");
  }
  if (!node.contains("name") || !node["name"].is_string()) {
    field_error(field + ".name", "expected a string");
  }
  if (!node.contains("matrix") || !node["matrix"].is_array() || node["matrix"].empty()) {
    field_error(field + ".matrix", "expected a nonempty array of rows");
  }
  const json& rows = node["matrix"];
  Matrix w(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(nx));
  for (std::size_t y = 0; y < rows.size(); ++y) {
    const std::string row_field = field + ".matrix[" + std::to_string(y) + "]";
    const std::vector<double> row = number_list(rows[y], row_field);
    if (row.size() != nx) {
      fail(Errc::DimensionMismatch, row_field + ": row has " + std::to_string(row.size()) +
                                        " entries but input_dist has " + std::to_string(nx));
    }
    for (std::size_t x = 0; x < nx; ++x) {
      w(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = row[x];
    }
  }
  ChannelSpec out{node["name"].get<std::string>(),
                  addressed(field + ".matrix", [&] { return Channel::validate(w); })};
  return out;
}

}  // namespace

SpecFile parse_spec(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    const auto [line, column] = line_column(bytes, offset);
    fail(Errc::ParseError, "malformed JSON at byte offset " + std::to_string(offset) + " (line " +
                               std::to_string(line) + ", column " + std::to_string(column) + ")");
  }
  if (!doc.is_object()) field_error("<root>", "expected an object");
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (key != "input_dist" && key != "channels") field_error(key, "unknown field");
  }
  if (!doc.contains("input_dist")) field_error("input_dist", "missing");
  if (!doc.contains("channels")) field_error("channels", "missing");

  const std::vector<double> raw = number_list(doc["input_dist"], "input_dist");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!(raw[i] > 0.0)) {
      fail(Errc::NonPositiveEntry, "input_dist[" + std::to_string(i) + "]: input symbol " +
                                       std::to_string(i) + " has probability " +
                                       std::to_string(raw[i]) + "; entries must be positive");
    }
  }
  ProbDist px = addressed("input_dist", [&] { return ProbDist::validate(raw); });

  const json& channels = doc["channels"];
  if (!channels.is_array() || channels.empty()) {
    field_error("channels", "expected a nonempty array");
  }
  std::vector<ChannelSpec> parsed;
  parsed.reserve(channels.size());
  for (std::size_t i = 0; i < channels.size(); ++i) {
    parsed.push_back(parse_channel(channels[i], i, px.size()));
  }
  return SpecFile{std::move(px), std::move(parsed)};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::ParseError, path + ": cannot open spec file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<Dtm> build_dtms(const SpecFile& spec) {
  std::vector<Dtm> out;
  out.reserve(spec.channels.size());
  for (std::size_t i = 0; i < spec.channels.size(); ++i) {
    const ChannelSpec& c = spec.channels[i];
    out.push_back(addressed("channels[" + std::to_string(i) + "] (" + c.name + ")",
                            [&] { return build_dtm(c.channel, spec.input_dist); }));
  }
  return out;
}

}  // namespace licp::cli
