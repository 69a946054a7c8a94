#pragma once

// Channel specification files:
//   {"input_dist": [...], "channels": [{"name": str, "matrix": [[W(y|x) ...] ...]}]}
// Rows are indexed by output symbol, columns by input symbol.

#include <string>
#include <string_view>
#include <vector>

#include "licp/local_geom.hpp"
#include "licp/prob.hpp"

namespace licp::cli {

struct ChannelSpec {
  std::string name;
  Channel channel;
};

struct SpecFile {
  ProbDist input_dist;
  std::vector<ChannelSpec> channels;
};

/// Parses spec bytes. Every failure is a licp::Error whose message names the
/// offending field (or the byte offset for malformed JSON); validation codes
/// from the core (NonPositiveEntry, NotNormalized, ...) are preserved.
SpecFile parse_spec(std::string_view bytes);

/// Reads the file verbatim; a missing file is a ParseError.
std::string read_file(const std::string& path);

std::vector<Dtm> build_dtms(const SpecFile& spec);

}  // namespace licp::cli
