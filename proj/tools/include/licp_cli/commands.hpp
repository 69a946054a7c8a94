#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "licp/error.hpp"
#include "licp_cli/report.hpp"

namespace licp::cli {

struct CommandOptions {
  std::string spec_path;
  double eps = 0.01;
  std::vector<double> eps_list{0.1, 0.05, 0.025, 0.0125};
  std::size_t letters = 0;  // 0: command default (1, or k for windmill)
  std::size_t cardinality = 0;
  std::size_t grid = 100'000;
  std::uint64_t seed = 0;
  double tol = 1e-6;
  bool verify_exact = false;
  bool bits = false;
  std::size_t k = 3;
  double theta = 0.0;
  std::size_t plot_points = 360;
};

Report cmd_dtm(const CommandOptions& o);
Report cmd_p2p(const CommandOptions& o);
Report cmd_broadcast(const CommandOptions& o);
Report cmd_verify(const CommandOptions& o);
Report cmd_windmill(const CommandOptions& o);

/// 0 success, 2 input error, 3 numerical failure.
int exit_code_for(Errc code);

}  // namespace licp::cli
