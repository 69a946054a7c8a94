#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "licp/error.hpp"
#include "licp_cli/commands.hpp"

namespace {

using licp::cli::CommandOptions;
using licp::cli::Report;

int emit(const Report& report, const std::string& format, const std::string& output) {
  for (const std::string& w : report.warnings()) std::cerr << "WARNING: " << w << "\n";
  const std::string text = format == "csv" ? report.to_csv() : report.to_json();
  if (output.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << output << "\n";
    return 2;
  }
  out << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear information coupling analyses for discrete channels"};
  app.require_subcommand(1);
  app.fallthrough();

  CommandOptions o;
  std::string format = "json";
  std::string output;
  app.add_option("--eps", o.eps, "Perturbation scale epsilon")->capture_default_str();
  app.add_option("--eps-list", o.eps_list, "Epsilon sweep for verify")->delimiter(',');
  app.add_option("--letters", o.letters, "Letters of the multi-letter construction");
  app.add_option("--cardinality", o.cardinality, "Upper bound on ensemble atoms (0: none)");
  app.add_option("--grid", o.grid, "Angular grid points for the rank-1 search")
      ->capture_default_str();
  app.add_option("--seed", o.seed, "Seed for randomized starts")->capture_default_str();
  app.add_option("--tol", o.tol, "Gap tolerance")->capture_default_str();
  app.add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--output", output, "Write the report to PATH instead of stdout");
  app.add_flag("--bits", o.bits, "Report information quantities in bits");

  auto* dtm = app.add_subcommand("dtm", "DTM, output distribution and singular structure");
  auto* p2p = app.add_subcommand("p2p", "Point-to-point local capacity");
  auto* broadcast = app.add_subcommand("broadcast", "Max-min coupling over several receivers");
  auto* verify = app.add_subcommand("verify", "Local approximation and Kronecker checks");
  auto* windmill = app.add_subcommand("windmill", "The k-receiver windmill example");
  for (auto* sub : {dtm, p2p, broadcast, verify}) {
    sub->add_option("spec", o.spec_path, "Channel specification file")->required();
  }
  p2p->add_flag("--verify-exact", o.verify_exact, "Compare exact mutual information at --eps");
  windmill->add_option("--k", o.k, "Number of receivers")->capture_default_str();
  windmill->add_option("--theta", o.theta, "Starting angle of the rotation schedule")
      ->capture_default_str();
  windmill->add_option("--plot-points", o.plot_points, "Rows of the angle plot tables")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    Report report = dtm->parsed()         ? licp::cli::cmd_dtm(o)
                    : p2p->parsed()       ? licp::cli::cmd_p2p(o)
                    : broadcast->parsed() ? licp::cli::cmd_broadcast(o)
                    : verify->parsed()    ? licp::cli::cmd_verify(o)
                                          : licp::cli::cmd_windmill(o);
    return emit(report, format, output);
  } catch (const licp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return licp::cli::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
