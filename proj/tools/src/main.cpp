#include <iostream>

#include "CLI11.hpp"
#include "cli/config.hpp"
#include "cli/run.hpp"
#include "qconserve/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qconserve: conservation bookkeeping for system + apparatus simulations"};
  app.require_subcommand(1);

  qconserve::cli::RunRequest request;
  std::string out_dir;
  std::string formats;
  auto* run_cmd = app.add_subcommand("run", "run one scenario config and write report.json / timeseries.csv");
  run_cmd->add_option("--config", request.config_path, "RunConfig JSON file")->required();
  run_cmd->add_option("--out", out_dir, "output directory (overrides output_dir)");
  run_cmd->add_option("--format", formats, "comma-separated subset of json,csv");
  auto* list = app.add_subcommand("list", "list the available scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : qconserve::cli::exit_config;
  }

  if (list->parsed()) {
    qconserve::cli::list_scenarios(std::cout);
    return 0;
  }
  if (!out_dir.empty()) request.output_dir = out_dir;
  if (!formats.empty()) {
    try {
      request.formats = qconserve::cli::parse_formats(formats);
    } catch (const qconserve::Error& e) {
      const nlohmann::json line = {{"status", 2}, {"error", "config"}, {"reason", e.what()}};
      std::cerr << line.dump() << '\n';
      return qconserve::cli::exit_config;
    }
  }
  return qconserve::cli::run_command(request, std::cout, std::cerr);
}
