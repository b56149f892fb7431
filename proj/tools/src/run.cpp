#include "cli/run.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cli/config.hpp"
#include "cli/report.hpp"
#include "qconserve/error.hpp"

namespace qconserve::cli {

namespace {

void fail_line(std::ostream& err, int status, const std::string& kind, const std::string& reason) {
  nlohmann::json line = {{"status", status}, {"error", kind}, {"reason", reason}};
  err << line.dump() << '\n';
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error("failed writing " + path.string());
}

}  // namespace

int run_command(const RunRequest& request, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    std::ifstream f(request.config_path);
    if (!f) throw ValidationError("cannot read config file " + request.config_path);
    std::stringstream ss;
    ss << f.rdbuf();
    cfg = parse_config_text(ss.str());
    if (request.output_dir) cfg.output_dir = *request.output_dir;
    if (request.formats) cfg.formats = *request.formats;
  } catch (const NumericalGuardError& e) {
    fail_line(err, exit_numerical_guard, "numerical_guard", e.what());
    return exit_numerical_guard;
  } catch (const Error& e) {
    fail_line(err, exit_config, "config", e.what());
    return exit_config;
  }

  try {
    const ScenarioOutput result = run_scenario(cfg);
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    for (const auto& fmt : cfg.formats) {
      if (fmt == "json") {
        const std::string text = dump_deterministic(result.report);
        check_report_schema(nlohmann::json::parse(text));
        write_file(dir / "report.json", text);
        out << (dir / "report.json").string() << '\n';
      } else {
        write_file(dir / "timeseries.csv", timeseries_csv(result.ledger));
        out << (dir / "timeseries.csv").string() << '\n';
      }
    }
  } catch (const NumericalGuardError& e) {
    fail_line(err, exit_numerical_guard, "numerical_guard", e.what());
    return exit_numerical_guard;
  } catch (const ValidationError& e) {
    fail_line(err, exit_config, "config", e.what());
    return exit_config;
  } catch (const std::exception& e) {
    fail_line(err, exit_failure, "internal", e.what());
    return exit_failure;
  }
  return exit_ok;
}

void list_scenarios(std::ostream& out) {
  for (const auto& s : scenario_catalog()) {
    out << s.name << "  " << s.description << "\n    parameters:";
    for (const auto& p : s.parameters) out << ' ' << p;
    out << '\n';
  }
}

}  // namespace qconserve::cli
