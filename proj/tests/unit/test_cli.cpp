#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "cli/config.hpp"
#include "cli/report.hpp"
#include "cli/run.hpp"
#include "qconserve/error.hpp"

using namespace qconserve;
using namespace qconserve::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
  std::random_device rd;
  const fs::path p = fs::temp_directory_path() / ("qconserve_cli_" + tag + "_" + std::to_string(rd()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

json small_config(const std::string& scenario) {
  json params = json::object();
  if (scenario == "free_packet") {
    params = {{"grid_points", 1024}, {"grid_length", 80.0}, {"detect_time", 2.0}, {"window_center", 1.0}, {"steps", 64},
              {"snapshots", 4}};
  }
  return {{"scenario", scenario}, {"seed", 7}, {"parameters", params}};
}

struct RunResult {
  int status;
  std::string out;
  std::string err;
};

RunResult run_in(const fs::path& dir, const json& doc, std::optional<std::vector<std::string>> formats = {}) {
  RunRequest req;
  req.config_path = write_config(dir, doc).string();
  req.output_dir = (dir / "out").string();
  req.formats = std::move(formats);
  std::ostringstream out;
  std::ostringstream err;
  const int status = run_command(req, out, err);
  return {status, out.str(), err.str()};
}

}  // namespace

TEST_CASE("catalog lists the four scenarios", "[cli]") {
  std::ostringstream out;
  list_scenarios(out);
  const std::string text = out.str();
  CHECK(text.find("mach_zehnder") != std::string::npos);
  CHECK(text.find("apr_box") != std::string::npos);
  REQUIRE(scenario_catalog().size() == 4);
  std::size_t listed = 0;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty() && line[0] != ' ') ++listed;
  }
  CHECK(listed == 4);
}

TEST_CASE("config parsing rejects malformed documents", "[cli]") {
  CHECK_NOTHROW(parse_config(small_config("mach_zehnder")));
  CHECK_THROWS_AS(parse_config_text("{not json"), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"scenario", "nope"}, {"seed", 1}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"scenario", "mach_zehnder"}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"scenario", "mach_zehnder"}, {"seed", -3}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"scenario", "mach_zehnder"}, {"seed", 1}, {"extra", 1}}), ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"scenario", "mach_zehnder"}, {"seed", 1}, {"parameters", {{"kik", 1.0}}}}),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(json{{"scenario", "free_packet"}, {"seed", 1}, {"parameters", {{"a", -1.0}}}}),
                  ValidationError);
  CHECK_THROWS_AS(parse_formats("json,xml"), ValidationError);
  CHECK(parse_formats("csv,json").size() == 2);
}

TEST_CASE("parameters echo round-trips through the parser", "[cli]") {
  for (const auto& info : scenario_catalog()) {
    const RunConfig cfg = parse_config(json{{"scenario", info.name}, {"seed", 1}});
    const json echoed = parameters_json(cfg.spec);
    const RunConfig again = parse_config(json{{"scenario", info.name}, {"seed", 1}, {"parameters", echoed}});
    CHECK(parameters_json(again.spec) == echoed);
  }
}

TEST_CASE("deterministic dump prints 17 significant digits", "[cli]") {
  const json v = {{"b", 0.1}, {"a", 1}, {"c", std::numeric_limits<double>::infinity()}};
  const std::string text = dump_deterministic(v);
  CHECK(text == "{\n  \"a\": 1,\n  \"b\": 0.10000000000000001,\n  \"c\": null\n}\n");
  CHECK(json::parse(text)["b"].get<double>() == 0.1);
}

TEST_CASE("mach-zehnder run writes a schema-valid report and rectangular csv", "[cli]") {
  const fs::path dir = scratch_dir("mz");
  const auto r = run_in(dir, small_config("mach_zehnder"), std::vector<std::string>{"json", "csv"});
  REQUIRE(r.status == exit_ok);
  const json doc = json::parse(slurp(dir / "out" / "report.json"));
  CHECK_NOTHROW(check_report_schema(doc));
  CHECK(doc["schema"] == report_schema);
  for (const char* key : {"entropy_exact", "entropy_approx", "epsilon"}) CHECK(doc["results"].contains(key));

  std::istringstream csv(slurp(dir / "out" / "timeseries.csv"));
  std::string header;
  REQUIRE(std::getline(csv, header));
  CHECK(header.rfind("t,", 0) == 0);
  const auto columns = std::count(header.begin(), header.end(), ',');
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);) {
    CHECK(std::count(line.begin(), line.end(), ',') == columns);
    ++rows;
  }
  CHECK(rows >= 2);
  fs::remove_all(dir);
}

TEST_CASE("identical configs give byte-identical reports", "[cli]") {
  for (const char* scenario : {"mach_zehnder", "free_packet", "stern_gerlach"}) {
    const fs::path d1 = scratch_dir("det1");
    const fs::path d2 = scratch_dir("det2");
    REQUIRE(run_in(d1, small_config(scenario)).status == exit_ok);
    REQUIRE(run_in(d2, small_config(scenario)).status == exit_ok);
    CHECK(slurp(d1 / "out" / "report.json") == slurp(d2 / "out" / "report.json"));
    fs::remove_all(d1);
    fs::remove_all(d2);
  }
}

TEST_CASE("invalid configs fail fast without writing files", "[cli]") {
  const fs::path dir = scratch_dir("bad");
  json doc = small_config("apr_box");
  doc["parameters"] = {{"n_modes", 20}, {"window_lo", 0.45}, {"window_hi", 1.5}};
  const auto start = std::chrono::steady_clock::now();
  const auto r = run_in(dir, doc);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(r.status == exit_config);
  CHECK(seconds < 0.2);
  CHECK_FALSE(fs::exists(dir / "out"));
  const json line = json::parse(r.err);
  CHECK(line["status"] == 2);
  CHECK(line["reason"].get<std::string>().size() > 0);
  CHECK(r.err.find('\n') == r.err.size() - 1);

  json neg = small_config("free_packet");
  neg["parameters"]["a"] = -1.0;
  CHECK(run_in(dir, neg).status == exit_config);
  CHECK_FALSE(fs::exists(dir / "out"));
  fs::remove_all(dir);
}

TEST_CASE("numerical guard maps to exit status 3", "[cli]") {
  const fs::path dir = scratch_dir("guard");
  json doc = small_config("free_packet");
  doc["parameters"] = {{"grid_length", 40.0}, {"grid_points", 1024}};
  const auto r = run_in(dir, doc);
  CHECK(r.status == exit_numerical_guard);
  CHECK_FALSE(fs::exists(dir / "out" / "report.json"));
  fs::remove_all(dir);
}

TEST_CASE("the installed binary honours the command shape", "[cli]") {
  const char* bin = std::getenv("QCONSERVE_BIN");
  if (bin == nullptr) SKIP("QCONSERVE_BIN not set");
  const fs::path dir = scratch_dir("bin");
  const fs::path cfg = write_config(dir, small_config("stern_gerlach"));
  const std::string quiet = " > " + (dir / "stdout.txt").string() + " 2> " + (dir / "stderr.txt").string();
  CHECK(std::system((std::string(bin) + " list" + quiet).c_str()) == 0);
  CHECK(slurp(dir / "stdout.txt").find("stern_gerlach") != std::string::npos);
  const std::string run = std::string(bin) + " run --config " + cfg.string() + " --out " + (dir / "o").string() +
                          " --format json,csv" + quiet;
  CHECK(std::system(run.c_str()) == 0);
  CHECK(fs::exists(dir / "o" / "report.json"));
  CHECK(fs::exists(dir / "o" / "timeseries.csv"));
  const int bad = std::system((std::string(bin) + " run --config " + (dir / "missing.json").string() + quiet).c_str());
  CHECK(WEXITSTATUS(bad) == 2);
  fs::remove_all(dir);
}
