#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "superrad/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace superrad;

namespace {

std::string cli() {
  const char* p = std::getenv("SUPERRAD_CLI");
  return p ? p : "superrad";
}

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / ("superrad_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

int run_cli(const json& cfg, const fs::path& dir, const std::string& extra = "") {
  const fs::path file = dir / "config.json";
  std::ofstream(file) << cfg.dump(2);
  const std::string cmd = "\"" + cli() + "\" run \"" + file.string() + "\" --output-dir \"" + dir.string() + "\" " +
                          extra + " > \"" + (dir / "stdout.txt").string() + "\" 2> \"" +
                          (dir / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json pulse_config() {
  return json::parse(R"({
    "scenario": "pulse",
    "system": {"levels": 2, "atoms": 6, "collective": {"Gamma": [{"upper": 1, "lower": 0, "rate": 1.0}]}},
    "initial": {"bloch": {"theta": 3.141592653589793}},
    "time_grid": {"start": 0, "stop": 3, "points": 61},
    "output": {"path": "pulse.csv"}
  })");
}

}  // namespace

TEST_CASE("pulse run writes a reproducible table") {
  const auto dir = scratch();
  REQUIRE(run_cli(pulse_config(), dir, "--verify-oracle --dump-generator") == 0);
  const std::string first = slurp(dir / "pulse.csv");
  CHECK(first.rfind("# superrad-output schema=1 scenario=pulse", 0) == 0);
  CHECK(first.find("# summary ") != std::string::npos);
  CHECK(fs::exists(dir / "generator.txt"));
  REQUIRE(run_cli(pulse_config(), dir) == 0);
  CHECK(slurp(dir / "pulse.csv") == first);

  // one header row plus one row per time point
  std::istringstream is(first);
  std::string line;
  int data = 0;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#') ++data;
  CHECK(data == 62);
}

TEST_CASE("json-lines output") {
  const auto dir = scratch();
  auto cfg = pulse_config();
  cfg["output"] = {{"path", "pulse.jsonl"}, {"format", "json-lines"}};
  REQUIRE(run_cli(cfg, dir) == 0);
  std::istringstream is(slurp(dir / "pulse.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    json parsed;
    CHECK_NOTHROW(parsed = json::parse(line));
    ++n;
  }
  CHECK(n > 61);
}

TEST_CASE("invalid configurations exit with code 2") {
  const auto dir = scratch();
  auto cfg = pulse_config();
  cfg["system"]["bogus"] = 1;
  CHECK(run_cli(cfg, dir) == 2);
  CHECK(slurp(dir / "stderr.txt").find("system.bogus") != std::string::npos);
  cfg = pulse_config();
  cfg["system"]["gamma"] = json::array({{{"from", 1}, {"to", 0}, {"rate", -1.0}}});
  CHECK(run_cli(cfg, dir) == 2);
  cfg = pulse_config();
  cfg["initial"] = {{"components", json::array({{{"probability", 0.5}, {"amplitudes", {1, 0}}}})}};
  CHECK(run_cli(cfg, dir) == 2);
  CHECK(std::system(("\"" + cli() + "\" run /nonexistent/config.json > /dev/null 2>&1").c_str()) != 0);
}

TEST_CASE("capacity errors exit with code 3") {
  const auto dir = scratch();
  auto cfg = pulse_config();
  cfg["system"]["levels"] = 6;
  cfg["system"]["atoms"] = 1000;
  cfg["initial"] = {{"level", 5}};
  CHECK(run_cli(cfg, dir) == 3);
}

TEST_CASE("effective configuration round trip") {
  const auto cfg = parse_config(pulse_config());
  const json echo = to_json(cfg);
  const auto again = parse_config(echo);
  CHECK(to_json(again) == echo);
  CHECK(again.params.atoms == 6);
  CHECK(again.times.size() == 61);
}

TEST_CASE("pumped spectrum scenario") {
  const auto dir = scratch();
  const json cfg = json::parse(R"({
    "scenario": "pumped-spectrum",
    "system": {"levels": 2, "atoms": 4,
               "gamma": [{"from": 0, "to": 1, "rate": 2.0}],
               "collective": {"Gamma": [{"upper": 1, "lower": 0, "rate": 1.0}]}},
    "frequency_grid": {"start": -10, "stop": 10, "points": 81},
    "output": {"path": "spec.csv"}
  })");
  REQUIRE(run_cli(cfg, dir) == 0);
  const std::string out = slurp(dir / "spec.csv");
  CHECK(out.find("omega") != std::string::npos);
}
