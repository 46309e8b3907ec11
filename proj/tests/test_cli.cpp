#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mixedspec/campaign.hpp"
#include "support.hpp"

using namespace mixedspec;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mixedspec_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MIXEDSPEC_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("config precedence: defaults, then file, then flags") {
  const json file = {{"grid", {{"n", 777}, {"phases", 5}}}, {"model", {{"K", 2.0}}}};
  const json flags = {{"grid", {{"phases", 9}}}};
  const auto cfg = resolve_config("scan-lyapunov", file, flags);
  CHECK(cfg["grid"]["n"] == 777);
  CHECK(cfg["grid"]["phases"] == 9);
  CHECK(cfg["model"]["K"] == 2.0);
  CHECK(cfg["grid"]["N"] == default_config()["grid"]["N"]);
  CHECK(cfg["scan"] == "scan-lyapunov");
}

TEST_CASE("config validation") {
  const json none;
  CHECK_THROWS_AS(resolve_config("bogus", none, json::object()), ConfigError);
  CHECK_THROWS_AS(resolve_config("spectrum", none, {{"grid", {{"E", {{"step", 0.0}}}}}}),
                  ConfigError);
  CHECK_THROWS_AS(resolve_config("spectrum", none, {{"grid", {{"N", 1}}}}), ConfigError);
  CHECK_THROWS_AS(resolve_config("spectrum", none, {{"model", {{"omega", "nonsense"}}}}),
                  ConfigError);
  CHECK_THROWS_AS(resolve_config("spectrum", none, {{"grid", {{"n", "many"}}}}), ConfigError);
  CHECK_THROWS_AS(resolve_config("spectrum", none, {{"grid", {{"window", {2.0, 1.0}}}}}),
                  ConfigError);
  CHECK_THROWS_AS(resolve_config("classify-freq", none, {{"model", {{"omega", "liouville:100000"}}}}),
                  ResourceError);
}

TEST_CASE("header line and config hash") {
  const auto a = resolve_config("reduce", json(), json::object());
  const auto b = resolve_config("reduce", json(), {{"model", {{"K", 0.5}}}});
  CHECK(config_hash(a) == config_hash(a));
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
  const auto h = header_line(a);
  CHECK(h.rfind("# mixedspec " + std::string(kVersion) + " modules=", 0) == 0);
  CHECK(h.find("config_hash=" + config_hash(a)) != std::string::npos);
  CHECK(h.find("config=" + a.dump()) != std::string::npos);
  CHECK(h.find('\n') == std::string::npos);
}

TEST_CASE("exit codes by error class") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(ResourceError("m", "s", "x")) == 4);
  CHECK(exit_code_for(DomainError("m", "s", "x")) == 3);
  CHECK(exit_code_for(std::runtime_error("x")) == 3);
}

TEST_CASE("K = 0 Lyapunov scan matches the closed form") {
  const auto dir = fresh_dir("scan");
  const json flags = {{"outputs", {{"dir", dir.string()}, {"svg", false}}},
                      {"grid", {{"E", {{"min", -1.0}, {"max", 5.0}, {"step", 0.5}}},
                                {"n", 20000},
                                {"phases", 4}}}};
  const auto res = run_campaign(resolve_config("scan-lyapunov", json(), flags));
  REQUIRE(res.files.size() == 1);
  const auto rows = csv_rows(dir / "lyapunov.csv");
  REQUIRE(rows.size() == 14);
  CHECK(rows[0] == std::vector<std::string>{"E", "omega_id", "K", "n", "phases", "L", "stderr"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double e = std::stod(rows[i][0]);
    CHECK(std::abs(std::stod(rows[i][5]) - testing::free_lyapunov_oracle(e)) < 5e-3);
  }
  CHECK(slurp(dir / "lyapunov.csv").rfind("# mixedspec ", 0) == 0);
}

TEST_CASE("reduce at K = 0") {
  const auto dir = fresh_dir("reduce");
  const json flags = {{"outputs", {{"dir", dir.string()}}}, {"model", {{"K", 0.0}}}};
  run_campaign(resolve_config("reduce", json(), flags));
  const auto j = json::parse(slurp(dir / "reduce.json"));
  CHECK(j.at("k_hat").get<double>() == -1.0);
  CHECK(j.at("K").get<double>() == 0.0);
  CHECK(j.at("meta").at("config_hash").get<std::string>().size() == 16);
}

TEST_CASE("classify a Liouville frequency") {
  const auto dir = fresh_dir("classify");
  const json flags = {{"outputs", {{"dir", dir.string()}}},
                      {"model", {{"omega", "liouville:45"}, {"K", 1.0}}}};
  run_campaign(resolve_config("classify-freq", json(), flags));
  const auto rows = csv_rows(dir / "classify.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == "liouville:45");
  CHECK(std::abs(std::stod(rows[1][1]) - 45.0) < 1e-6);
  CHECK(rows[1][3] == "0");
  CHECK(rows[1][4] == "0");
  CHECK(rows[1][5] == "1");
}

TEST_CASE("CLI runs are byte-identical for the same config") {
  const auto dir = fresh_dir("repeat");
  const std::string args = "spectrum --K 2 --N 200 --thetas 3 --seed 7 --E-min 0 --E-max 2 --out " +
                           dir.string();
  REQUIRE(run_cli(args) == 0);
  std::map<std::string, std::string> first;
  for (const auto& e : fs::directory_iterator(dir)) first[e.path().filename()] = slurp(e.path());
  REQUIRE(run_cli(args) == 0);
  REQUIRE_FALSE(first.empty());
  for (const auto& [name, body] : first) CHECK(slurp(dir / name) == body);
}

TEST_CASE("CLI exit codes") {
  const auto dir = fresh_dir("codes");
  CHECK(run_cli("scan-lyapunov --bogus") == 2);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("reduce --omega nonsense --out " + dir.string()) == 2);
  CHECK(run_cli("reduce --config " + (dir / "missing.json").string()) == 2);
  CHECK(run_cli("reduce --K 1 --omega cf:1,1,1000000000000\\;1 --out " + dir.string()) == 3);
  CHECK(run_cli("classify-freq --omega liouville:100000 --out " + dir.string()) == 4);
  CHECK(run_cli("classify-freq --omega golden --out " + dir.string()) == 0);
}
