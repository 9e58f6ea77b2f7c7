#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sectorial/cli/commands.hpp"
#include "sectorial/cli/config.hpp"
#include "sectorial/cli/report.hpp"

using namespace sectorial::cli;
namespace fs = std::filesystem;

namespace {

json sheet_config() {
  return json::parse(R"({
    "model": {"family": "brownian_sheet", "d": 1, "domain": {"lo": [1, 1], "hi": [2, 2]}},
    "grid": {"counts": [17, 17]},
    "rng": {"seed": 5},
    "experiment": {"count": 2, "format": "csv"}
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("sectorial_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("unknown keys are rejected with their field path") {
  auto doc = sheet_config();
  doc["experiment"]["cuont"] = 3;
  const auto res = run_subcommand("simulate", doc, {});
  CHECK(res.exit_code == kExitConfig);
  CHECK(res.error.find("experiment.cuont") != std::string::npos);

  doc = sheet_config();
  doc["grid"]["spacnig"] = 0.1;
  CHECK(run_subcommand("simulate", doc, {}).error.find("grid.spacnig") != std::string::npos);
}

TEST_CASE("alpha outside (0, 1) is a config error citing the interval") {
  auto doc = json::parse(R"({"model": {"family": "fractional_sheet", "alpha": 1.5,
                             "domain": {"lo": [1, 1], "hi": [2, 2]}}})");
  const auto res = run_subcommand("verify-cov", doc, {});
  CHECK(res.exit_code == kExitConfig);
  CHECK(res.error.find("model.alpha") != std::string::npos);
  CHECK(res.error.find("(0, 1)") != std::string::npos);
}

TEST_CASE("unknown subcommand and missing fields") {
  CHECK(run_subcommand("plot", sheet_config(), {}).exit_code == kExitConfig);
  auto doc = sheet_config();
  doc["model"].erase("domain");
  const auto res = run_subcommand("simulate", doc, {});
  CHECK(res.exit_code == kExitConfig);
  CHECK(res.error.find("model.domain") != std::string::npos);
}

TEST_CASE("grid budget violations carry a remediation hint") {
  auto doc = sheet_config();
  doc["grid"]["counts"] = {300, 300};
  const auto res = run_subcommand("simulate", doc, {});
  CHECK(res.exit_code == kExitConfig);
  CHECK(res.error.find("budget") != std::string::npos);
}

TEST_CASE("config hash ignores key order and output, tracks semantics") {
  const auto a = json::parse(R"({"model": {"family": "brownian_sheet", "d": 1, "domain": {"lo": [1, 1], "hi": [2, 2]}},
                                 "grid": {"counts": [9, 9]}, "rng": {"seed": 3}})");
  const auto b = json::parse(R"({"rng": {"seed": 3}, "grid": {"counts": [9, 9]},
                                 "model": {"domain": {"hi": [2, 2], "lo": [1, 1]}, "d": 1, "family": "brownian_sheet"},
                                 "output": {"dir": "elsewhere"}})");
  auto hash = [](const json& doc, std::optional<std::uint64_t> seed = std::nullopt) {
    ConfigReader r(doc, seed);
    r.experiment().integer("count", 1);
    r.finalize();
    return config_hash(r.config().resolved);
  };
  CHECK(hash(a) == hash(b));
  CHECK(hash(a).size() == 16);

  auto c = a;
  c["grid"]["counts"] = {9, 10};
  CHECK(hash(a) != hash(c));
  CHECK(hash(a) != hash(a, 4));
  CHECK(hash(a) == hash(a, 3));

  // an explicit default is the same experiment as an omitted one
  auto d = a;
  d["model"]["d"] = 1;
  d["experiment"]["count"] = 1;
  CHECK(hash(a) == hash(d));
}

TEST_CASE("csv cells use 17 significant digits and LF line ends") {
  Table t("x", {"a", "b", "c", "d"});
  t.add({0.1, std::int64_t{7}, std::string("p,q"), std::monostate{}});
  std::ostringstream s;
  t.write_csv(s);
  CHECK(s.str() == "a,b,c,d\n0.10000000000000001,7,\"p,q\",\n");
}

TEST_CASE("reruns write byte-identical reports and list every file") {
  const auto d1 = scratch("a"), d2 = scratch("b");
  const auto r1 = run_subcommand("simulate", sheet_config(), {std::nullopt, 1, d1.string()});
  const auto r2 = run_subcommand("simulate", sheet_config(), {std::nullopt, 1, d2.string()});
  REQUIRE(r1.exit_code == kExitOk);
  REQUIRE(r2.exit_code == kExitOk);
  CHECK(r1.files == r2.files);
  CHECK(r1.files.back() == "manifest.json");
  std::size_t on_disk = 0;
  for (const auto& e : fs::directory_iterator(d1)) {
    (void)e;
    ++on_disk;
  }
  CHECK(on_disk == r1.files.size());
  for (const auto& f : r1.files) {
    CHECK(fs::exists(d1 / f));
    if (f != "manifest.json") CHECK_MESSAGE(slurp(d1 / f) == slurp(d2 / f), f);
  }
  const auto manifest = json::parse(slurp(d1 / "manifest.json"));
  CHECK(manifest["config_hash"] == r1.config_hash);
  CHECK(manifest["seed"] == 5);
  CHECK(manifest["exit_code"] == 0);

  // a different seed changes the paths
  const auto d3 = scratch("c");
  run_subcommand("simulate", sheet_config(), {std::uint64_t{6}, 1, d3.string()});
  CHECK(slurp(d1 / "path_0.csv") != slurp(d3 / "path_0.csv"));
  for (const auto& d : {d1, d2, d3}) fs::remove_all(d);
}

TEST_CASE("report rows carry the lineage columns") {
  const auto dir = scratch("lineage");
  auto doc = sheet_config();
  doc["experiment"] = json::parse(R"({"count": 3, "tolerance": {"policy": "absolute", "value": 0.2}})");
  const auto res = run_subcommand("level-set", doc, {std::nullopt, 1, dir.string()});
  REQUIRE(res.exit_code == kExitOk);
  std::istringstream csv(slurp(dir / "level-set.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line.rfind("model,seed,replicate,spacing,scale,", 0) == 0);
  int rows = 0;
  while (std::getline(csv, line)) {
    CHECK(line.rfind("bs_N2_d1,5," + std::to_string(rows) + ",0.0625,", 0) == 0);
    ++rows;
  }
  CHECK(rows == 3);
  fs::remove_all(dir);
}

TEST_CASE("a failing declared assertion gives exit status 1") {
  const auto dir = scratch("assert");
  auto doc = sheet_config();
  // level sets of the sheet are nowhere near dimension 0.2
  doc["grid"]["counts"] = {33, 33};
  doc["experiment"] = json::parse(R"({"count": 3, "min_paths": 3, "expect": {"value": 0.2, "tolerance": 0.01}})");
  const auto res = run_subcommand("dimension", doc, {std::nullopt, 1, dir.string()});
  CHECK(res.exit_code == kExitAssertion);
  CHECK(res.error.empty());
  CHECK(fs::exists(dir / "manifest.json"));
  fs::remove_all(dir);
}

TEST_CASE("verify-a3 keeps its probes inside the domain") {
  const auto dir = scratch("a3");
  auto doc = json::parse(R"({"model": {"family": "wave_white", "domain": {"lo": [0.3, 0.3], "hi": [1.3, 1.3]}},
                             "experiment": {"trials": 20, "grid_probe": 3}})");
  const auto res = run_subcommand("verify-a3", doc, {std::nullopt, 1, dir.string()});
  CHECK(res.error.empty());
  CHECK(res.exit_code != kExitConfig);

  doc["experiment"]["region"] = json::parse(R"({"lo": [0.3, 0.5], "hi": [1.0, 1.0]})");
  const auto bad = run_subcommand("verify-a3", doc, {std::nullopt, 1, dir.string()});
  CHECK(bad.exit_code == kExitConfig);
  CHECK(bad.error.find("experiment.region") != std::string::npos);
  fs::remove_all(dir);
}
