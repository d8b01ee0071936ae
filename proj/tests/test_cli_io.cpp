#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flatflow/errors.hpp"
#include "flatflow/run.hpp"
#include "flatflow/run_config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace flatflow;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"grid": {"dim": 2, "n_h": 16, "n_v": 17, "L_h": 1.0, "L_v": 1.0},
                           "time": {"a": 0.5, "n_t": 6},
                           "initial": {"h0": [{"k": [1], "sin": 1e-3}]}})";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("flatflow_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> rules_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.rules();
  }
  return {};
}

bool mentions(const std::vector<std::string>& rules, const std::string& key) {
  return std::any_of(rules.begin(), rules.end(), [&](const std::string& r) { return r.find(key) != std::string::npos; });
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(FLATFLOW_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("defaults fill every omitted field") {
  const RunConfig c = parse_config(kMinimal);
  CHECK(c.grid.n_h == 16);
  CHECK(c.lower.viscosity.family == "newtonian");
  CHECK(c.solver.max_iter == 30);
  CHECK(c.norms.p == 5.0);
  CHECK(c.output.formats == std::vector<std::string>{"csv"});
}

TEST_CASE("p = 4 in two dimensions is rejected by name") {
  auto j = nlohmann::json::parse(kMinimal);
  j["norms"]["p"] = 4;
  const auto rules = rules_of(j.dump());
  REQUIRE(rules.size() == 1);
  CHECK(mentions(rules, "norms.p"));
  CHECK(mentions(rules, "p > N + 2"));
}

TEST_CASE("interface outside the strip is rejected by name") {
  auto j = nlohmann::json::parse(kMinimal);
  j["initial"]["h0"][0]["sin"] = 1.0;
  const auto rules = rules_of(j.dump());
  REQUIRE(rules.size() == 1);
  CHECK(mentions(rules, "initial.h0"));
  CHECK(mentions(rules, "grid.L_v"));
}

TEST_CASE("every problem is reported at once") {
  const auto rules = rules_of(R"({"grid": {"dim": 4, "n_h": 15, "n_v": 2, "bogus": 1},
                                  "time": {"a": -1, "n_t": "ten"},
                                  "phase": {"1": {"rho": -2, "viscosity": {"family": "power-shift", "d": 0.5}}},
                                  "norms": {"p": 4},
                                  "extra": true})");
  CHECK(rules.size() >= 8);
  for (const char* key : {"grid.dim", "grid.n_h", "grid.n_v", "grid.bogus", "time.a", "time.n_t", "phase.1.rho",
                          "phase.1.viscosity", "extra"})
    CHECK_MESSAGE(mentions(rules, key), std::string(key));
  CHECK(!rules_of("{ not json").empty());
}

TEST_CASE("canonical form round-trips and hashes stably") {
  const RunConfig a = parse_config(kMinimal);
  const std::string text = serialize_config(a);
  const RunConfig b = parse_config(text);
  CHECK(serialize_config(b) == text);
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 64);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("table round trips") {
  Table t;
  t.columns = {"t [time]", "x0 [length]", "h [length]"};
  t.add_row({0.0, 0.1, 1.0 / 3.0});
  t.add_row({0.5, -2e-300, 1e300});
  const fs::path dir = scratch("tables");
  write_text(t, dir / "a.csv");
  write_binary(t, dir / "a.bin");
  const Table c = read_text(dir / "a.csv");
  const Table b = read_binary(dir / "a.bin");
  CHECK(c.columns == t.columns);
  CHECK(c.values == t.values);
  CHECK(b.columns == t.columns);
  CHECK(b.values == t.values);
  CHECK(t.column("h") == 2);
  CHECK_THROWS_AS(t.column("nope"), ConfigError);
}

TEST_CASE("runs are deterministic and exports work") {
  const RunConfig cfg = parse_config(kMinimal);
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const RunOutcome ra = run(cfg, a);
  const RunOutcome rb = run(cfg, b);
  REQUIRE(ra.status == SolveStatus::converged);
  REQUIRE(rb.status == SolveStatus::converged);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
  CHECK(names.size() >= 9);
  for (const std::string& n : names) {
    if (n == "manifest.json") {
      auto ma = nlohmann::json::parse(slurp(a / n)), mb = nlohmann::json::parse(slurp(b / n));
      CHECK(ma.contains("timestamps"));
      ma.erase("timestamps");
      mb.erase("timestamps");
      CHECK(ma == mb);
      CHECK(ma["config_hash"] == config_hash(cfg));
    } else {
      CHECK_MESSAGE(slurp(a / n) == slurp(b / n), n);
    }
  }
  for (const std::string& q : series_quantities()) CHECK(load_series(a, q).rows() > 0);
  CHECK_THROWS_AS(load_series(a, "vorticity"), ConfigError);
  const fs::path bin = export_series(a, "h", "binary");
  CHECK(read_binary(bin).values == load_series(a, "h").values);
  const fs::path tsv = export_series(a, "first_mode", "tsv", a / "fm.tsv");
  CHECK(read_text(tsv, '\t').values == load_series(a, "first_mode").values);
  CHECK(fs::exists(export_series(a, "convergence", "jsonl")));
  CHECK_THROWS_AS(export_series(a, "h", "xml"), ConfigError);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  const fs::path cfg = dir / "c.json";
  std::ofstream(cfg) << kMinimal;
  auto bad = nlohmann::json::parse(kMinimal);
  bad["norms"]["p"] = 4;
  std::ofstream(dir / "bad.json") << bad.dump();
  auto incompatible = nlohmann::json::parse(kMinimal);
  incompatible["phase"]["1"]["viscosity"]["nu"] = 1.0;
  incompatible["phase"]["2"]["viscosity"]["nu"] = 3.0;
  incompatible["initial"]["h0"][0]["sin"] = 0.2;
  incompatible["initial"]["u0"] = {{{"k", {1}}, {"amplitude", 0.05}}};
  std::ofstream(dir / "incompatible.json") << incompatible.dump();

  CHECK(run_cli("check " + cfg.string(), dir / "check.log") == 0);
  CHECK(run_cli("check " + (dir / "bad.json").string(), dir / "bad.log") == 4);
  CHECK(slurp(dir / "bad.log").find("norms.p") != std::string::npos);
  CHECK(run_cli("check " + (dir / "incompatible.json").string(), dir / "inc.log") == 3);
  CHECK(run_cli("run " + cfg.string() + " -o " + (dir / "out").string(), dir / "run.log") == 0);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(run_cli("export " + (dir / "out").string() + " h -f binary", dir / "export.log") == 0);
  CHECK(run_cli("export " + (dir / "out").string() + " nothing", dir / "export_bad.log") == 4);
  CHECK(run_cli("probe-smallness " + cfg.string() + " --directions 2", dir / "probe.log") == 0);
  CHECK(run_cli("probe-norms " + cfg.string() + " --pairs 3", dir / "norms.log") == 0);
  CHECK(run_cli("nonsense", dir / "nonsense.log") != 0);
}
