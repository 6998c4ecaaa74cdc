#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include "fisher/cli.hpp"
#include "fisher/harness.hpp"
#include "fisher/market_io.hpp"

using namespace fisher;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fisher_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("gen writes a market") {
  const fs::path path = scratch("mkt.json");
  fs::remove(path);
  const Outcome o =
      run({"gen", "--n", "4", "--m", "4", "--dist", "uniform", "--seed", "7", "--out", path.string()});
  CHECK(o.code == kExitOk);
  const auto market = load_market(path);
  CHECK(market.buyers() == 4);
  CHECK(market == gen_market(4, 4, ValueDistribution::Uniform, BudgetMode::CeeiEqual, 7));
  CHECK(market_to_json(market) == read_file(path));
}

TEST_CASE("usage errors exit with code 1") {
  const Outcome missing = run({"run", "--config", scratch("missing.json").string()});
  CHECK(missing.code == kExitUsage);
  CHECK_FALSE(missing.err.empty());
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"gen", "--n", "4"}).code == kExitUsage);
  CHECK(run({"run", "--algo", "nope", "--out", scratch("x.csv").string()}).code == kExitUsage);
  CHECK(run({"gen", "--n", "1", "--m", "4", "--out", scratch("bad.json").string()}).code != kExitOk);
}

TEST_CASE("run then compare lists each pair once") {
  const fs::path curves = scratch("curves.csv");
  const Outcome r = run({"run", "--n", "10", "--m", "12", "--seed", "1,2,3", "--algo",
                         "pr,fpr,qfpr,pgd", "--qae-m", "8", "--t-ref", "100", "--out",
                         curves.string()});
  REQUIRE(r.code == kExitOk);
  const Outcome c = run({"compare", curves.string()});
  REQUIRE(c.code == kExitOk);
  for (const char* algo : {"pr", "fpr", "qfpr", "pgd"}) {
    for (const char* seed : {"1", "2", "3"}) {
      CHECK(count(c.out, "\n" + std::string(algo) + "," + seed + ",") == 1);
    }
  }
  CHECK(count(c.out, "win_rate pr < pgd:") == 1);
}

TEST_CASE("run accepts a config file and JSON output") {
  const fs::path config = scratch("config.json");
  const fs::path out = scratch("curves.json");
  write_file(config, R"({"n": 6, "m": 6, "algorithms": ["pr", "pgd"], "seeds": [4],
                        "reference_iterations": 50, "format": "json"})");
  const Outcome r = run({"run", "--config", config.string(), "--out", out.string()});
  REQUIRE(r.code == kExitOk);
  const auto points = parse_curves(read_file(out), CurveFormat::Json);
  CHECK(points.size() == 2 * 17);
  const Outcome again = run({"run", "--config", config.string(), "--out", scratch("again.json").string()});
  REQUIRE(again.code == kExitOk);
  CHECK(read_file(out) == read_file(scratch("again.json")));
  write_file(config, R"({"n": 6, "colour": "red"})");
  CHECK(run({"run", "--config", config.string()}).code == kExitUsage);
}

TEST_CASE("reference caches the optimum") {
  const fs::path market = scratch("ref_mkt.json");
  const fs::path cache = scratch("ref_cache.json");
  fs::remove(cache);
  REQUIRE(run({"gen", "--n", "5", "--m", "6", "--seed", "2", "--out", market.string()}).code == kExitOk);
  const Outcome first = run({"reference", "--market", market.string(), "--t-ref", "200", "--out", cache.string()});
  REQUIRE(first.code == kExitOk);
  CHECK(first.out.find("(cached)") == std::string::npos);
  const Outcome second = run({"reference", "--market", market.string(), "--t-ref", "200", "--out", cache.string()});
  REQUIRE(second.code == kExitOk);
  CHECK(second.out.find("(cached)") != std::string::npos);
  const auto doc = nlohmann::json::parse(read_file(cache));
  CHECK(doc["phi_star"].get<double>() ==
        reference_optimum(load_market(market), 200).phi);
  CHECK(run({"reference", "--market", scratch("nope.json").string()}).code == kExitRuntime);
}

TEST_CASE("the installed binary reports exit codes") {
  const char* exe = std::getenv("FISHER_CLI");
  if (exe == nullptr) return;
  const std::string base = std::string("\"") + exe + "\" ";
  const std::string quiet = " >/dev/null 2>&1";
  auto status = [](int raw) { return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1; };
  CHECK(status(std::system((base + "gen --n 4 --m 4 --dist uniform --seed 7 --out " +
                            scratch("bin_mkt.json").string() + quiet).c_str())) == 0);
  CHECK(status(std::system((base + "run --config " + scratch("missing.json").string() + quiet).c_str())) == 1);
}
