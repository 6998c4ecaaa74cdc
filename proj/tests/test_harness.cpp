#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "fisher/error.hpp"
#include "fisher/harness.hpp"
#include "fisher/market_io.hpp"

using namespace fisher;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fisher_test_harness";
  fs::create_directories(dir);
  return dir / name;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.n = 12;
  c.m = 10;
  c.algorithms = {Algorithm::Pr, Algorithm::Fpr, Algorithm::Qfpr, Algorithm::Pgd};
  c.seeds = {1, 2};
  c.reference_iterations = 200;
  c.qae.depth = 8;
  return c;
}

}  // namespace

TEST_CASE("gen_market with equal budgets") {
  const auto market = gen_market(4, 3, ValueDistribution::Uniform, BudgetMode::CeeiEqual, 1);
  for (std::size_t i = 0; i < 4; ++i) CHECK(market.budget(i) == 0.25);
}

TEST_CASE("gen_market values lie in (0, 1] and budgets on the simplex") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (auto dist : {ValueDistribution::Uniform, ValueDistribution::TruncatedNormal}) {
      const auto market = gen_market(17, 23, dist, BudgetMode::Sampled, seed);
      for (double v : market.values().flat()) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
      }
      double total = 0.0;
      for (double b : market.budgets()) {
        CHECK(b > 0.0);
        total += b;
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(gen_market(1, 4, ValueDistribution::Uniform, BudgetMode::Sampled, 1), Error);
}

TEST_CASE("truncated normal draws") {
  RngStream rng(8, 0, 0, StreamRole::Auxiliary);
  double sum = 0.0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    const double x = sample_value(ValueDistribution::TruncatedNormal, rng);
    CHECK(x > 0.0);
    CHECK(x <= 1.0);
    sum += x;
  }
  CHECK(std::abs(sum / draws - 0.5) <= 0.01);
}

TEST_CASE("gen_market is reproducible") {
  const auto a = gen_market(9, 11, ValueDistribution::TruncatedNormal, BudgetMode::Sampled, 5);
  const auto b = gen_market(9, 11, ValueDistribution::TruncatedNormal, BudgetMode::Sampled, 5);
  const auto c = gen_market(9, 11, ValueDistribution::TruncatedNormal, BudgetMode::Sampled, 6);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(instance_hash(a) == instance_hash(b));
  CHECK(instance_hash(a) != instance_hash(c));
}

TEST_CASE("market files round-trip byte for byte") {
  const auto market = gen_market(6, 7, ValueDistribution::Uniform, BudgetMode::Sampled, 3);
  const fs::path json_path = scratch("m.json");
  save_market(json_path, market);
  const std::string first = read_file(json_path);
  const auto loaded = load_market(json_path);
  CHECK(loaded == market);
  CHECK(market_to_json(loaded) == first);

  const fs::path bin_path = scratch("m.bin");
  save_market(bin_path, market);
  const std::string bytes = read_file(bin_path);
  CHECK(bytes.size() == 16 + 8 * (6 + 42));
  CHECK(bytes.substr(0, 4) == "FQSM");
  const auto from_bin = load_market(bin_path);
  CHECK(from_bin == market);
  CHECK(market_to_binary(from_bin) == bytes);
  CHECK_THROWS_AS(market_from_binary(bytes.substr(0, 20)), Error);
  CHECK_THROWS_AS(load_market(scratch("absent.json")), Error);
}

TEST_CASE("a PR-only experiment reports every iterate") {
  ExperimentConfig c;
  c.n = 8;
  c.m = 8;
  c.iterations[Algorithm::Pr] = 12;
  const ExperimentResult r = run_experiment(c);
  CHECK(r.failures.empty());
  REQUIRE(r.points.size() == 13);
  for (std::size_t t = 0; t + 1 < r.points.size(); ++t) {
    CHECK(r.points[t].iteration == t);
    CHECK(r.points[t + 1].phi_gap <= r.points[t].phi_gap + 1e-12);
    CHECK(r.points[t + 1].queries >= r.points[t].queries);
  }
  CHECK(r.points.back().phi_gap >= -1e-12);
}

TEST_CASE("experiments cover every pair and keep queries nondecreasing") {
  const ExperimentConfig c = small_config();
  ReferenceCache cache;
  const ExperimentResult r = run_experiment(c, &cache);
  CHECK(r.failures.empty());
  CHECK(cache.size() == 2);
  std::set<std::pair<Algorithm, std::uint64_t>> pairs;
  for (std::size_t k = 0; k < r.points.size(); ++k) {
    const CurvePoint& p = r.points[k];
    pairs.insert({p.algorithm, p.seed});
    CHECK(std::isfinite(p.phi_gap));
    if (k > 0 && r.points[k - 1].algorithm == p.algorithm && r.points[k - 1].seed == p.seed) {
      CHECK(p.queries >= r.points[k - 1].queries);
    }
  }
  CHECK(pairs.size() == 8);
}

TEST_CASE("a shared instance seed reuses one reference") {
  ExperimentConfig c = small_config();
  c.instance_seed = 7;
  c.seeds = {1, 2, 3};
  ReferenceCache cache;
  const ExperimentResult r = run_experiment(c, &cache);
  CHECK(r.failures.empty());
  CHECK(cache.size() == 1);
}

TEST_CASE("query budgets are matched within one iteration") {
  ExperimentConfig c = small_config();
  const std::uint64_t budget = 16ull * 2 * c.n * c.m * 50;
  c.query_budget = budget;
  const ExperimentResult r = run_experiment(c);
  CHECK(r.failures.empty());
  const QaeParams qae = resolved_qae(c);
  const auto market = gen_market(c.n, c.m, c.distribution, c.budget_mode, 1);
  for (const FinalPoint& f : final_points(r.points)) {
    const std::uint64_t cost = queries_per_iteration(f.algorithm, market, qae, c.accounting);
    CAPTURE(to_string(f.algorithm));
    CHECK(f.queries <= budget);
    CHECK(f.queries + cost > budget);
    CHECK(f.queries == iterations_for_budget(budget, cost) * cost);
  }
  CHECK(iterations_for_budget(100, 30) == 3);
}

TEST_CASE("experiments are deterministic") {
  const ExperimentConfig c = small_config();
  const auto a = format_curves(run_experiment(c).points, CurveFormat::Csv);
  const auto b = format_curves(run_experiment(c).points, CurveFormat::Csv);
  CHECK(a == b);
}

TEST_CASE("CSV output") {
  const CurvePoint p{Algorithm::Qfpr, 3, 2, 640, 0.125, -1.5};
  const std::vector<CurvePoint> one{p};
  const std::string csv = format_curves(one, CurveFormat::Csv);
  CHECK(csv == "algorithm,seed,iteration,queries,phi_gap,psi\nqfpr,3,2,640,0.125,-1.5\n");
  CHECK(parse_curves(csv, CurveFormat::Csv) == one);
}

TEST_CASE("curve formats round-trip") {
  const ExperimentResult r = run_experiment(small_config());
  for (CurveFormat f : {CurveFormat::Csv, CurveFormat::Json}) {
    const std::string text = format_curves(r.points, f);
    const auto back = parse_curves(text, f);
    CHECK(back == r.points);
    CHECK(format_curves(back, f) == text);
  }
  const std::string json = format_curves(r.points, CurveFormat::Json);
  const auto doc = nlohmann::json::parse(json);
  REQUIRE(doc.is_array());
  CHECK(doc.size() == r.points.size());
  for (const char* key : {"algorithm", "seed", "iteration", "queries", "phi_gap", "psi"}) {
    CHECK(doc[0].contains(key));
  }
}

TEST_CASE("emit_curves writes files and rejects empty input") {
  const CurvePoint p{Algorithm::Pr, 1, 0, 0, 0.5, 0.25};
  const std::vector<CurvePoint> one{p};
  const fs::path path = scratch("curves.csv");
  emit_curves(one, CurveFormat::Csv, path);
  CHECK(read_file(path) == format_curves(one, CurveFormat::Csv));
  CHECK_THROWS_AS(emit_curves({}, CurveFormat::Csv, scratch("empty.csv")), Error);
  CHECK_THROWS_AS(emit_curves(one, CurveFormat::Csv, scratch("no/such/dir/x.csv")), Error);
}

TEST_CASE("final points and win rates") {
  const std::vector<CurvePoint> points{
      {Algorithm::Pr, 1, 0, 0, 0.9, 0.0},   {Algorithm::Pr, 1, 1, 10, 0.3, 0.0},
      {Algorithm::Pr, 2, 0, 0, 0.9, 0.0},   {Algorithm::Pr, 2, 1, 10, 0.2, 0.0},
      {Algorithm::Pgd, 1, 0, 0, 0.9, 0.0},  {Algorithm::Pgd, 1, 1, 15, 0.4, 0.0},
      {Algorithm::Pgd, 2, 0, 0, 0.9, 0.0},  {Algorithm::Pgd, 2, 1, 15, 0.1, 0.0},
  };
  const auto finals = final_points(points);
  REQUIRE(finals.size() == 4);
  const auto rates = win_rates(finals);
  bool found = false;
  for (const WinRate& w : rates) {
    if (w.winner == Algorithm::Pr && w.loser == Algorithm::Pgd) {
      found = true;
      CHECK(w.wins == 1);
      CHECK(w.seeds == 2);
    }
  }
  CHECK(found);
  const std::string summary = summarize_curves(points);
  CHECK(summary.find("win_rate pr < pgd: 1/2") != std::string::npos);
}

TEST_CASE("configs round-trip through JSON") {
  ExperimentConfig c = small_config();
  c.query_budget = 12345;
  c.instance_seed = 4;
  c.iterations[Algorithm::Pgd] = 30;
  c.format = CurveFormat::Json;
  const ExperimentConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.iterations_for(Algorithm::Pgd) == 30);
  CHECK(back.iterations_for(Algorithm::Pr) == 16);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"bogus", 1}}), Error);
  CHECK_THROWS_AS(validate([] {
                    ExperimentConfig e;
                    e.algorithms.clear();
                    return e;
                  }()),
                  Error);
}
