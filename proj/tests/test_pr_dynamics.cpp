#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "fisher/error.hpp"
#include "fisher/harness.hpp"
#include "fisher/pr_dynamics.hpp"
#include "oracles.hpp"

using namespace fisher;

namespace {

MarketInstance make(std::vector<double> budgets, std::size_t m, std::vector<double> values) {
  const std::size_t n = budgets.size();
  return validate_market(std::move(budgets), Matrix(n, m, std::move(values)));
}

MarketInstance diagonal_market() { return make({0.5, 0.5}, 2, {1.0, 0.5, 0.5, 1.0}); }

double rel_slack(double x) { return 1e-9 * std::max(1.0, std::abs(x)); }

}  // namespace

TEST_CASE("pr_step keeps the symmetric single-buyer market fixed") {
  const auto market = make({1.0}, 2, {1.0, 1.0});
  const BidMatrix next = pr_step(market, BidMatrix{Matrix(1, 2, 0.5)});
  CHECK(next(0, 0) == 0.5);
  CHECK(next(0, 1) == 0.5);
}

TEST_CASE("pr_step with one good spends every budget on it") {
  const auto market = make({0.2, 0.3, 0.5}, 1, {0.4, 0.9, 0.1});
  BidMatrix b = uniform_init(market);
  for (int t = 0; t < 5; ++t) b = pr_step(market, b);
  CHECK(b(0, 0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(b(1, 0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(b(2, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("pr_step on the 2x2 diagonal market") {
  const auto market = diagonal_market();
  const BidMatrix next = pr_step(market, uniform_init(market));
  CHECK(std::abs(next(0, 0) - 1.0 / 3.0) <= 1e-15);
  CHECK(std::abs(next(0, 1) - 1.0 / 6.0) <= 1e-15);
  CHECK(std::abs(next(1, 0) - 1.0 / 6.0) <= 1e-15);
  CHECK(std::abs(next(1, 1) - 1.0 / 3.0) <= 1e-15);
}

TEST_CASE("pr_step matches the term-by-term oracle and conserves budgets") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto market = oracle::random_market(2 + seed % 7, 2 + seed % 5, seed);
    const BidMatrix b = oracle::random_feasible_bids(market, seed);
    const BidMatrix next = pr_step(market, b);
    const Matrix expected =
        oracle::pr_update(oracle::to_vector(market.budgets()), market.values(), b.entries);
    for (std::size_t k = 0; k < expected.size(); ++k) {
      CHECK(std::abs(next.entries.flat()[k] - expected.flat()[k]) <= 1e-15);
      CHECK(next.entries.flat()[k] > 0.0);
    }
    for (std::size_t i = 0; i < market.buyers(); ++i) {
      CHECK(std::abs(next.row_sum(i) - market.budget(i)) <= 1e-9 * market.budget(i));
    }
  }
}

TEST_CASE("one PR step lands below the EG value plus budget entropy") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto market = oracle::random_market(1 + seed % 6, 1 + seed % 8, seed);
    const BidMatrix b = oracle::random_feasible_bids(market, seed + 5);
    const double lhs = shmyrev_objective(market, pr_step(market, b));
    const double rhs = eg_objective(market, b) + budget_entropy(market);
    CHECK(lhs <= rhs + 1e-12);
  }
}

TEST_CASE("pr_step errors") {
  const auto market = diagonal_market();
  BidMatrix b{Matrix(2, 2, 0.0)};
  b(0, 0) = 0.5;
  b(1, 0) = 0.5;
  CHECK_THROWS_AS(pr_step(market, b), Error);
  try {
    pr_step(market, b);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroPrice);
  }
  CHECK_THROWS_AS(pr_run(market, 0), Error);
}

TEST_CASE("pr_run with one iteration") {
  const auto market = oracle::random_market(4, 5, 11);
  const RunTrace trace = pr_run(market, 1);
  REQUIRE(trace.points.size() == 2);
  CHECK(trace.points[0].iteration == 0);
  CHECK(trace.points[1].iteration == 1);
  CHECK(trace.points[1].phi <= trace.points[0].phi);
  CHECK(trace.points[0].queries == 0);
  CHECK(trace.points[1].queries == 2 * 4 * 5);
}

TEST_CASE("PR trajectories are monotone, sandwiched and budget-conserving") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto market = gen_market(12 + seed, 9 + 2 * seed, ValueDistribution::Uniform,
                                   seed % 2 ? BudgetMode::Sampled : BudgetMode::CeeiEqual, seed);
    const RunTrace trace = pr_run(market, 40);
    const double entropy = budget_entropy(market);
    for (std::size_t t = 0; t + 1 < trace.points.size(); ++t) {
      const TracePoint& now = trace.points[t];
      const TracePoint& next = trace.points[t + 1];
      CHECK(next.iteration == now.iteration + 1);
      CHECK(next.queries >= now.queries);
      CHECK(next.phi <= now.phi + rel_slack(now.phi));
      CHECK(next.psi <= now.psi + rel_slack(now.psi));
      CHECK(next.psi <= now.phi + entropy + rel_slack(now.phi));
      CHECK(now.phi + entropy <= now.psi + rel_slack(now.psi));
    }
    for (std::size_t i = 0; i < market.buyers(); ++i) {
      CHECK(std::abs(trace.final_bids.row_sum(i) - market.budget(i)) <= 1e-9 * market.budget(i));
    }
  }
}

TEST_CASE("PR on a seeded 256x256 market meets the log m / T bound") {
  const auto market =
      gen_market(256, 256, ValueDistribution::Uniform, BudgetMode::CeeiEqual, 2024);
  const ReferenceOptimum ref = reference_optimum(market);
  const RunTrace trace = pr_run(market, 16);
  CHECK(trace.points[15].phi - ref.phi <= std::log(256.0) / 16.0);
  CHECK(trace.points[16].phi - ref.phi <= std::log(256.0) / 17.0);
}

TEST_CASE("reference_optimum for a single buyer") {
  const auto market = make({1.0}, 2, {1.0, 1.0});
  const ReferenceOptimum ref = reference_optimum(market, 10);
  CHECK(ref.phi == doctest::Approx(-std::numbers::ln2).epsilon(1e-14));
  CHECK(ref.iterations == 10);
}

TEST_CASE("reference_optimum on the 2x2 market agrees with a grid search") {
  const auto market = diagonal_market();
  const ReferenceOptimum ref = reference_optimum(market);

  // Feasible bids are b = [[s, 1/2 - s], [r, 1/2 - r]].
  double grid_best = std::numeric_limits<double>::infinity();
  const int steps = 500;
  for (int a = 1; a < steps; ++a) {
    for (int c = 1; c < steps; ++c) {
      const double s = 0.5 * a / steps;
      const double r = 0.5 * c / steps;
      Matrix b(2, 2, std::vector<double>{s, 0.5 - s, r, 0.5 - r});
      grid_best = std::min(grid_best, oracle::eg({0.5, 0.5}, market.values(), b));
    }
  }
  CHECK(ref.phi <= grid_best + 1e-12);
  CHECK(ref.phi >= grid_best - 5e-3);
  CHECK(ref.bids(0, 0) > 0.49);
  CHECK(ref.bids(1, 1) > 0.49);
}

TEST_CASE("reference value is below every earlier iterate") {
  const auto market = oracle::random_market(6, 8, 4);
  const ReferenceOptimum ref = reference_optimum(market, 300);
  const RunTrace trace = pr_run(market, 300);
  for (const TracePoint& p : trace.points) CHECK(ref.phi <= p.phi + 1e-15);
  CHECK(ref.phi == trace.points.back().phi);
}
