#include "fisher/pr_dynamics.hpp"

#include <string>

#include "fisher/error.hpp"

namespace fisher {

std::uint64_t pr_queries_per_iteration(const MarketInstance& market) noexcept {
  return 2ull * market.buyers() * market.goods();
}

BidMatrix pr_step(const MarketInstance& market, const BidMatrix& bids) {
  if (bids.buyers() != market.buyers() || bids.goods() != market.goods()) {
    throw Error(ErrorCode::DimensionMismatch, "bid matrix does not match market dimensions");
  }
  const std::size_t n = market.buyers();
  const std::size_t m = market.goods();
  const std::vector<double> prices = column_sums(bids);
  for (std::size_t j = 0; j < m; ++j) {
    if (!(prices[j] > 0.0)) {
      throw Error(ErrorCode::ZeroPrice, "good " + std::to_string(j) + " has zero price");
    }
  }

  BidMatrix next{Matrix(n, m)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = bids.entries.row(i);
    const auto v = market.values().row(i);
    auto out = next.entries.row(i);
    double utility = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      out[j] = b[j] / prices[j];
      utility += v[j] * out[j];
    }
    if (!(utility > 0.0)) {
      throw Error(ErrorCode::NonPositiveUtility,
                  "buyer " + std::to_string(i) + " has nonpositive utility");
    }
    const double budget = market.budget(i);
    for (std::size_t j = 0; j < m; ++j) out[j] = budget * v[j] * out[j] / utility;
  }
  return next;
}

RunTrace pr_run(const MarketInstance& market, std::size_t iterations) {
  if (iterations == 0) throw Error(ErrorCode::DomainError, "PR run needs at least one iteration");
  const std::uint64_t per_iteration = pr_queries_per_iteration(market);

  RunTrace trace;
  trace.points.reserve(iterations + 1);
  BidMatrix bids = uniform_init(market);
  for (std::size_t t = 0;; ++t) {
    const ObjectiveReport obj = evaluate_objectives(market, bids);
    trace.points.push_back({t, obj.eg_value, obj.shmyrev_value, per_iteration * t});
    if (t == iterations) break;
    bids = pr_step(market, bids);
  }
  trace.final_bids = std::move(bids);
  return trace;
}

ReferenceOptimum reference_optimum(const MarketInstance& market, std::size_t iterations) {
  if (iterations == 0) {
    throw Error(ErrorCode::DomainError, "reference run needs at least one iteration");
  }
  BidMatrix bids = uniform_init(market);
  for (std::size_t t = 0; t < iterations; ++t) bids = pr_step(market, bids);
  const double phi = eg_objective(market, bids);
  return {std::move(bids), phi, iterations};
}

}  // namespace fisher
