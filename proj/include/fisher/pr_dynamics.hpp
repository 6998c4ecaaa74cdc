#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fisher/market.hpp"

namespace fisher {

struct TracePoint {
  std::size_t iteration = 0;
  double phi = 0.0;
  double psi = 0.0;
  std::uint64_t queries = 0;  // cumulative bid-entry reads charged so far
};

struct RunTrace {
  std::vector<TracePoint> points;
  BidMatrix final_bids;
};

/// Bid-entry reads charged per proportional response iteration: one pass over
/// the matrix for prices and one for utilities.
std::uint64_t pr_queries_per_iteration(const MarketInstance& market) noexcept;

/// One proportional response update b_ij <- B_i v_ij x_ij / u_i.
BidMatrix pr_step(const MarketInstance& market, const BidMatrix& bids);

/// `iterations` PR updates from the uniform bids. The trace holds iterations
/// 0..iterations inclusive.
RunTrace pr_run(const MarketInstance& market, std::size_t iterations);

inline constexpr std::size_t kDefaultReferenceIterations = 1000;

struct ReferenceOptimum {
  BidMatrix bids;
  double phi = 0.0;
  std::size_t iterations = 0;
};

/// Long PR run used as the stand-in for the equilibrium value.
ReferenceOptimum reference_optimum(const MarketInstance& market,
                                   std::size_t iterations = kDefaultReferenceIterations);

}  // namespace fisher
