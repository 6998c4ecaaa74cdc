#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fisher/market.hpp"
#include "fisher/pr_dynamics.hpp"

namespace fisher {

struct PgdConfig {
  /// Fixed step size; nullopt selects auto_learning_rate.
  std::optional<double> learning_rate;
  std::size_t iterations = 16;
};

/// 1000 / (L n) with L = 1 / min_j p_j^(0) taken at the uniform bids.
double auto_learning_rate(const MarketInstance& market);

/// Gradient of the Shmyrev objective, g_ij = 1 + log(p_j / v_ij). With
/// ZeroPricePolicy::Unsold an unsold good is priced at the smallest normal
/// double, which makes it the steepest descent direction instead of -inf.
Matrix shmyrev_gradient(const MarketInstance& market, const BidMatrix& bids,
                        ZeroPricePolicy policy = ZeroPricePolicy::Reject);

/// Euclidean projection onto {x >= 0 : sum x = budget} by sorting and
/// thresholding.
std::vector<double> project_simplex(std::span<const double> r, double budget);

/// r = b - step * gradient, then each row projected onto its budget simplex.
BidMatrix pgd_step(const MarketInstance& market, const BidMatrix& bids, double step);

/// Reads charged per PGD iteration: prices and gradient (2mn) plus the
/// projection pass (mn).
std::uint64_t pgd_queries_per_iteration(const MarketInstance& market) noexcept;

using TraceSink = std::function<void(const TracePoint&)>;

/// Fixed-step projected gradient descent from the uniform bids. Objectives of
/// iterates with unsold goods are evaluated with those goods unallocated.
RunTrace pgd_run(const MarketInstance& market, const PgdConfig& config,
                 const TraceSink& sink = {});

}  // namespace fisher
