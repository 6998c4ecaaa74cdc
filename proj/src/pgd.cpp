#include "fisher/pgd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "fisher/error.hpp"

namespace fisher {

double auto_learning_rate(const MarketInstance& market) {
  const std::vector<double> prices = column_sums(uniform_init(market));
  const double min_price = *std::min_element(prices.begin(), prices.end());
  const double lipschitz = 1.0 / min_price;
  return 1000.0 / (lipschitz * static_cast<double>(market.buyers()));
}

Matrix shmyrev_gradient(const MarketInstance& market, const BidMatrix& bids,
                        ZeroPricePolicy policy) {
  if (bids.buyers() != market.buyers() || bids.goods() != market.goods()) {
    throw Error(ErrorCode::DimensionMismatch, "bid matrix does not match market dimensions");
  }
  std::vector<double> prices = column_sums(bids);
  for (double& p : prices) {
    if (p > 0.0) continue;
    if (policy == ZeroPricePolicy::Reject) {
      throw Error(ErrorCode::ZeroPrice, "gradient undefined at a zero price");
    }
    p = std::numeric_limits<double>::min();
  }
  Matrix grad(market.buyers(), market.goods());
  for (std::size_t i = 0; i < market.buyers(); ++i) {
    for (std::size_t j = 0; j < market.goods(); ++j) {
      grad(i, j) = 1.0 + std::log(prices[j] / market.value(i, j));
    }
  }
  return grad;
}

std::vector<double> project_simplex(std::span<const double> r, double budget) {
  std::vector<double> sorted(r.begin(), r.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // Largest k with sorted[k-1] - (prefix_k - budget) / k > 0.
  double prefix = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    prefix += sorted[k];
    const double candidate = (prefix - budget) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) tau = candidate;
  }
  std::vector<double> x(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) x[k] = std::max(r[k] - tau, 0.0);
  return x;
}

BidMatrix pgd_step(const MarketInstance& market, const BidMatrix& bids, double step) {
  if (!(step >= 0.0)) throw Error(ErrorCode::DomainError, "step size must be nonnegative");
  if (step == 0.0) return bids;
  const Matrix grad = shmyrev_gradient(market, bids, ZeroPricePolicy::Unsold);
  BidMatrix next{Matrix(market.buyers(), market.goods())};
  std::vector<double> r(market.goods());
  for (std::size_t i = 0; i < market.buyers(); ++i) {
    for (std::size_t j = 0; j < market.goods(); ++j) r[j] = bids(i, j) - step * grad(i, j);
    const std::vector<double> projected = project_simplex(r, market.budget(i));
    std::copy(projected.begin(), projected.end(), next.entries.row(i).begin());
  }
  return next;
}

std::uint64_t pgd_queries_per_iteration(const MarketInstance& market) noexcept {
  return 3ull * market.buyers() * market.goods();
}

RunTrace pgd_run(const MarketInstance& market, const PgdConfig& config, const TraceSink& sink) {
  if (config.iterations == 0) {
    throw Error(ErrorCode::DomainError, "PGD run needs at least one iteration");
  }
  const double step = config.learning_rate ? *config.learning_rate : auto_learning_rate(market);
  if (!(step > 0.0)) throw Error(ErrorCode::DomainError, "learning rate must be positive");
  const std::uint64_t per_iteration = pgd_queries_per_iteration(market);

  RunTrace trace;
  BidMatrix bids = uniform_init(market);
  for (std::size_t t = 0;; ++t) {
    const ObjectiveReport obj = evaluate_objectives(market, bids, ZeroPricePolicy::Unsold);
    const TracePoint point{t, obj.eg_value, obj.shmyrev_value, per_iteration * t};
    trace.points.push_back(point);
    if (sink) sink(point);
    if (t == config.iterations) break;
    bids = pgd_step(market, bids, step);
  }
  trace.final_bids = std::move(bids);
  return trace;
}

}  // namespace fisher
