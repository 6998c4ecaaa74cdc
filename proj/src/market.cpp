#include "fisher/market.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "fisher/error.hpp"

namespace fisher {
namespace {

// x log(x / y) with the 0 log(.) = 0 limit.
double xlogx_over(double x, double y) { return x > 0.0 ? x * std::log(x / y) : 0.0; }

}  // namespace

MarketInstance validate_market(std::vector<double> budgets, Matrix values) {
  if (budgets.empty() || values.cols() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "market needs at least one buyer and one good");
  }
  if (budgets.size() != values.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(budgets.size()) + " budgets for " +
                    std::to_string(values.rows()) + " value rows");
  }
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (!(budgets[i] > 0.0) || !std::isfinite(budgets[i])) {
      throw Error(ErrorCode::NonPositiveValue, "budget " + std::to_string(i) + " is not positive");
    }
  }
  const double total = std::accumulate(budgets.begin(), budgets.end(), 0.0);
  if (std::abs(total - 1.0) > kBudgetSimplexTolerance) {
    throw Error(ErrorCode::BudgetNotSimplex, "budgets sum to " + std::to_string(total));
  }
  for (std::size_t i = 0; i < values.rows(); ++i) {
    for (std::size_t j = 0; j < values.cols(); ++j) {
      const double v = values(i, j);
      if (!(v > 0.0)) {
        throw Error(ErrorCode::NonPositiveValue,
                    "value (" + std::to_string(i) + ", " + std::to_string(j) + ") is not positive");
      }
      if (!(v <= 1.0)) {
        throw Error(ErrorCode::DomainError,
                    "value (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") exceeds 1; rescale by the maximum first");
      }
    }
  }
  return MarketInstance(std::move(budgets), std::move(values));
}

double BidMatrix::row_sum(std::size_t i) const noexcept {
  double s = 0.0;
  for (double b : entries.row(i)) s += b;
  return s;
}

double BidMatrix::total() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < buyers(); ++i) s += row_sum(i);
  return s;
}

BidMatrix uniform_init(const MarketInstance& market) {
  const std::size_t n = market.buyers();
  const std::size_t m = market.goods();
  BidMatrix bids{Matrix(n, m)};
  for (std::size_t i = 0; i < n; ++i) {
    const double share = market.budget(i) / static_cast<double>(m);
    for (double& b : bids.entries.row(i)) b = share;
  }
  return bids;
}

std::vector<double> column_sums(const BidMatrix& bids) {
  std::vector<double> sums(bids.goods(), 0.0);
  for (std::size_t i = 0; i < bids.buyers(); ++i) {
    const auto row = bids.entries.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) sums[j] += row[j];
  }
  return sums;
}

namespace {

void check_shape(const MarketInstance& market, const BidMatrix& bids) {
  if (bids.buyers() != market.buyers() || bids.goods() != market.goods()) {
    throw Error(ErrorCode::DimensionMismatch, "bid matrix does not match market dimensions");
  }
}

void check_prices(std::span<const double> prices, ZeroPricePolicy policy) {
  if (policy == ZeroPricePolicy::Unsold) return;
  for (std::size_t j = 0; j < prices.size(); ++j) {
    if (!(prices[j] > 0.0)) {
      throw Error(ErrorCode::ZeroPrice, "good " + std::to_string(j) + " has zero price");
    }
  }
}

}  // namespace

DerivedState derive_state(const MarketInstance& market, const BidMatrix& bids,
                          ZeroPricePolicy policy) {
  check_shape(market, bids);
  DerivedState state;
  state.prices = column_sums(bids);
  check_prices(state.prices, policy);

  const std::size_t n = market.buyers();
  const std::size_t m = market.goods();
  state.allocations = Matrix(n, m);
  state.utilities.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double u = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double p = state.prices[j];
      const double x = p > 0.0 ? bids(i, j) / p : 0.0;
      state.allocations(i, j) = x;
      u += market.value(i, j) * x;
    }
    state.utilities[i] = u;
  }
  return state;
}

double eg_objective(const MarketInstance& market, const BidMatrix& bids, ZeroPricePolicy policy) {
  const DerivedState state = derive_state(market, bids, policy);
  double phi = 0.0;
  for (std::size_t i = 0; i < market.buyers(); ++i) {
    const double u = state.utilities[i];
    if (!(u > 0.0)) {
      throw Error(ErrorCode::NonPositiveUtility,
                  "buyer " + std::to_string(i) + " has nonpositive utility");
    }
    phi -= market.budget(i) * std::log(u);
  }
  return phi;
}

double shmyrev_objective(const MarketInstance& market, const BidMatrix& bids,
                         ZeroPricePolicy policy) {
  check_shape(market, bids);
  const std::vector<double> prices = column_sums(bids);
  check_prices(prices, policy);
  double psi = 0.0;
  for (std::size_t i = 0; i < market.buyers(); ++i) {
    for (std::size_t j = 0; j < market.goods(); ++j) {
      const double b = bids(i, j);
      if (b > 0.0) psi += b * std::log(prices[j] / market.value(i, j));
    }
  }
  return psi;
}

double budget_entropy(const MarketInstance& market) {
  double s = 0.0;
  for (double b : market.budgets()) s += b * std::log(b);
  return s;
}

ObjectiveReport evaluate_objectives(const MarketInstance& market, const BidMatrix& bids,
                                    ZeroPricePolicy policy) {
  return {eg_objective(market, bids, policy), shmyrev_objective(market, bids, policy),
          budget_entropy(market)};
}

double kl_divergence(const Matrix& u, const Matrix& w) {
  if (!u.same_shape(w)) throw Error(ErrorCode::ShapeMismatch, "KL operands differ in shape");
  const auto uf = u.flat();
  const auto wf = w.flat();
  double d = 0.0;
  for (std::size_t k = 0; k < uf.size(); ++k) {
    if (uf[k] > 0.0 && !(wf[k] > 0.0)) {
      throw Error(ErrorCode::SupportViolation,
                  "reference has zero mass where the first argument is positive");
    }
    d += xlogx_over(uf[k], wf[k]);
  }
  return d;
}

}  // namespace fisher
