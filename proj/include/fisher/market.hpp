#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fisher/matrix.hpp"

namespace fisher {

/// Linear Fisher market: n buyers with budgets on the probability simplex and
/// an n x m matrix of values in (0, 1]. Only constructible through
/// validate_market, so every instance satisfies those preconditions.
class MarketInstance {
public:
  std::size_t buyers() const noexcept { return budgets_.size(); }
  std::size_t goods() const noexcept { return values_.cols(); }

  std::span<const double> budgets() const noexcept { return budgets_; }
  double budget(std::size_t i) const noexcept { return budgets_[i]; }
  const Matrix& values() const noexcept { return values_; }
  double value(std::size_t i, std::size_t j) const noexcept { return values_(i, j); }

  friend bool operator==(const MarketInstance&, const MarketInstance&) = default;

private:
  MarketInstance(std::vector<double> budgets, Matrix values)
      : budgets_(std::move(budgets)), values_(std::move(values)) {}

  friend MarketInstance validate_market(std::vector<double> budgets, Matrix values);

  std::vector<double> budgets_;
  Matrix values_;
};

/// Tolerance on |sum(B) - 1| accepted by validate_market.
inline constexpr double kBudgetSimplexTolerance = 1e-9;

/// Checks dimensions, budget simplex membership and 0 < v_ij <= 1.
/// Throws Error with DimensionMismatch, NonPositiveValue, BudgetNotSimplex or
/// DomainError (value above 1; callers rescale first).
MarketInstance validate_market(std::vector<double> budgets, Matrix values);

/// Bids b_ij placed by buyer i on good j.
struct BidMatrix {
  Matrix entries;

  std::size_t buyers() const noexcept { return entries.rows(); }
  std::size_t goods() const noexcept { return entries.cols(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return entries(i, j); }
  double& operator()(std::size_t i, std::size_t j) noexcept { return entries(i, j); }

  double row_sum(std::size_t i) const noexcept;
  double total() const noexcept;

  friend bool operator==(const BidMatrix&, const BidMatrix&) = default;
};

/// Prices, allocations and utilities implied by a bid matrix.
struct DerivedState {
  std::vector<double> prices;
  Matrix allocations;
  std::vector<double> utilities;
};

struct ObjectiveReport {
  double eg_value = 0.0;
  double shmyrev_value = 0.0;
  double budget_entropy_term = 0.0;
};

/// How a good nobody bids on is treated. Reject raises ZeroPrice; Unsold
/// leaves the good unallocated (x_ij = 0) and drops it from the Shmyrev sum.
/// PR and FPR iterates never produce zero prices; projected gradient can.
enum class ZeroPricePolicy { Reject, Unsold };

/// b_ij = B_i / m.
BidMatrix uniform_init(const MarketInstance& market);

/// Column sums, accumulated in buyer order for every column.
std::vector<double> column_sums(const BidMatrix& bids);

DerivedState derive_state(const MarketInstance& market, const BidMatrix& bids,
                          ZeroPricePolicy policy = ZeroPricePolicy::Reject);

/// Phi(b) = -sum_i B_i log u_i.
double eg_objective(const MarketInstance& market, const BidMatrix& bids,
                    ZeroPricePolicy policy = ZeroPricePolicy::Reject);

/// Psi(b) = sum_ij b_ij log(p_j / v_ij), with 0 log(.) = 0.
double shmyrev_objective(const MarketInstance& market, const BidMatrix& bids,
                         ZeroPricePolicy policy = ZeroPricePolicy::Reject);

/// sum_i B_i log B_i.
double budget_entropy(const MarketInstance& market);

ObjectiveReport evaluate_objectives(const MarketInstance& market, const BidMatrix& bids,
                                    ZeroPricePolicy policy = ZeroPricePolicy::Reject);

/// D(u || w) = sum u_ij log(u_ij / w_ij) with 0 log 0 = 0.
double kl_divergence(const Matrix& u, const Matrix& w);

}  // namespace fisher
