#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fisher/estimators.hpp"
#include "fisher/market.hpp"
#include "fisher/pr_dynamics.hpp"

namespace fisher {

/// Running coordinatewise products of the estimated prices and utilities,
/// (Pi_p)_j = prod_k p~_j^(k) and (Pi_nu)_i = prod_k nu~_i^(k). Stored as
/// logarithms because the products underflow after a few dozen iterations.
/// A fresh accumulator is the empty product (iteration -1 on both sides).
/// The price side may run one iteration ahead of the utility side, matching
/// the order in which the estimates become available within an iteration.
class ProductAccumulator {
public:
  ProductAccumulator() = default;
  ProductAccumulator(std::size_t goods, std::size_t buyers);

  std::size_t goods() const noexcept { return log_pi_p_.size(); }
  std::size_t buyers() const noexcept { return log_pi_nu_.size(); }

  /// Last iteration folded into the price / utility products (-1 if none).
  std::ptrdiff_t price_iteration() const noexcept { return price_t_; }
  std::ptrdiff_t utility_iteration() const noexcept { return utility_t_; }

  double log_pi_p(std::size_t j) const noexcept { return log_pi_p_[j]; }
  double log_pi_nu(std::size_t i) const noexcept { return log_pi_nu_[i]; }
  double pi_p(std::size_t j) const;
  double pi_nu(std::size_t i) const;

  void accumulate_prices(std::span<const double> prices);
  void accumulate_utilities(std::span<const double> utilities);

private:
  std::vector<double> log_pi_p_;
  std::vector<double> log_pi_nu_;
  std::ptrdiff_t price_t_ = -1;
  std::ptrdiff_t utility_t_ = -1;
};

/// Folds one iteration's estimates into both products.
ProductAccumulator accumulate(ProductAccumulator acc, std::span<const double> prices,
                              std::span<const double> utilities);

/// Closed-form faulty iterate
///   b^(t)_ij = B_i^(t+1) v_ij^t / (m (Pi_p^(t-1))_j (Pi_nu^(t-1))_i),
/// evaluated in log space. `acc` must hold both products through t - 1.
double on_the_fly_bid(const MarketInstance& market, std::size_t i, std::size_t j,
                      std::size_t t, const ProductAccumulator& acc);

/// Closed-form allocation x^(t)_ij = b^(t)_ij / p~_j^(t). `acc` must hold
/// the price product through t and the utility product through t - 1.
double on_the_fly_alloc(const MarketInstance& market, std::size_t i, std::size_t j,
                        std::size_t t, const ProductAccumulator& acc);

/// Materializes b^(t) from an accumulator holding products through t - 1.
BidMatrix reconstruct_bids(const MarketInstance& market, std::size_t t,
                           const ProductAccumulator& acc);

/// Supplies nu~_i given buyer i and the exact nu^_i = sum_j v_ij b_ij / p~_j.
using UtilityEstimator = std::function<double(std::size_t buyer, double exact)>;

struct FprStepResult {
  BidMatrix bids;
  std::vector<double> utilities;  // the nu~ used for the update
};

/// Faulty proportional response update with caller-supplied price estimates.
/// Throws NonPositiveEstimate for any p~_j <= 0 or nu~_i <= 0.
FprStepResult fpr_step(const MarketInstance& market, const BidMatrix& bids,
                       std::span<const double> prices, const UtilityEstimator& utility);

struct FprIterateRecord {
  std::size_t t = 0;
  std::vector<double> prices;     // p~^(t)
  std::vector<double> utilities;  // nu~^(t)
  double phi_estimate = 0.0;      // -sum_i B_i log nu~_i^(t)
  double phi_true = 0.0;          // Phi(b^(t)), instrumentation only
  double psi_true = 0.0;
  std::uint64_t queries = 0;      // cumulative, after this iteration's estimates

  /// sum_i B_i log nu~_i^(t); larger is better.
  double score() const noexcept { return -phi_estimate; }
};

/// Index of the record maximizing sum_i B_i log nu~_i, earliest on ties.
/// Throws EmptyTrace.
std::size_t select_best_iterate(std::span<const FprIterateRecord> records);

struct FprRunResult {
  std::size_t best_t = 0;
  BidMatrix best_bids;                    // reconstructed from best_snapshot
  ProductAccumulator best_snapshot;       // products through best_t - 1
  std::vector<FprIterateRecord> records;  // t = 0 .. T-1
  RunTrace trace;                         // exact objectives of b^(0) .. b^(T)
};

/// T faulty updates from the uniform bids with synthetic per-coordinate
/// noise. Charged like exact PR (2mn reads per iteration).
FprRunResult fpr_run(const MarketInstance& market, std::size_t iterations,
                     const EstimatorConfig& config, std::uint64_t seed);

enum class QueryAccounting { Classical, Quantum };

/// Queries charged per simulated quantum iteration: one boosted estimate per
/// good and per buyer, plus the maximum scans (L reads classically, ceil(sqrt L)
/// for quantum maximum finding).
std::uint64_t qfpr_queries_per_iteration(const MarketInstance& market, const QaeParams& params,
                                         QueryAccounting accounting) noexcept;

struct QfprRunResult {
  std::size_t best_t = 0;
  ProductAccumulator best_snapshot;  // products through best_t - 1
  std::vector<FprIterateRecord> records;
  RunTrace trace;                    // exact objectives of b^(0) .. b^(T)
  std::uint64_t floored_estimates = 0;
  std::uint64_t queries_per_iteration = 0;
};

/// Classical simulation of the quantum FPR algorithm. Bids and allocations
/// are only ever read through the closed form; prices and utilities come
/// from simulated amplitude estimation.
QfprRunResult qfpr_run(const MarketInstance& market, std::size_t iterations,
                       const QaeParams& params, std::uint64_t seed,
                       QueryAccounting accounting = QueryAccounting::Quantum);

}  // namespace fisher
