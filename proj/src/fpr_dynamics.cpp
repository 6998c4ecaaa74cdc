#include "fisher/fpr_dynamics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fisher/error.hpp"

namespace fisher {
namespace {

void check_positive(std::span<const double> estimates, const char* what) {
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    if (!(estimates[k] > 0.0)) {
      throw Error(ErrorCode::NonPositiveEstimate,
                  std::string(what) + " estimate " + std::to_string(k) + " is not positive");
    }
  }
}

// B^(t+1) v^t / (m Pi_p Pi_nu) from logarithms. Every closed-form read goes
// through here so cached and uncached callers agree bitwise.
double closed_form(double log_budget, double log_value, double log_goods, double log_pi_p,
                   double log_pi_nu, std::size_t t) {
  const double td = static_cast<double>(t);
  return std::exp((td + 1.0) * log_budget + td * log_value - log_goods - log_pi_p - log_pi_nu);
}

void check_indices(const MarketInstance& market, std::size_t i, std::size_t j) {
  if (i >= market.buyers() || j >= market.goods()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "entry (" + std::to_string(i) + ", " + std::to_string(j) + ") outside market");
  }
}

void check_accumulator(const MarketInstance& market, const ProductAccumulator& acc,
                       std::ptrdiff_t price_t, std::ptrdiff_t utility_t) {
  if (acc.goods() != market.goods() || acc.buyers() != market.buyers()) {
    throw Error(ErrorCode::DimensionMismatch, "accumulator does not match market dimensions");
  }
  if (acc.price_iteration() != price_t || acc.utility_iteration() != utility_t) {
    throw Error(ErrorCode::DomainError,
                "accumulator holds products through (" + std::to_string(acc.price_iteration()) +
                    ", " + std::to_string(acc.utility_iteration()) + "), expected (" +
                    std::to_string(price_t) + ", " + std::to_string(utility_t) + ")");
  }
}

// Logarithms of the inputs, computed once per run.
struct LogMarket {
  explicit LogMarket(const MarketInstance& market)
      : log_goods(std::log(static_cast<double>(market.goods()))),
        log_budgets(market.buyers()),
        log_values(market.buyers(), market.goods()) {
    for (std::size_t i = 0; i < market.buyers(); ++i) {
      log_budgets[i] = std::log(market.budget(i));
      for (std::size_t j = 0; j < market.goods(); ++j) {
        log_values(i, j) = std::log(market.value(i, j));
      }
    }
  }

  double bid(std::size_t i, std::size_t j, std::size_t t, const ProductAccumulator& acc) const {
    return closed_form(log_budgets[i], log_values(i, j), log_goods, acc.log_pi_p(j),
                       acc.log_pi_nu(i), t);
  }

  double log_goods;
  std::vector<double> log_budgets;
  Matrix log_values;
};

BidMatrix materialize(const LogMarket& logs, std::size_t t, const ProductAccumulator& acc) {
  const std::size_t n = logs.log_values.rows();
  const std::size_t m = logs.log_values.cols();
  BidMatrix bids{Matrix(n, m)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) bids(i, j) = logs.bid(i, j, t, acc);
  }
  return bids;
}

double phi_estimate(const MarketInstance& market, std::span<const double> utilities) {
  double s = 0.0;
  for (std::size_t i = 0; i < market.buyers(); ++i) {
    s += market.budget(i) * std::log(utilities[i]);
  }
  return -s;
}

}  // namespace

ProductAccumulator::ProductAccumulator(std::size_t goods, std::size_t buyers)
    : log_pi_p_(goods, 0.0), log_pi_nu_(buyers, 0.0) {}

double ProductAccumulator::pi_p(std::size_t j) const { return std::exp(log_pi_p_.at(j)); }
double ProductAccumulator::pi_nu(std::size_t i) const { return std::exp(log_pi_nu_.at(i)); }

void ProductAccumulator::accumulate_prices(std::span<const double> prices) {
  if (prices.size() != log_pi_p_.size()) {
    throw Error(ErrorCode::LengthMismatch, "price estimate vector has the wrong length");
  }
  check_positive(prices, "price");
  for (std::size_t j = 0; j < prices.size(); ++j) log_pi_p_[j] += std::log(prices[j]);
  ++price_t_;
}

void ProductAccumulator::accumulate_utilities(std::span<const double> utilities) {
  if (utilities.size() != log_pi_nu_.size()) {
    throw Error(ErrorCode::LengthMismatch, "utility estimate vector has the wrong length");
  }
  check_positive(utilities, "utility");
  for (std::size_t i = 0; i < utilities.size(); ++i) log_pi_nu_[i] += std::log(utilities[i]);
  ++utility_t_;
}

ProductAccumulator accumulate(ProductAccumulator acc, std::span<const double> prices,
                              std::span<const double> utilities) {
  check_positive(prices, "price");
  check_positive(utilities, "utility");
  acc.accumulate_prices(prices);
  acc.accumulate_utilities(utilities);
  return acc;
}

double on_the_fly_bid(const MarketInstance& market, std::size_t i, std::size_t j,
                      std::size_t t, const ProductAccumulator& acc) {
  check_indices(market, i, j);
  const auto prev = static_cast<std::ptrdiff_t>(t) - 1;
  check_accumulator(market, acc, prev, prev);
  return closed_form(std::log(market.budget(i)), std::log(market.value(i, j)),
                     std::log(static_cast<double>(market.goods())), acc.log_pi_p(j),
                     acc.log_pi_nu(i), t);
}

double on_the_fly_alloc(const MarketInstance& market, std::size_t i, std::size_t j,
                        std::size_t t, const ProductAccumulator& acc) {
  check_indices(market, i, j);
  const auto current = static_cast<std::ptrdiff_t>(t);
  check_accumulator(market, acc, current, current - 1);
  return closed_form(std::log(market.budget(i)), std::log(market.value(i, j)),
                     std::log(static_cast<double>(market.goods())), acc.log_pi_p(j),
                     acc.log_pi_nu(i), t);
}

BidMatrix reconstruct_bids(const MarketInstance& market, std::size_t t,
                           const ProductAccumulator& acc) {
  const auto prev = static_cast<std::ptrdiff_t>(t) - 1;
  check_accumulator(market, acc, prev, prev);
  return materialize(LogMarket(market), t, acc);
}

FprStepResult fpr_step(const MarketInstance& market, const BidMatrix& bids,
                       std::span<const double> prices, const UtilityEstimator& utility) {
  const std::size_t n = market.buyers();
  const std::size_t m = market.goods();
  if (bids.buyers() != n || bids.goods() != m) {
    throw Error(ErrorCode::DimensionMismatch, "bid matrix does not match market dimensions");
  }
  if (prices.size() != m) {
    throw Error(ErrorCode::LengthMismatch, "price estimate vector has the wrong length");
  }
  check_positive(prices, "price");

  FprStepResult result{BidMatrix{Matrix(n, m)}, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = bids.entries.row(i);
    const auto v = market.values().row(i);
    auto out = result.bids.entries.row(i);
    double exact = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      out[j] = b[j] / prices[j];
      exact += v[j] * out[j];
    }
    const double nu = utility(i, exact);
    if (!(nu > 0.0)) {
      throw Error(ErrorCode::NonPositiveEstimate,
                  "utility estimate " + std::to_string(i) + " is not positive");
    }
    result.utilities[i] = nu;
    const double budget = market.budget(i);
    for (std::size_t j = 0; j < m; ++j) out[j] = budget * v[j] * out[j] / nu;
  }
  return result;
}

std::size_t select_best_iterate(std::span<const FprIterateRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyTrace, "no iterates to select from");
  std::size_t best = 0;
  for (std::size_t k = 1; k < records.size(); ++k) {
    if (records[k].score() > records[best].score()) best = k;
  }
  return best;
}

FprRunResult fpr_run(const MarketInstance& market, std::size_t iterations,
                     const EstimatorConfig& config, std::uint64_t seed) {
  if (iterations == 0) throw Error(ErrorCode::DomainError, "FPR run needs at least one iteration");
  validate(config);
  if (config.mode == NoiseMode::Qae) {
    throw Error(ErrorCode::DomainError, "qae mode runs through qfpr_run");
  }
  const std::size_t n = market.buyers();
  const std::size_t m = market.goods();
  const std::uint64_t per_iteration = pr_queries_per_iteration(market);

  FprRunResult result;
  result.records.reserve(iterations);
  result.trace.points.reserve(iterations + 1);

  BidMatrix bids = uniform_init(market);
  ProductAccumulator acc(m, n);
  ProductAccumulator best_snapshot = acc;
  double best_score = -std::numeric_limits<double>::infinity();

  for (std::size_t t = 0; t < iterations; ++t) {
    const ObjectiveReport obj = evaluate_objectives(market, bids);
    result.trace.points.push_back({t, obj.eg_value, obj.shmyrev_value, per_iteration * t});

    const std::vector<double> exact_prices = column_sums(bids);
    std::vector<double> prices(m);
    for (std::size_t j = 0; j < m; ++j) {
      RngStream rng(seed, t, j, StreamRole::Price);
      prices[j] = noisy_scalar(exact_prices[j], config.eps_p, config.mode, rng);
    }
    FprStepResult step =
        fpr_step(market, bids, prices, [&](std::size_t i, double exact) {
          RngStream rng(seed, t, i, StreamRole::Utility);
          return noisy_scalar(exact, config.eps_nu, config.mode, rng);
        });

    FprIterateRecord record;
    record.t = t;
    record.phi_estimate = phi_estimate(market, step.utilities);
    record.phi_true = obj.eg_value;
    record.psi_true = obj.shmyrev_value;
    record.queries = per_iteration * (t + 1);

    ProductAccumulator next = accumulate(acc, prices, step.utilities);
    if (record.score() > best_score) {
      best_score = record.score();
      result.best_t = t;
      best_snapshot = std::move(acc);
    }
    acc = std::move(next);

    record.prices = std::move(prices);
    record.utilities = std::move(step.utilities);
    result.records.push_back(std::move(record));
    bids = std::move(step.bids);
  }
  const ObjectiveReport last = evaluate_objectives(market, bids);
  result.trace.points.push_back(
      {iterations, last.eg_value, last.shmyrev_value, per_iteration * iterations});
  result.trace.final_bids = std::move(bids);

  result.best_bids = reconstruct_bids(market, result.best_t, best_snapshot);
  result.best_snapshot = std::move(best_snapshot);
  return result;
}

std::uint64_t qfpr_queries_per_iteration(const MarketInstance& market, const QaeParams& params,
                                         QueryAccounting accounting) noexcept {
  const std::uint64_t n = market.buyers();
  const std::uint64_t m = market.goods();
  const std::uint64_t estimates = (m + n) * qae_estimate_queries(params);
  const auto scan = [accounting](std::uint64_t length) -> std::uint64_t {
    if (accounting == QueryAccounting::Classical) return length;
    return static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(length))));
  };
  return estimates + m * scan(n) + n * scan(m);
}

QfprRunResult qfpr_run(const MarketInstance& market, std::size_t iterations,
                       const QaeParams& params, std::uint64_t seed, QueryAccounting accounting) {
  if (iterations == 0) {
    throw Error(ErrorCode::DomainError, "QFPR run needs at least one iteration");
  }
  validate(params);
  const std::size_t n = market.buyers();
  const std::size_t m = market.goods();
  const LogMarket logs(market);

  // A boosted estimate of exactly zero carries no information about a
  // positive quantity; replace it by the smallest positive value the
  // median of means can return.
  const double resolution = std::sin(std::numbers::pi / static_cast<double>(params.depth));
  const double floor_amplitude =
      resolution * resolution / static_cast<double>(params.group_size);

  QfprRunResult result;
  result.queries_per_iteration = qfpr_queries_per_iteration(market, params, accounting);
  result.records.reserve(iterations);
  result.trace.points.reserve(iterations + 1);

  ProductAccumulator acc(m, n);
  ProductAccumulator best_snapshot = acc;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<double> column(n);
  std::vector<double> row(m);

  for (std::size_t t = 0; t < iterations; ++t) {
    {
      const BidMatrix bids = materialize(logs, t, acc);
      const ObjectiveReport obj = evaluate_objectives(market, bids);
      result.trace.points.push_back(
          {t, obj.eg_value, obj.shmyrev_value, result.queries_per_iteration * t});
    }

    std::vector<double> prices(m);
    for (std::size_t j = 0; j < m; ++j) {
      double col_max = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        column[i] = logs.bid(i, j, t, acc);
        col_max = std::max(col_max, column[i]);
      }
      RngStream rng(seed, t, j, StreamRole::Price);
      double estimate = l1_norm_estimate(column, col_max, params, rng);
      if (!(estimate > 0.0)) {
        estimate = floor_amplitude * static_cast<double>(n) * col_max;
        ++result.floored_estimates;
      }
      prices[j] = estimate;
    }
    ProductAccumulator next = acc;
    next.accumulate_prices(prices);

    std::vector<double> utilities(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) row[j] = logs.bid(i, j, t, next);
      RngStream rng(seed, t, i, StreamRole::Utility);
      const auto values = market.values().row(i);
      double estimate = inner_product_estimate(row, values, params, rng);
      if (!(estimate > 0.0)) {
        double z_max = 0.0;
        for (std::size_t j = 0; j < m; ++j) z_max = std::max(z_max, row[j] * values[j]);
        estimate = floor_amplitude * static_cast<double>(m) * z_max;
        ++result.floored_estimates;
      }
      utilities[i] = estimate;
    }
    next.accumulate_utilities(utilities);

    FprIterateRecord record;
    record.t = t;
    record.phi_estimate = phi_estimate(market, utilities);
    record.phi_true = result.trace.points.back().phi;
    record.psi_true = result.trace.points.back().psi;
    record.queries = result.queries_per_iteration * (t + 1);
    record.prices = std::move(prices);
    record.utilities = std::move(utilities);

    if (record.score() > best_score) {
      best_score = record.score();
      result.best_t = t;
      best_snapshot = std::move(acc);
    }
    acc = std::move(next);
    result.records.push_back(std::move(record));
  }

  BidMatrix last = materialize(logs, iterations, acc);
  const ObjectiveReport obj = evaluate_objectives(market, last);
  result.trace.points.push_back(
      {iterations, obj.eg_value, obj.shmyrev_value, result.queries_per_iteration * iterations});
  result.trace.final_bids = std::move(last);
  result.best_snapshot = std::move(best_snapshot);
  return result;
}

}  // namespace fisher
