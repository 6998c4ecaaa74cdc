#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fisher/estimators.hpp"
#include "fisher/fpr_dynamics.hpp"
#include "fisher/market.hpp"
#include "fisher/pr_dynamics.hpp"

namespace fisher {

enum class ValueDistribution { Uniform, TruncatedNormal };
enum class BudgetMode { Sampled, CeeiEqual };
enum class Algorithm { Pr, Fpr, Qfpr, Pgd };
enum class CurveFormat { Csv, Json };

std::string_view to_string(ValueDistribution d) noexcept;
std::string_view to_string(BudgetMode b) noexcept;
std::string_view to_string(Algorithm a) noexcept;
std::string_view to_string(CurveFormat f) noexcept;
std::string_view to_string(QueryAccounting a) noexcept;
ValueDistribution parse_distribution(std::string_view text);
BudgetMode parse_budget_mode(std::string_view text);
Algorithm parse_algorithm(std::string_view text);
CurveFormat parse_curve_format(std::string_view text);
QueryAccounting parse_accounting(std::string_view text);

/// One draw in (0, 1]: uniform, or N(0.5, 0.25^2) resampled until it lands
/// in (0, 1].
double sample_value(ValueDistribution distribution, RngStream& rng);

/// Random market. Values are drawn row-major from one stream; sampled budgets
/// come from the same distribution on a separate stream and are normalized
/// by their sum. Values are divided by their maximum if any exceeds 1.
MarketInstance gen_market(std::size_t n, std::size_t m, ValueDistribution distribution,
                          BudgetMode budget_mode, std::uint64_t seed);

struct ExperimentConfig {
  std::size_t n = 64;
  std::size_t m = 64;
  ValueDistribution distribution = ValueDistribution::Uniform;
  BudgetMode budget_mode = BudgetMode::CeeiEqual;
  std::vector<Algorithm> algorithms = {Algorithm::Pr};
  /// Iterations per algorithm when no query budget is set (default 16).
  std::map<Algorithm, std::size_t> iterations;
  /// depth == 0 selects default_qae_depth(iterations of PR, n).
  QaeParams qae{0, 3, 7, 0.1};
  /// Noise model for the synthetic FPR runs.
  EstimatorConfig estimator{NoiseMode::AdversarialHigh, 0.1, 0.1, std::nullopt};
  QueryAccounting accounting = QueryAccounting::Quantum;
  std::vector<std::uint64_t> seeds = {1};
  /// When set, every seed reruns the algorithms on the market generated from
  /// this seed; otherwise each seed generates its own market.
  std::optional<std::uint64_t> instance_seed;
  /// When set, each algorithm runs floor(budget / cost per iteration) iterations.
  std::optional<std::uint64_t> query_budget;
  std::size_t reference_iterations = kDefaultReferenceIterations;
  std::filesystem::path output;
  CurveFormat format = CurveFormat::Csv;

  std::size_t iterations_for(Algorithm a) const;
};

/// Throws DomainError unless n, m >= 2, algorithms and seeds are nonempty.
void validate(const ExperimentConfig& config);

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct CurvePoint {
  Algorithm algorithm = Algorithm::Pr;
  std::uint64_t seed = 0;
  std::size_t iteration = 0;
  std::uint64_t queries = 0;
  double phi_gap = 0.0;
  double psi = 0.0;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct RunFailure {
  Algorithm algorithm = Algorithm::Pr;
  std::uint64_t seed = 0;
  std::string message;
};

struct ExperimentResult {
  std::vector<CurvePoint> points;
  std::vector<RunFailure> failures;
};

/// Reference optima memoized per (instance hash, reference iterations).
class ReferenceCache {
public:
  double phi_star(const MarketInstance& market, std::size_t iterations);
  std::size_t size() const noexcept { return cache_.size(); }

private:
  std::map<std::pair<std::uint64_t, std::size_t>, double> cache_;
};

/// Iterations an algorithm gets under a query budget.
std::size_t iterations_for_budget(std::uint64_t budget, std::uint64_t per_iteration) noexcept;

/// Reads charged per iteration of `algorithm` on `market`.
std::uint64_t queries_per_iteration(Algorithm algorithm, const MarketInstance& market,
                                    const QaeParams& qae, QueryAccounting accounting) noexcept;

/// QAE parameters after resolving an automatic depth.
QaeParams resolved_qae(const ExperimentConfig& config);

/// Runs every (seed, algorithm) pair. PR and PGD report each iterate; FPR and
/// QFPR report, after each scored iteration, the gap of the iterate the
/// estimator-based selection would return at that point. A failing pair is
/// recorded and the rest continue.
ExperimentResult run_experiment(const ExperimentConfig& config, ReferenceCache* cache = nullptr);

std::string format_curves(std::span<const CurvePoint> points, CurveFormat format);
std::vector<CurvePoint> parse_curves(std::string_view text, CurveFormat format);
/// Writes CSV or JSON. Throws DomainError for no points and IoError on write
/// failure.
void emit_curves(std::span<const CurvePoint> points, CurveFormat format,
                 const std::filesystem::path& path);

struct FinalPoint {
  Algorithm algorithm = Algorithm::Pr;
  std::uint64_t seed = 0;
  std::size_t iteration = 0;
  std::uint64_t queries = 0;
  double phi_gap = 0.0;
};

/// Last point of every (algorithm, seed) run, ordered by algorithm then seed.
std::vector<FinalPoint> final_points(std::span<const CurvePoint> points);

struct WinRate {
  Algorithm winner = Algorithm::Pr;
  Algorithm loser = Algorithm::Pr;
  std::size_t wins = 0;
  std::size_t seeds = 0;  // seeds where both ran
};

/// For each ordered pair of algorithms, the seeds where the first has the
/// strictly lower final gap.
std::vector<WinRate> win_rates(std::span<const FinalPoint> finals);

std::string summarize_curves(std::span<const CurvePoint> points);

}  // namespace fisher
