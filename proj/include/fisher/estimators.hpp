#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fisher/rng.hpp"

namespace fisher {

/// Amplitude estimation settings. `depth` is the number of applications of
/// the state-preparation and reflection unitaries (M); each estimate is the
/// median over `groups` means of `group_size` independent runs.
struct QaeParams {
  std::size_t depth = 32;
  std::size_t groups = 3;
  std::size_t group_size = 7;
  double delta = 0.1;

  constexpr std::size_t runs_per_estimate() const noexcept { return groups * group_size; }
};

/// Throws DomainError unless depth >= 2, groups odd, group_size >= 1 and
/// delta in (0, 0.5).
void validate(const QaeParams& params);

/// Depth used by the desk-scale experiments: floor(sqrt(T * n) / 16), at
/// least 2. Gives M = 32 for T = 16, n = 16384.
std::size_t default_qae_depth(std::size_t iterations, std::size_t length) noexcept;

/// Parameters that give relative error eps with probability 1 - delta for a
/// length-`length` norm estimate: M = ceil(6 pi sqrt(length) / eps) and the
/// number of median groups from a Hoeffding bound on the 8/pi^2 per-run
/// success rate (group_size 1).
QaeParams qae_params_for_accuracy(std::size_t length, double eps, double delta);

enum class NoiseMode { Exact, AdversarialHigh, AdversarialLow, UniformBand, Qae };

std::string_view to_string(NoiseMode mode) noexcept;
NoiseMode parse_noise_mode(std::string_view text);

struct EstimatorConfig {
  NoiseMode mode = NoiseMode::Exact;
  double eps_p = 0.1;
  double eps_nu = 0.1;
  std::optional<QaeParams> qae;
};

/// Throws DomainError when a noisy mode has eps outside (0, 0.5), or when
/// mode is Qae without parameters.
void validate(const EstimatorConfig& config);

/// Outcome distribution of amplitude estimation over z in [0, M):
/// P[z] = sin^2(M d pi) / (M^2 sin^2(d pi)), d the circular distance between
/// z/M and asin(sqrt(a))/pi. Renormalized to sum to 1.
std::vector<double> qae_distribution(double a, std::size_t depth);

/// Samples estimates sin^2(pi z / M) from a fixed amplitude. Builds the
/// outcome CDF once, so repeated draws cost O(log M).
class QaeSampler {
public:
  QaeSampler(double a, std::size_t depth);

  double sample(RngStream& rng) const;
  std::size_t depth() const noexcept { return cdf_.size(); }

private:
  std::vector<double> cdf_;
};

/// One amplitude estimation run.
double qae_sample(double a, const QaeParams& params, RngStream& rng);

/// Median of the means of consecutive groups. Throws LengthMismatch unless
/// samples.size() == groups * group_size.
double median_of_means(std::span<const double> samples, std::size_t groups,
                       std::size_t group_size);

/// Boosted amplitude estimate: median of means over groups * group_size runs.
double qae_estimate(double a, const QaeParams& params, RngStream& rng);

/// Queries charged for one amplitude estimation run of depth M.
constexpr std::uint64_t qae_run_queries(std::size_t depth) noexcept { return 2ull * depth; }

/// Queries charged for one boosted estimate.
constexpr std::uint64_t qae_estimate_queries(const QaeParams& params) noexcept {
  return qae_run_queries(params.depth) * params.runs_per_estimate();
}

/// l1 norm of a nonnegative vector from the amplitude ||w / w_max||_1 / len.
/// `w_max` must be the exact maximum. Throws ZeroVector for w == 0.
double l1_norm_estimate(std::span<const double> w, double w_max, const QaeParams& params,
                        RngStream& rng);

/// Inner product of nonnegative vectors via the norm estimate of u * v.
/// Returns 0 when the elementwise product vanishes.
double inner_product_estimate(std::span<const double> u, std::span<const double> v,
                              const QaeParams& params, RngStream& rng);

/// Synthetic multiplicative error: exact, (1 + eps), (1 - eps), or (1 + U)
/// with U uniform on [-eps, eps].
double noisy_scalar(double true_value, double eps, NoiseMode mode, RngStream& rng);

}  // namespace fisher
