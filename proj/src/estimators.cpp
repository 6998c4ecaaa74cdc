#include "fisher/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fisher/error.hpp"

namespace fisher {
namespace {

constexpr double kPi = std::numbers::pi;

// Below this phase distance an outcome counts as exactly aligned.
constexpr double kAlignmentTolerance = 1e-15;

// sin(pi x) with the argument reduced to [-1/2, 1/2], so integer x gives an
// exact zero.
double sin_pi(double x) {
  const double r = x - std::nearbyint(x);
  return std::sin(kPi * r);
}

double estimate_for_outcome(std::size_t z, std::size_t depth) {
  const double s = std::sin(kPi * static_cast<double>(z) / static_cast<double>(depth));
  return s * s;
}

void check_amplitude(double a) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw Error(ErrorCode::DomainError, "amplitude " + std::to_string(a) + " outside [0, 1]");
  }
}

}  // namespace

void validate(const QaeParams& params) {
  if (params.depth < 2) throw Error(ErrorCode::DomainError, "QAE depth must be at least 2");
  if (params.groups == 0 || params.groups % 2 == 0) {
    throw Error(ErrorCode::DomainError, "median-of-means needs an odd number of groups");
  }
  if (params.group_size == 0) throw Error(ErrorCode::DomainError, "group size must be positive");
  if (!(params.delta > 0.0 && params.delta < 0.5)) {
    throw Error(ErrorCode::DomainError, "failure probability must lie in (0, 0.5)");
  }
}

std::size_t default_qae_depth(std::size_t iterations, std::size_t length) noexcept {
  const double raw =
      std::sqrt(static_cast<double>(iterations) * static_cast<double>(length)) / 16.0;
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(raw)));
}

QaeParams qae_params_for_accuracy(std::size_t length, double eps, double delta) {
  if (length == 0) throw Error(ErrorCode::DomainError, "length must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::DomainError, "eps must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 0.5)) {
    throw Error(ErrorCode::DomainError, "delta must lie in (0, 0.5)");
  }
  QaeParams params;
  params.depth = static_cast<std::size_t>(
      std::ceil(6.0 * kPi * std::sqrt(static_cast<double>(length)) / eps));
  // A single run lands within the error bound with probability at least
  // 8/pi^2; the median of k runs fails with probability <= exp(-2k gap^2).
  const double gap = 8.0 / (kPi * kPi) - 0.5;
  auto runs = static_cast<std::size_t>(std::ceil(std::log(1.0 / delta) / (2.0 * gap * gap)));
  if (runs % 2 == 0) ++runs;
  params.groups = runs;
  params.group_size = 1;
  params.delta = delta;
  return params;
}

std::string_view to_string(NoiseMode mode) noexcept {
  switch (mode) {
    case NoiseMode::Exact: return "exact";
    case NoiseMode::AdversarialHigh: return "adversarial_high";
    case NoiseMode::AdversarialLow: return "adversarial_low";
    case NoiseMode::UniformBand: return "uniform_band";
    case NoiseMode::Qae: return "qae";
  }
  return "exact";
}

NoiseMode parse_noise_mode(std::string_view text) {
  for (NoiseMode mode : {NoiseMode::Exact, NoiseMode::AdversarialHigh, NoiseMode::AdversarialLow,
                         NoiseMode::UniformBand, NoiseMode::Qae}) {
    if (text == to_string(mode)) return mode;
  }
  throw Error(ErrorCode::DomainError, "unknown noise mode '" + std::string(text) + "'");
}

void validate(const EstimatorConfig& config) {
  if (config.mode == NoiseMode::Exact) return;
  const auto in_band = [](double eps) { return eps > 0.0 && eps < 0.5; };
  if (!in_band(config.eps_p) || !in_band(config.eps_nu)) {
    throw Error(ErrorCode::DomainError, "eps_p and eps_nu must lie in (0, 0.5)");
  }
  if (config.mode == NoiseMode::Qae) {
    if (!config.qae) throw Error(ErrorCode::DomainError, "qae mode requires QAE parameters");
    validate(*config.qae);
  }
}

std::vector<double> qae_distribution(double a, std::size_t depth) {
  check_amplitude(a);
  if (depth < 2) throw Error(ErrorCode::DomainError, "QAE depth must be at least 2");

  const double md = static_cast<double>(depth);
  // Phase of the amplitude in units of 1/M.
  const double phase = md * std::asin(std::sqrt(a)) / kPi;
  std::vector<double> probs(depth);
  double total = 0.0;
  for (std::size_t z = 0; z < depth; ++z) {
    const double offset = std::remainder(static_cast<double>(z) - phase, md);
    const double distance = std::abs(offset) / md;
    double p = 1.0;
    if (distance >= kAlignmentTolerance) {
      const double num = sin_pi(offset);
      const double den = md * std::sin(kPi * distance);
      p = (num * num) / (den * den);
    }
    probs[z] = p;
    total += p;
  }
  for (double& p : probs) p /= total;
  return probs;
}

QaeSampler::QaeSampler(double a, std::size_t depth) : cdf_(qae_distribution(a, depth)) {
  double running = 0.0;
  for (double& c : cdf_) {
    running += c;
    c = running;
  }
  cdf_.back() = 1.0;
}

double QaeSampler::sample(RngStream& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto z = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()),
                                       cdf_.size() - 1);
  return estimate_for_outcome(z, cdf_.size());
}

double qae_sample(double a, const QaeParams& params, RngStream& rng) {
  return QaeSampler(a, params.depth).sample(rng);
}

double median_of_means(std::span<const double> samples, std::size_t groups,
                       std::size_t group_size) {
  if (groups == 0 || group_size == 0 || samples.size() != groups * group_size) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(samples.size()) + " samples for " + std::to_string(groups) +
                    " groups of " + std::to_string(group_size));
  }
  std::vector<double> means(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    double s = 0.0;
    for (std::size_t k = 0; k < group_size; ++k) s += samples[g * group_size + k];
    means[g] = s / static_cast<double>(group_size);
  }
  std::sort(means.begin(), means.end());
  if (groups % 2 == 1) return means[groups / 2];
  return 0.5 * (means[groups / 2 - 1] + means[groups / 2]);
}

double qae_estimate(double a, const QaeParams& params, RngStream& rng) {
  const QaeSampler sampler(a, params.depth);
  std::vector<double> samples(params.runs_per_estimate());
  for (double& s : samples) s = sampler.sample(rng);
  return median_of_means(samples, params.groups, params.group_size);
}

double l1_norm_estimate(std::span<const double> w, double w_max, const QaeParams& params,
                        RngStream& rng) {
  if (w.empty() || !(w_max > 0.0)) throw Error(ErrorCode::ZeroVector, "norm of a zero vector");
  double scaled = 0.0;
  for (double x : w) scaled += x / w_max;
  const double len = static_cast<double>(w.size());
  // Rounding can push the amplitude a hair above 1 when w is constant.
  const double a = std::min(scaled / len, 1.0);
  return qae_estimate(a, params, rng) * len * w_max;
}

double inner_product_estimate(std::span<const double> u, std::span<const double> v,
                              const QaeParams& params, RngStream& rng) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::LengthMismatch, "inner product operands differ in length");
  }
  std::vector<double> z(u.size());
  double z_max = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    z[k] = u[k] * v[k];
    z_max = std::max(z_max, z[k]);
  }
  if (!(z_max > 0.0)) return 0.0;
  return l1_norm_estimate(z, z_max, params, rng);
}

double noisy_scalar(double true_value, double eps, NoiseMode mode, RngStream& rng) {
  if (!(true_value > 0.0)) {
    throw Error(ErrorCode::DomainError, "noisy_scalar needs a positive true value");
  }
  if (mode == NoiseMode::Exact) return true_value;
  if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorCode::DomainError, "eps must lie in (0, 0.5)");
  switch (mode) {
    case NoiseMode::AdversarialHigh: return true_value * (1.0 + eps);
    case NoiseMode::AdversarialLow: return true_value * (1.0 - eps);
    case NoiseMode::UniformBand: return true_value * (1.0 + eps * (2.0 * rng.uniform() - 1.0));
    default: break;
  }
  throw Error(ErrorCode::DomainError, "noise mode has no scalar realization");
}

}  // namespace fisher
