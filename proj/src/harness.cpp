#include "fisher/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

#include "fisher/error.hpp"
#include "fisher/market_io.hpp"
#include "fisher/pgd.hpp"

namespace fisher {
namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const Enum (&options)[N], const char* what) {
  for (Enum e : options) {
    if (text == to_string(e)) return e;
  }
  throw Error(ErrorCode::UsageError, std::string("unknown ") + what + " '" + std::string(text) + "'");
}

constexpr ValueDistribution kDistributions[] = {ValueDistribution::Uniform,
                                                ValueDistribution::TruncatedNormal};
constexpr BudgetMode kBudgetModes[] = {BudgetMode::Sampled, BudgetMode::CeeiEqual};
constexpr Algorithm kAlgorithms[] = {Algorithm::Pr, Algorithm::Fpr, Algorithm::Qfpr,
                                     Algorithm::Pgd};
constexpr CurveFormat kFormats[] = {CurveFormat::Csv, CurveFormat::Json};
constexpr QueryAccounting kAccountings[] = {QueryAccounting::Classical, QueryAccounting::Quantum};

constexpr std::size_t kDefaultIterations = 16;

void append_trace(std::vector<CurvePoint>& out, Algorithm algorithm, std::uint64_t seed,
                  const RunTrace& trace, double phi_star) {
  for (const TracePoint& p : trace.points) {
    out.push_back({algorithm, seed, p.iteration, p.queries, p.phi - phi_star, p.psi});
  }
}

// Gap of the iterate the selection rule would return after each iteration.
void append_selected(std::vector<CurvePoint>& out, Algorithm algorithm, std::uint64_t seed,
                     std::span<const FprIterateRecord> records, double phi_star) {
  std::size_t best = 0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (records[k].score() > records[best].score()) best = k;
    out.push_back({algorithm, seed, records[k].t, records[k].queries,
                   records[best].phi_true - phi_star, records[best].psi_true});
  }
}

std::string json_number(double v) { return std::isfinite(v) ? format_double(v) : "null"; }

double parse_double(std::string_view field) {
  std::string s(field);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw Error(ErrorCode::IoError, "bad number '" + s + "' in curve file");
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view field) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::IoError, "bad integer '" + std::string(field) + "' in curve file");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    parts.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::string_view to_string(ValueDistribution d) noexcept {
  return d == ValueDistribution::Uniform ? "uniform" : "truncated_normal";
}
std::string_view to_string(BudgetMode b) noexcept {
  return b == BudgetMode::Sampled ? "sampled" : "ceei_equal";
}
std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::Pr: return "pr";
    case Algorithm::Fpr: return "fpr";
    case Algorithm::Qfpr: return "qfpr";
    case Algorithm::Pgd: return "pgd";
  }
  return "pr";
}
std::string_view to_string(CurveFormat f) noexcept { return f == CurveFormat::Csv ? "csv" : "json"; }
std::string_view to_string(QueryAccounting a) noexcept {
  return a == QueryAccounting::Classical ? "classical" : "quantum";
}

ValueDistribution parse_distribution(std::string_view text) {
  return parse_enum(text, kDistributions, "distribution");
}
BudgetMode parse_budget_mode(std::string_view text) {
  return parse_enum(text, kBudgetModes, "budget mode");
}
Algorithm parse_algorithm(std::string_view text) {
  return parse_enum(text, kAlgorithms, "algorithm");
}
CurveFormat parse_curve_format(std::string_view text) {
  return parse_enum(text, kFormats, "format");
}
QueryAccounting parse_accounting(std::string_view text) {
  return parse_enum(text, kAccountings, "accounting mode");
}

double sample_value(ValueDistribution distribution, RngStream& rng) {
  if (distribution == ValueDistribution::Uniform) return 1.0 - rng.uniform();
  while (true) {
    const double x = 0.5 + 0.25 * rng.normal();
    if (x > 0.0 && x <= 1.0) return x;
  }
}

MarketInstance gen_market(std::size_t n, std::size_t m, ValueDistribution distribution,
                          BudgetMode budget_mode, std::uint64_t seed) {
  if (n < 2 || m < 2) throw Error(ErrorCode::DomainError, "markets need n, m >= 2");

  RngStream value_rng(seed, 0, 0, StreamRole::MarketValues);
  Matrix values(n, m);
  double max_value = 0.0;
  for (double& v : values.flat()) {
    v = sample_value(distribution, value_rng);
    max_value = std::max(max_value, v);
  }
  if (max_value > 1.0) {
    for (double& v : values.flat()) v /= max_value;
  }

  std::vector<double> budgets(n, 1.0 / static_cast<double>(n));
  if (budget_mode == BudgetMode::Sampled) {
    RngStream budget_rng(seed, 0, 0, StreamRole::MarketBudgets);
    double total = 0.0;
    for (double& b : budgets) {
      b = sample_value(distribution, budget_rng);
      total += b;
    }
    for (double& b : budgets) b /= total;
  }
  return validate_market(std::move(budgets), std::move(values));
}

std::size_t ExperimentConfig::iterations_for(Algorithm a) const {
  const auto it = iterations.find(a);
  return it == iterations.end() ? kDefaultIterations : it->second;
}

void validate(const ExperimentConfig& config) {
  if (config.n < 2 || config.m < 2) throw Error(ErrorCode::DomainError, "n and m must be >= 2");
  if (config.algorithms.empty()) throw Error(ErrorCode::DomainError, "no algorithm selected");
  if (config.seeds.empty()) throw Error(ErrorCode::DomainError, "no seeds given");
  if (config.reference_iterations == 0) {
    throw Error(ErrorCode::DomainError, "reference iterations must be positive");
  }
  for (Algorithm a : config.algorithms) {
    if (!config.query_budget && config.iterations_for(a) == 0) {
      throw Error(ErrorCode::DomainError, "iteration count must be positive");
    }
    if (a == Algorithm::Qfpr) validate(resolved_qae(config));
    if (a == Algorithm::Fpr) validate(config.estimator);
  }
}

QaeParams resolved_qae(const ExperimentConfig& config) {
  QaeParams qae = config.qae;
  if (qae.depth == 0) qae.depth = default_qae_depth(config.iterations_for(Algorithm::Pr), config.n);
  return qae;
}

double ReferenceCache::phi_star(const MarketInstance& market, std::size_t iterations) {
  const auto key = std::make_pair(instance_hash(market), iterations);
  if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
  const double phi = reference_optimum(market, iterations).phi;
  cache_.emplace(key, phi);
  return phi;
}

std::size_t iterations_for_budget(std::uint64_t budget, std::uint64_t per_iteration) noexcept {
  return per_iteration == 0 ? 0 : static_cast<std::size_t>(budget / per_iteration);
}

std::uint64_t queries_per_iteration(Algorithm algorithm, const MarketInstance& market,
                                    const QaeParams& qae, QueryAccounting accounting) noexcept {
  switch (algorithm) {
    case Algorithm::Pr:
    case Algorithm::Fpr: return pr_queries_per_iteration(market);
    case Algorithm::Pgd: return pgd_queries_per_iteration(market);
    case Algorithm::Qfpr: return qfpr_queries_per_iteration(market, qae, accounting);
  }
  return 0;
}

ExperimentResult run_experiment(const ExperimentConfig& config, ReferenceCache* cache) {
  validate(config);
  ReferenceCache local;
  if (cache == nullptr) cache = &local;
  const QaeParams qae = resolved_qae(config);

  ExperimentResult result;
  for (std::uint64_t seed : config.seeds) {
    std::optional<MarketInstance> market;
    double phi_star = 0.0;
    try {
      market = gen_market(config.n, config.m, config.distribution, config.budget_mode,
                          config.instance_seed.value_or(seed));
      phi_star = cache->phi_star(*market, config.reference_iterations);
    } catch (const std::exception& e) {
      for (Algorithm a : config.algorithms) result.failures.push_back({a, seed, e.what()});
      continue;
    }

    for (Algorithm algorithm : config.algorithms) {
      try {
        const std::uint64_t per = queries_per_iteration(algorithm, *market, qae, config.accounting);
        const std::size_t iterations = config.query_budget
                                           ? iterations_for_budget(*config.query_budget, per)
                                           : config.iterations_for(algorithm);
        if (iterations == 0) {
          throw Error(ErrorCode::DomainError, "query budget below the cost of one iteration");
        }
        switch (algorithm) {
          case Algorithm::Pr:
            append_trace(result.points, algorithm, seed, pr_run(*market, iterations), phi_star);
            break;
          case Algorithm::Pgd:
            append_trace(result.points, algorithm, seed,
                         pgd_run(*market, PgdConfig{std::nullopt, iterations}), phi_star);
            break;
          case Algorithm::Fpr: {
            const FprRunResult run = fpr_run(*market, iterations, config.estimator, seed);
            append_selected(result.points, algorithm, seed, run.records, phi_star);
            break;
          }
          case Algorithm::Qfpr: {
            const QfprRunResult run = qfpr_run(*market, iterations, qae, seed, config.accounting);
            append_selected(result.points, algorithm, seed, run.records, phi_star);
            break;
          }
        }
      } catch (const std::exception& e) {
        result.failures.push_back({algorithm, seed, e.what()});
      }
    }
  }
  return result;
}

std::string format_curves(std::span<const CurvePoint> points, CurveFormat format) {
  std::string out;
  if (format == CurveFormat::Csv) {
    out = "algorithm,seed,iteration,queries,phi_gap,psi\n";
    for (const CurvePoint& p : points) {
      out += std::string(to_string(p.algorithm)) + ',' + std::to_string(p.seed) + ',' +
             std::to_string(p.iteration) + ',' + std::to_string(p.queries) + ',' +
             format_double(p.phi_gap) + ',' + format_double(p.psi) + '\n';
    }
    return out;
  }
  out = "[\n";
  for (std::size_t k = 0; k < points.size(); ++k) {
    const CurvePoint& p = points[k];
    out += "{\"algorithm\":\"" + std::string(to_string(p.algorithm)) +
           "\",\"seed\":" + std::to_string(p.seed) +
           ",\"iteration\":" + std::to_string(p.iteration) +
           ",\"queries\":" + std::to_string(p.queries) + ",\"phi_gap\":" + json_number(p.phi_gap) +
           ",\"psi\":" + json_number(p.psi) + "}";
    out += k + 1 < points.size() ? ",\n" : "\n";
  }
  out += "]\n";
  return out;
}

std::vector<CurvePoint> parse_curves(std::string_view text, CurveFormat format) {
  std::vector<CurvePoint> points;
  if (format == CurveFormat::Json) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
      for (const auto& rec : doc) {
        const auto number = [&rec](const char* key) {
          const auto& v = rec.at(key);
          return v.is_null() ? std::nan("") : v.get<double>();
        };
        points.push_back({parse_algorithm(rec.at("algorithm").get<std::string>()),
                          rec.at("seed").get<std::uint64_t>(),
                          rec.at("iteration").get<std::size_t>(),
                          rec.at("queries").get<std::uint64_t>(), number("phi_gap"),
                          number("psi")});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::IoError, std::string("curve JSON: ") + e.what());
    }
    return points;
  }
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no++ == 0 || line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw Error(ErrorCode::IoError, "curve CSV row needs 6 fields");
    points.push_back({parse_algorithm(f[0]), parse_int<std::uint64_t>(f[1]),
                      parse_int<std::size_t>(f[2]), parse_int<std::uint64_t>(f[3]),
                      parse_double(f[4]), parse_double(f[5])});
  }
  return points;
}

void emit_curves(std::span<const CurvePoint> points, CurveFormat format,
                 const std::filesystem::path& path) {
  if (points.empty()) throw Error(ErrorCode::DomainError, "no curve points to write");
  write_file(path, format_curves(points, format));
}

std::vector<FinalPoint> final_points(std::span<const CurvePoint> points) {
  std::map<std::pair<Algorithm, std::uint64_t>, FinalPoint> last;
  for (const CurvePoint& p : points) {
    auto [it, inserted] = last.try_emplace({p.algorithm, p.seed});
    if (inserted || p.iteration >= it->second.iteration) {
      it->second = {p.algorithm, p.seed, p.iteration, p.queries, p.phi_gap};
    }
  }
  std::vector<FinalPoint> out;
  out.reserve(last.size());
  for (const auto& [key, fp] : last) out.push_back(fp);
  return out;
}

std::vector<WinRate> win_rates(std::span<const FinalPoint> finals) {
  std::map<Algorithm, std::map<std::uint64_t, double>> gaps;
  for (const FinalPoint& f : finals) gaps[f.algorithm][f.seed] = f.phi_gap;
  std::vector<WinRate> rates;
  for (const auto& [a, a_gaps] : gaps) {
    for (const auto& [b, b_gaps] : gaps) {
      if (a == b) continue;
      WinRate rate{a, b, 0, 0};
      for (const auto& [seed, gap] : a_gaps) {
        const auto it = b_gaps.find(seed);
        if (it == b_gaps.end()) continue;
        ++rate.seeds;
        if (gap < it->second) ++rate.wins;
      }
      rates.push_back(rate);
    }
  }
  return rates;
}

std::string summarize_curves(std::span<const CurvePoint> points) {
  const std::vector<FinalPoint> finals = final_points(points);
  std::ostringstream out;
  out << "algorithm,seed,iteration,queries,final_phi_gap\n";
  for (const FinalPoint& f : finals) {
    out << to_string(f.algorithm) << ',' << f.seed << ',' << f.iteration << ',' << f.queries
        << ',' << format_double(f.phi_gap) << '\n';
  }
  for (const WinRate& r : win_rates(finals)) {
    out << "win_rate " << to_string(r.winner) << " < " << to_string(r.loser) << ": " << r.wins
        << '/' << r.seeds << '\n';
  }
  return out.str();
}

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  static const std::set<std::string> known = {
      "n", "m", "distribution", "budget_mode", "algorithms", "iterations", "qae", "estimator",
      "accounting", "seeds", "instance_seed", "query_budget", "reference_iterations", "output",
      "format"};
  if (!doc.is_object()) throw Error(ErrorCode::UsageError, "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw Error(ErrorCode::UsageError, "unknown config field '" + key + "'");
  }
  ExperimentConfig c;
  try {
    if (doc.contains("n")) c.n = doc["n"].get<std::size_t>();
    if (doc.contains("m")) c.m = doc["m"].get<std::size_t>();
    if (doc.contains("distribution")) {
      c.distribution = parse_distribution(doc["distribution"].get<std::string>());
    }
    if (doc.contains("budget_mode")) {
      c.budget_mode = parse_budget_mode(doc["budget_mode"].get<std::string>());
    }
    if (doc.contains("algorithms")) {
      c.algorithms.clear();
      for (const auto& a : doc["algorithms"]) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    if (doc.contains("iterations")) {
      const auto& it = doc["iterations"];
      if (it.is_number_integer()) {
        for (Algorithm a : kAlgorithms) c.iterations[a] = it.get<std::size_t>();
      } else {
        for (const auto& [key, value] : it.items()) {
          c.iterations[parse_algorithm(key)] = value.get<std::size_t>();
        }
      }
    }
    if (doc.contains("qae")) {
      const auto& q = doc["qae"];
      c.qae.depth = q.value("depth", c.qae.depth);
      c.qae.groups = q.value("groups", c.qae.groups);
      c.qae.group_size = q.value("group_size", c.qae.group_size);
      c.qae.delta = q.value("delta", c.qae.delta);
    }
    if (doc.contains("estimator")) {
      const auto& e = doc["estimator"];
      if (e.contains("mode")) c.estimator.mode = parse_noise_mode(e["mode"].get<std::string>());
      c.estimator.eps_p = e.value("eps_p", c.estimator.eps_p);
      c.estimator.eps_nu = e.value("eps_nu", c.estimator.eps_nu);
    }
    if (doc.contains("accounting")) {
      c.accounting = parse_accounting(doc["accounting"].get<std::string>());
    }
    if (doc.contains("seeds")) c.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
    if (doc.contains("instance_seed") && !doc["instance_seed"].is_null()) {
      c.instance_seed = doc["instance_seed"].get<std::uint64_t>();
    }
    if (doc.contains("query_budget") && !doc["query_budget"].is_null()) {
      c.query_budget = doc["query_budget"].get<std::uint64_t>();
    }
    if (doc.contains("reference_iterations")) {
      c.reference_iterations = doc["reference_iterations"].get<std::size_t>();
    }
    if (doc.contains("output")) c.output = doc["output"].get<std::string>();
    if (doc.contains("format")) c.format = parse_curve_format(doc["format"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::UsageError, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DomainError) throw Error(ErrorCode::UsageError, e.what());
    throw;
  }
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json doc;
  doc["n"] = c.n;
  doc["m"] = c.m;
  doc["distribution"] = to_string(c.distribution);
  doc["budget_mode"] = to_string(c.budget_mode);
  doc["algorithms"] = nlohmann::json::array();
  for (Algorithm a : c.algorithms) doc["algorithms"].push_back(to_string(a));
  doc["iterations"] = nlohmann::json::object();
  for (const auto& [a, t] : c.iterations) doc["iterations"][std::string(to_string(a))] = t;
  doc["qae"] = {{"depth", c.qae.depth},
                {"groups", c.qae.groups},
                {"group_size", c.qae.group_size},
                {"delta", c.qae.delta}};
  doc["estimator"] = {{"mode", to_string(c.estimator.mode)},
                      {"eps_p", c.estimator.eps_p},
                      {"eps_nu", c.estimator.eps_nu}};
  doc["accounting"] = to_string(c.accounting);
  doc["seeds"] = c.seeds;
  doc["instance_seed"] = c.instance_seed ? nlohmann::json(*c.instance_seed) : nlohmann::json();
  doc["query_budget"] = c.query_budget ? nlohmann::json(*c.query_budget) : nlohmann::json();
  doc["reference_iterations"] = c.reference_iterations;
  doc["output"] = c.output.string();
  doc["format"] = to_string(c.format);
  return doc;
}

}  // namespace fisher
