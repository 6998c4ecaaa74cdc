#include "fisher/cli.hpp"

#include <filesystem>
#include <optional>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fisher/error.hpp"
#include "fisher/harness.hpp"
#include "fisher/market_io.hpp"

namespace fisher {
namespace {

struct RunFlags {
  std::string config;
  std::optional<std::size_t> n, m;
  std::optional<std::string> dist, budget_mode, noise, accounting, format;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> algorithms;
  std::optional<std::size_t> iters, qae_m, qae_groups, qae_group_size, t_ref;
  std::optional<std::uint64_t> query_budget, instance_seed;
  std::optional<double> eps_p, eps_nu, delta;
  std::string out;
};

ExperimentConfig build_config(const RunFlags& f) {
  ExperimentConfig c;
  if (!f.config.empty()) {
    if (!std::filesystem::exists(f.config)) {
      throw Error(ErrorCode::UsageError, "config file " + f.config + " does not exist");
    }
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(f.config));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::UsageError, std::string("config file: ") + e.what());
    }
    c = config_from_json(doc);
  }
  if (f.n) c.n = *f.n;
  if (f.m) c.m = *f.m;
  if (f.dist) c.distribution = parse_distribution(*f.dist);
  if (f.budget_mode) c.budget_mode = parse_budget_mode(*f.budget_mode);
  if (!f.seeds.empty()) c.seeds = f.seeds;
  if (!f.algorithms.empty()) {
    c.algorithms.clear();
    for (const auto& a : f.algorithms) c.algorithms.push_back(parse_algorithm(a));
  }
  if (f.iters) {
    for (Algorithm a : {Algorithm::Pr, Algorithm::Fpr, Algorithm::Qfpr, Algorithm::Pgd}) {
      c.iterations[a] = *f.iters;
    }
  }
  if (f.query_budget) c.query_budget = *f.query_budget;
  if (f.instance_seed) c.instance_seed = *f.instance_seed;
  if (f.noise) {
    try {
      c.estimator.mode = parse_noise_mode(*f.noise);
    } catch (const Error& e) {
      throw Error(ErrorCode::UsageError, e.what());
    }
  }
  if (f.eps_p) c.estimator.eps_p = *f.eps_p;
  if (f.eps_nu) c.estimator.eps_nu = *f.eps_nu;
  if (f.qae_m) c.qae.depth = *f.qae_m;
  if (f.qae_groups) c.qae.groups = *f.qae_groups;
  if (f.qae_group_size) c.qae.group_size = *f.qae_group_size;
  if (f.delta) c.qae.delta = *f.delta;
  if (f.accounting) c.accounting = parse_accounting(*f.accounting);
  if (f.t_ref) c.reference_iterations = *f.t_ref;
  if (!f.out.empty()) c.output = f.out;
  if (f.format) c.format = parse_curve_format(*f.format);
  try {
    validate(c);
  } catch (const Error& e) {
    throw Error(ErrorCode::UsageError, e.what());
  }
  return c;
}

CurveFormat format_from_extension(const std::filesystem::path& path) {
  return path.extension() == ".json" ? CurveFormat::Json : CurveFormat::Csv;
}

int run_command(const RunFlags& flags, std::ostream& out, std::ostream& err) {
  const ExperimentConfig config = build_config(flags);
  const ExperimentResult result = run_experiment(config);
  if (!result.points.empty()) {
    if (config.output.empty()) {
      out << format_curves(result.points, config.format);
    } else {
      emit_curves(result.points, config.format, config.output);
    }
  }
  for (const RunFailure& f : result.failures) {
    err << "run failed: " << to_string(f.algorithm) << " seed " << f.seed << ": " << f.message
        << '\n';
  }
  return result.failures.empty() ? kExitOk : kExitRuntime;
}

int reference_command(const std::string& market_path, std::size_t t_ref,
                      const std::string& cache_path, std::ostream& out) {
  const MarketInstance market = load_market(market_path);
  const std::uint64_t hash = instance_hash(market);
  if (!cache_path.empty() && std::filesystem::exists(cache_path)) {
    try {
      const auto cached = nlohmann::json::parse(read_file(cache_path));
      if (cached.at("instance_hash").get<std::uint64_t>() == hash &&
          cached.at("reference_iterations").get<std::size_t>() == t_ref) {
        out << "phi_star " << format_double(cached.at("phi_star").get<double>()) << " (cached)\n";
        return kExitOk;
      }
    } catch (const nlohmann::json::exception&) {
      // Unreadable cache: recompute and overwrite.
    }
  }
  const double phi = reference_optimum(market, t_ref).phi;
  if (!cache_path.empty()) {
    write_file(cache_path, "{\"instance_hash\":" + std::to_string(hash) +
                               ",\"reference_iterations\":" + std::to_string(t_ref) +
                               ",\"phi_star\":" + format_double(phi) + "}\n");
  }
  out << "phi_star " << format_double(phi) << '\n';
  return kExitOk;
}

int compare_command(const std::vector<std::string>& inputs, const std::string& out_path,
                    std::ostream& out) {
  std::vector<CurvePoint> points;
  for (const auto& path : inputs) {
    auto parsed = parse_curves(read_file(path), format_from_extension(path));
    points.insert(points.end(), parsed.begin(), parsed.end());
  }
  const std::string summary = summarize_curves(points);
  if (out_path.empty()) {
    out << summary;
  } else {
    write_file(out_path, summary);
  }
  return kExitOk;
}

}  // namespace

int cli_main(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fisher market equilibrium by proportional response dynamics"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate a market and write it to a file");
  std::size_t gen_n = 0, gen_m = 0;
  std::string gen_dist = "uniform", gen_budget = "ceei_equal", gen_out;
  std::uint64_t gen_seed = 1;
  gen->add_option("--n", gen_n, "Number of buyers")->required();
  gen->add_option("--m", gen_m, "Number of goods")->required();
  gen->add_option("--dist", gen_dist, "uniform | truncated_normal");
  gen->add_option("--budget-mode", gen_budget, "sampled | ceei_equal");
  gen->add_option("--seed", gen_seed, "Master seed");
  gen->add_option("--out", gen_out, "Output path (.bin for the binary layout)")->required();

  auto* run = app.add_subcommand("run", "Run an experiment and write convergence curves");
  RunFlags flags;
  run->add_option("--config", flags.config, "JSON experiment config");
  run->add_option("--n", flags.n);
  run->add_option("--m", flags.m);
  run->add_option("--dist", flags.dist);
  run->add_option("--budget-mode", flags.budget_mode);
  run->add_option("--seed", flags.seeds, "One or more seeds")->delimiter(',');
  run->add_option("--instance-seed", flags.instance_seed, "Share one market across seeds");
  run->add_option("--algo", flags.algorithms, "pr, fpr, qfpr, pgd")->delimiter(',');
  run->add_option("--iters", flags.iters, "Iterations for every algorithm");
  run->add_option("--query-budget", flags.query_budget);
  run->add_option("--noise", flags.noise, "FPR noise mode");
  run->add_option("--eps-p", flags.eps_p);
  run->add_option("--eps-nu", flags.eps_nu);
  run->add_option("--qae-m", flags.qae_m, "QAE depth (0 = automatic)");
  run->add_option("--qae-groups", flags.qae_groups);
  run->add_option("--qae-group-size", flags.qae_group_size);
  run->add_option("--delta", flags.delta);
  run->add_option("--accounting", flags.accounting, "quantum | classical");
  run->add_option("--t-ref", flags.t_ref, "Reference PR iterations");
  run->add_option("--out", flags.out, "Output path (stdout when omitted)");
  run->add_option("--format", flags.format, "csv | json");

  auto* reference = app.add_subcommand("reference", "Compute and cache the reference optimum");
  std::string ref_market, ref_out;
  std::size_t ref_t = kDefaultReferenceIterations;
  reference->add_option("--market", ref_market, "Market file")->required();
  reference->add_option("--t-ref", ref_t, "Reference PR iterations");
  reference->add_option("--out", ref_out, "Cache file");

  auto* compare = app.add_subcommand("compare", "Summarize curve files");
  std::vector<std::string> compare_inputs;
  std::string compare_out;
  compare->add_option("inputs", compare_inputs, "Curve files (.csv or .json)")->required();
  compare->add_option("--out", compare_out, "Summary path (stdout when omitted)");

  std::vector<const char*> argv{"fisher"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*gen) {
      const MarketInstance market =
          gen_market(gen_n, gen_m, parse_distribution(gen_dist), parse_budget_mode(gen_budget),
                     gen_seed);
      save_market(gen_out, market);
      return kExitOk;
    }
    if (*run) return run_command(flags, out, err);
    if (*reference) return reference_command(ref_market, ref_t, ref_out, out);
    if (*compare) return compare_command(compare_inputs, compare_out, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::UsageError ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace fisher
