// graphon-lab: synthesize data, fit block models, aggregate, evaluate and run
// Monte Carlo studies from the command line.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "graphon/aggregation.hpp"
#include "graphon/estimation.hpp"
#include "graphon/evaluation.hpp"
#include "graphon/experiment.hpp"
#include "graphon/matrix_io.hpp"
#include "graphon/parallel.hpp"
#include "graphon/report.hpp"
#include "graphon/rng.hpp"
#include "graphon/synthesis.hpp"

namespace fs = std::filesystem;
using namespace graphon;

namespace {

struct SynthArgs {
  std::string graphon = "cos";
  int K = 8;
  int L = 8;
  double rho = 0.6;
  int n = 0;
  int m = 0;
  std::string noise = "bernoulli";
  std::uint64_t seed = 0;
  bool second_copy = false;
  std::optional<double> missing_p;
  bool regular_latents = false;
  std::string out_dir;
};

struct FitArgs {
  std::string input;
  std::string output;
  std::string estimate;
  FitConfig config;
  std::string init = "spectral";
};

struct EwaArgs {
  std::string input;
  std::string input_prime;
  std::string grid = "default";
  std::string beta = "auto";
  std::string noise = "bernoulli";
  std::string meta;
  std::string init = "spectral";
  int restarts = 10;
  std::uint64_t seed = 0;
  std::string output;
  std::string aggregate;
};

struct EvalArgs {
  std::string model;
  std::string truth;
  std::string latents;
  std::string meta;
  std::string input;
  std::vector<std::string> metrics{"mse"};
  int grid_res = 1000;
  std::string output;
};

struct ExperimentArgs {
  std::string config;
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<std::string> formats{"csv", "json", "svg"};
};

void run_synth(const SynthArgs& a) {
  const auto kind = parse_standard_graphon(a.graphon);
  const std::uint64_t graphon_seed = derive_seed(a.seed, Stream::GraphonValues);
  const Graphon graphon = make_standard_graphon(kind, {.K = a.K, .L = a.L, .rho = a.rho, .seed = graphon_seed});
  const NoiseModel noise = parse_noise_spec(a.noise);
  const auto obs = synthesize({.n = a.n,
                               .m = a.m,
                               .graphon = graphon,
                               .noise = noise,
                               .seed = a.seed,
                               .with_second_copy = a.second_copy,
                               .missing_p = a.missing_p,
                               .regular_latents = a.regular_latents});

  const fs::path dir(a.out_dir);
  write_csv(dir / "H.csv", obs.adjusted());
  if (const auto hp = obs.adjusted_prime()) write_csv(dir / "H_prime.csv", *hp);
  if (obs.mask) write_csv(dir / "mask.csv", *obs.mask);
  if (obs.mask_prime) write_csv(dir / "mask_prime.csv", *obs.mask_prime);
  write_csv(dir / "theta_star.csv", *obs.theta_star);
  write_latents(dir / "latents.json", *obs.latents);
  write_meta(dir / "meta.json", {.n = a.n,
                                 .m = a.m,
                                 .noise = noise,
                                 .rho = a.rho,
                                 .seed = a.seed,
                                 .graphon = to_string(kind),
                                 .K = a.K,
                                 .L = a.L,
                                 .graphon_seed = graphon_seed,
                                 .missing_p = a.missing_p,
                                 .has_second_copy = a.second_copy});
  spdlog::info("wrote {} x {} data set to {}", a.n, a.m, dir.string());
}

void run_fit(FitArgs a) {
  a.config.init = parse_init_kind(a.init);
  const Matrix H = read_csv(a.input);
  const auto report = lloyd_fit(H, a.config);
  write_model(a.output, report);
  if (!a.estimate.empty()) write_csv(a.estimate, induced_mean(report.model));
  spdlog::info("fit K={} L={} in {} iterations, final cost {}", a.config.K, a.config.L, report.iterations,
               report.final_cost());
}

void run_ewa(const EwaArgs& a, int threads) {
  const Matrix H = read_csv(a.input);
  const Matrix H_prime = read_csv(a.input_prime);
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(H.cols());
  const HyperGrid grid = a.grid == "default" ? default_grid(n, m) : read_grid(a.grid);

  double beta = 0.0;
  if (a.beta == "auto") {
    const NoiseModel noise = a.meta.empty() ? parse_noise_spec(a.noise) : read_meta(a.meta).noise;
    beta = temperature(noise);
  } else {
    try {
      beta = std::stod(a.beta);
    } catch (const std::exception&) {
      throw ConfigError("--beta must be 'auto' or a positive number");
    }
  }

  EwaFitOptions options;
  options.init = parse_init_kind(a.init);
  options.restarts = a.restarts;
  options.seed = a.seed;
  options.threads = threads;
  const auto result = fit_and_aggregate(H, H_prime, grid, beta, options);

  const std::string aggregate_path =
      a.aggregate.empty() ? (fs::path(a.output).replace_extension("").string() + "_aggregate.csv") : a.aggregate;
  write_csv(aggregate_path, result.aggregate);
  write_ewa(a.output, result, grid, aggregate_path);
  spdlog::info("aggregated {} fits with beta = {}", grid.size(), beta);
}

void run_eval(const EvalArgs& a) {
  auto wants = [&](const std::string& name) {
    return std::find(a.metrics.begin(), a.metrics.end(), name) != a.metrics.end();
  };
  for (const auto& name : a.metrics) {
    if (name != "mse" && name != "delta" && name != "oracle" && name != "rate") {
      throw ConfigError("unknown metric '" + name + "'");
    }
  }
  auto require = [](const std::string& value, const char* flag, const char* metric) {
    if (value.empty()) throw ConfigError(std::string("metric ") + metric + " needs " + flag);
  };

  const FitReport fit = read_model(a.model);
  const Matrix estimate = induced_mean(fit.model);
  require(a.truth, "--truth", "mse");
  const Matrix truth = read_csv(a.truth);

  MetricReport report;
  report.mse_theta = mse(estimate, truth);

  std::optional<DatasetMeta> meta;
  if (!a.meta.empty()) meta = read_meta(a.meta);

  if (wants("delta")) {
    require(a.latents, "--latents", "delta");
    require(a.meta, "--meta", "delta");
    const double d = delta_tilde(estimate, graphon_from_meta(*meta), read_latents(a.latents), a.grid_res);
    report.delta_tilde_sq = d * d;
  }
  if (wants("oracle")) {
    require(a.input, "--input", "oracle");
    require(a.latents, "--latents", "oracle");
    require(a.meta, "--meta", "oracle");
    const auto clusters = true_assignments(graphon_from_meta(*meta), read_latents(a.latents));
    const auto oracle = oracle_fit(read_csv(a.input), clusters.rows, clusters.cols);
    if (!oracle.filled_blocks.empty()) {
      spdlog::warn("{} oracle blocks had no members and were set to the grand mean", oracle.filled_blocks.size());
    }
    report.oracle_mse = mse(induced_mean(oracle.model), truth);
  }
  if (wants("rate")) {
    require(a.meta, "--meta", "rate");
    report.rate_bound = rate_bound(meta->noise, meta->rho, fit.model.n(), fit.model.m(),
                                   static_cast<int>(fit.model.Q.rows()), static_cast<int>(fit.model.Q.cols()));
  }
  write_metrics(a.output, report);
}

void run_experiment_cmd(const ExperimentArgs& a, int threads) {
  ExperimentSpec spec = load_experiment_spec(a.config);
  if (a.reps) spec.reps = *a.reps;
  if (a.seed) spec.seed = *a.seed;
  spec.threads = threads;
  spec.validate();

  std::vector<OutputFormat> formats;
  for (const auto& f : a.formats) {
    if (f == "csv") formats.push_back(OutputFormat::Csv);
    else if (f == "json") formats.push_back(OutputFormat::Json);
    else if (f == "svg") formats.push_back(OutputFormat::Svg);
    else throw ConfigError("unknown output format '" + f + "'");
  }
  const auto result = run_experiment(spec);
  const fs::path dir = a.out_dir.empty() ? fs::path("results") / spec.name : fs::path(a.out_dir);
  for (const auto& path : emit_outputs(result, dir, formats)) spdlog::info("wrote {}", path.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-model graphon estimation lab"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: GRAPHON_LAB_THREADS or all cores)");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Sample a synthetic data set");
  synth_cmd->add_option("--graphon", synth.graphon, "rand, cos or hoelder")->capture_default_str();
  synth_cmd->add_option("--K", synth.K, "Row cells of rand/cos")->capture_default_str();
  synth_cmd->add_option("--L", synth.L, "Column cells of rand/cos")->capture_default_str();
  synth_cmd->add_option("--rho", synth.rho, "Sup of the graphon")->capture_default_str();
  synth_cmd->add_option("--n", synth.n, "Rows")->required();
  synth_cmd->add_option("--m", synth.m, "Columns")->required();
  synth_cmd->add_option("--noise", synth.noise, "bernoulli, binomial:N, poisson:T, gaussian:VAR")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_flag("--second-copy", synth.second_copy, "Also sample H' from the same latents");
  synth_cmd->add_option("--missing-p", synth.missing_p, "Observation probability");
  synth_cmd->add_flag("--regular-latents", synth.regular_latents, "Use midpoint latents");
  synth_cmd->add_option("--out-dir", synth.out_dir)->required();

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Least-squares block model fit");
  fit_cmd->add_option("--input", fit.input, "H.csv")->required();
  fit_cmd->add_option("--output", fit.output, "model.json")->required();
  fit_cmd->add_option("--estimate", fit.estimate, "Optional CSV of the fitted mean matrix");
  fit_cmd->add_option("--K", fit.config.K)->capture_default_str();
  fit_cmd->add_option("--L", fit.config.L)->capture_default_str();
  fit_cmd->add_option("--n0", fit.config.n0)->capture_default_str();
  fit_cmd->add_option("--m0", fit.config.m0)->capture_default_str();
  fit_cmd->add_option("--init", fit.init, "spectral or random")->capture_default_str();
  fit_cmd->add_option("--restarts", fit.config.restarts)->capture_default_str();
  fit_cmd->add_option("--max-iters", fit.config.max_iters)->capture_default_str();
  fit_cmd->add_option("--tol", fit.config.tol_gamma)->capture_default_str();
  fit_cmd->add_option("--seed", fit.config.seed)->capture_default_str();

  EwaArgs ewa;
  auto* ewa_cmd = app.add_subcommand("ewa", "Exponentially weighted aggregate over a grid of fits");
  ewa_cmd->add_option("--input", ewa.input, "H.csv")->required();
  ewa_cmd->add_option("--input-prime", ewa.input_prime, "Independent copy H'")->required();
  ewa_cmd->add_option("--grid", ewa.grid, "'default' or a JSON grid file")->capture_default_str();
  ewa_cmd->add_option("--beta", ewa.beta, "'auto' or a positive temperature")->capture_default_str();
  ewa_cmd->add_option("--noise", ewa.noise, "Noise model for --beta auto")->capture_default_str();
  ewa_cmd->add_option("--meta", ewa.meta, "Read the noise model from meta.json");
  ewa_cmd->add_option("--init", ewa.init)->capture_default_str();
  ewa_cmd->add_option("--restarts", ewa.restarts)->capture_default_str();
  ewa_cmd->add_option("--seed", ewa.seed)->capture_default_str();
  ewa_cmd->add_option("--output", ewa.output, "ewa.json")->required();
  ewa_cmd->add_option("--aggregate", ewa.aggregate, "Aggregate CSV (default: next to --output)");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Error metrics of a fitted model");
  eval_cmd->add_option("--model", eval.model, "model.json")->required();
  eval_cmd->add_option("--truth", eval.truth, "theta_star.csv")->required();
  eval_cmd->add_option("--latents", eval.latents, "latents.json");
  eval_cmd->add_option("--meta", eval.meta, "meta.json (graphon, noise, rho)");
  eval_cmd->add_option("--input", eval.input, "H.csv, for the oracle");
  eval_cmd->add_option("--metrics", eval.metrics, "Any of mse, delta, oracle, rate")->delimiter(',');
  eval_cmd->add_option("--grid-res", eval.grid_res)->capture_default_str();
  eval_cmd->add_option("--output", eval.output, "metrics.json")->required();

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Monte Carlo study from a JSON spec");
  exp_cmd->add_option("--config", exp.config, "Experiment spec JSON")->required();
  exp_cmd->add_option("--reps", exp.reps, "Override repetitions");
  exp_cmd->add_option("--seed", exp.seed, "Override seed");
  exp_cmd->add_option("--out-dir", exp.out_dir, "Output directory (default results/<name>)");
  exp_cmd->add_option("--formats", exp.formats, "csv, json, svg")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (quiet) spdlog::set_level(spdlog::level::warn);
  if (threads <= 0) threads = default_thread_count();
  fit.config.threads = threads;

  try {
    if (*synth_cmd) run_synth(synth);
    if (*fit_cmd) run_fit(fit);
    if (*ewa_cmd) run_ewa(ewa, threads);
    if (*eval_cmd) run_eval(eval);
    if (*exp_cmd) run_experiment_cmd(exp, threads);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const NumericalError& e) {
    spdlog::error("numerical failure: {}", e.what());
    return 3;
  } catch (const EmptyClusterError& e) {
    spdlog::error("numerical failure: {}", e.what());
    return 3;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
