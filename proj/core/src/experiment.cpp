#include "graphon/experiment.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "graphon/evaluation.hpp"
#include "graphon/matrix_io.hpp"
#include "graphon/parallel.hpp"
#include "graphon/rng.hpp"

namespace graphon {

using nlohmann::json;

namespace {

// Looks a key up in "fixed" first, then at the top level.
template <class T>
T lookup(const json& doc, const char* key, T fallback) {
  if (doc.contains("fixed") && doc["fixed"].contains(key)) return doc["fixed"][key].get<T>();
  if (doc.contains(key)) return doc[key].get<T>();
  return fallback;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (sweep_values.empty()) throw ConfigError("experiment has no sweep values");
  if (reps < 1) throw ConfigError("reps must be positive");
  if (inits.empty()) throw ConfigError("experiment needs at least one init");
  if (sweep == SweepKind::N) {
    if (!(rho > 0.0)) throw ConfigError("rho must be positive");
    for (double v : sweep_values) {
      if (v < 2.0 || v != std::floor(v)) throw ConfigError("n values must be integers >= 2");
    }
  } else {
    if (n < 1 || m < 1) throw ConfigError("n and m must be positive");
    for (double v : sweep_values) {
      if (!(v > 0.0)) throw ConfigError("rho values must be positive");
    }
  }
  if (!auto_kl && (K < 2 || L < 2)) throw ConfigError("K and L must be at least 2");
  if (delta_grid != 0 && delta_grid < 100) throw ConfigError("delta_grid must be 0 or at least 100");
}

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment spec is not valid JSON: ") + e.what());
  }
  ExperimentSpec spec;
  try {
    spec.name = doc.value("name", spec.name);
    spec.setup = parse_standard_graphon(doc.value("setup", std::string("rand_graphon")));
    if (!doc.contains("sweep")) throw ConfigError("experiment spec needs a sweep");
    const auto& sweep = doc["sweep"];
    if (sweep.contains("n_values")) {
      spec.sweep = SweepKind::N;
      spec.sweep_values = sweep["n_values"].get<std::vector<double>>();
    } else if (sweep.contains("rho_values")) {
      spec.sweep = SweepKind::Rho;
      spec.sweep_values = sweep["rho_values"].get<std::vector<double>>();
    } else {
      throw ConfigError("sweep needs n_values or rho_values");
    }
    spec.rho = lookup(doc, "rho", spec.rho);
    spec.n = lookup(doc, "n", spec.n);
    spec.m = lookup(doc, "m", spec.m);
    const bool kl_auto = (doc.contains("fixed") && doc["fixed"].value("KL", "") == "auto") ||
                         doc.value("KL", "") == "auto";
    spec.auto_kl = kl_auto;
    spec.K = lookup(doc, "K", spec.K);
    spec.L = lookup(doc, "L", spec.L);
    spec.n0 = lookup(doc, "n0", spec.n0);
    spec.m0 = lookup(doc, "m0", spec.m0);
    spec.reps = doc.value("reps", spec.reps);
    if (doc.contains("inits")) {
      spec.inits.clear();
      for (const auto& name : doc["inits"]) spec.inits.push_back(parse_init_kind(name.get<std::string>()));
    }
    spec.noise = parse_noise_spec(doc.value("noise", std::string("bernoulli")));
    spec.seed = doc.value("seed", spec.seed);
    spec.restarts = doc.value("restarts", spec.restarts);
    spec.max_iters = doc.value("max_iters", spec.max_iters);
    spec.tol_gamma = doc.value("tol", spec.tol_gamma);
    spec.delta_grid = doc.value("delta_grid", spec.delta_grid);
    spec.record_runtime = doc.value("record_runtime", spec.record_runtime);
    spec.threads = doc.value("threads", spec.threads);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad experiment spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_spec(ss.str());
}

std::string to_json(const ExperimentSpec& spec) {
  json inits = json::array();
  for (auto kind : spec.inits) inits.push_back(to_string(kind));
  json fixed;
  if (spec.sweep == SweepKind::N) {
    fixed["rho"] = spec.rho;
  } else {
    fixed["n"] = spec.n;
    fixed["m"] = spec.m;
  }
  if (spec.auto_kl) {
    fixed["KL"] = "auto";
  }
  fixed["K"] = spec.K;
  fixed["L"] = spec.L;
  json doc = {{"name", spec.name},
              {"setup", to_string(spec.setup)},
              {"sweep", {{spec.sweep == SweepKind::N ? "n_values" : "rho_values", spec.sweep_values}}},
              {"fixed", fixed},
              {"n0", spec.n0},
              {"m0", spec.m0},
              {"reps", spec.reps},
              {"inits", inits},
              {"noise", to_spec(spec.noise)},
              {"seed", spec.seed},
              {"restarts", spec.restarts},
              {"max_iters", spec.max_iters},
              {"tol", spec.tol_gamma},
              {"delta_grid", spec.delta_grid},
              {"record_runtime", spec.record_runtime},
              {"threads", spec.threads}};
  return doc.dump(2);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t sweep_index, int rep, int reps) {
  return derive_seed(seed, Stream::Cell, sweep_index * static_cast<std::uint64_t>(reps) + static_cast<std::uint64_t>(rep));
}

std::pair<int, int> hoelder_KL_rule(int n, int m, double rho, const NoiseModel& noise, double lipschitz,
                                    double alpha) {
  const auto [sigma2, b] = noise.bernstein(rho);
  const double base = 3.0 * n * static_cast<double>(m) * lipschitz * lipschitz / (25.0 * sigma2 + 4.0 * b * rho);
  const double raw = std::floor(std::pow(base, 1.0 / (2.0 * (alpha + 1.0))));
  const int upper = std::max(2, std::min(n, m) / 2);
  const int K = static_cast<int>(std::clamp(raw, 2.0, static_cast<double>(upper)));
  return {K, K};
}

std::pair<int, int> sweep_dimensions(const ExperimentSpec& spec, double value) {
  if (spec.sweep == SweepKind::N) {
    const int n = static_cast<int>(value);
    return {n, n / 2};
  }
  return {spec.n, spec.m};
}

Graphon sweep_graphon(const ExperimentSpec& spec, double value) {
  const double rho = spec.sweep == SweepKind::Rho ? value : spec.rho;
  return make_standard_graphon(spec.setup, {.K = spec.K,
                                            .L = spec.L,
                                            .rho = rho,
                                            .seed = derive_seed(spec.seed, Stream::GraphonValues)});
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::size_t sweeps = spec.sweep_values.size();
  const auto reps = static_cast<std::size_t>(spec.reps);

  std::vector<Graphon> graphons;
  graphons.reserve(sweeps);
  for (double v : spec.sweep_values) graphons.push_back(sweep_graphon(spec, v));

  std::vector<std::vector<CellRecord>> cells(sweeps * reps);
  parallel_for(cells.size(), spec.threads, [&](std::size_t task) {
    const std::size_t s = task / reps;
    const int rep = static_cast<int>(task % reps);
    const double value = spec.sweep_values[s];
    const auto [n, m] = sweep_dimensions(spec, value);
    const double rho = spec.sweep == SweepKind::Rho ? value : spec.rho;
    const Graphon& graphon = graphons[s];
    const std::uint64_t seed = cell_seed(spec.seed, s, rep, spec.reps);

    int K = spec.K;
    int L = spec.L;
    if (spec.auto_kl && graphon.analytic() != nullptr) {
      std::tie(K, L) = hoelder_KL_rule(n, m, rho, spec.noise, graphon.analytic()->hoelder_L,
                                       graphon.analytic()->hoelder_alpha);
    }

    const auto obs = synthesize({.n = n,
                                  .m = m,
                                  .graphon = graphon,
                                  .noise = spec.noise,
                                  .seed = seed,
                                  .with_second_copy = false,
                                  .missing_p = std::nullopt,
                                  .regular_latents = false});
    const Matrix& theta = *obs.theta_star;

    std::optional<double> oracle;
    if (graphon.is_piecewise_constant()) {
      const auto truth = true_assignments(graphon, *obs.latents);
      const auto fit = oracle_fit(obs.H, truth.rows, truth.cols);
      oracle = mse(induced_mean(fit.model), theta);
    }
    const double bound = rate_bound(spec.noise, rho, n, m, K, L);

    for (auto init : spec.inits) {
      FitConfig config;
      config.K = K;
      config.L = L;
      config.n0 = spec.n0;
      config.m0 = spec.m0;
      config.init = init;
      config.restarts = spec.restarts;
      config.max_iters = spec.max_iters;
      config.tol_gamma = spec.tol_gamma;
      config.seed = seed;
      try {
        config.validate(n, m);
      } catch (const ConfigError& e) {
        spdlog::warn("skipping {} init at sweep value {}: {}", to_string(init), value, e.what());
        continue;
      }
      const auto start = std::chrono::steady_clock::now();
      const auto report = lloyd_fit(obs.H, config);
      const Matrix estimate = induced_mean(report.model);
      const auto stop = std::chrono::steady_clock::now();

      CellRecord record;
      record.sweep_value = value;
      record.init = to_string(init);
      record.rep = rep;
      record.mse = mse(estimate, theta);
      if (spec.delta_grid > 0) record.delta_tilde = delta_tilde(estimate, graphon, obs.latents, spec.delta_grid);
      record.oracle_mse = oracle;
      record.rate_bound = bound;
      if (spec.record_runtime) {
        record.runtime_ms = std::chrono::duration<double, std::milli>(stop - start).count();
      }
      record.seed = seed;
      cells[task].push_back(std::move(record));
    }
  });

  ExperimentResult result;
  result.spec = spec;
  for (auto& cell : cells) {
    for (auto& record : cell) result.records.push_back(std::move(record));
  }
  result.summary = summarize(result.records);
  return result;
}

std::vector<SummaryRow> summarize(const std::vector<CellRecord>& records) {
  struct Group {
    double value;
    std::string init;
    std::vector<double> mse;
    std::vector<double> oracle;
    double bound;
  };
  std::vector<Group> groups;
  for (const auto& r : records) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return g.value == r.sweep_value && g.init == r.init; });
    if (it == groups.end()) {
      groups.push_back({r.sweep_value, r.init, {}, {}, r.rate_bound});
      it = std::prev(groups.end());
    }
    it->mse.push_back(r.mse);
    if (r.oracle_mse) it->oracle.push_back(*r.oracle_mse);
  }
  std::vector<SummaryRow> rows;
  for (const auto& g : groups) {
    SummaryRow row;
    row.sweep_value = g.value;
    row.init = g.init;
    row.count = static_cast<int>(g.mse.size());
    row.median = quantile(g.mse, 0.5);
    row.q10 = quantile(g.mse, 0.1);
    row.q90 = quantile(g.mse, 0.9);
    if (g.oracle.size() == g.mse.size()) row.oracle_median = quantile(g.oracle, 0.5);
    row.rate_bound = g.bound;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace graphon
