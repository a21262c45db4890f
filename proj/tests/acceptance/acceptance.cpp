// End-to-end acceptance checks. Prints one [PASS]/[FAIL] line per criterion and
// exits non-zero if any fails. Pass criterion numbers as arguments to run a subset.

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "brute_force.hpp"
#include "graphon/aggregation.hpp"
#include "graphon/assignment_flow.hpp"
#include "graphon/estimation.hpp"
#include "graphon/evaluation.hpp"
#include "graphon/experiment.hpp"
#include "graphon/parallel.hpp"
#include "graphon/rng.hpp"
#include "graphon/synthesis.hpp"

using namespace graphon;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double time_limit_s;  // 0: none
  std::function<Outcome()> run;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

Matrix random_matrix(int rows, int cols, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Matrix M(rows, cols);
  for (Eigen::Index k = 0; k < M.size(); ++k) M.data()[k] = lo + (hi - lo) * rng.uniform();
  return M;
}

Assignment random_nonempty(int n, int K, Rng& rng) {
  while (true) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (auto& l : labels) l = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(K)));
    Assignment a(labels, K);
    if (!a.first_empty()) return a;
  }
}

SynthConfig plain(int n, int m, Graphon g, NoiseModel noise, std::uint64_t seed) {
  return {.n = n,
          .m = m,
          .graphon = std::move(g),
          .noise = noise,
          .seed = seed,
          .with_second_copy = false,
          .missing_p = std::nullopt,
          .regular_latents = false};
}

// 1. Constrained z-step against exhaustive enumeration.
Outcome flow_exactness() {
  int worst_case = -1;
  double worst_gap = 0.0;
  for (int t = 0; t < 200; ++t) {
    Rng rng(derive_seed(101, Stream::Cell, static_cast<std::uint64_t>(t)));
    const int n = 2 + static_cast<int>(rng.uniform_index(7));  // 2..8
    const int K = 2 + static_cast<int>(rng.uniform_index(2));  // 2..3
    int n0 = static_cast<int>(rng.uniform_index(3));           // 0..2
    while (K * n0 > n) --n0;
    const int m = 2 + static_cast<int>(rng.uniform_index(5));
    const int L = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(std::min(m, 3))));
    const Matrix H = random_matrix(n, m, rng);
    const Matrix Q = random_matrix(K, L, rng);
    const Assignment cols = random_nonempty(m, L, rng);

    const Matrix phi = row_assignment_costs(H, Q, cols);
    const Assignment rows = z_step_constrained(H, Q, cols, n0);
    if (!rows.satisfies_min_size(n0)) return {false, fmt("instance %d violates the size constraint", t)};
    const double got = assignment_cost(phi, rows);
    const double best = testing::min_linear_cost(phi, n0);
    const double gap = std::abs(got - best);
    if (gap > worst_gap) {
      worst_gap = gap;
      worst_case = t;
    }
  }
  return {worst_gap <= 1e-9, fmt("max |phi_flow - phi_enum| = %.3g (instance %d) over 200", worst_gap, worst_case)};
}

// 2. Cost trajectories never increase.
Outcome lloyd_monotonicity() {
  int bad = 0;
  double worst = 0.0;
  int runs = 0;
  for (int t = 0; t < 100; ++t) {
    const std::uint64_t seed = derive_seed(202, Stream::Cell, static_cast<std::uint64_t>(t));
    const auto setup = static_cast<StandardGraphon>(t % 3);
    const NoiseModel noise = t % 4 == 0   ? NoiseModel::gaussian(0.05)
                             : t % 4 == 1 ? NoiseModel::binomial(5)
                                          : NoiseModel::bernoulli();
    const Graphon g = make_standard_graphon(setup, {.K = 4, .L = 3, .rho = 0.7, .seed = seed});
    const auto obs = synthesize(plain(60, 40, g, noise, seed));

    FitConfig config;
    config.K = 2 + t % 4;
    config.L = 2 + (t / 4) % 3;
    config.n0 = (t % 5 == 0) ? 60 / (config.K + 1) : 0;
    config.m0 = (t % 7 == 0) ? 40 / (config.L + 1) : 0;
    config.seed = seed;
    config.max_iters = 40;
    config.tol_gamma = 0.0;  // run to the iteration cap to exercise every step

    std::vector<FitReport> reports;
    if (t % 2 == 0) {
      config.init = InitKind::Spectral;
      reports.push_back(lloyd_fit(obs.H, config));
    } else {
      config.init = InitKind::Random;
      for (int r = 0; r < 3; ++r) {
        const auto init = random_init(60, 40, config.K, config.L, config.n0, config.m0,
                                      derive_seed(seed, Stream::Restart, static_cast<std::uint64_t>(r)));
        reports.push_back(lloyd_run(obs.H, init, config));
      }
    }
    for (const auto& rep : reports) {
      ++runs;
      const auto& c = rep.cost_trajectory;
      for (std::size_t s = 1; s < c.size(); ++s) {
        const double rise = c[s] - c[s - 1];
        worst = std::max(worst, rise);
        if (rise > 1e-9) {
          ++bad;
          break;
        }
      }
    }
  }
  return {bad == 0, fmt("%d of %d trajectories increase; largest step up %.3g", bad, runs, worst)};
}

// 3. Multi-restart Lloyd reaches the exhaustive optimum on 12 x 8.
Outcome global_optimum() {
  int hits = 0;
  std::ostringstream misses;
  for (int t = 0; t < 20; ++t) {
    const std::uint64_t seed = derive_seed(303, Stream::Cell, static_cast<std::uint64_t>(t));
    Rng rng(seed);
    const Matrix Q = random_matrix(2, 2, rng);
    const Assignment rows = random_nonempty(12, 2, rng);
    const Assignment cols = random_nonempty(8, 2, rng);
    Matrix H = induced_mean(BlockModel(Q, rows, cols));
    for (Eigen::Index k = 0; k < H.size(); ++k) H.data()[k] += 0.3 * rng.normal();

    FitConfig config;
    config.K = 2;
    config.L = 2;
    config.init = InitKind::Random;
    config.restarts = 20;
    config.seed = seed;
    const double got = lloyd_fit(H, config).final_cost();
    const double best = testing::global_lse_cost(H, 2, 2);
    if (got <= best + 1e-9 * std::max(1.0, best)) {
      ++hits;
    } else {
      misses << ' ' << t;
    }
  }
  return {hits >= 18, fmt("%d/20 instances at the global optimum (need 18)", hits) +
                          (misses.str().empty() ? "" : "; missed:" + misses.str())};
}

// 4. Monte Carlo oracle MSE against the closed form.
Outcome oracle_closed_form() {
  Matrix Q(4, 4);
  for (int k = 0; k < 4; ++k) {
    for (int l = 0; l < 4; ++l) Q(k, l) = (k + l) % 2 == 0 ? 0.25 : 0.75;
  }
  const Graphon g = Graphon::regular_grid(Q, 0.75);
  const int n = 200;
  const int m = 200;
  const int reps = 500;
  std::vector<double> errors(reps);
  parallel_for(reps, default_thread_count(), [&](std::size_t r) {
    auto config = plain(n, m, g, NoiseModel::bernoulli(), derive_seed(404, Stream::Cell, r));
    config.regular_latents = true;
    const auto obs = synthesize(config);
    const auto truth = true_assignments(g, *obs.latents);
    errors[r] = mse(induced_mean(oracle_fit(obs.H, truth.rows, truth.cols).model), *obs.theta_star);
  });
  const double mean = std::accumulate(errors.begin(), errors.end(), 0.0) / reps;
  double var = 0.0;
  for (double e : errors) var += (e - mean) * (e - mean);
  const double se = std::sqrt(var / (reps - 1) / reps);
  const double expected = oracle_risk_bernoulli(Q, n, m);
  const double z = std::abs(mean - expected) / se;
  return {z <= 4.0, fmt("empirical %.6g vs closed form %.6g (%.2f s.e.)", mean, expected, z)};
}

// 5. Error curves on the rand graphon.
Outcome rand_graphon_curves() {
  ExperimentSpec spec;
  spec.name = "rand-graphon-n-sweep";
  spec.setup = StandardGraphon::Rand;
  spec.sweep = SweepKind::N;
  spec.sweep_values = {256, 512, 1024};
  spec.rho = 0.6;
  spec.K = 8;
  spec.L = 8;
  spec.reps = 20;
  spec.inits = {InitKind::Spectral};
  spec.seed = 505;
  spec.delta_grid = 0;
  spec.threads = default_thread_count();
  const auto result = run_experiment(spec);

  bool monotone = true;
  bool under_bound = true;
  std::ostringstream detail;
  for (std::size_t s = 0; s < result.summary.size(); ++s) {
    const auto& row = result.summary[s];
    detail << fmt("n=%g median %.3g oracle %.3g bound %.3g; ", row.sweep_value, row.median, *row.oracle_median,
                  row.rate_bound);
    if (s > 0 && row.median > result.summary[s - 1].median) monotone = false;
    if (row.median > row.rate_bound) under_bound = false;
  }
  const auto& last = result.summary.back();
  const bool near_oracle = last.median <= 3.0 * *last.oracle_median;
  detail << fmt("(a) %s (b) %s (c) %s", monotone ? "ok" : "FAIL", near_oracle ? "ok" : "FAIL",
                under_bound ? "ok" : "FAIL");
  return {monotone && near_oracle && under_bound, detail.str()};
}

// 6. Aggregation against the best single fit of the grid.
Outcome ewa_oracle() {
  const int n = 400;
  const int m = 200;
  const int reps = 20;
  const HyperGrid grid = default_grid(n, m);
  const Graphon g = make_standard_graphon(StandardGraphon::Cos, {.K = 4, .L = 4, .rho = 0.6, .seed = 0});
  const double beta = temperature(NoiseModel::bernoulli());

  std::vector<double> ewa_mse(reps);
  std::vector<double> best_mse(reps);
  for (int r = 0; r < reps; ++r) {
    auto config = plain(n, m, g, NoiseModel::bernoulli(), derive_seed(606, Stream::Cell, static_cast<std::uint64_t>(r)));
    config.with_second_copy = true;
    const auto obs = synthesize(config);
    const Matrix& theta = *obs.theta_star;
    double best = std::numeric_limits<double>::infinity();
    EwaFitOptions options;
    options.seed = config.seed;
    options.threads = default_thread_count();
    options.on_fit = [&](std::size_t, const FitReport&, const Matrix& estimate) {
      best = std::min(best, mse(estimate, theta));
    };
    const auto result = fit_and_aggregate(obs.H, *obs.H_prime, grid, beta, options);
    ewa_mse[static_cast<std::size_t>(r)] = mse(result.aggregate, theta);
    best_mse[static_cast<std::size_t>(r)] = best;
  }
  const double remainder = 8.0 * std::log(static_cast<double>(grid.size())) / (3.0 * n * m);
  const double lhs = median(ewa_mse);
  const double rhs = 1.25 * median(best_mse) + remainder;
  return {lhs <= rhs, fmt("|grid| = %zu; median EWA %.4g <= 1.25 x %.4g + %.3g = %.4g", grid.size(), lhs,
                          median(best_mse), remainder, rhs)};
}

// 7. Temperature limits and normalisation of the weights.
Outcome ewa_limits() {
  Rng rng(707);
  double worst_sum = 0.0;
  double worst_cold = 1.0;
  double worst_hot = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int count = 2 + static_cast<int>(rng.uniform_index(40));
    std::vector<double> r(static_cast<std::size_t>(count));
    for (auto& x : r) x = std::pow(10.0, -3.0 + 10.0 * rng.uniform());  // 1e-3 .. 1e7
    for (double beta : {1e-8, 1e-3, 1.0, 8.0 / 3.0, 1e3, 1e9}) {
      const auto w = ewa_weights(r, beta);
      worst_sum = std::max(worst_sum, std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0));
    }

    // Cold limit: a gap of at least 1 to the runner-up.
    std::vector<double> gapped(static_cast<std::size_t>(count));
    for (auto& x : gapped) x = 2.0 + 100.0 * rng.uniform();
    const auto best = static_cast<std::size_t>(rng.uniform_index(static_cast<std::uint64_t>(count)));
    gapped[best] = 1.0 + 0.5 * rng.uniform();
    worst_cold = std::min(worst_cold, ewa_weights(gapped, 1e-8)[best]);

    // Hot limit on residuals of moderate spread.
    const auto w = ewa_weights(gapped, 1e9);
    for (double x : w) worst_hot = std::max(worst_hot, std::abs(x - 1.0 / count));
  }
  const bool pass = worst_sum <= 1e-12 && worst_cold >= 1.0 - 1e-9 && worst_hot <= 1e-6;
  return {pass, fmt("max |sum - 1| %.2g; min cold weight 1 - %.2g; max hot deviation %.2g", worst_sum,
                    1.0 - worst_cold, worst_hot)};
}

// 8. Proxy distance sanity checks.
Outcome delta_sanity() {
  // Aligned: W* constant on the n x m grid, estimate the matching cell values.
  const int n = 10;
  const int m = 20;
  Rng rng(808);
  const Matrix values = random_matrix(n, m, rng);
  const Graphon aligned = Graphon::regular_grid(values, 1.0);
  const Latents lat = sample_latents(n, m, 809);
  std::vector<int> ru(n);
  std::vector<int> rv(m);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) ru[i] += (lat.u[k] < lat.u[i]);
  }
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) rv[j] += (lat.v[k] < lat.v[j]);
  }
  Matrix theta(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) theta(i, j) = values(ru[i], rv[j]);
  }
  const double d_aligned = delta_tilde(theta, aligned, lat);

  // Zero graphon against a constant estimate.
  const double c = 0.37;
  const Graphon zero = Graphon::regular_grid(Matrix::Zero(1, 1), 1.0);
  const double d_const = delta_tilde(Matrix::Constant(n, m, c), zero, lat);

  // Riemann refinement on the smooth graphon.
  const Graphon smooth = make_standard_graphon(StandardGraphon::Hoelder, {.K = 0, .L = 0, .rho = 0.9, .seed = 0});
  const auto obs = synthesize(plain(120, 60, smooth, NoiseModel::bernoulli(), 810));
  FitConfig config;
  config.K = 4;
  config.L = 4;
  config.seed = 810;
  const Matrix est = induced_mean(lloyd_fit(obs.H, config).model);
  const double d1000 = delta_tilde(est, smooth, obs.latents, 1000);
  const double d2000 = delta_tilde(est, smooth, obs.latents, 2000);

  const bool pass = d_aligned <= 1e-3 && std::abs(d_const - c) <= 1e-9 && std::abs(d1000 - d2000) <= 1e-3;
  return {pass, fmt("aligned %.2g; constant %.12g vs %.2g; refinement |%.6g - %.6g| = %.2g", d_aligned, d_const, c,
                    d1000, d2000, std::abs(d1000 - d2000))};
}

// 9. Oracle error against rho on the cos graphon.
Outcome rho_sweep_shape() {
  ExperimentSpec spec;
  spec.name = "cos-graphon-rho-sweep";
  spec.setup = StandardGraphon::Cos;
  spec.sweep = SweepKind::Rho;
  spec.sweep_values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  spec.n = 400;
  spec.m = 200;
  spec.K = 20;
  spec.L = 10;
  spec.reps = 100;
  spec.inits = {InitKind::Spectral};
  spec.seed = 909;
  spec.delta_grid = 0;
  spec.threads = default_thread_count();
  const auto result = run_experiment(spec);

  std::vector<double> curve(spec.sweep_values.size(), 0.0);
  std::vector<int> counts(spec.sweep_values.size(), 0);
  for (const auto& r : result.records) {
    const auto s = static_cast<std::size_t>(
        std::find(spec.sweep_values.begin(), spec.sweep_values.end(), r.sweep_value) - spec.sweep_values.begin());
    curve[s] += *r.oracle_mse;
    ++counts[s];
  }
  for (std::size_t s = 0; s < curve.size(); ++s) curve[s] /= counts[s];

  const auto peak = static_cast<std::size_t>(std::max_element(curve.begin(), curve.end()) - curve.begin());
  bool unimodal = peak > 0 && peak + 1 < curve.size();
  for (std::size_t s = 1; s <= peak; ++s) unimodal = unimodal && curve[s] > curve[s - 1];
  for (std::size_t s = peak + 1; s < curve.size(); ++s) unimodal = unimodal && curve[s] < curve[s - 1];

  const Graphon unit = make_standard_graphon(StandardGraphon::Cos, {.K = 20, .L = 10, .rho = 1.0, .seed = 0});
  const Matrix& qt = unit.piecewise()->values;
  const double target = std::clamp(qt.sum() / (2.0 * qt.squaredNorm()), 0.0, 1.0);
  const double argmax = spec.sweep_values[peak];
  const bool near = std::abs(argmax - target) <= 0.1 + 1e-12;

  std::ostringstream detail;
  detail << "mean oracle MSE:";
  for (double v : curve) detail << fmt(" %.3g", v);
  detail << fmt("; peak at rho=%.1f, predicted %.4f", argmax, target);
  return {unimodal && near, detail.str()};
}

// 10. Missing-data path.
Outcome missing_data() {
  const Graphon g = make_standard_graphon(StandardGraphon::Cos, {.K = 4, .L = 4, .rho = 0.6, .seed = 0});
  auto config = plain(300, 150, g, NoiseModel::bernoulli(), 1010);

  config.missing_p = 0.5;
  const auto half = synthesize(config);
  const Matrix Ht = half.adjusted();
  const double bias = (Ht - *half.theta_star).mean();
  const double bias_se = std::sqrt(((Ht - *half.theta_star).array().square().mean()) / static_cast<double>(Ht.size()));
  FitConfig fit;
  fit.K = 4;
  fit.L = 4;
  fit.seed = 1010;
  const auto report = lloyd_fit(Ht, fit);
  const auto& c = report.cost_trajectory;
  bool converged = report.iterations < fit.max_iters || std::abs(c[c.size() - 1] - c[c.size() - 2]) <= fit.tol_gamma;
  for (std::size_t s = 1; s < c.size(); ++s) converged = converged && c[s] <= c[s - 1] + 1e-9;
  const double fit_mse = mse(induced_mean(report.model), *half.theta_star);
  converged = converged && std::isfinite(fit_mse);

  config.missing_p = 1.0;
  const auto full = synthesize(config);
  config.missing_p = std::nullopt;
  const auto none = synthesize(config);
  const Matrix H1 = full.adjusted();
  const bool same_data = H1.cwiseEqual(none.H).all();
  const auto r1 = lloyd_fit(H1, fit);
  const auto r0 = lloyd_fit(none.H, fit);
  const bool same_fit = r1.model.Q.cwiseEqual(r0.model.Q).all() && r1.model.rows == r0.model.rows &&
                        r1.model.cols == r0.model.cols && r1.cost_trajectory == r0.cost_trajectory;
  const bool unbiased = std::abs(bias) <= 4.0 * bias_se;

  return {converged && same_data && same_fit && unbiased,
          fmt("p=0.5: %d iterations, MSE %.4g, mean(H~ - Theta*) = %.2g (%.2f s.e.); p=1 identical data %s, fit %s",
              report.iterations, fit_mse, bias, std::abs(bias) / bias_se, same_data ? "yes" : "no",
              same_fit ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::err);
  const std::vector<Criterion> criteria = {
      {1, "flow solver matches enumeration", 10, flow_exactness},
      {2, "Lloyd cost is monotone", 60, lloyd_monotonicity},
      {3, "global optimum at 12x8", 120, global_optimum},
      {4, "oracle risk closed form", 60, oracle_closed_form},
      {5, "rand-graphon error curves", 600, rand_graphon_curves},
      {6, "EWA close to best grid fit", 600, ewa_oracle},
      {7, "EWA temperature limits", 0, ewa_limits},
      {8, "delta-tilde sanity", 0, delta_sanity},
      {9, "rho-sweep oracle shape", 300, rho_sweep_shape},
      {10, "missing-data path", 0, missing_data},
  };

  std::set<int> selected;
  for (int a = 1; a < argc; ++a) selected.insert(std::atoi(argv[a]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.time_limit_s <= 0 || seconds <= c.time_limit_s;
    const bool pass = outcome.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] AC%-2d %-34s %7.1fs%s | %s\n", pass ? "PASS" : "FAIL", c.id, c.title, seconds,
                in_time ? "" : " (over time limit)", outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
