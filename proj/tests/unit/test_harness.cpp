#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "graphon/aggregation.hpp"
#include "graphon/evaluation.hpp"
#include "graphon/experiment.hpp"
#include "graphon/matrix_io.hpp"
#include "graphon/report.hpp"

namespace graphon {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("graphon_unit_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.name = "small";
  spec.setup = StandardGraphon::Cos;
  spec.sweep = SweepKind::N;
  spec.sweep_values = {40, 60};
  spec.K = 3;
  spec.L = 3;
  spec.reps = 3;
  spec.inits = {InitKind::Spectral, InitKind::Random};
  spec.restarts = 2;
  spec.delta_grid = 200;
  spec.record_runtime = false;
  spec.seed = 17;
  return spec;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t c = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++c;
  return c;
}

TEST(Quantile, Type7) {
  EXPECT_DOUBLE_EQ(quantile({3.0}, 0.9), 3.0);
  EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}, 0.1), 2.0);
  EXPECT_THROW(quantile({}, 0.5), ConfigError);
}

TEST(HoelderRule, DirectEvaluationAndClamp) {
  const auto noise = NoiseModel::bernoulli();
  const double rho = 0.9;
  const int n = 400;
  const auto [sigma2, b] = noise.bernstein(rho);
  const int expected = static_cast<int>(std::floor(std::pow(3.0 * n * n / (25 * sigma2 + 4 * b * rho), 0.25)));
  const auto [K, L] = hoelder_KL_rule(n, n, rho, noise, 1.0);
  EXPECT_EQ(K, expected);
  EXPECT_EQ(L, expected);
  EXPECT_EQ(hoelder_KL_rule(4, 4, rho, noise, 1e-6).first, 2);
  EXPECT_GT(hoelder_KL_rule(6400, 6400, rho, noise, 1.0).first, hoelder_KL_rule(400, 400, rho, noise, 1.0).first);
  // Grows like sqrt(n): a 16x larger n gives about 4x larger K.
  EXPECT_NEAR(hoelder_KL_rule(6400, 6400, rho, noise, 1.0).first / static_cast<double>(K), 4.0, 0.5);
}

TEST(ExperimentSpec, ParseAndRoundTrip) {
  const auto spec = parse_experiment_spec(R"({
    "name": "rho-sweep", "setup": "cos_graphon",
    "sweep": {"rho_values": [0.2, 0.5]},
    "fixed": {"n": 80, "m": 40, "K": 4, "L": 4},
    "reps": 5, "inits": ["spectral", "random"], "noise": "binomial:3", "seed": 9, "tol": 0.01
  })");
  EXPECT_EQ(spec.sweep, SweepKind::Rho);
  EXPECT_EQ(spec.sweep_values, (std::vector<double>{0.2, 0.5}));
  EXPECT_EQ(spec.n, 80);
  EXPECT_EQ(spec.K, 4);
  EXPECT_EQ(spec.reps, 5);
  EXPECT_EQ(spec.inits.size(), 2u);
  EXPECT_TRUE(spec.noise == NoiseModel::binomial(3));
  EXPECT_DOUBLE_EQ(spec.tol_gamma, 0.01);
  const auto again = parse_experiment_spec(to_json(spec));
  EXPECT_EQ(to_json(again), to_json(spec));

  const auto autokl = parse_experiment_spec(R"({"setup": "hoelder", "sweep": {"n_values": [100]}, "KL": "auto"})");
  EXPECT_TRUE(autokl.auto_kl);
  EXPECT_THROW(parse_experiment_spec(R"({"setup": "cos"})"), ConfigError);
  EXPECT_THROW(parse_experiment_spec("not json"), ConfigError);
}

TEST(ExperimentSpec, DimensionsFollowSweep) {
  auto spec = small_spec();
  EXPECT_EQ(sweep_dimensions(spec, 60), (std::pair<int, int>{60, 30}));
  spec.sweep = SweepKind::Rho;
  spec.n = 50;
  spec.m = 20;
  EXPECT_EQ(sweep_dimensions(spec, 0.3), (std::pair<int, int>{50, 20}));
  EXPECT_DOUBLE_EQ(sweep_graphon(spec, 0.3).rho(), 0.3);
}

TEST(ExperimentSpec, RandValuesIndependentOfSweepPoint) {
  auto spec = small_spec();
  spec.setup = StandardGraphon::Rand;
  EXPECT_EQ(sweep_graphon(spec, 40).piecewise()->values, sweep_graphon(spec, 60).piecewise()->values);
}

TEST(RunExperiment, SingleRecord) {
  auto spec = small_spec();
  spec.sweep_values = {40};
  spec.reps = 1;
  spec.inits = {InitKind::Spectral};
  const auto result = run_experiment(spec);
  ASSERT_EQ(result.records.size(), 1u);
  ASSERT_EQ(result.summary.size(), 1u);
  EXPECT_TRUE(result.records[0].delta_tilde.has_value());
  EXPECT_TRUE(result.records[0].oracle_mse.has_value());
}

TEST(RunExperiment, DeterministicAndReplayable) {
  const auto spec = small_spec();
  const auto a = run_experiment(spec);
  const auto b = run_experiment(spec);
  ASSERT_EQ(a.records.size(), 2u * 3u * 2u);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(records_to_csv(a.records), records_to_csv(b.records));

  // A threaded run produces the same records.
  auto threaded = spec;
  threaded.threads = 3;
  EXPECT_EQ(run_experiment(threaded).records, a.records);

  // Each record carries its cell seed.
  for (std::size_t s = 0; s < spec.sweep_values.size(); ++s) {
    for (int rep = 0; rep < spec.reps; ++rep) {
      const auto seed = cell_seed(spec.seed, s, rep, spec.reps);
      const auto hits = std::count_if(a.records.begin(), a.records.end(), [&](const CellRecord& r) {
        return r.seed == seed && r.sweep_value == spec.sweep_values[s] && r.rep == rep;
      });
      EXPECT_EQ(hits, 2);
    }
  }
}

TEST(RunExperiment, SummaryQuantilesOrdered) {
  const auto result = run_experiment(small_spec());
  ASSERT_EQ(result.summary.size(), 4u);
  for (const auto& s : result.summary) {
    EXPECT_EQ(s.count, 3);
    EXPECT_LE(s.q10, s.median);
    EXPECT_LE(s.median, s.q90);
  }
}

TEST(RunExperiment, InfeasibleConfigSkipped) {
  auto spec = small_spec();
  spec.n0 = 30;
  spec.reps = 1;
  spec.sweep_values = {40};
  const auto result = run_experiment(spec);
  EXPECT_TRUE(result.records.empty());
}

// Median spectral MSE is bracketed by the oracle median and ten times the bound.
TEST(RunExperiment, CosMedianBracketed) {
  ExperimentSpec spec;
  spec.setup = StandardGraphon::Cos;
  spec.sweep = SweepKind::N;
  spec.sweep_values = {256};
  spec.K = 8;
  spec.L = 8;
  spec.rho = 0.6;
  spec.reps = 20;
  spec.delta_grid = 0;
  spec.seed = 2;
  const auto result = run_experiment(spec);
  ASSERT_EQ(result.summary.size(), 1u);
  const auto& s = result.summary[0];
  ASSERT_TRUE(s.oracle_median.has_value());
  EXPECT_TRUE(std::isfinite(s.median));
  EXPECT_GE(s.median, *s.oracle_median);
  EXPECT_LE(s.median, 10.0 * s.rate_bound);
}

TEST(Report, EmptyResultGivesHeaderOnlyCsv) {
  const auto csv = records_to_csv({});
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
  EXPECT_TRUE(parse_records_csv(csv).empty());
}

TEST(Report, CsvRoundTrip) {
  const auto result = run_experiment(small_spec());
  EXPECT_EQ(parse_records_csv(records_to_csv(result.records)), result.records);

  std::vector<CellRecord> odd{{0.1 + 0.2, "random", 4, 1.0 / 3.0, std::nullopt, 2e-300, 5.5, 1.25, ~0ULL}};
  EXPECT_EQ(parse_records_csv(records_to_csv(odd)), odd);
  EXPECT_THROW(parse_records_csv("bad,header\n"), IoError);
}

TEST(Report, SvgHasFourCurvesForTwoInits) {
  const auto result = run_experiment(small_spec());
  const auto svg = render_svg(result);
  EXPECT_EQ(count(svg, "<polyline"), 4u);
  EXPECT_EQ(count(svg, "<polygon"), 2u);
  EXPECT_NE(svg.find("rate bound"), std::string::npos);
  EXPECT_NE(svg.find("oracle"), std::string::npos);
}

TEST(Report, EmitWritesRequestedFiles) {
  const auto dir = scratch("emit");
  const auto result = run_experiment(small_spec());
  const auto files = emit_outputs(result, dir, {OutputFormat::Csv, OutputFormat::Json, OutputFormat::Svg});
  ASSERT_EQ(files.size(), 3u);
  for (const auto& f : files) EXPECT_TRUE(fs::exists(f));
  EXPECT_EQ(parse_records_csv(slurp(dir / "records.csv")), result.records);
  EXPECT_NE(slurp(dir / "summary.json").find("\"q90\""), std::string::npos);
  EXPECT_THROW(emit_outputs(result, dir / "records.csv" / "sub", {OutputFormat::Csv}), IoError);
}

TEST(MatrixIo, CsvRoundTripIsExact) {
  const auto dir = scratch("csv");
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix M(7, 4);
  for (Eigen::Index k = 0; k < M.size(); ++k) M.data()[k] = u(gen) * 1e-7;
  write_csv(dir / "m.csv", M);
  EXPECT_EQ(read_csv(dir / "m.csv"), M);
  EXPECT_THROW(read_csv(dir / "missing.csv"), IoError);
  std::ofstream(dir / "ragged.csv") << "1,2\n3\n";
  EXPECT_THROW(read_csv(dir / "ragged.csv"), IoError);
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}

TEST(MatrixIo, NoiseSpecs) {
  EXPECT_TRUE(parse_noise_spec("bernoulli") == NoiseModel::bernoulli());
  EXPECT_TRUE(parse_noise_spec("binomial:7") == NoiseModel::binomial(7));
  EXPECT_TRUE(parse_noise_spec("poisson:2.5") == NoiseModel::scaled_poisson(2.5));
  EXPECT_TRUE(parse_noise_spec("gaussian:0.25") == NoiseModel::gaussian(0.25));
  for (const auto& n : {NoiseModel::binomial(3), NoiseModel::gaussian(0.1), NoiseModel::scaled_poisson(4)}) {
    EXPECT_TRUE(parse_noise_spec(to_spec(n)) == n);
  }
  EXPECT_THROW(parse_noise_spec("cauchy"), ConfigError);
  EXPECT_THROW(parse_noise_spec("binomial:x"), ConfigError);
}

TEST(MatrixIo, ModelAndMetaRoundTrip) {
  const auto dir = scratch("model");
  FitReport rep;
  Matrix Q(2, 3);
  Q << 0.1, 0.2, 0.3, 0.4, 0.5, 1.0 / 3.0;
  rep.model = BlockModel(Q, Assignment({0, 1, 1}, 2), Assignment({2, 0, 1, 1}, 3));
  rep.cost_trajectory = {3.0, 2.5, 2.4999};
  rep.iterations = 2;
  rep.init_used = "spectral";
  rep.seed = 12345678901234ULL;
  write_model(dir / "model.json", rep);
  const auto back = read_model(dir / "model.json");
  EXPECT_EQ(back.model.Q, Q);
  EXPECT_EQ(back.model.rows, rep.model.rows);
  EXPECT_EQ(back.model.cols, rep.model.cols);
  EXPECT_EQ(back.cost_trajectory, rep.cost_trajectory);
  EXPECT_EQ(back.seed, rep.seed);

  DatasetMeta meta;
  meta.n = 30;
  meta.m = 20;
  meta.noise = NoiseModel::binomial(4);
  meta.rho = 0.6;
  meta.seed = 5;
  meta.graphon = "rand";
  meta.K = 3;
  meta.L = 2;
  meta.graphon_seed = 77;
  write_meta(dir / "meta.json", meta);
  const auto m2 = read_meta(dir / "meta.json");
  EXPECT_EQ(m2.n, 30);
  EXPECT_TRUE(m2.noise == meta.noise);
  EXPECT_EQ(graphon_from_meta(m2).piecewise()->values,
            make_standard_graphon(StandardGraphon::Rand, {3, 2, 0.6, 77}).piecewise()->values);

  Latents l{{0.1, 0.7}, {0.3}};
  write_latents(dir / "latents.json", l);
  EXPECT_EQ(read_latents(dir / "latents.json").u, l.u);
}

TEST(MatrixIo, GridFileForms) {
  const auto dir = scratch("grid");
  std::ofstream(dir / "a.json") << R"([{"K": 2, "L": 3, "n0": 1, "m0": 0}])";
  std::ofstream(dir / "b.json") << R"({"entries": [{"K": 4, "L": 2}]})";
  EXPECT_EQ(read_grid(dir / "a.json").entries[0], (GridEntry{2, 3, 1, 0}));
  EXPECT_EQ(read_grid(dir / "b.json").entries[0], (GridEntry{4, 2, 0, 0}));
  std::ofstream(dir / "c.json") << "{";
  EXPECT_THROW(read_grid(dir / "c.json"), IoError);
}

}  // namespace
}  // namespace graphon
