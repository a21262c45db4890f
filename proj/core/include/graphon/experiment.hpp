#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphon/estimation.hpp"
#include "graphon/model.hpp"
#include "graphon/synthesis.hpp"

namespace graphon {

enum class SweepKind { N, Rho };

/// One Monte Carlo study. In an n-sweep m = n/2 and rho is fixed; in a rho-sweep
/// (n, m) are fixed.
struct ExperimentSpec {
  std::string name = "experiment";
  StandardGraphon setup = StandardGraphon::Rand;
  SweepKind sweep = SweepKind::N;
  std::vector<double> sweep_values;
  int n = 256;
  int m = 128;
  double rho = 0.6;
  int K = 8;  // graphon cells and fitted clusters
  int L = 8;
  bool auto_kl = false;  // Hoelder rule for the fitted K = L
  int n0 = 0;
  int m0 = 0;
  int reps = 20;
  std::vector<InitKind> inits{InitKind::Spectral};
  NoiseModel noise;
  std::uint64_t seed = 0;
  int restarts = 10;
  int max_iters = 40;
  double tol_gamma = 1e-3;
  int delta_grid = 1000;  // 0 disables delta_tilde
  bool record_runtime = true;
  int threads = 1;

  void validate() const;
};

ExperimentSpec parse_experiment_spec(const std::string& json_text);
ExperimentSpec load_experiment_spec(const std::string& path);
std::string to_json(const ExperimentSpec& spec);

struct CellRecord {
  double sweep_value = 0.0;
  std::string init;
  int rep = 0;
  double mse = 0.0;
  std::optional<double> delta_tilde;
  std::optional<double> oracle_mse;
  double rate_bound = 0.0;
  double runtime_ms = 0.0;
  std::uint64_t seed = 0;  // cell seed: replays this cell with the same spec

  friend bool operator==(const CellRecord&, const CellRecord&) = default;
};

struct SummaryRow {
  double sweep_value = 0.0;
  std::string init;
  int count = 0;
  double median = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  std::optional<double> oracle_median;
  double rate_bound = 0.0;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<CellRecord> records;
  std::vector<SummaryRow> summary;
};

/// Linear-interpolation quantile (type 7) of a non-empty sample.
double quantile(std::vector<double> values, double q);

/// Per-cell seed: a pure function of the experiment seed, sweep index and repetition.
std::uint64_t cell_seed(std::uint64_t seed, std::size_t sweep_index, int rep, int reps);

/// K = L = floor((3 n m Lip^2 / (25 sigma^2 + 4 b rho))^(1 / (2 (alpha + 1)))),
/// clamped to [2, min(n, m) / 2].
std::pair<int, int> hoelder_KL_rule(int n, int m, double rho, const NoiseModel& noise, double lipschitz,
                                    double alpha = 1.0);

/// Dimensions of sweep point `value`.
std::pair<int, int> sweep_dimensions(const ExperimentSpec& spec, double value);

/// Graphon for sweep point `value` (rand values depend only on the experiment seed).
Graphon sweep_graphon(const ExperimentSpec& spec, double value);

ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Summary rows grouped by (sweep value, init) in order of first appearance.
std::vector<SummaryRow> summarize(const std::vector<CellRecord>& records);

}  // namespace graphon
