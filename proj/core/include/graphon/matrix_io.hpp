#pragma once

// On-disk formats: CSV matrices and JSON sidecars. Every float is written with
// 17 significant digits so that a write/read cycle is exact.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "graphon/aggregation.hpp"
#include "graphon/estimation.hpp"
#include "graphon/evaluation.hpp"
#include "graphon/model.hpp"
#include "graphon/synthesis.hpp"

namespace graphon {

std::string format_double(double x);

void write_csv(const std::filesystem::path& path, const Matrix& M);
Matrix read_csv(const std::filesystem::path& path);

/// "bernoulli", "binomial:N", "poisson:T", "gaussian:VAR".
NoiseModel parse_noise_spec(const std::string& text);
std::string to_spec(const NoiseModel& noise);

/// Sidecar written next to synthesized matrices.
struct DatasetMeta {
  int n = 0;
  int m = 0;
  NoiseModel noise;
  double rho = 0.0;
  std::uint64_t seed = 0;
  std::string graphon;  // standard family name
  int K = 0;
  int L = 0;
  std::uint64_t graphon_seed = 0;
  std::optional<double> missing_p;
  bool has_second_copy = false;
};

void write_meta(const std::filesystem::path& path, const DatasetMeta& meta);
DatasetMeta read_meta(const std::filesystem::path& path);

/// Rebuilds the data-generating graphon recorded in `meta`.
Graphon graphon_from_meta(const DatasetMeta& meta);

void write_latents(const std::filesystem::path& path, const Latents& latents);
Latents read_latents(const std::filesystem::path& path);

/// model.json: K, L, n, m, Q (row-major), row_labels, col_labels, cost_trajectory,
/// iterations, init, seed.
void write_model(const std::filesystem::path& path, const FitReport& report);
FitReport read_model(const std::filesystem::path& path);

/// Grid file: either a list of {K, L, n0, m0} objects or {"entries": [...]}.
HyperGrid read_grid(const std::filesystem::path& path);

void write_ewa(const std::filesystem::path& path, const EwaResult& result, const HyperGrid& grid,
               const std::string& aggregate_path);

void write_metrics(const std::filesystem::path& path, const MetricReport& report);

}  // namespace graphon
