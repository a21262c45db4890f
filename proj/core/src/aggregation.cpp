#include "graphon/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "graphon/parallel.hpp"
#include "graphon/rng.hpp"

namespace graphon {

namespace {

// floor(2^(offset + i/2)) for i = 0, 1, ... while the value stays <= limit.
std::vector<int> geometric_values(double offset, double limit, int max_index) {
  std::vector<int> values;
  for (int i = 0; max_index < 0 || i <= max_index; ++i) {
    const double v = std::floor(std::pow(2.0, offset + i / 2.0));
    if (v > limit) break;
    const int value = static_cast<int>(v);
    if (values.empty() || values.back() != value) values.push_back(value);
  }
  return values;
}

std::vector<int> cluster_counts(int n) {
  const int max_index = static_cast<int>(std::floor(2.0 * std::log2(n / 10.0) + 1e-9));
  return geometric_values(1.0, static_cast<double>(n), max_index);
}

}  // namespace

void HyperGrid::validate(int n, int m) const {
  if (entries.empty()) throw ConfigError("hyper-parameter grid is empty");
  for (const auto& e : entries) {
    if (e.K < 2 || e.L < 2) throw ConfigError("grid entry with K or L below 2");
    if (e.n0 < 0 || e.m0 < 0) throw ConfigError("grid entry with negative minimum size");
    if (static_cast<long long>(e.K) * e.n0 > n || static_cast<long long>(e.L) * e.m0 > m ||
        e.K > n || e.L > m) {
      throw ConfigError("grid entry (" + std::to_string(e.K) + ", " + std::to_string(e.L) + ", " +
                        std::to_string(e.n0) + ", " + std::to_string(e.m0) + ") is infeasible");
    }
  }
}

HyperGrid default_grid(int n, int m) {
  if (n < 10 || m < 10) throw ConfigError("default grid needs n, m >= 10");
  HyperGrid grid;
  for (int K : cluster_counts(n)) {
    const auto n0s = geometric_values(2.0, static_cast<double>(n) / K, -1);
    for (int L : cluster_counts(m)) {
      const auto m0s = geometric_values(2.0, static_cast<double>(m) / L, -1);
      for (int n0 : n0s) {
        for (int m0 : m0s) grid.entries.push_back({K, L, n0, m0});
      }
    }
  }
  return grid;
}

double temperature(const NoiseModel& noise) {
  if (noise.is<Bernoulli>()) return 8.0 / 3.0;
  if (const auto* b = std::get_if<Binomial>(&noise.kind())) return 8.0 / (3.0 * b->trials);
  if (const auto* g = std::get_if<Gaussian>(&noise.kind())) return 4.0 * g->variance;
  throw UnsupportedError("no aggregation temperature is available for " + noise.name() + " noise");
}

std::vector<double> ewa_weights(std::span<const double> sq_residuals, double beta) {
  if (sq_residuals.empty()) throw ConfigError("no estimates to aggregate");
  if (!(beta > 0.0)) throw ConfigError("temperature must be positive");
  const double shift = *std::min_element(sq_residuals.begin(), sq_residuals.end());
  if (!std::isfinite(shift)) throw NumericalError("non-finite residual");

  std::vector<double> weights(sq_residuals.size());
  double total = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] = std::exp(-(sq_residuals[l] - shift) / beta);
    total += weights[l];
  }
  for (auto& w : weights) w /= total;
  return weights;
}

EwaAccumulator::EwaAccumulator(Matrix H_prime, double beta) : H_prime_(std::move(H_prime)), beta_(beta) {
  if (!(beta_ > 0.0)) throw ConfigError("temperature must be positive");
}

double EwaAccumulator::add(const Matrix& estimate) {
  if (estimate.rows() != H_prime_.rows() || estimate.cols() != H_prime_.cols()) {
    throw DimensionError("estimate does not match H'");
  }
  const double r = (H_prime_ - estimate).squaredNorm();
  if (!std::isfinite(r)) throw NumericalError("non-finite residual");

  if (residuals_.empty()) {
    weighted_sum_ = estimate;
    normaliser_ = 1.0;
    shift_ = r;
  } else if (r < shift_) {
    const double scale = std::exp(-(shift_ - r) / beta_);
    weighted_sum_ = weighted_sum_ * scale + estimate;
    normaliser_ = normaliser_ * scale + 1.0;
    shift_ = r;
  } else {
    const double w = std::exp(-(r - shift_) / beta_);
    if (w > 0.0) {
      weighted_sum_ += w * estimate;
      normaliser_ += w;
    }
  }
  residuals_.push_back(r);
  return r;
}

EwaResult EwaAccumulator::finish() const {
  if (residuals_.empty()) throw ConfigError("no estimates to aggregate");
  EwaResult result;
  result.weights = ewa_weights(residuals_, beta_);
  result.aggregate = weighted_sum_ / normaliser_;
  result.beta = beta_;
  result.sq_residuals = residuals_;
  return result;
}

EwaResult ewa_aggregate(std::span<const Matrix> estimates, const Matrix& H_prime, double beta) {
  if (estimates.empty()) throw ConfigError("no estimates to aggregate");
  EwaAccumulator acc(H_prime, beta);
  for (const auto& estimate : estimates) acc.add(estimate);
  return acc.finish();
}

EwaResult fit_and_aggregate(const Matrix& H, const Matrix& H_prime, const HyperGrid& grid,
                            double beta, const EwaFitOptions& options) {
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(H.cols());
  if (H_prime.rows() != n || H_prime.cols() != m) throw DimensionError("H and H' differ in shape");
  grid.validate(n, m);

  // Spectral starts: one embedding, one clustering per distinct K and per distinct L.
  std::map<int, Assignment> row_starts;
  std::map<int, Assignment> col_starts;
  std::optional<SpectralEmbedding> embedding;
  const std::uint64_t init_seed = derive_seed(options.seed, Stream::Init);
  if (options.init == InitKind::Spectral) {
    int max_rank = 2;
    for (const auto& e : grid.entries) max_rank = std::max({max_rank, e.K, e.L});
    embedding.emplace(H, max_rank);
    if (!embedding->degenerate()) {
      for (const auto& e : grid.entries) {
        if (!row_starts.contains(e.K)) {
          row_starts.emplace(e.K, embedding->row_clusters(e.K, derive_seed(init_seed, Stream::KMeans, 0)));
        }
        if (!col_starts.contains(e.L)) {
          col_starts.emplace(e.L, embedding->col_clusters(e.L, derive_seed(init_seed, Stream::KMeans, 1)));
        }
      }
    }
  }

  auto fit_entry = [&](const GridEntry& e) {
    FitConfig config;
    config.K = e.K;
    config.L = e.L;
    config.n0 = e.n0;
    config.m0 = e.m0;
    config.init = options.init;
    config.restarts = options.restarts;
    config.max_iters = options.max_iters;
    config.tol_gamma = options.tol_gamma;
    config.seed = options.seed;
    if (options.init == InitKind::Spectral && !embedding->degenerate()) {
      config.validate(n, m);
      return lloyd_run(H, InitialAssignment{row_starts.at(e.K), col_starts.at(e.L), false}, config);
    }
    if (options.init == InitKind::Spectral) return lloyd_fit(H, config, *embedding);
    return lloyd_fit(H, config);
  };

  EwaAccumulator acc(H_prime, beta);
  std::vector<FitReport> fits;
  fits.reserve(grid.size());

  const std::size_t chunk = static_cast<std::size_t>(std::max(1, options.threads));
  for (std::size_t start = 0; start < grid.size(); start += chunk) {
    const std::size_t count = std::min(chunk, grid.size() - start);
    std::vector<FitReport> batch(count);
    parallel_for(count, options.threads,
                 [&](std::size_t b) { batch[b] = fit_entry(grid.entries[start + b]); });
    for (std::size_t b = 0; b < count; ++b) {
      const Matrix estimate = induced_mean(batch[b].model);
      acc.add(estimate);
      if (options.on_fit) options.on_fit(start + b, batch[b], estimate);
      fits.push_back(std::move(batch[b]));
    }
  }

  EwaResult result = acc.finish();
  result.fits = std::move(fits);
  return result;
}

}  // namespace graphon
