#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "graphon/estimation.hpp"
#include "graphon/model.hpp"

namespace graphon {

struct GridEntry {
  int K = 2;
  int L = 2;
  int n0 = 0;
  int m0 = 0;

  friend bool operator==(const GridEntry&, const GridEntry&) = default;
};

struct HyperGrid {
  std::vector<GridEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  /// Throws ConfigError unless every entry has K, L >= 2, K n0 <= n and L m0 <= m.
  void validate(int n, int m) const;
};

/// Geometric grid: K_i = floor(2^(1 + i/2)) for 0 <= i <= 2 log2(n/10), L_j likewise
/// in m, and for each pair the sizes n0 = floor(2^(2 + l/2)) <= n / K_i (m0 likewise).
/// Values that coincide after flooring appear once.
HyperGrid default_grid(int n, int m);

/// 8/3 for Bernoulli, 8/(3N) for Binomial(N), 4 sigma^2 for Gaussian noise.
/// Throws UnsupportedError for scaled Poisson noise.
double temperature(const NoiseModel& noise);

/// w_l proportional to exp(-r_l / beta), normalised after shifting by min r.
std::vector<double> ewa_weights(std::span<const double> sq_residuals, double beta);

struct EwaResult {
  std::vector<double> weights;
  Matrix aggregate;
  double beta = 0.0;
  std::vector<double> sq_residuals;  // ||H' - estimate_l||_F^2
  std::vector<FitReport> fits;       // empty unless produced by fit_and_aggregate
};

/// Streaming exponentially weighted aggregate: estimates are folded in one at a
/// time with a running log-sum-exp shift, so only one n x m sum is held.
class EwaAccumulator {
 public:
  EwaAccumulator(Matrix H_prime, double beta);

  /// Adds an estimate and returns its squared residual against H'.
  double add(const Matrix& estimate);

  std::size_t count() const noexcept { return residuals_.size(); }
  EwaResult finish() const;

 private:
  Matrix H_prime_;
  double beta_;
  Matrix weighted_sum_;
  double normaliser_ = 0.0;
  double shift_ = 0.0;
  std::vector<double> residuals_;
};

/// Aggregates precomputed estimates. H' must be independent of the data that
/// produced `estimates`; that is the caller's contract and is not checked.
EwaResult ewa_aggregate(std::span<const Matrix> estimates, const Matrix& H_prime, double beta);

struct EwaFitOptions {
  InitKind init = InitKind::Spectral;
  int restarts = 10;
  int max_iters = 40;
  double tol_gamma = 1e-3;
  std::uint64_t seed = 0;
  int threads = 1;
  /// Called in grid order with each entry's fit and induced mean.
  std::function<void(std::size_t, const FitReport&, const Matrix&)> on_fit;
};

/// Fits every grid entry on H and aggregates the fits with weights from H'.
/// Spectral starts share one embedding and one k-means per distinct K and L.
EwaResult fit_and_aggregate(const Matrix& H, const Matrix& H_prime, const HyperGrid& grid,
                            double beta, const EwaFitOptions& options);

}  // namespace graphon
