#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "graphon/model.hpp"

namespace graphon {

/// Piecewise-constant graphon equal to theta(i, j) on [i/n, (i+1)/n) x [j/m, (j+1)/m).
/// rho is max(theta); the range check is skipped so signed estimates lift too.
Graphon lift_to_graphon(const Matrix& theta);

/// Exact L2 distance between two piecewise-constant graphons (common refinement).
double l2_distance(const Graphon& a, const Graphon& b);

/// ||a - b||_F^2 / (n m).
double mse(const Matrix& a, const Matrix& b);

/// Sort-based proxy of the graphon distance between the lift of theta_hat and W*.
/// Row i of theta_hat is placed on the rectangle of the rank of u_i (stable sort,
/// lowest index first on ties), likewise for columns. Integrals of W* use a
/// grid_res x grid_res midpoint grid with exact overlap weights.
double delta_tilde(const Matrix& theta_hat, const Graphon& graphon, const std::optional<Latents>& latents,
                   int grid_res = 1000);

struct TrueClusters {
  Assignment rows;
  Assignment cols;
};

/// Bins each latent into the graphon's cells. Requires a piecewise-constant graphon.
TrueClusters true_assignments(const Graphon& graphon, const Latents& latents);

struct OracleFit {
  BlockModel model;
  /// Blocks with no observations, set to the grand mean of H.
  std::vector<std::pair<int, int>> filled_blocks;
};

OracleFit oracle_fit(const Matrix& H, const Assignment& rows, const Assignment& cols);

/// sum_kl Q(k, l) (1 - Q(k, l)) / (n m).
double oracle_risk_bernoulli(const Matrix& Q_star, int n, int m);

/// (25 sigma^2 + 4 b rho) (3KL/(nm) + ln K / m + ln L / n) with (sigma^2, b) the
/// Bernstein constants of `noise`.
double rate_bound(const NoiseModel& noise, double rho, int n, int m, int K, int L);

/// 3/m0 ln(e n / n0) + 3/n0 ln(e m / m0).
double psi_condition(int n, int m, int n0, int m0);

struct MetricReport {
  double mse_theta = 0.0;
  std::optional<double> delta_tilde_sq;
  std::optional<double> oracle_mse;
  std::optional<double> rate_bound;
};

}  // namespace graphon
