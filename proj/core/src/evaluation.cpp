#include "graphon/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace graphon {

namespace {

std::vector<double> merged_breaks(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Stable ranks: rank[i] is the position of x[i] in ascending order.
std::vector<int> stable_ranks(const std::vector<double>& x) {
  std::vector<int> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return x[static_cast<std::size_t>(a)] < x[static_cast<std::size_t>(b)]; });
  std::vector<int> rank(x.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[static_cast<std::size_t>(order[r])] = static_cast<int>(r);
  return rank;
}

// overlap(a, g) = |[a/n, (a+1)/n) cap [g/G, (g+1)/G)|
Matrix overlap_weights(int n, int G) {
  Matrix w = Matrix::Zero(n, G);
  for (int a = 0; a < n; ++a) {
    const double lo = static_cast<double>(a) / n;
    const double hi = static_cast<double>(a + 1) / n;
    const int g_first = std::max(0, static_cast<int>(std::floor(lo * G)) - 1);
    const int g_last = std::min(G - 1, static_cast<int>(std::ceil(hi * G)) + 1);
    for (int g = g_first; g <= g_last; ++g) {
      const double overlap = std::min(hi, static_cast<double>(g + 1) / G) - std::max(lo, static_cast<double>(g) / G);
      if (overlap > 0.0) w(a, g) = overlap;
    }
  }
  return w;
}

}  // namespace

Graphon lift_to_graphon(const Matrix& theta) {
  if (theta.rows() < 1 || theta.cols() < 1) throw DimensionError("cannot lift an empty matrix");
  const double top = theta.maxCoeff();
  return Graphon::regular_grid(theta, top > 0.0 ? top : 1.0, RangeCheck::Skip);
}

double l2_distance(const Graphon& a, const Graphon& b) {
  const auto* pa = a.piecewise();
  const auto* pb = b.piecewise();
  if (pa == nullptr || pb == nullptr) throw ConfigError("exact L2 distance needs piecewise-constant graphons");
  const auto bu = merged_breaks(pa->breaks_u, pb->breaks_u);
  const auto bv = merged_breaks(pa->breaks_v, pb->breaks_v);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < bu.size(); ++i) {
    const double u = 0.5 * (bu[i] + bu[i + 1]);
    const double du = bu[i + 1] - bu[i];
    for (std::size_t j = 0; j + 1 < bv.size(); ++j) {
      const double v = 0.5 * (bv[j] + bv[j + 1]);
      const double diff = a(u, v) - b(u, v);
      total += du * (bv[j + 1] - bv[j]) * diff * diff;
    }
  }
  return std::sqrt(total);
}

double mse(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("mse of differently shaped matrices");
  if (a.size() == 0) throw DimensionError("mse of empty matrices");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

double delta_tilde(const Matrix& theta_hat, const Graphon& graphon, const std::optional<Latents>& latents,
                   int grid_res) {
  if (!latents) throw ConfigError("delta_tilde needs the latent positions");
  if (grid_res < 100) throw ConfigError("delta_tilde grid resolution must be at least 100");
  const int n = static_cast<int>(theta_hat.rows());
  const int m = static_cast<int>(theta_hat.cols());
  if (static_cast<int>(latents->u.size()) != n || static_cast<int>(latents->v.size()) != m) {
    throw DimensionError("latents do not match the estimate");
  }
  const int G = grid_res;

  Matrix W(G, G);
  for (int g = 0; g < G; ++g) {
    const double x = (g + 0.5) / G;
    for (int h = 0; h < G; ++h) W(g, h) = graphon(x, (h + 0.5) / G);
  }
  const double w_norm_sq = W.squaredNorm() / (static_cast<double>(G) * G);

  // integrals(a, b) = integral of W* over rectangle (a, b) of the regular n x m grid;
  // the overlap weights are lengths, so A W B^T is already area-weighted.
  const Matrix A = overlap_weights(n, G);
  const Matrix B = overlap_weights(m, G);
  const Matrix integrals = A * (W * B.transpose());

  const auto ru = stable_ranks(latents->u);
  const auto rv = stable_ranks(latents->v);
  double cross = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto a = static_cast<Eigen::Index>(ru[static_cast<std::size_t>(i)]);
    for (int j = 0; j < m; ++j) cross += theta_hat(i, j) * integrals(a, rv[static_cast<std::size_t>(j)]);
  }

  const double sq = w_norm_sq - 2.0 * cross + theta_hat.squaredNorm() / (static_cast<double>(n) * m);
  return std::sqrt(std::max(sq, 0.0));
}

TrueClusters true_assignments(const Graphon& graphon, const Latents& latents) {
  const auto* pc = graphon.piecewise();
  if (pc == nullptr) throw ConfigError("true clusters exist only for piecewise-constant graphons");
  const int K = static_cast<int>(pc->values.rows());
  const int L = static_cast<int>(pc->values.cols());
  std::vector<int> rows(latents.u.size());
  std::vector<int> cols(latents.v.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = locate_cell(pc->breaks_u, latents.u[i]);
  for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = locate_cell(pc->breaks_v, latents.v[j]);
  return {Assignment(std::move(rows), K), Assignment(std::move(cols), L)};
}

OracleFit oracle_fit(const Matrix& H, const Assignment& rows, const Assignment& cols) {
  if (H.rows() != rows.size() || H.cols() != cols.size()) {
    throw DimensionError("observation matrix does not match assignments");
  }
  const int K = rows.clusters();
  const int L = cols.clusters();
  Matrix sums = Matrix::Zero(K, L);
  Matrix counts = Matrix::Zero(K, L);
  for (int i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < cols.size(); ++j) {
      sums(rows[i], cols[j]) += H(i, j);
      counts(rows[i], cols[j]) += 1.0;
    }
  }
  OracleFit fit;
  const double grand = H.mean();
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      if (counts(k, l) > 0.0) {
        sums(k, l) /= counts(k, l);
      } else {
        sums(k, l) = grand;
        fit.filled_blocks.emplace_back(k, l);
      }
    }
  }
  fit.model = BlockModel(std::move(sums), rows, cols);
  return fit;
}

double oracle_risk_bernoulli(const Matrix& Q_star, int n, int m) {
  if (n < 1 || m < 1) throw DimensionError("n and m must be positive");
  if ((Q_star.array() < 0.0).any() || (Q_star.array() > 1.0).any()) {
    throw ConfigError("Bernoulli block means must lie in [0, 1]");
  }
  return (Q_star.array() * (1.0 - Q_star.array())).sum() / (static_cast<double>(n) * m);
}

double rate_bound(const NoiseModel& noise, double rho, int n, int m, int K, int L) {
  if (K < 2 || L < 2) throw ConfigError("rate bound needs K, L >= 2");
  if (n < 1 || m < 1) throw DimensionError("n and m must be positive");
  const auto [sigma2, b] = noise.bernstein(rho);
  const double nm = static_cast<double>(n) * m;
  const double r2 = 3.0 * K * L / nm + std::log(static_cast<double>(K)) / m + std::log(static_cast<double>(L)) / n;
  return (25.0 * sigma2 + 4.0 * b * rho) * r2;
}

double psi_condition(int n, int m, int n0, int m0) {
  if (n0 < 3 || m0 < 3) throw ConfigError("psi needs n0, m0 >= 3");
  if (n0 > n || m0 > m) throw ConfigError("psi needs n0 <= n and m0 <= m");
  return 3.0 / m0 * std::log(std::exp(1.0) * n / n0) + 3.0 / n0 * std::log(std::exp(1.0) * m / m0);
}

}  // namespace graphon
