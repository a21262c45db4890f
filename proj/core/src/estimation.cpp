#include "graphon/estimation.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <limits>

#include "graphon/assignment_flow.hpp"
#include "graphon/parallel.hpp"
#include "graphon/rng.hpp"

namespace graphon {

namespace {

// Per-item averages over the clusters of the other axis, with cluster sizes.
struct SideStats {
  Matrix means;             // items x clusters_of_other
  Eigen::VectorXd weights;  // |C_l|
};

Eigen::VectorXd cluster_sizes_of(const Assignment& a) {
  Eigen::VectorXd sizes = Eigen::VectorXd::Zero(a.clusters());
  for (int label : a.labels()) sizes(label) += 1.0;
  return sizes;
}

// R(i, l) = sum of H(i, j) over columns j in cluster l.
Matrix sum_over_cols(const Matrix& H, const Assignment& cols) {
  const Eigen::Index n = H.rows();
  const Eigen::Index m = H.cols();
  Matrix R = Matrix::Zero(n, cols.clusters());
  const int* label = cols.labels().data();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* h = H.data() + i * m;
    double* r = R.data() + i * R.cols();
    for (Eigen::Index j = 0; j < m; ++j) r[label[j]] += h[j];
  }
  return R;
}

// C(j, k) = sum of H(i, j) over rows i in cluster k.
Matrix sum_over_rows(const Matrix& H, const Assignment& rows) {
  Matrix Ct = Matrix::Zero(rows.clusters(), H.cols());
  for (Eigen::Index i = 0; i < H.rows(); ++i) Ct.row(rows[static_cast<int>(i)]) += H.row(i);
  return Ct.transpose();
}

SideStats stats_from_sums(Matrix sums, const Assignment& other) {
  SideStats stats{std::move(sums), cluster_sizes_of(other)};
  for (Eigen::Index l = 0; l < stats.weights.size(); ++l) {
    if (stats.weights(l) > 0.0) stats.means.col(l) /= stats.weights(l);
  }
  return stats;
}

SideStats side_stats(const Matrix& Hx, const Assignment& other) {
  return stats_from_sums(sum_over_cols(Hx, other), other);
}

void require_nonempty(const Assignment& a, Axis axis) {
  if (const auto k = a.first_empty()) throw EmptyClusterError(axis, *k);
}

// d(i, k) = sum_l |C_l| (Hbar(i, l) - Q(k, l))^2, expanded into a product.
Matrix distance_costs(const SideStats& stats, const Matrix& Qx) {
  const Eigen::RowVectorXd w = stats.weights.transpose();
  const Eigen::VectorXd item_sq = (stats.means.array().square().rowwise() * w.array()).rowwise().sum();
  const Eigen::RowVectorXd centre_sq = (Qx.array().square().rowwise() * w.array()).rowwise().sum().transpose();
  Matrix d = -2.0 * (stats.means * w.asDiagonal()) * Qx.transpose();
  d.colwise() += item_sq;
  d.rowwise() += centre_sq;
  return d.cwiseMax(0.0);
}

// ||H - Z Q W^T||_F^2 without building the model.
double residual_cost(const Matrix& H, const Matrix& Q, const Assignment& rows, const Assignment& cols) {
  const Eigen::Index m = H.cols();
  const int* col_label = cols.labels().data();
  double cost = 0.0;
  for (Eigen::Index i = 0; i < H.rows(); ++i) {
    const double* h = H.data() + i * m;
    const double* q = Q.data() + static_cast<Eigen::Index>(rows[static_cast<int>(i)]) * Q.cols();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double r = h[j] - q[col_label[j]];
      acc += r * r;
    }
    cost += acc;
  }
  return cost;
}

std::vector<int> row_argmin(const Matrix& d) {
  std::vector<int> labels(static_cast<std::size_t>(d.rows()));
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    int best = 0;
    for (Eigen::Index k = 1; k < d.cols(); ++k) {
      if (d(i, k) < d(i, best)) best = static_cast<int>(k);
    }
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

// Moves the worst-fitting item into each empty cluster and sets that cluster's
// block row to the item's own profile, so the item's cost can only drop.
void repair_empty(const SideStats& stats, const Matrix& d, std::vector<int>& labels, Matrix& Qx) {
  const int K = static_cast<int>(Qx.rows());
  std::vector<int> sizes(static_cast<std::size_t>(K), 0);
  for (int label : labels) ++sizes[static_cast<std::size_t>(label)];

  for (int k = 0; k < K; ++k) {
    if (sizes[static_cast<std::size_t>(k)] > 0) continue;
    int worst = -1;
    double worst_d = -1.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const int own = labels[i];
      if (sizes[static_cast<std::size_t>(own)] < 2) continue;
      const double r = d(static_cast<Eigen::Index>(i), own);
      if (r > worst_d) {
        worst_d = r;
        worst = static_cast<int>(i);
      }
    }
    if (worst < 0) throw NumericalError("cannot repair empty cluster: too few items");
    --sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(worst)])];
    labels[static_cast<std::size_t>(worst)] = k;
    sizes[static_cast<std::size_t>(k)] = 1;
    Qx.row(k) = stats.means.row(worst);
  }
}

// One Z-step on the row axis of Hx. With min_size > 0 the size-constrained
// solver runs; otherwise the per-row argmin, repaired if a cluster empties.
// The solver is fed the distance form of the costs, which differs from the
// linear objective only by a per-row constant.
Assignment update_side(const SideStats& stats, Matrix& Qx, int min_size) {
  const Matrix d = distance_costs(stats, Qx);
  if (min_size > 0) return min_size_assignment(d, min_size);
  auto labels = row_argmin(d);
  repair_empty(stats, d, labels, Qx);
  return Assignment(std::move(labels), static_cast<int>(Qx.rows()));
}

// Block averages from the per-row column-cluster sums R of sum_over_cols.
Matrix block_means_from(const Matrix& R, const Assignment& rows, const Assignment& cols, double fill) {
  const int K = rows.clusters();
  const int L = cols.clusters();
  Matrix sums = Matrix::Zero(K, L);
  for (int i = 0; i < rows.size(); ++i) sums.row(rows[i]) += R.row(i);
  const Eigen::VectorXd row_sizes = cluster_sizes_of(rows);
  const Eigen::VectorXd col_sizes = cluster_sizes_of(cols);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      const double count = row_sizes(k) * col_sizes(l);
      sums(k, l) = count > 0.0 ? sums(k, l) / count : fill;
    }
  }
  return sums;
}

Matrix block_means(const Matrix& H, const Assignment& rows, const Assignment& cols, bool fill_empty) {
  return block_means_from(sum_over_cols(H, cols), rows, cols, fill_empty ? H.mean() : 0.0);
}

std::vector<int> random_labels(int n, int K, int min_size, Rng& rng) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<int> sizes(static_cast<std::size_t>(K), 0);
    for (auto& label : labels) {
      label = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(K)));
      ++sizes[static_cast<std::size_t>(label)];
    }
    if (*std::min_element(sizes.begin(), sizes.end()) >= min_size) break;
  }
  return labels;
}

}  // namespace

InitKind parse_init_kind(const std::string& name) {
  if (name == "spectral") return InitKind::Spectral;
  if (name == "random") return InitKind::Random;
  throw ConfigError("unknown init '" + name + "' (expected spectral or random)");
}

std::string to_string(InitKind kind) { return kind == InitKind::Spectral ? "spectral" : "random"; }

void FitConfig::validate(int n, int m) const {
  if (K < 2 || L < 2) throw ConfigError("K and L must be at least 2");
  if (K > n || L > m) throw ConfigError("more clusters than items");
  if (n0 < 0 || m0 < 0) throw ConfigError("minimum cluster sizes must be nonnegative");
  if (static_cast<long long>(K) * n0 > n) throw ConfigError("infeasible: K * n0 > n");
  if (static_cast<long long>(L) * m0 > m) throw ConfigError("infeasible: L * m0 > m");
  if (max_iters < 1) throw ConfigError("max_iters must be positive");
  if (!(tol_gamma >= 0.0)) throw ConfigError("tol_gamma must be nonnegative");
  if (init == InitKind::Random && restarts < 1) throw ConfigError("restarts must be positive");
}

Matrix q_step(const Matrix& H, const Assignment& rows, const Assignment& cols) {
  if (H.rows() != rows.size() || H.cols() != cols.size()) {
    throw DimensionError("observation matrix does not match assignments");
  }
  require_nonempty(rows, Axis::Rows);
  require_nonempty(cols, Axis::Columns);
  return block_means(H, rows, cols, false);
}

Matrix item_means(const Matrix& H, const Assignment& cols) {
  if (H.cols() != cols.size()) throw DimensionError("observation matrix does not match assignment");
  return side_stats(H, cols).means;
}

Matrix row_assignment_costs(const Matrix& H, const Matrix& Q, const Assignment& cols) {
  if (H.cols() != cols.size() || Q.cols() != cols.clusters()) {
    throw DimensionError("cost inputs do not match");
  }
  const auto stats = side_stats(H, cols);
  Matrix c(H.rows(), Q.rows());
  for (Eigen::Index i = 0; i < H.rows(); ++i) {
    for (Eigen::Index k = 0; k < Q.rows(); ++k) {
      c(i, k) = (stats.weights.transpose().array() *
                 (Q.row(k).array().square() - 2.0 * stats.means.row(i).array() * Q.row(k).array()))
                    .sum();
    }
  }
  return c;
}

Assignment z_step_unconstrained(const Matrix& H, const Matrix& Q, const Assignment& cols) {
  if (H.cols() != cols.size() || Q.cols() != cols.clusters()) {
    throw DimensionError("z-step inputs do not match");
  }
  require_nonempty(cols, Axis::Columns);
  const auto stats = side_stats(H, cols);
  return Assignment(row_argmin(distance_costs(stats, Q)), static_cast<int>(Q.rows()));
}

Assignment z_step_unconstrained_columns(const Matrix& H, const Matrix& Q, const Assignment& rows) {
  return z_step_unconstrained(H.transpose(), Q.transpose(), rows);
}

Assignment z_step_constrained(const Matrix& H, const Matrix& Q, const Assignment& cols, int n0) {
  if (H.cols() != cols.size() || Q.cols() != cols.clusters()) {
    throw DimensionError("z-step inputs do not match");
  }
  require_nonempty(cols, Axis::Columns);
  const auto stats = side_stats(H, cols);
  return min_size_assignment(distance_costs(stats, Q), n0);
}

Assignment z_step_constrained_columns(const Matrix& H, const Matrix& Q, const Assignment& rows,
                                      int m0) {
  return z_step_constrained(H.transpose(), Q.transpose(), rows, m0);
}

InitialAssignment random_init(int n, int m, int K, int L, int n0, int m0, std::uint64_t seed) {
  Rng rng(seed);
  auto rows = random_labels(n, K, std::min(n0, 1), rng);
  auto cols = random_labels(m, L, std::min(m0, 1), rng);
  return {Assignment(std::move(rows), K), Assignment(std::move(cols), L), false};
}

FitReport lloyd_run(const Matrix& H, const InitialAssignment& init, const FitConfig& config) {
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(H.cols());
  config.validate(n, m);
  if (!H.allFinite()) throw NumericalError("observation matrix is not finite");
  if (init.rows.size() != n || init.cols.size() != m || init.rows.clusters() != config.K ||
      init.cols.clusters() != config.L) {
    throw DimensionError("initial assignment does not match data or config");
  }

  Assignment rows = init.rows;
  Assignment cols = init.cols;

  if (rows.first_empty() || cols.first_empty()) {
    Matrix Q = block_means(H, rows, cols, true);
    {
      const auto stats = side_stats(H, cols);
      auto labels = rows.labels();
      repair_empty(stats, distance_costs(stats, Q), labels, Q);
      rows = Assignment(std::move(labels), config.K);
    }
    {
      Matrix Qt = Q.transpose();
      const auto stats = stats_from_sums(sum_over_rows(H, rows), rows);
      auto labels = cols.labels();
      repair_empty(stats, distance_costs(stats, Qt), labels, Qt);
      cols = Assignment(std::move(labels), config.L);
    }
  }

  Matrix R = sum_over_cols(H, cols);
  Matrix Q = block_means_from(R, rows, cols, 0.0);
  if (!rows.satisfies_min_size(config.n0) || !cols.satisfies_min_size(config.m0)) {
    // Project the start onto the feasible set before the monotone phase begins.
    if (!rows.satisfies_min_size(config.n0)) {
      rows = min_size_assignment(distance_costs(stats_from_sums(R, cols), Q), config.n0);
    }
    if (!cols.satisfies_min_size(config.m0)) {
      const Matrix Qt = Q.transpose();
      cols = min_size_assignment(distance_costs(stats_from_sums(sum_over_rows(H, rows), rows), Qt), config.m0);
      R = sum_over_cols(H, cols);
    }
    Q = block_means_from(R, rows, cols, 0.0);
  }

  FitReport report;
  report.cost_trajectory.push_back(residual_cost(H, Q, rows, cols));

  for (int t = 1; t <= config.max_iters; ++t) {
    require_nonempty(cols, Axis::Columns);
    rows = update_side(stats_from_sums(std::move(R), cols), Q, config.n0);
    Matrix Qt = Q.transpose();
    require_nonempty(rows, Axis::Rows);
    cols = update_side(stats_from_sums(sum_over_rows(H, rows), rows), Qt, config.m0);
    R = sum_over_cols(H, cols);
    Q = block_means_from(R, rows, cols, 0.0);

    const double cost = residual_cost(H, Q, rows, cols);
    if (!std::isfinite(cost)) throw NumericalError("cost became non-finite");
    const double previous = report.cost_trajectory.back();
    report.cost_trajectory.push_back(cost);
    report.iterations = t;
    if (std::abs(cost - previous) <= config.tol_gamma) break;
  }

  report.model = BlockModel(std::move(Q), std::move(rows), std::move(cols));
  report.init_used = to_string(config.init);
  report.seed = config.seed;
  return report;
}

namespace {

FitReport fit_impl(const Matrix& H, const FitConfig& config, const SpectralEmbedding* embedding) {
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(H.cols());
  config.validate(n, m);

  if (config.init == InitKind::Spectral) {
    std::optional<SpectralEmbedding> local;
    if (embedding == nullptr) embedding = &local.emplace(H, std::max(config.K, config.L));
    const auto init = spectral_init(*embedding, config.K, config.L, derive_seed(config.seed, Stream::Init));
    auto report = lloyd_run(H, init, config);
    if (init.fell_back) report.init_used = "random(fallback)";
    return report;
  }

  const auto restarts = static_cast<std::size_t>(config.restarts);
  std::vector<FitReport> runs(restarts);
  parallel_for(restarts, config.threads, [&](std::size_t r) {
    const auto init = random_init(n, m, config.K, config.L, config.n0, config.m0,
                                  derive_seed(config.seed, Stream::Restart, r));
    runs[r] = lloyd_run(H, init, config);
    runs[r].restart_index = static_cast<int>(r);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r) {
    if (runs[r].final_cost() < runs[best].final_cost()) best = r;
  }
  return std::move(runs[best]);
}

}  // namespace

FitReport lloyd_fit(const Matrix& H, const FitConfig& config) { return fit_impl(H, config, nullptr); }

FitReport lloyd_fit(const Matrix& H, const FitConfig& config, const SpectralEmbedding& embedding) {
  return fit_impl(H, config, &embedding);
}

}  // namespace graphon
