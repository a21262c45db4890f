#pragma once

// Alternating minimisation of ||H - Z_rows Q Z_cols^T||_F^2 over block values Q
// and row/column assignments, with optional minimum cluster sizes.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphon/model.hpp"

namespace graphon {

enum class InitKind { Spectral, Random };

InitKind parse_init_kind(const std::string& name);
std::string to_string(InitKind kind);

struct FitConfig {
  int K = 2;
  int L = 2;
  int n0 = 0;
  int m0 = 0;
  InitKind init = InitKind::Spectral;
  int restarts = 10;  // random init only
  int max_iters = 40;
  double tol_gamma = 1e-3;
  std::uint64_t seed = 0;
  int threads = 1;

  /// Throws ConfigError unless 2 <= K <= n, 2 <= L <= m, K n0 <= n, L m0 <= m.
  void validate(int n, int m) const;
};

struct FitReport {
  BlockModel model;
  std::vector<double> cost_trajectory;
  int iterations = 0;
  std::string init_used;
  int restart_index = 0;
  std::uint64_t seed = 0;

  double final_cost() const { return cost_trajectory.back(); }
};

/// Block averages Q(k, l) of H. Throws EmptyClusterError if a cluster is empty.
Matrix q_step(const Matrix& H, const Assignment& rows, const Assignment& cols);

/// Item means: out(i, l) = mean of H(i, j) over column cluster l (0 for an empty cluster).
Matrix item_means(const Matrix& H, const Assignment& cols);

/// Row cost matrix c(i, k) = -2 (H Z_cols Q^T)(i, k) + Q_k D Q_k^T with
/// D = diag(column cluster sizes). Summed over a labeling it equals
/// ||H - Z Q Z_cols^T||^2 - ||H||^2.
Matrix row_assignment_costs(const Matrix& H, const Matrix& Q, const Assignment& cols);

/// Each row to argmin_k sum_l |C_l| (Hbar(i, l) - Q(k, l))^2, lowest k on ties.
Assignment z_step_unconstrained(const Matrix& H, const Matrix& Q, const Assignment& cols);
Assignment z_step_unconstrained_columns(const Matrix& H, const Matrix& Q, const Assignment& rows);

/// Exact minimiser over assignments whose clusters all hold at least n0 rows.
Assignment z_step_constrained(const Matrix& H, const Matrix& Q, const Assignment& cols, int n0);
Assignment z_step_constrained_columns(const Matrix& H, const Matrix& Q, const Assignment& rows,
                                      int m0);

struct InitialAssignment {
  Assignment rows;
  Assignment cols;
  bool fell_back = false;  // spectral init degenerated to random
};

/// Low-rank embedding of a degree-trimmed H, shared by every (K, L) drawn from it.
class SpectralEmbedding {
 public:
  explicit SpectralEmbedding(const Matrix& H, int max_rank);

  bool degenerate() const noexcept { return degenerate_; }
  int rows() const noexcept { return static_cast<int>(left_.rows()); }
  int cols() const noexcept { return static_cast<int>(right_.rows()); }
  int rank() const noexcept { return static_cast<int>(singular_values_.size()); }
  const Eigen::VectorXd& singular_values() const noexcept { return singular_values_; }

  /// k-means labels of the rows of U_K diag(s_K) / V_L diag(s_L).
  Assignment row_clusters(int K, std::uint64_t seed) const;
  Assignment col_clusters(int L, std::uint64_t seed) const;

 private:
  Matrix left_;   // n x r, already scaled by singular values
  Matrix right_;  // m x r
  Eigen::VectorXd singular_values_;
  bool degenerate_ = false;
};

/// Rows/columns whose sum exceeds twice the average are rescaled to the average.
Matrix trim_degrees(const Matrix& H);

InitialAssignment spectral_init(const Matrix& H, int K, int L, std::uint64_t seed);
InitialAssignment spectral_init(const SpectralEmbedding& embedding, int K, int L, std::uint64_t seed);
InitialAssignment random_init(int n, int m, int K, int L, int n0, int m0, std::uint64_t seed);

/// One alternating-minimisation run from a given starting point.
FitReport lloyd_run(const Matrix& H, const InitialAssignment& init, const FitConfig& config);

/// Full fit: spectral init (one run) or `restarts` random inits; best final cost wins.
FitReport lloyd_fit(const Matrix& H, const FitConfig& config);

/// Same as lloyd_fit but reusing a precomputed embedding for the spectral start.
FitReport lloyd_fit(const Matrix& H, const FitConfig& config, const SpectralEmbedding& embedding);

}  // namespace graphon
