#include <Eigen/SVD>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

#include "graphon/estimation.hpp"
#include "graphon/kmeans.hpp"
#include "graphon/rng.hpp"

namespace graphon {

Matrix trim_degrees(const Matrix& H) {
  Matrix out = H;
  const Eigen::VectorXd row_sums = out.rowwise().sum();
  const double row_avg = row_sums.mean();
  if (row_avg > 0.0) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      if (row_sums(i) > 2.0 * row_avg) out.row(i) *= row_avg / row_sums(i);
    }
  }
  const Eigen::RowVectorXd col_sums = out.colwise().sum();
  const double col_avg = col_sums.mean();
  if (col_avg > 0.0) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      if (col_sums(j) > 2.0 * col_avg) out.col(j) *= col_avg / col_sums(j);
    }
  }
  return out;
}

SpectralEmbedding::SpectralEmbedding(const Matrix& H, int max_rank) {
  if (H.rows() < 1 || H.cols() < 1) throw DimensionError("cannot embed an empty matrix");
  if (!H.allFinite()) throw NumericalError("cannot embed a non-finite matrix");

  const Eigen::MatrixXd trimmed = trim_degrees(H);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(trimmed, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const int r = std::min<int>(max_rank, static_cast<int>(s.size()));

  degenerate_ = !(s.size() > 0 && std::isfinite(s(0)) && s(0) > 1e-12);
  singular_values_ = s.head(r);
  left_ = svd.matrixU().leftCols(r) * singular_values_.asDiagonal();
  right_ = svd.matrixV().leftCols(r) * singular_values_.asDiagonal();
}

Assignment SpectralEmbedding::row_clusters(int K, std::uint64_t seed) const {
  const int d = std::min<int>(K, rank());
  return Assignment(kmeans(left_.leftCols(d), K, seed).labels, K);
}

Assignment SpectralEmbedding::col_clusters(int L, std::uint64_t seed) const {
  const int d = std::min<int>(L, rank());
  return Assignment(kmeans(right_.leftCols(d), L, seed).labels, L);
}

InitialAssignment spectral_init(const SpectralEmbedding& embedding, int K, int L,
                                std::uint64_t seed) {
  if (embedding.degenerate()) {
    spdlog::warn("spectral embedding is degenerate; falling back to random init");
    auto fallback = random_init(embedding.rows(), embedding.cols(), K, L, 0, 0,
                                derive_seed(seed, Stream::Restart, 0));
    fallback.fell_back = true;
    return fallback;
  }
  return {embedding.row_clusters(K, derive_seed(seed, Stream::KMeans, 0)),
          embedding.col_clusters(L, derive_seed(seed, Stream::KMeans, 1)), false};
}

InitialAssignment spectral_init(const Matrix& H, int K, int L, std::uint64_t seed) {
  if (K < 1 || L < 1 || K > H.rows() || L > H.cols()) {
    throw ConfigError("spectral init needs 1 <= K <= n and 1 <= L <= m");
  }
  return spectral_init(SpectralEmbedding(H, std::max(K, L)), K, L, seed);
}

}  // namespace graphon
