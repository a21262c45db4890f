#include "graphon/kmeans.hpp"

#include <limits>

#include "graphon/rng.hpp"

namespace graphon {

namespace {

double squared_distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index k) {
  return (a.row(i) - b.row(k)).squaredNorm();
}

Matrix seed_plus_plus(const Matrix& points, int k, Rng& rng) {
  const Eigen::Index n = points.rows();
  Matrix centroids(k, points.cols());
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

  Eigen::Index pick = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
  for (int c = 0; c < k; ++c) {
    centroids.row(c) = points.row(pick);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& d = d2[static_cast<std::size_t>(i)];
      d = std::min(d, squared_distance(points, i, centroids, c));
      total += d;
    }
    if (c + 1 == k) break;
    if (total <= 0.0) {
      // all points coincide with chosen centres
      pick = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      continue;
    }
    double target = rng.uniform() * total;
    pick = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      target -= d2[static_cast<std::size_t>(i)];
      if (target < 0.0) {
        pick = i;
        break;
      }
    }
  }
  return centroids;
}

KMeansResult lloyd(const Matrix& points, Matrix centroids, int max_iters) {
  const Eigen::Index n = points.rows();
  const int k = static_cast<int>(centroids.rows());
  std::vector<int> labels(static_cast<std::size_t>(n), -1);

  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points, i, centroids, 0);
      for (int c = 1; c < k; ++c) {
        const double d = squared_distance(points, i, centroids, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (labels[static_cast<std::size_t>(i)] != best) {
        labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        continue;
      }
      // Re-seed an empty cluster at the point farthest from its own centroid.
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int own = labels[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(own)] < 2) continue;
        const double d = squared_distance(points, i, centroids, own);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d < 0.0) continue;
      --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
      labels[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      centroids.row(c) = points.row(far);
    }
  }

  KMeansResult result;
  result.wcss = within_cluster_ss(points, labels, k);
  result.labels = std::move(labels);
  result.centroids = std::move(centroids);
  return result;
}

}  // namespace

double within_cluster_ss(const Matrix& points, const std::vector<int>& labels, int k) {
  Matrix sums = Matrix::Zero(k, points.cols());
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
    ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  }
  double wcss = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    wcss += (points.row(i) - sums.row(c) / counts[static_cast<std::size_t>(c)]).squaredNorm();
  }
  return wcss;
}

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, KMeansOptions options) {
  if (k < 1) throw ConfigError("k-means needs k >= 1");
  if (points.rows() < k) throw ConfigError("k-means needs at least k points");
  if (!points.allFinite()) throw NumericalError("k-means input is not finite");

  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    Rng rng(derive_seed(seed, Stream::KMeans, static_cast<std::uint64_t>(r)));
    auto candidate = lloyd(points, seed_plus_plus(points, k, rng), options.max_iters);
    if (candidate.wcss < best.wcss) best = std::move(candidate);
  }
  return best;
}

}  // namespace graphon
