#pragma once

#include <cstdint>
#include <vector>

#include "graphon/model.hpp"

namespace graphon {

struct KMeansOptions {
  int max_iters = 50;
  int restarts = 5;
};

struct KMeansResult {
  std::vector<int> labels;
  Matrix centroids;  // k x d
  double wcss = 0.0;
};

/// Lloyd's k-means on the rows of `points` with k-means++ seeding. Keeps the
/// restart with the smallest within-cluster sum of squares; a cluster that
/// empties is re-seeded at the point farthest from its centroid.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, KMeansOptions options = {});

double within_cluster_ss(const Matrix& points, const std::vector<int>& labels, int k);

}  // namespace graphon
