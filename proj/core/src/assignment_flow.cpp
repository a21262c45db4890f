#include "graphon/assignment_flow.hpp"

#include <limits>
#include <string>

namespace graphon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlack = 1e-12;

}  // namespace

double assignment_cost(const Matrix& costs, const Assignment& labels) {
  if (labels.size() != costs.rows() || labels.clusters() != costs.cols()) {
    throw DimensionError("cost matrix does not match assignment");
  }
  double total = 0.0;
  for (int i = 0; i < labels.size(); ++i) total += costs(i, labels[i]);
  return total;
}

Assignment min_size_assignment(const Matrix& costs, int min_size) {
  const int n = static_cast<int>(costs.rows());
  const int K = static_cast<int>(costs.cols());
  if (n < 1 || K < 1) throw DimensionError("cost matrix is empty");
  if (min_size < 0) throw ConfigError("minimum cluster size must be nonnegative");
  if (static_cast<long long>(K) * min_size > n) {
    throw ConfigError("infeasible size constraint: K * n0 = " +
                      std::to_string(static_cast<long long>(K) * min_size) + " > n = " +
                      std::to_string(n));
  }
  if (!costs.allFinite()) throw NumericalError("assignment costs are not finite");

  // Optimal pseudo-flow: every item at its cheapest cluster.
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::vector<int> sizes(static_cast<std::size_t>(K), 0);
  for (int i = 0; i < n; ++i) {
    int best = 0;
    for (int k = 1; k < K; ++k) {
      if (costs(i, k) < costs(i, best)) best = k;
    }
    labels[static_cast<std::size_t>(i)] = best;
    ++sizes[static_cast<std::size_t>(best)];
  }

  auto deficit_remaining = [&] {
    for (int s : sizes) {
      if (s < min_size) return true;
    }
    return false;
  };

  std::vector<double> move_cost(static_cast<std::size_t>(K) * K);
  std::vector<int> move_item(static_cast<std::size_t>(K) * K);
  std::vector<double> dist(static_cast<std::size_t>(K));
  std::vector<int> pred(static_cast<std::size_t>(K));
  auto at = [K](int a, int b) { return static_cast<std::size_t>(a) * K + b; };

  while (deficit_remaining()) {
    // Residual arcs between clusters: moving item i from a to b costs c(i,b) - c(i,a).
    std::fill(move_cost.begin(), move_cost.end(), kInf);
    std::fill(move_item.begin(), move_item.end(), -1);
    for (int i = 0; i < n; ++i) {
      const int a = labels[static_cast<std::size_t>(i)];
      for (int b = 0; b < K; ++b) {
        if (b == a) continue;
        const double d = costs(i, b) - costs(i, a);
        if (d < move_cost[at(a, b)]) {
          move_cost[at(a, b)] = d;
          move_item[at(a, b)] = i;
        }
      }
    }

    // Shortest paths from the sink's excess, which reaches every cluster holding
    // more than min_size items at zero cost. Bellman-Ford: arc costs may be negative.
    for (int a = 0; a < K; ++a) {
      dist[static_cast<std::size_t>(a)] = sizes[static_cast<std::size_t>(a)] > min_size ? 0.0 : kInf;
      pred[static_cast<std::size_t>(a)] = -1;
    }
    for (int round = 0; round < K; ++round) {
      bool relaxed = false;
      for (int a = 0; a < K; ++a) {
        const double da = dist[static_cast<std::size_t>(a)];
        if (da == kInf) continue;
        for (int b = 0; b < K; ++b) {
          const double w = move_cost[at(a, b)];
          if (w == kInf) continue;
          if (da + w < dist[static_cast<std::size_t>(b)] - kSlack) {
            dist[static_cast<std::size_t>(b)] = da + w;
            pred[static_cast<std::size_t>(b)] = a;
            relaxed = true;
          }
        }
      }
      if (!relaxed) break;
    }

    int target = -1;
    for (int k = 0; k < K; ++k) {
      if (sizes[static_cast<std::size_t>(k)] >= min_size) continue;
      if (target < 0 || dist[static_cast<std::size_t>(k)] < dist[static_cast<std::size_t>(target)]) {
        target = k;
      }
    }
    if (target < 0 || dist[static_cast<std::size_t>(target)] == kInf) {
      throw NumericalError("no augmenting path towards deficient cluster");
    }

    std::vector<int> path{target};
    while (pred[static_cast<std::size_t>(path.back())] >= 0) {
      path.push_back(pred[static_cast<std::size_t>(path.back())]);
      if (static_cast<int>(path.size()) > K) throw NumericalError("cycle in shortest-path tree");
    }
    // path runs target <- ... <- source; apply moves from the source end.
    for (std::size_t s = path.size() - 1; s > 0; --s) {
      const int from = path[s];
      const int to = path[s - 1];
      const int item = move_item[at(from, to)];
      labels[static_cast<std::size_t>(item)] = to;
    }
    --sizes[static_cast<std::size_t>(path.back())];
    ++sizes[static_cast<std::size_t>(target)];
  }

  return Assignment(std::move(labels), K);
}

}  // namespace graphon
