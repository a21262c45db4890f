#pragma once

#include <vector>

#include "graphon/model.hpp"

namespace graphon {

/// Minimises sum_i costs(i, label_i) over labelings in which every cluster
/// receives at least `min_size` items.
///
/// This is the transportation problem "items supply 1, cluster k demands at
/// least min_size"; its constraint matrix is totally unimodular, so the integral
/// optimum found here is also the optimum of the relaxed polytope. The solver
/// runs successive shortest paths on the lower-bound-transformed network:
/// the unconstrained per-row argmin is an optimal pseudo-flow whose only
/// imbalances are the cluster deficits, and each augmentation moves one unit of
/// deficit along a shortest chain of single-item moves between clusters.
/// Costs are compared with a 1e-12 slack; ties go to the lowest cluster index.
///
/// Throws ConfigError when K * min_size > n.
Assignment min_size_assignment(const Matrix& costs, int min_size);

double assignment_cost(const Matrix& costs, const Assignment& labels);

}  // namespace graphon
