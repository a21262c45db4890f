#include <gtest/gtest.h>

#include <random>

#include "brute_force.hpp"
#include "graphon/assignment_flow.hpp"

namespace graphon {
namespace {

using testing::min_linear_cost;

Matrix random_costs(std::mt19937_64& gen, int n, int K, double lo = -5.0, double hi = 5.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix c(n, K);
  for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] = u(gen);
  return c;
}

TEST(MinSizeAssignment, MovesExactlyOneRow) {
  Matrix c(3, 2);
  c << 0, 5, 0, 5, 0, 5;
  const auto a = min_size_assignment(c, 1);
  EXPECT_DOUBLE_EQ(assignment_cost(c, a), 5.0);
  EXPECT_EQ(a.cluster_sizes(), (std::vector<int>{2, 1}));
  EXPECT_DOUBLE_EQ(min_linear_cost(c, 1), 5.0);
}

TEST(MinSizeAssignment, VacuousConstraintIsArgmin) {
  std::mt19937_64 gen(1);
  for (int t = 0; t < 50; ++t) {
    const Matrix c = random_costs(gen, 9, 3);
    const auto a = min_size_assignment(c, 0);
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      Eigen::Index best = 0;
      c.row(i).minCoeff(&best);
      EXPECT_EQ(a[static_cast<int>(i)], best);
    }
  }
}

TEST(MinSizeAssignment, TiesGoToLowestCluster) {
  const auto a = min_size_assignment(Matrix::Zero(4, 3), 0);
  EXPECT_EQ(a.labels(), (std::vector<int>{0, 0, 0, 0}));
}

TEST(MinSizeAssignment, InfeasibleThrows) {
  EXPECT_THROW(min_size_assignment(Matrix::Zero(5, 3), 2), ConfigError);
}

TEST(MinSizeAssignment, EnumerationOracle6x3) {
  std::mt19937_64 gen(2024);
  for (int t = 0; t < 100; ++t) {
    const Matrix c = random_costs(gen, 6, 3);
    const auto a = min_size_assignment(c, 2);
    ASSERT_TRUE(a.satisfies_min_size(2));
    EXPECT_NEAR(assignment_cost(c, a), min_linear_cost(c, 2), 1e-9) << "trial " << t;
  }
}

// All shapes with n <= 8, K <= 3 and every feasible n0.
TEST(MinSizeAssignment, EnumerationOracleSmallShapes) {
  std::mt19937_64 gen(77);
  for (int n = 1; n <= 8; ++n) {
    for (int K = 1; K <= 3; ++K) {
      for (int n0 = 0; K * n0 <= n; ++n0) {
        for (int t = 0; t < 4; ++t) {
          const Matrix c = random_costs(gen, n, K);
          const auto a = min_size_assignment(c, n0);
          ASSERT_EQ(a.size(), n);
          ASSERT_EQ(a.clusters(), K);
          ASSERT_TRUE(a.satisfies_min_size(n0));
          EXPECT_NEAR(assignment_cost(c, a), min_linear_cost(c, n0), 1e-9)
              << "n=" << n << " K=" << K << " n0=" << n0;
        }
      }
    }
  }
}

TEST(MinSizeAssignment, IntegerCostsWithTies) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> d(0, 2);
  for (int t = 0; t < 200; ++t) {
    Matrix c(7, 3);
    for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] = d(gen);
    const auto a = min_size_assignment(c, 2);
    ASSERT_TRUE(a.satisfies_min_size(2));
    EXPECT_NEAR(assignment_cost(c, a), min_linear_cost(c, 2), 1e-9);
  }
}

TEST(MinSizeAssignment, LargeInstanceIsFeasibleAndNoWorseThanGreedyRepair) {
  std::mt19937_64 gen(8);
  const Matrix c = random_costs(gen, 400, 12, 0.0, 1.0);
  const int n0 = 30;
  const auto a = min_size_assignment(c, n0);
  ASSERT_TRUE(a.satisfies_min_size(n0));
  // Every feasible labeling is an upper bound; contiguous blocks are one.
  EXPECT_LE(assignment_cost(c, a), assignment_cost(c, Assignment::contiguous(400, 12)));
}

}  // namespace
}  // namespace graphon
