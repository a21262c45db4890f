#pragma once

// Shared domain types: assignments, block models, graphons, noise models and
// observation sets, plus the elementary block-matrix algebra built on them.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "graphon/errors.hpp"

namespace graphon {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Cluster membership of n items, stored as labels in [0, K).
///
/// The 0/1 n-by-K matrix form is available through `indicator()`; every item
/// carries exactly one label, so its rows always sum to one.
class Assignment {
 public:
  Assignment() = default;
  Assignment(std::vector<int> labels, int clusters);

  /// Items 0..n-1 split into K contiguous runs of (almost) equal size.
  static Assignment contiguous(int n, int clusters);

  int size() const noexcept { return static_cast<int>(labels_.size()); }
  int clusters() const noexcept { return clusters_; }
  int operator[](int i) const { return labels_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  std::vector<int> cluster_sizes() const;
  int min_cluster_size() const;
  bool satisfies_min_size(int n0) const { return min_cluster_size() >= n0; }
  /// First empty cluster, if any.
  std::optional<int> first_empty() const;

  Matrix indicator() const;

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::vector<int> labels_;
  int clusters_ = 0;
};

/// Block value matrix Q (K x L) with row and column assignments; the induced
/// mean matrix is Theta(i, j) = Q(rows[i], cols[j]).
struct BlockModel {
  Matrix Q;
  Assignment rows;
  Assignment cols;

  BlockModel() = default;
  BlockModel(Matrix q, Assignment row_assignment, Assignment col_assignment);

  int n() const { return rows.size(); }
  int m() const { return cols.size(); }
};

Matrix induced_mean(const BlockModel& model);

/// Squared Frobenius distance between H and the induced mean of `model`.
double frobenius_cost(const Matrix& H, const BlockModel& model);

// ---------------------------------------------------------------------------
// Graphons

struct PiecewiseConstant {
  std::vector<double> breaks_u;  // 0 = a_0 < ... < a_K = 1
  std::vector<double> breaks_v;  // 0 = b_0 < ... < b_L = 1
  Matrix values;                 // K x L
};

struct Analytic {
  std::function<double(double, double)> evaluator;
  double hoelder_alpha = 1.0;
  double hoelder_L = 1.0;
};

/// Whether the constructor enforces 0 <= W <= rho.
enum class RangeCheck { Enforce, Skip };

class Graphon {
 public:
  Graphon(PiecewiseConstant family, double rho, RangeCheck check = RangeCheck::Enforce);
  Graphon(Analytic family, double rho, RangeCheck check = RangeCheck::Enforce);

  /// Piecewise-constant graphon on the regular K x L grid.
  static Graphon regular_grid(Matrix values, double rho, RangeCheck check = RangeCheck::Enforce);

  double operator()(double u, double v) const;
  double rho() const noexcept { return rho_; }

  bool is_piecewise_constant() const noexcept {
    return std::holds_alternative<PiecewiseConstant>(family_);
  }
  const PiecewiseConstant* piecewise() const noexcept {
    return std::get_if<PiecewiseConstant>(&family_);
  }
  const Analytic* analytic() const noexcept { return std::get_if<Analytic>(&family_); }

  /// Smallest cell width along u / v; only defined for piecewise-constant graphons.
  double min_width_u() const;
  double min_width_v() const;

 private:
  void validate(RangeCheck check) const;

  std::variant<PiecewiseConstant, Analytic> family_;
  double rho_;
};

/// Index k with breaks[k] <= x < breaks[k+1]; x == 1 maps to the last cell.
int locate_cell(std::span<const double> breaks, double x);

// ---------------------------------------------------------------------------
// Noise models

struct Bernoulli {};
struct Binomial {
  int trials = 1;
};
struct ScaledPoisson {
  double exposure = 1.0;
};
struct Gaussian {
  double variance = 1.0;
};

struct BernsteinParams {
  double sigma2;
  double b;
};

class NoiseModel {
 public:
  using Kind = std::variant<Bernoulli, Binomial, ScaledPoisson, Gaussian>;

  NoiseModel() : kind_(Bernoulli{}) {}
  explicit NoiseModel(Kind kind);

  static NoiseModel bernoulli() { return NoiseModel(Bernoulli{}); }
  static NoiseModel binomial(int trials) { return NoiseModel(Binomial{trials}); }
  static NoiseModel scaled_poisson(double exposure) { return NoiseModel(ScaledPoisson{exposure}); }
  static NoiseModel gaussian(double variance) { return NoiseModel(Gaussian{variance}); }

  const Kind& kind() const noexcept { return kind_; }
  template <class T>
  bool is() const noexcept {
    return std::holds_alternative<T>(kind_);
  }

  /// Bernstein constants (sigma^2, b) of the centred noise for a mean bounded by rho.
  BernsteinParams bernstein(double rho) const;

  /// Whether `mean` is an admissible expectation for this family.
  bool admits_mean(double mean) const;

  std::string name() const;

  friend bool operator==(const NoiseModel& a, const NoiseModel& b);

 private:
  Kind kind_;
};

// ---------------------------------------------------------------------------

struct Latents {
  std::vector<double> u;
  std::vector<double> v;
};

struct ObservationSet {
  Matrix H;                          // as observed (raw, before missingness weighting)
  std::optional<Matrix> H_prime;     // independent copy used for aggregation
  std::optional<Matrix> mask;        // 0/1 mask for H
  std::optional<Matrix> mask_prime;  // 0/1 mask for H_prime
  double observe_p = 1.0;
  NoiseModel noise;
  std::optional<Latents> latents;
  std::optional<Matrix> theta_star;
  std::vector<std::string> warnings;

  /// H * M / p when a mask is present, H otherwise.
  Matrix adjusted() const;
  std::optional<Matrix> adjusted_prime() const;
};

}  // namespace graphon
