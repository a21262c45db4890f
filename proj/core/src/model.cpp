#include "graphon/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace graphon {

namespace {

constexpr double kRangeTolerance = 1e-12;
constexpr int kAnalyticValidationGrid = 512;

void check_breaks(const std::vector<double>& breaks, const char* axis) {
  if (breaks.size() < 2) {
    throw ConfigError(std::string("graphon breaks along ") + axis + " need at least two points");
  }
  if (breaks.front() != 0.0 || breaks.back() != 1.0) {
    throw ConfigError(std::string("graphon breaks along ") + axis + " must start at 0 and end at 1");
  }
  for (std::size_t k = 1; k < breaks.size(); ++k) {
    if (!(breaks[k] > breaks[k - 1])) {
      throw ConfigError(std::string("graphon breaks along ") + axis + " must be strictly increasing");
    }
  }
}

std::vector<double> regular_breaks(int cells) {
  std::vector<double> breaks(static_cast<std::size_t>(cells) + 1);
  for (int k = 0; k <= cells; ++k) breaks[static_cast<std::size_t>(k)] = static_cast<double>(k) / cells;
  breaks.back() = 1.0;
  return breaks;
}

double min_gap(const std::vector<double>& breaks) {
  double gap = 1.0;
  for (std::size_t k = 1; k < breaks.size(); ++k) gap = std::min(gap, breaks[k] - breaks[k - 1]);
  return gap;
}

}  // namespace

// ---------------------------------------------------------------------------
// Assignment

Assignment::Assignment(std::vector<int> labels, int clusters)
    : labels_(std::move(labels)), clusters_(clusters) {
  if (clusters_ < 1) throw ConfigError("assignment needs at least one cluster");
  if (labels_.empty()) throw ConfigError("assignment needs at least one item");
  for (int label : labels_) {
    if (label < 0 || label >= clusters_) {
      throw ConfigError("assignment label " + std::to_string(label) + " outside [0, " +
                        std::to_string(clusters_) + ")");
    }
  }
}

Assignment Assignment::contiguous(int n, int clusters) {
  if (n < 1 || clusters < 1) throw ConfigError("contiguous assignment needs n >= 1 and K >= 1");
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    labels[static_cast<std::size_t>(i)] =
        static_cast<int>((static_cast<long long>(i) * clusters) / n);
  }
  return Assignment(std::move(labels), clusters);
}

std::vector<int> Assignment::cluster_sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(clusters_), 0);
  for (int label : labels_) ++sizes[static_cast<std::size_t>(label)];
  return sizes;
}

int Assignment::min_cluster_size() const {
  const auto sizes = cluster_sizes();
  return *std::min_element(sizes.begin(), sizes.end());
}

std::optional<int> Assignment::first_empty() const {
  const auto sizes = cluster_sizes();
  for (int k = 0; k < clusters_; ++k) {
    if (sizes[static_cast<std::size_t>(k)] == 0) return k;
  }
  return std::nullopt;
}

Matrix Assignment::indicator() const {
  Matrix z = Matrix::Zero(size(), clusters_);
  for (int i = 0; i < size(); ++i) z(i, (*this)[i]) = 1.0;
  return z;
}

// ---------------------------------------------------------------------------
// BlockModel

BlockModel::BlockModel(Matrix q, Assignment row_assignment, Assignment col_assignment)
    : Q(std::move(q)), rows(std::move(row_assignment)), cols(std::move(col_assignment)) {
  if (Q.rows() != rows.clusters() || Q.cols() != cols.clusters()) {
    std::ostringstream msg;
    msg << "block matrix is " << Q.rows() << "x" << Q.cols() << " but assignments have "
        << rows.clusters() << " row and " << cols.clusters() << " column clusters";
    throw DimensionError(msg.str());
  }
}

Matrix induced_mean(const BlockModel& model) {
  if (model.Q.rows() != model.rows.clusters() || model.Q.cols() != model.cols.clusters()) {
    throw DimensionError("block matrix does not match assignment cluster counts");
  }
  Matrix theta(model.n(), model.m());
  for (int i = 0; i < model.n(); ++i) {
    const int k = model.rows[i];
    for (int j = 0; j < model.m(); ++j) theta(i, j) = model.Q(k, model.cols[j]);
  }
  return theta;
}

double frobenius_cost(const Matrix& H, const BlockModel& model) {
  if (H.rows() != model.n() || H.cols() != model.m()) {
    throw DimensionError("observation matrix does not match block model dimensions");
  }
  double cost = 0.0;
  for (int i = 0; i < model.n(); ++i) {
    const int k = model.rows[i];
    for (int j = 0; j < model.m(); ++j) {
      const double r = H(i, j) - model.Q(k, model.cols[j]);
      cost += r * r;
    }
  }
  return cost;
}

// ---------------------------------------------------------------------------
// Graphon

Graphon::Graphon(PiecewiseConstant family, double rho, RangeCheck check)
    : family_(std::move(family)), rho_(rho) {
  validate(check);
}

Graphon::Graphon(Analytic family, double rho, RangeCheck check)
    : family_(std::move(family)), rho_(rho) {
  validate(check);
}

Graphon Graphon::regular_grid(Matrix values, double rho, RangeCheck check) {
  const int K = static_cast<int>(values.rows());
  const int L = static_cast<int>(values.cols());
  if (K < 1 || L < 1) throw ConfigError("graphon value matrix is empty");
  return Graphon(PiecewiseConstant{regular_breaks(K), regular_breaks(L), std::move(values)}, rho,
                 check);
}

void Graphon::validate(RangeCheck check) const {
  if (!(rho_ > 0.0) || !std::isfinite(rho_)) throw ConfigError("graphon rho must be positive");

  auto in_range = [&](double w) {
    return std::isfinite(w) && w >= -kRangeTolerance && w <= rho_ + kRangeTolerance;
  };

  if (const auto* pc = piecewise()) {
    check_breaks(pc->breaks_u, "u");
    check_breaks(pc->breaks_v, "v");
    if (pc->values.rows() + 1 != static_cast<Eigen::Index>(pc->breaks_u.size()) ||
        pc->values.cols() + 1 != static_cast<Eigen::Index>(pc->breaks_v.size())) {
      throw DimensionError("graphon value matrix does not match its breakpoints");
    }
    if (!pc->values.allFinite()) throw ConfigError("graphon values must be finite");
    if (check == RangeCheck::Enforce) {
      for (Eigen::Index k = 0; k < pc->values.size(); ++k) {
        if (!in_range(pc->values.data()[k])) throw ConfigError("graphon value outside [0, rho]");
      }
    }
    return;
  }

  const auto& an = *analytic();
  if (!an.evaluator) throw ConfigError("analytic graphon has no evaluator");
  if (!(an.hoelder_alpha > 0.0 && an.hoelder_alpha <= 1.0)) {
    throw ConfigError("hoelder exponent must lie in (0, 1]");
  }
  if (!(an.hoelder_L > 0.0)) throw ConfigError("hoelder constant must be positive");
  if (check == RangeCheck::Enforce) {
    const int g = kAnalyticValidationGrid;
    for (int a = 0; a < g; ++a) {
      const double u = static_cast<double>(a) / (g - 1);
      for (int b = 0; b < g; ++b) {
        const double v = static_cast<double>(b) / (g - 1);
        if (!in_range(an.evaluator(u, v))) {
          throw ConfigError("analytic graphon leaves [0, rho] on the validation grid");
        }
      }
    }
  }
}

int locate_cell(std::span<const double> breaks, double x) {
  const int cells = static_cast<int>(breaks.size()) - 1;
  const auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
  const int k = static_cast<int>(it - breaks.begin()) - 1;
  return std::clamp(k, 0, cells - 1);
}

double Graphon::operator()(double u, double v) const {
  if (const auto* pc = piecewise()) {
    return pc->values(locate_cell(pc->breaks_u, u), locate_cell(pc->breaks_v, v));
  }
  return analytic()->evaluator(u, v);
}

double Graphon::min_width_u() const {
  const auto* pc = piecewise();
  if (pc == nullptr) throw ConfigError("cell widths are only defined for piecewise-constant graphons");
  return min_gap(pc->breaks_u);
}

double Graphon::min_width_v() const {
  const auto* pc = piecewise();
  if (pc == nullptr) throw ConfigError("cell widths are only defined for piecewise-constant graphons");
  return min_gap(pc->breaks_v);
}

// ---------------------------------------------------------------------------
// NoiseModel

NoiseModel::NoiseModel(Kind kind) : kind_(kind) {
  std::visit(
      [](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Binomial>) {
          if (k.trials < 1) throw ConfigError("binomial trials N must be positive");
        } else if constexpr (std::is_same_v<T, ScaledPoisson>) {
          if (!(k.exposure > 0.0)) throw ConfigError("poisson exposure T must be positive");
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          if (!(k.variance > 0.0)) throw ConfigError("gaussian variance must be positive");
        }
      },
      kind_);
}

BernsteinParams NoiseModel::bernstein(double rho) const {
  return std::visit(
      [rho](const auto& k) -> BernsteinParams {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Bernoulli>) {
          return {rho, 1.0 / 3.0};
        } else if constexpr (std::is_same_v<T, Binomial>) {
          return {rho / k.trials, 1.0 / (3.0 * k.trials)};
        } else if constexpr (std::is_same_v<T, ScaledPoisson>) {
          return {rho / k.exposure, 1.0 / (3.0 * k.exposure)};
        } else {
          return {k.variance, 0.0};
        }
      },
      kind_);
}

bool NoiseModel::admits_mean(double mean) const {
  if (!std::isfinite(mean)) return false;
  if (is<Bernoulli>() || is<Binomial>()) return mean >= 0.0 && mean <= 1.0;
  if (is<ScaledPoisson>()) return mean >= 0.0;
  return true;
}

std::string NoiseModel::name() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Bernoulli>) {
          return "bernoulli";
        } else if constexpr (std::is_same_v<T, Binomial>) {
          return "binomial";
        } else if constexpr (std::is_same_v<T, ScaledPoisson>) {
          return "poisson";
        } else {
          return "gaussian";
        }
      },
      kind_);
}

bool operator==(const NoiseModel& a, const NoiseModel& b) {
  if (a.kind_.index() != b.kind_.index()) return false;
  if (const auto* x = std::get_if<Binomial>(&a.kind_)) return x->trials == std::get<Binomial>(b.kind_).trials;
  if (const auto* x = std::get_if<ScaledPoisson>(&a.kind_)) {
    return x->exposure == std::get<ScaledPoisson>(b.kind_).exposure;
  }
  if (const auto* x = std::get_if<Gaussian>(&a.kind_)) return x->variance == std::get<Gaussian>(b.kind_).variance;
  return true;
}

// ---------------------------------------------------------------------------

Matrix ObservationSet::adjusted() const {
  if (!mask) return H;
  return (H.array() * mask->array() / observe_p).matrix();
}

std::optional<Matrix> ObservationSet::adjusted_prime() const {
  if (!H_prime) return std::nullopt;
  if (!mask_prime) return *H_prime;
  return Matrix((H_prime->array() * mask_prime->array() / observe_p).matrix());
}

}  // namespace graphon
