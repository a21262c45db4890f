#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "graphon/model.hpp"

namespace graphon {

Latents sample_latents(int n, int m, std::uint64_t seed);

/// Latents at cell midpoints (i + 1/2)/n; every regular K-cell split of [0, 1]
/// then receives exactly n/K items when K divides n.
Latents regular_latents(int n, int m);

/// Theta*(i, j) = W(u_i, v_j). Throws ConfigError if a value leaves [0, rho]
/// unless `check` is Skip.
Matrix build_theta(const Graphon& graphon, const Latents& latents,
                   RangeCheck check = RangeCheck::Enforce);

/// One independent draw per entry with E[H(i, j)] = theta(i, j). Binomial draws
/// are returned as counts / N, scaled Poisson as counts / T. Entries are drawn in
/// row-major order from a single stream.
Matrix sample_observations(const Matrix& theta, const NoiseModel& noise, std::uint64_t seed);

struct MaskedMatrix {
  Matrix adjusted;  // H * M / p
  Matrix mask;      // 0/1
};

/// Reveals each entry independently with probability p and rescales by 1/p.
MaskedMatrix apply_missingness(const Matrix& H, double p, std::uint64_t seed);

enum class StandardGraphon { Rand, Cos, Hoelder };

StandardGraphon parse_standard_graphon(const std::string& name);
std::string to_string(StandardGraphon kind);

struct StandardGraphonParams {
  int K = 8;
  int L = 8;
  double rho = 0.6;
  std::uint64_t seed = 0;  // rand only
};

/// rand: regular K x L grid with iid Uniform[0, rho] values.
/// cos:  value 2rho/3 + (rho/3) cos(3 pi k l) on cell (k, l), k, l counted from 0.
/// hoelder: (rho/2)(1 + exp(-10((u - 1/2)^2 + (v - 1/2)^2))), Lipschitz (alpha = 1).
Graphon make_standard_graphon(StandardGraphon kind, const StandardGraphonParams& params);

struct SynthConfig {
  int n = 0;
  int m = 0;
  Graphon graphon;
  NoiseModel noise;
  std::uint64_t seed = 0;
  bool with_second_copy = false;
  std::optional<double> missing_p;
  /// Use midpoint latents instead of random ones (exact block splits).
  bool regular_latents = false;
};

/// Latents, Theta*, H, and optionally H' and masks, each from its own substream
/// of `config.seed`.
ObservationSet synthesize(const SynthConfig& config);

}  // namespace graphon
