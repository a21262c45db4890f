#include "graphon/synthesis.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <numbers>

#include "graphon/rng.hpp"

namespace graphon {

Latents sample_latents(int n, int m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw ConfigError("latent counts must be positive");
  Rng rng(seed);
  Latents latents;
  latents.u.resize(static_cast<std::size_t>(n));
  latents.v.resize(static_cast<std::size_t>(m));
  for (auto& x : latents.u) x = rng.uniform();
  for (auto& x : latents.v) x = rng.uniform();
  return latents;
}

Latents regular_latents(int n, int m) {
  if (n < 1 || m < 1) throw ConfigError("latent counts must be positive");
  Latents latents;
  latents.u.resize(static_cast<std::size_t>(n));
  latents.v.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < n; ++i) latents.u[static_cast<std::size_t>(i)] = (i + 0.5) / n;
  for (int j = 0; j < m; ++j) latents.v[static_cast<std::size_t>(j)] = (j + 0.5) / m;
  return latents;
}

Matrix build_theta(const Graphon& graphon, const Latents& latents, RangeCheck check) {
  const auto n = static_cast<Eigen::Index>(latents.u.size());
  const auto m = static_cast<Eigen::Index>(latents.v.size());
  if (n == 0 || m == 0) throw ConfigError("latents are empty");
  for (double x : latents.u) {
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("latent u outside [0, 1]");
  }
  for (double x : latents.v) {
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("latent v outside [0, 1]");
  }

  Matrix theta(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = latents.u[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m; ++j) {
      theta(i, j) = graphon(u, latents.v[static_cast<std::size_t>(j)]);
    }
  }
  if (check == RangeCheck::Enforce) {
    const double rho = graphon.rho();
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      const double w = theta.data()[k];
      if (!(w >= -1e-12 && w <= rho + 1e-12)) {
        throw ConfigError("graphon evaluation " + std::to_string(w) + " outside [0, rho]");
      }
    }
  }
  return theta;
}

Matrix sample_observations(const Matrix& theta, const NoiseModel& noise, std::uint64_t seed) {
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    if (!noise.admits_mean(theta.data()[k])) {
      throw ConfigError("mean " + std::to_string(theta.data()[k]) + " is not admissible for " +
                        noise.name() + " noise");
    }
  }

  Rng rng(seed);
  Matrix H(theta.rows(), theta.cols());
  std::visit(
      [&](const auto& kind) {
        using T = std::decay_t<decltype(kind)>;
        for (Eigen::Index k = 0; k < theta.size(); ++k) {
          const double mean = theta.data()[k];
          double& out = H.data()[k];
          if constexpr (std::is_same_v<T, Bernoulli>) {
            out = rng.bernoulli(mean) ? 1.0 : 0.0;
          } else if constexpr (std::is_same_v<T, Binomial>) {
            out = static_cast<double>(rng.binomial(kind.trials, mean)) / kind.trials;
          } else if constexpr (std::is_same_v<T, ScaledPoisson>) {
            out = static_cast<double>(rng.poisson(kind.exposure * mean)) / kind.exposure;
          } else {
            out = mean + std::sqrt(kind.variance) * rng.normal();
          }
        }
      },
      noise.kind());
  return H;
}

MaskedMatrix apply_missingness(const Matrix& H, double p, std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("observation probability must lie in (0, 1]");
  Rng rng(seed);
  MaskedMatrix out{Matrix(H.rows(), H.cols()), Matrix(H.rows(), H.cols())};
  for (Eigen::Index k = 0; k < H.size(); ++k) {
    const double mask = rng.bernoulli(p) ? 1.0 : 0.0;
    out.mask.data()[k] = mask;
    out.adjusted.data()[k] = H.data()[k] * mask / p;
  }
  return out;
}

StandardGraphon parse_standard_graphon(const std::string& name) {
  if (name == "rand" || name == "rand_graphon") return StandardGraphon::Rand;
  if (name == "cos" || name == "cos_graphon") return StandardGraphon::Cos;
  if (name == "hoelder" || name == "holder") return StandardGraphon::Hoelder;
  throw ConfigError("unknown graphon set-up '" + name + "'");
}

std::string to_string(StandardGraphon kind) {
  switch (kind) {
    case StandardGraphon::Rand: return "rand";
    case StandardGraphon::Cos: return "cos";
    case StandardGraphon::Hoelder: return "hoelder";
  }
  return "unknown";
}

Graphon make_standard_graphon(StandardGraphon kind, const StandardGraphonParams& params) {
  const double rho = params.rho;
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");

  switch (kind) {
    case StandardGraphon::Rand: {
      if (params.K < 1 || params.L < 1) throw ConfigError("rand graphon needs K, L >= 1");
      Rng rng(params.seed);
      Matrix values(params.K, params.L);
      for (Eigen::Index k = 0; k < values.size(); ++k) values.data()[k] = rho * rng.uniform();
      return Graphon::regular_grid(std::move(values), rho);
    }
    case StandardGraphon::Cos: {
      if (params.K < 1 || params.L < 1) throw ConfigError("cos graphon needs K, L >= 1");
      Matrix values(params.K, params.L);
      for (int k = 0; k < params.K; ++k) {
        for (int l = 0; l < params.L; ++l) {
          values(k, l) = 2.0 * rho / 3.0 +
                         rho / 3.0 * std::cos(3.0 * std::numbers::pi * static_cast<double>(k) * l);
        }
      }
      return Graphon::regular_grid(std::move(values), rho);
    }
    case StandardGraphon::Hoelder: {
      Analytic family;
      family.evaluator = [rho](double u, double v) {
        const double du = u - 0.5;
        const double dv = v - 0.5;
        return rho / 2.0 * (1.0 + std::exp(-10.0 * (du * du + dv * dv)));
      };
      family.hoelder_alpha = 1.0;
      // sup of the gradient norm, attained at radius 1/sqrt(20)
      family.hoelder_L = rho * std::sqrt(5.0) * std::exp(-0.5);
      return Graphon(std::move(family), rho);
    }
  }
  throw ConfigError("unknown graphon set-up");
}

ObservationSet synthesize(const SynthConfig& config) {
  if (config.n < 1 || config.m < 1) throw ConfigError("n and m must be positive");
  if (config.missing_p && !(*config.missing_p > 0.0 && *config.missing_p <= 1.0)) {
    throw ConfigError("missing_p must lie in (0, 1]");
  }

  ObservationSet obs;
  obs.noise = config.noise;
  obs.latents = config.regular_latents
                    ? regular_latents(config.n, config.m)
                    : sample_latents(config.n, config.m, derive_seed(config.seed, Stream::Latents));

  // The Gaussian family drops the [0, rho] restriction on the mean: warn, don't reject.
  const bool lenient = config.noise.is<Gaussian>();
  obs.theta_star = build_theta(config.graphon, *obs.latents,
                               lenient ? RangeCheck::Skip : RangeCheck::Enforce);
  if (lenient) {
    const double rho = config.graphon.rho();
    if (obs.theta_star->minCoeff() < 0.0 || obs.theta_star->maxCoeff() > rho) {
      obs.warnings.emplace_back("theta* leaves [0, rho]; accepted under gaussian noise");
      spdlog::warn("theta* leaves [0, {}]; accepted under gaussian noise", rho);
    }
  }

  obs.H = sample_observations(*obs.theta_star, config.noise, derive_seed(config.seed, Stream::Noise));
  if (config.with_second_copy) {
    obs.H_prime = sample_observations(*obs.theta_star, config.noise,
                                      derive_seed(config.seed, Stream::SecondCopy));
  }
  if (config.missing_p) {
    obs.observe_p = *config.missing_p;
    obs.mask = apply_missingness(obs.H, obs.observe_p, derive_seed(config.seed, Stream::Mask)).mask;
    if (obs.H_prime) {
      obs.mask_prime = apply_missingness(*obs.H_prime, obs.observe_p,
                                         derive_seed(config.seed, Stream::SecondMask))
                           .mask;
    }
  }
  return obs;
}

}  // namespace graphon
