#pragma once

#include <cstdint>
#include <random>

namespace graphon {

/// Named substreams. Each consumer draws from its own stream so that turning a
/// feature on (a second copy, a mask) never shifts the draws of another.
enum class Stream : std::uint64_t {
  Latents = 1,
  GraphonValues = 2,
  Noise = 3,
  Mask = 4,
  SecondCopy = 5,
  SecondMask = 6,
  Init = 7,
  KMeans = 8,
  Restart = 9,
  Cell = 10,
};

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of substream `stream` (and sub-index `index`) of a parent seed.
/// Derivation is a pure function of its arguments: the same triple always yields
/// the same child seed, and different streams are decorrelated by the mixer.
std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0) noexcept;

/// mt19937_64 engine with portable samplers. The standard library's
/// distributions are implementation-defined, so every sampler here is written
/// against the raw 64-bit output to keep results bit-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound).
  std::uint64_t uniform_index(std::uint64_t bound);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  /// Sum of `trials` Bernoulli(p) draws.
  long binomial(int trials, double p);
  /// Inversion for lambda < 30, PTRS transformed rejection above.
  long poisson(double lambda);

 private:
  long poisson_inversion(double lambda);
  long poisson_ptrs(double lambda);

  std::mt19937_64 engine_;
};

}  // namespace graphon
