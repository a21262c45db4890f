#include "graphon/rng.hpp"

#include <cmath>
#include <numbers>

namespace graphon {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index) noexcept {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ (static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL));
  h = mix64(h ^ (index * 0x8cb92ba72f3d8dd7ULL + 0x2545f4914f6cdd1dULL));
  return h;
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % bound;
}

double Rng::normal() {
  // Box-Muller, cosine branch only; one uniform pair per draw.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

long Rng::binomial(int trials, double p) {
  long count = 0;
  for (int t = 0; t < trials; ++t) count += bernoulli(p) ? 1 : 0;
  return count;
}

long Rng::poisson(double lambda) {
  if (lambda <= 0.0) return 0;
  return lambda < 30.0 ? poisson_inversion(lambda) : poisson_ptrs(lambda);
}

long Rng::poisson_inversion(double lambda) {
  const double u = uniform();
  double p = std::exp(-lambda);
  double cdf = p;
  long k = 0;
  while (u >= cdf) {
    ++k;
    p *= lambda / static_cast<double>(k);
    const double next = cdf + p;
    if (next == cdf) break;  // tail below double resolution
    cdf = next;
  }
  return k;
}

// Hormann (1993), "The transformed rejection method for generating Poisson
// random variables".
long Rng::poisson_ptrs(double lambda) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double U = uniform() - 0.5;
    const double V = uniform();
    const double us = 0.5 - std::fabs(U);
    const double k = std::floor((2.0 * a / us + b) * U + lambda + 0.43);
    if (us >= 0.07 && V <= vr) return static_cast<long>(k);
    if (k < 0.0 || (us < 0.013 && V > us)) continue;
    if (std::log(V) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -lambda + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<long>(k);
    }
  }
}

}  // namespace graphon
