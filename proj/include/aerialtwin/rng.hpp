#pragma once

// Seeded deterministic random numbers. std::normal_distribution is
// implementation-defined, so Gaussian draws use an explicit Box-Muller
// transform over mt19937_64 to keep outputs bit-identical everywhere.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace aerialtwin::rng {

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (one draw per call, pair cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
      u1 = uniform();
    }
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

  // Circularly symmetric complex Gaussian with total variance sigma2.
  std::complex<double> complex_normal(double sigma2) {
    const double s = std::sqrt(sigma2 / 2.0);
    return {s * normal(), s * normal()};
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Derives a stream seed so each consumer (e.g. a receiver node) gets an
// independent, order-insensitive sequence from the run seed.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 step
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace aerialtwin::rng
