#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "kfadmm/types.hpp"

namespace kfadmm {

/// Purpose tags for independent PRNG substreams. Deriving each stream from
/// (seed, purpose) keeps the data stream stable when, e.g., a new filter
/// variant adds extra draws of its own.
enum class Stream : std::uint64_t {
  Data = 0x9e3779b97f4a7c15ULL,
  Init = 0xbf58476d1ce4e5b9ULL,
  Noise = 0x94d049bb133111ebULL,
  Truth = 0xd6e8feb86659fd93ULL,
};

/// SplitMix64 step, used to whiten seeds before feeding MT19937-64.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// MT19937-64 engine for a (seed, purpose) substream.
inline std::mt19937_64 substream(std::uint64_t seed, Stream purpose) {
  return std::mt19937_64(splitmix64(seed ^ static_cast<std::uint64_t>(purpose)));
}

/// Uniform double in [0, 1) from the top 53 bits of the engine output.
/// std::uniform_real_distribution is implementation-defined, so results
/// would not be reproducible across standard libraries; this is.
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform(std::mt19937_64& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

/// Standard normal draws via Box-Muller (deterministic for a given engine,
/// unlike std::normal_distribution).
class GaussianDraw {
 public:
  double operator()(std::mt19937_64& eng) {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform01(eng);
    const double u2 = uniform01(eng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace kfadmm
