#pragma once

#include <cstdint>
#include <random>

namespace stiction {

// Reproducible random source shared by the simulator, weight
// initialisation, shuffling and subsampling.
//
// Engine: MT19937-64 (std::mt19937_64, fully specified by the standard).
// Uniform reals take the top 53 bits of one draw: u = (x >> 11) * 2^-53.
// Normals use the basic Box-Muller transform on two uniforms, returning
// the cosine branch first and the cached sine branch on the next call.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer on [0, n), n > 0, by rejection.
  std::uint64_t below(std::uint64_t n);

  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace stiction
