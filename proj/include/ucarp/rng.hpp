#pragma once

#include <cstdint>
#include <random>

namespace ucarp {

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Portable random stream. std::mt19937_64 has a sequence fixed by the
/// standard; the distributions on top of it are written out here because the
/// standard library ones are implementation-defined.
///
///   uniform01()      -> (x >> 11) * 2^-53 from one 64-bit draw, in [0, 1)
///   uniform_int(n)   -> rejection sampling on the top bits, in [0, n)
///   normal()         -> Box-Muller on two uniform01() draws, both outputs used
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::uint64_t uniform_int(std::uint64_t n);
  bool bernoulli(double p) { return uniform01() < p; }
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ucarp
