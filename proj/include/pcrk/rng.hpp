#pragma once

#include <cstdint>
#include <random>

namespace pcrk {

// Deterministic random source. All draws are derived from the raw mt19937_64
// output stream with hand-rolled conversions, because the standard library's
// distribution objects are implementation-defined and would break
// reproducibility across platforms.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  // Uniform double in [0, 1).
  double uniform();
  // Uniform double in [lo, hi).
  double uniform(double lo, double hi);
  // Unbiased uniform integer in [0, bound). Throws on bound == 0.
  std::uint64_t below(std::uint64_t bound);
  // Standard normal via Marsaglia's polar method.
  double normal();

  // Independent generator for a derived stream (per-sample seeds).
  SeededRng derive(std::uint64_t stream) const { return SeededRng(seed_ + stream); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pcrk
