#pragma once

#include <cstdint>
#include <random>

namespace tepdec {

// mt19937_64 wrapped with explicit uniform/gaussian conversions so that
// streams are reproducible across standard libraries (std::distributions are
// implementation-defined). substream() derives independent child generators
// for per-frame / per-index use.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // standard normal, Box-Muller; one output per two uniform draws
  double gaussian();

  Rng substream(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }

private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace tepdec
