#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dic {

// Finalizer from the splitmix64 generator; good avalanche, cheap.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for the per-subset stream. Every stochastic search draws only from a
// stream keyed this way, so results cannot depend on worker count, execution
// mode, or scheduling order.
inline std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                        std::uint64_t pair_index,
                                        std::uint64_t subset_index) {
  std::uint64_t s = mix64(master_seed);
  s = mix64(s ^ (pair_index * 0xd6e8feb86659fd93ULL + 1));
  s = mix64(s ^ (subset_index * 0xa0761d6478bd642fULL + 1));
  return s;
}

// mt19937_64 is fully specified by the standard; the mappings below avoid
// std::uniform_*_distribution, whose output is implementation-defined.
class StreamRng {
 public:
  explicit StreamRng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_bits() { return gen_(); }

  // [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Inclusive on both ends.
  int uniform_int(int lo, int hi) {
    const double span = static_cast<double>(hi) - static_cast<double>(lo) + 1.0;
    int v = lo + static_cast<int>(std::floor(uniform01() * span));
    return v > hi ? hi : v;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace dic
