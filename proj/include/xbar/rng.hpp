#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace xbar {

// Stream ids for deriving independent sub-streams from one experiment seed.
enum : std::uint64_t {
  kStreamInit = 1,
  kStreamVariation = 2,
  kStreamShuffle = 3,
  kStreamSwInit = 4,
};

// splitmix64 finalizer over (base, stream).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic random stream. The engine is mt19937_64, whose output sequence
// is pinned by the standard; the distribution helpers are hand-rolled so the
// mapping from seed and draw index to values is identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform over {0, 1, ..., bound} inclusive, rejection-sampled.
  std::uint32_t uniform_int(std::uint32_t bound) {
    const std::uint64_t range = static_cast<std::uint64_t>(bound) + 1;
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return static_cast<std::uint32_t>(x % range);
  }

  // Box-Muller; consumes exactly two uniforms per call.
  double gaussian(double mean, double stddev) {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::mt19937_64 gen_;
};

template <typename T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_int(static_cast<std::uint32_t>(i - 1));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace xbar
