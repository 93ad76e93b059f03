#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mwalk {

/// Seeded generator with a platform-independent mapping to doubles and
/// bounded integers. The standard distributions are implementation defined,
/// so they are not used anywhere a result must be reproducible.
class Rng {
 public:
  using seed_type = std::uint64_t;

  explicit Rng(seed_type seed = 1) : engine_(seed) {}

  void reseed(seed_type seed) { engine_.seed(seed); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  /// Uniform in [-1, 1).
  double symmetric() { return 2.0 * uniform01() - 1.0; }

  /// Uniform integer in [0, n), rejection sampled so there is no modulo bias.
  std::size_t below(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = (~std::uint64_t{0} / bound) * bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % bound);
  }

  /// Draws `k` distinct entries of `pool` (partial Fisher-Yates on a copy).
  /// The order of the returned entries is the draw order.
  template <class T>
  std::vector<T> sample(std::span<const T> pool, std::size_t k) {
    std::vector<T> work(pool.begin(), pool.end());
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t pick = t + below(work.size() - t);
      std::swap(work[t], work[pick]);
    }
    work.resize(k);
    return work;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mwalk
