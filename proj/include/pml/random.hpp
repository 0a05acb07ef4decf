#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace pml {

/// One step of the splitmix64 sequence; advances `state` and returns the output.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Named sub-streams a run seed fans out to, so every randomized component
/// can be re-seeded independently of the others.
enum class SeedStream : std::uint64_t {
  Dataset = 1,
  Mask = 2,
  ModelInit = 3,
  Shuffle = 4,
  Pick = 5,
};

/// Keyed seed derivation: one splitmix64 step from `base ^ (key+1)*golden`.
/// derive(derive(s, a), b) gives per-index streams (e.g. one per epoch).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t key) {
  std::uint64_t state = base ^ (0x9e3779b97f4a7c15ULL * (key + 1));
  return splitmix64_next(state);
}

inline std::uint64_t derive_seed(std::uint64_t base, SeedStream stream) {
  return derive_seed(base, static_cast<std::uint64_t>(stream));
}

inline std::uint64_t derive_seed(std::uint64_t base, SeedStream stream, std::uint64_t index) {
  return derive_seed(derive_seed(base, stream), index);
}

/// Deterministic PRNG over the splitmix64 sequence. All sampling is
/// implemented here rather than via <random> distributions so that streams
/// are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Unbiased integer in [0, n); rejection sampling on the top of the range.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal via Box-Muller; the spare draw is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    do {
      u = uniform();
    } while (u <= 0.0);
    const double v = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u));
    const double angle = 2.0 * std::numbers::pi * v;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// k distinct indices drawn uniformly from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> picked;
    picked.reserve(k);
    for (std::size_t i = 0; i < k && i < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(pool[i], pool[j]);
      picked.push_back(pool[i]);
    }
    return picked;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pml
