#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace embedkit {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used to derive independent
// stream seeds from a root seed plus small integers.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for one experiment cell: hash(root, n, m, seed_index). Every cell gets
// its own stream, so per-cell results are identical regardless of execution
// order or thread count.
constexpr std::uint64_t cell_seed(std::uint64_t root, std::uint64_t n,
                                  std::uint64_t m, std::uint64_t seed_index) {
  std::uint64_t h = splitmix64(root);
  h = splitmix64(h ^ n);
  h = splitmix64(h ^ m);
  h = splitmix64(h ^ seed_index);
  return h;
}

// mt19937_64 behind a fixed extraction scheme. The raw engine output is
// pinned by the standard, but std::uniform_*_distribution is not, so all
// draws go through the methods below to stay identical across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n); n must be positive. Modulo draw, documented as part of
  // the reproducibility contract.
  std::size_t next_below(std::size_t n) {
    return static_cast<std::size_t>(gen_() % static_cast<std::uint64_t>(n));
  }

  // Standard normal via the Marsaglia polar method; second value cached.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_unit() - 1.0;
      v = 2.0 * next_unit() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// In-place Fisher-Yates with explicit modulo draws (std::shuffle output is
// implementation-defined).
template <typename T>
void deterministic_shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.next_below(i)]);
  }
}

// k distinct indices drawn from [0, n) via a partial Fisher-Yates pass.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                           std::size_t k,
                                                           Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
    std::swap(idx[i], idx[i + rng.next_below(n - i)]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace embedkit
