#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace medlfrm {

// Seeded generator with portable helper draws. All randomized code in the
// library goes through this wrapper so that a fixed seed reproduces a run
// bit-for-bit (std::*_distribution output is implementation-defined, so we
// avoid it here).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    std::size_t v = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return v < n ? v : n - 1;
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  // k distinct indices drawn from [0, n), in sampled order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 gen_;
};

inline std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) k = n;
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  // Partial Fisher-Yates: first k slots end up with the sample.
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + index(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace medlfrm
