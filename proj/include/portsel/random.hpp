#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace portsel {

inline constexpr std::uint64_t default_seed = 1;

// Independent stream seed for sub-tasks (per-fold work, per-class models).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// mt19937_64 with an explicit rejection-sampled bounded draw. std::shuffle's
// mapping from generator output to indices is implementation-defined; this
// keeps partitions identical across standard libraries.
class rng {
 public:
  explicit rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0, n), n > 0
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % n;
  }

 private:
  std::mt19937_64 gen_;
};

template <class T>
void shuffle(std::vector<T>& v, rng& r) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[r.below(i)]);
}

}  // namespace portsel
