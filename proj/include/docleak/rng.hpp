#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace docleak {

// splitmix64 stream. Every draw and shuffle below is specified bit-for-bit,
// unlike std::uniform_int_distribution / std::shuffle, so manifests match
// across standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased draw in [0, bound); bound > 0.
  std::uint64_t uniform(std::uint64_t bound) noexcept {
    const std::uint64_t floor = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= floor) return r % bound;
    }
  }

  // Fisher-Yates, last index first.
  template <typename T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform(i));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Independent stream seed for a (seed, index) pair.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  SplitMix64 a(index + 1);
  SplitMix64 b(seed ^ a.next());
  return b.next();
}

}  // namespace docleak
