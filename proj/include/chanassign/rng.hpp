#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace chanassign {

// Generator id recorded in every experiment output. Bump on any change to
// seed derivation or sampling so old result files cannot be silently mixed
// with new runs.
inline constexpr std::string_view kGeneratorId = "splitmix64+mt19937_64/v1";

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic per-trial seed: seed_i = mix(master_seed, fnv(tag), i).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s ^= fnv1a64(tag);
  std::uint64_t b = splitmix64(s);
  s ^= index;
  return a ^ b ^ splitmix64(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0,1) with 53 random bits; platform independent.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double exponential(double lambda) {
    return -std::log1p(-uniform01()) / lambda;
  }

  // Uniform integer in [0, n), n > 0. Rejection-free modulo bias is
  // negligible for the n used here but we reject anyway for determinism
  // across future refactors.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace chanassign
