#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ishap {

// One splitmix64 step. Mixes state and returns the next output word.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d649fb133111ebULL;
  return z ^ (z >> 31);
}

// Tags separating the RNG streams derived from one master seed. Values are
// part of the reproducibility contract: changing them changes every output.
enum class Stream : std::uint64_t {
  MaskSample = 0x6d61736bULL,   // "mask"
  Value = 0x76616c75ULL,        // "valu"
  Permutation = 0x7065726dULL,  // "perm"
  Synth = 0x73796e74ULL,        // "synt"
  Dataset = 0x64617461ULL,      // "data"
  Trial = 0x7472696cULL,        // "tril"
};

// Derives an independent stream seed from (master, tag).
inline std::uint64_t stream_seed(std::uint64_t master, Stream tag) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  s ^= static_cast<std::uint64_t>(tag) + 0x9e3779b97f4a7c15ULL;
  h ^= splitmix64(s);
  return h;
}

// Derives an independent stream seed from (master, tag, feature set).
// The set is folded in element by element, so distinct sets get distinct
// streams while identical (seed, tag, set) triples reproduce exactly.
inline std::uint64_t stream_seed(std::uint64_t master, Stream tag, std::span<const int> set) {
  std::uint64_t h = stream_seed(master, tag);
  std::uint64_t s = h ^ (static_cast<std::uint64_t>(set.size()) + 1);
  h ^= splitmix64(s);
  for (int v : set) {
    s ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)) + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
  }
  return h;
}

inline std::uint64_t stream_seed(std::uint64_t master, Stream tag, std::uint64_t salt) {
  std::uint64_t h = stream_seed(master, tag);
  std::uint64_t s = h ^ salt;
  return splitmix64(s);
}

// Deterministic generator: mt19937_64 core with fixed transformations, so the
// same seed yields the same sequence on every platform and thread count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t u64() { return engine_(); }

  // Uniform in [0, 1): top 53 bits scaled, the usual 2^-53 ladder.
  double uniform01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform index in [0, n). Modulo bias is < n / 2^64, irrelevant here.
  int index(int n) { return static_cast<int>(u64() % static_cast<std::uint64_t>(n)); }

  bool coin() { return (u64() & 1ULL) != 0; }

  // Standard normal via Box-Muller. Stateless across calls: two uniforms in,
  // one deviate out, which keeps stream accounting trivial.
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  // Knuth's product method; fine for the small rates used here.
  int poisson(double lambda) {
    double limit = std::exp(-lambda);
    double prod = 1.0;
    int k = -1;
    do {
      ++k;
      prod *= uniform01();
    } while (prod > limit);
    return k;
  }

  // Fisher-Yates using index(), not std::shuffle (which is unspecified across
  // standard library implementations).
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      int j = index(i + 1);
      std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ishap
