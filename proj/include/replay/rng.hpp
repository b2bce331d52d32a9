#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace replay {

// splitmix64 finalizer. Used to derive well-separated child seeds from a
// (seed, tag) pair so that e.g. the environment stream and the sampler
// stream of one run never overlap.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic random source. Wraps std::mt19937_64 (whose output sequence
// is fixed by the standard) and keeps all value derivation in-house, because
// std::uniform_*_distribution is not bit-stable across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Child stream for a named purpose. Same (seed, tag) always yields the
  // same stream; different tags yield unrelated streams.
  static Rng stream(uint64_t seed, uint64_t tag) {
    return Rng(mix64(mix64(seed) ^ tag));
  }

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased (Lemire's multiply-shift with the
  // rejection step). n must be positive.
  uint64_t uniform_below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto lo = static_cast<uint64_t>(m);
    if (lo < n) {
      uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        lo = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller (polar form avoided to keep the draw
  // count per call fixed at two words for the pair).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// k distinct indices from [0, n), in insertion order (Floyd's algorithm).
// When n < k distinctness is impossible, so the draw falls back to k
// independent uniform picks.
inline std::vector<size_t> sample_indices(Rng& rng, size_t n, size_t k) {
  std::vector<size_t> out;
  out.reserve(k);
  if (n == 0 || k == 0) return out;
  if (n < k) {
    for (size_t i = 0; i < k; ++i) out.push_back(static_cast<size_t>(rng.uniform_below(n)));
    return out;
  }
  std::unordered_set<size_t> seen;
  seen.reserve(k * 2);
  for (size_t j = n - k; j < n; ++j) {
    auto t = static_cast<size_t>(rng.uniform_below(j + 1));
    if (seen.insert(t).second) {
      out.push_back(t);
    } else {
      seen.insert(j);
      out.push_back(j);
    }
  }
  return out;
}

}  // namespace replay
