#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <vector>

// Self-contained reproducible randomness. Everything here is a pure function
// of 64-bit seeds, so any value can be recomputed at an arbitrary position
// without replaying a stream (counter-based access), and child seeds can be
// split off for parallel work without coordination.

namespace shufflebench::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer (Steele, Lea & Flood 2014 / Vigna 2015).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// The t-th output of the SplitMix64 stream with the given seed, O(1) in t.
constexpr std::uint64_t value_at(std::uint64_t seed, std::uint64_t t) {
  return mix64(seed + (t + 1) * kGolden);
}

// Child-seed derivation. Chained so the argument order matters.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a) {
  return mix64((seed ^ mix64(a + kGolden)) + kGolden);
}
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                               std::uint64_t b) {
  return derive(derive(seed, a), b);
}
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                               std::uint64_t b, std::uint64_t c) {
  return derive(derive(seed, a, b), c);
}

// Seed contribution from raw bytes (FNV-1a folded through mix64); used to
// hash strategy names and gamma bit patterns into cell seeds.
inline std::uint64_t hash_bytes(std::uint64_t seed, const void* data,
                                std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ULL ^ seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return mix64(h);
}

inline std::uint64_t hash_double(std::uint64_t seed, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  return derive(seed, bits);
}

// Exactly uniform draw on [0, n) as a pure function of (seed, t). The
// rejection loop continues the same counter position deterministically;
// rejection probability is < n / 2^64.
inline std::uint64_t bounded_at(std::uint64_t seed, std::uint64_t t,
                                std::uint64_t n) {
  const std::uint64_t rem = (0 - n) % n;  // 2^64 mod n
  std::uint64_t u = value_at(seed, t);
  while (u < rem) u = mix64(u + kGolden);
  return (u - rem) % n;
}

// Sequential SplitMix64 stream with uniform/Gaussian helpers.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() { return mix64(state_ += kGolden); }

  // [0, 1)
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // (0, 1]
  double next_open() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Exactly uniform on [0, n), n >= 1.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t rem = (0 - n) % n;
    std::uint64_t u = next();
    while (u < rem) u = next();
    return (u - rem) % n;
  }

  // Standard normal via Box-Muller; platform-independent unlike
  // std::normal_distribution.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_open();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Uniformly random permutation of {1, ..., n} (Fisher-Yates, exact).
inline std::vector<int> random_permutation(int n, std::uint64_t seed) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i + 1;
  Stream stream(seed);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(
        stream.next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

}  // namespace shufflebench::rng
