#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace lpcoreset {

/// Counter-based pseudorandom generator: the SplitMix64 finalizer applied to
/// a keyed Weyl sequence. Streams are addressed by (seed, namespace) so that
/// coins spent in one pipeline stage (e.g. weight estimation) never perturb
/// another (e.g. sampling), and output is identical across platforms and
/// thread counts.
class CounterRng {
public:
  CounterRng() = default;
  explicit CounterRng(uint64_t key) : key_(key) {}

  /// Stream addressed by seed and a short namespace label.
  CounterRng(uint64_t seed, std::string_view ns) : key_(derive_key(seed, ns)) {}

  uint64_t next_u64() {
    uint64_t z = key_ + counter_ * 0x9E3779B97F4A7C15ull;
    counter_ += 1;
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Marsaglia polar; one value cached.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  /// Bernoulli coin with success probability p.
  bool next_coin(double p) { return next_double() < p; }

  static uint64_t derive_key(uint64_t seed, std::string_view ns) {
    // FNV-1a over the namespace, folded into the seed.
    uint64_t h = 0xCBF29CE484222325ull;
    for (char c : ns) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001B3ull;
    }
    uint64_t z = seed ^ h;
    z ^= z >> 33;
    z *= 0xFF51AFD7ED558CCDull;
    z ^= z >> 33;
    return z;
  }

private:
  uint64_t key_ = 0;
  uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace lpcoreset
