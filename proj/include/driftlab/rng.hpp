#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace driftlab {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// FNV-1a, used to turn stream tags ("train", "test", ...) into words.
inline constexpr std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives a 64-bit stream id from a seed and a sequence of words. Streams for
// distinct word sequences are independent for all practical purposes; the id
// doubles as the stream identity used by disjointness checks.
inline constexpr std::uint64_t derive_stream(std::uint64_t seed,
                                             std::initializer_list<std::uint64_t> words) {
  std::uint64_t acc = detail::mix64(seed + detail::kGolden);
  for (std::uint64_t w : words) {
    acc = detail::mix64(acc + detail::kGolden);
    acc = detail::mix64(acc ^ w);
  }
  return acc;
}

// xoshiro256++ with a splitmix64-seeded state and a Marsaglia polar normal
// sampler. Self-contained so that datasets are bit-reproducible across
// platforms and worker counts (std::normal_distribution is
// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t stream) {
    std::uint64_t sm = stream;
    for (auto& word : state_) {
      sm += detail::kGolden;
      word = detail::mix64(sm);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1).
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal (Marsaglia polar method, second value cached).
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_uniform() - 1.0;
      v = 2.0 * next_uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

 private:
  std::array<std::uint64_t, 4> state_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace driftlab
