#pragma once

#include <cstdint>
#include <string_view>

namespace abperc::rng {

// SplitMix64 finalizer. All randomness in the project is a pure function of
// (master seed, stream id, trial index, counter), so results do not depend on
// thread scheduling or evaluation order.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// FNV-1a, used to derive stream ids from experiment/window descriptors.
constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

struct SeedRecord {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;
  std::uint64_t trial = 0;

  constexpr SeedRecord with_trial(std::uint64_t t) const noexcept {
    return {master, stream, t};
  }
  constexpr SeedRecord substream(std::uint64_t tag) const noexcept {
    return {master, mix64(stream ^ mix64(tag)), trial};
  }
  SeedRecord substream(std::string_view tag) const noexcept {
    return substream(fnv1a(tag));
  }
};

constexpr std::uint64_t word(const SeedRecord& s, std::uint64_t counter) noexcept {
  std::uint64_t h = mix64(s.master);
  h = mix64(h ^ s.stream);
  h = mix64(h ^ s.trial);
  return mix64(h ^ counter);
}

constexpr double u01(std::uint64_t w) noexcept {
  return static_cast<double>(w >> 11) * 0x1.0p-53;
}

constexpr double uniform(const SeedRecord& s, std::uint64_t counter) noexcept {
  return u01(word(s, counter));
}

constexpr bool bernoulli(const SeedRecord& s, std::uint64_t counter, double p) noexcept {
  return uniform(s, counter) < p;
}

// Uniform integer in [0, n). Modulo bias is < 2^-40 for the n used here.
constexpr std::uint64_t below(const SeedRecord& s, std::uint64_t counter, std::uint64_t n) noexcept {
  return word(s, counter) % n;
}

}  // namespace abperc::rng
