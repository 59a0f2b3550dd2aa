#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "abperc/rng.hpp"
#include "abperc/union_find.hpp"
#include "abperc/window.hpp"

namespace abperc {

// Bernoulli(p) bond configuration on a window, a pure function of the seed
// record: bit for edge e compares uniform(seed, e) against p, so coupled
// samples at different p share their uniforms.
struct PercConfig {
  const EdgeWindow* window = nullptr;
  double p = 0;
  rng::SeedRecord seed;
  std::vector<std::uint8_t> open;

  bool is_open(std::int32_t edge) const {
    return open[static_cast<std::size_t>(edge)] != 0;
  }
};

inline bool edge_open(const rng::SeedRecord& seed, std::uint64_t edge, double p) {
  return rng::bernoulli(seed, edge, p);
}

PercConfig sample(const EdgeWindow& w, double p, const rng::SeedRecord& seed);

// hex dump of the edge bit vector, 8 edges per byte, low bit first
std::string config_hex(const PercConfig& c);

// Open-path events. Vertex sets are id lists into the window. The path must
// stay inside C; connectivity is rebuilt over C-internal open edges.
bool connected_in(const PercConfig& c, const std::vector<std::int32_t>& a,
                  const std::vector<std::int32_t>& b,
                  const std::vector<std::int32_t>& cset);

// Exactly one cluster of the C-restricted configuration meets both A and B.
bool unique_crossing(const PercConfig& c, const std::vector<std::int32_t>& a,
                     const std::vector<std::int32_t>& b,
                     const std::vector<std::int32_t>& cset);

bool reaches_boundary(const PercConfig& c, const std::vector<std::int32_t>& a);

// Lazy BFS variant of "A reaches the window boundary": samples edge bits on
// demand with the same pure bit function, so outcomes match sample()+UF.
bool reach_boundary_lazy(const EdgeWindow& w, double p, const rng::SeedRecord& seed,
                         const std::vector<std::int32_t>& starts);

struct Estimate {
  double phat = 0;
  double lo = 0, hi = 1;  // Wilson 95%
  std::uint64_t successes = 0, trials = 0;
  double ci_halfwidth() const { return 0.5 * (hi - lo); }
};

Estimate wilson_bounds(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

// Monte Carlo estimate of an event probability. Trials are independent
// streams; the reduction is an integer count, so the result is identical for
// any thread count.
Estimate estimate(const EdgeWindow& w, double p, std::uint64_t trials,
                  const rng::SeedRecord& seed,
                  const std::function<bool(const PercConfig&)>& event, int threads = 1);

// Same but with a lightweight per-trial functor receiving (trial seed).
Estimate estimate_lazy(std::uint64_t trials, const rng::SeedRecord& seed,
                       const std::function<bool(const rng::SeedRecord&)>& event,
                       int threads = 1);

struct SAWSet {
  std::int64_t length = 0;
  bool truncated = false;
  std::vector<std::vector<GroupElement>> paths;
};

// All self-avoiding paths of the given length starting in the geometric ball
// B(start_radius_units), i.e. ||x_free|| <= start_radius_units * R_S.
SAWSet enumerate_saw(const CayleyView& view, std::int64_t m,
                     double start_radius_units = 1.0, std::size_t cap = 100000);
SAWSet enumerate_saw_from(const CayleyView& view, const std::vector<GroupElement>& starts,
                          std::int64_t m, std::size_t cap = 100000);

// Vertices of the geometric ball {x : ||x_free|| <= radius} x T.
std::vector<GroupElement> geometric_ball(const MarkedAbelianGroup& g, double radius);

}  // namespace abperc
