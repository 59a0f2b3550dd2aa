#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "abperc/percolation.hpp"

namespace abperc {

// A finite-size witness: every length-m self-avoiding path near the origin
// connects, inside the truncated inflated corridor, to each of the four
// inflated truncated zones with probability > 1 - eta.
struct FCParams {
  std::string group_key;
  double p = 0;
  std::int64_t n_window = 0;  // truncation scale N, in units of R_S
  double eta = 0;
  std::int64_t m = 0;
  Basis basis;
  GoodQuadruple quad;

  std::string serialize() const;
  static FCParams parse(const std::string& text);
};

struct FcPairStat {
  std::int64_t gamma = -1;  // index into the enumerated SAW set
  int zone = -1;
  Estimate est;
};

struct FcReport {
  bool pass = false;
  double threshold = 0;
  FcPairStat worst;
  std::size_t saw_count = 0;
  bool saw_truncated = false;
  std::uint64_t trials = 0;
  std::size_t window_vertices = 0;
  std::size_t window_edges = 0;
  std::string note;
};

FcReport fc_check(const MarkedAbelianGroup& g, const FCParams& fc, std::uint64_t trials,
                  const rng::SeedRecord& seed, int threads = 1,
                  std::size_t saw_cap = 100000);

struct EllEqEstimate {
  double ell_hat = 0;
  double lo = 0;       // largest tested ell that still leaned UD
  double hi = 0;       // smallest tested ell that was LR-dominant
  bool flip_found = false;
  bool bottom_ud = false;   // UD crisply dominates at the bottom of the range
  bool bottom_tie = false;  // discordant counts too small to call at the bottom
  bool top_lr = false;
  Estimate ud_bottom, lr_bottom, ud_top, lr_top;
};

// Crossover scale where the ordering of P[A <->^C UD] vs P[A <->^C LR]
// flips. Both events are evaluated on the same configurations, so dominance
// is decided by a paired sign test on the discordant trials; ties extend the
// bracket rather than guess.
EllEqEstimate ell_eq_estimate(const MarkedAbelianGroup& g, const Basis& basis,
                              double chimney_n, double h, double n_b, double p,
                              std::uint64_t trials, const rng::SeedRecord& seed,
                              int threads = 1, double ell_hi = 0,
                              std::int64_t ball_k = 1);

struct FcSearchBudget {
  std::uint64_t stage_trials = 4000;
  std::uint64_t final_trials = 10000;
  std::int64_t window_scale = 24;     // boundary surrogate scale K, in R_S units
  std::int64_t m_max = 5;
  std::int64_t k_max = 5;
  std::int64_t n_max = 12;
  double ell_hi_factor = 8.0;
  std::int64_t wall_ms = 20 * 60 * 1000;
  std::size_t saw_cap = 100000;
};

struct FcSearchResult {
  std::optional<FCParams> params;
  int stage_reached = 0;  // stage at which the search stopped (1..6); 7 = success
  std::string diagnostic;
  FcReport final_report;
  // staging data, for reporting
  std::int64_t m = 0, k = 0, n = 0;
  double ell0 = 0, h_u = 0, ell = 0;
};

// Mirrors the constructive pipeline: (1) seed length m, (2) ball scale k,
// (3) uniqueness annulus n, (4) crossover ell_eq, (5) segment splitting for
// u and v, (6) final verification.
FcSearchResult fc_search(const MarkedAbelianGroup& g, double p, double eta,
                         const FcSearchBudget& budget, const rng::SeedRecord& seed,
                         int threads = 1);

// Window of all x with |<x,e_0>| <= half_x, |<x,e_1>| <= half_y and
// |<x,e_j>| <= half_perp for j >= 2.
EdgeWindow e_box_window(const CayleyView& view, const Basis& basis, double half_x,
                        double half_y, double half_perp, std::string_view tag);

// Segment-splitting scan: candidate breakpoints t_i along [alpha, beta] where
// the discrete set L(alpha, .) changes, with batched estimates of
// P[A <->^C L(alpha, u_i)] and P[A <->^C L(u_i, beta)].
struct SplitScan {
  std::vector<double> t;
  std::vector<Estimate> left, right;
  std::int64_t pick = -1;
  Vec2 point;  // chosen split point
};
SplitScan split_segment(const EdgeWindow& w, const Basis& basis, const Vec2& alpha,
                        const Vec2& beta, const std::vector<std::int32_t>& a_ids,
                        const std::vector<std::int32_t>& c_ids, double rs, double p,
                        std::uint64_t trials, const rng::SeedRecord& seed,
                        int threads = 1);

// Finite basis families for the compactness cover. Rank 2 reduces to the
// standard basis by rotation covariance; rank 3 uses a Fibonacci grid of
// plane normals. Larger ranks are not supported.
std::vector<Basis> basis_cover(const MarkedAbelianGroup& g, int resolution = 32);

// Largest basis perturbation angle (radians) for which the inclusion
// Graph_e(X) cap B(N) subset (Graph_f(X) + B(1)) cap B(N) held on sampled
// rotations; a numerical stand-in for the neighborhood radius.
double estimate_cover_radius(const MarkedAbelianGroup& g, const PlanarSet& x,
                             const Basis& e, std::int64_t n_window, int samples,
                             const rng::SeedRecord& seed);

}  // namespace abperc
