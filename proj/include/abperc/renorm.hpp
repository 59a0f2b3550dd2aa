#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "abperc/criterion.hpp"

namespace abperc {

struct PZero {
  double value = 0;
  std::int64_t t_star = 0;
  bool infinite_t = false;  // eta == 0: supremum 1 approached as t grows
};

// max over integer t >= 1 of 1 - (1-delta/kappa)^t - eta*(1-p)^{-t}
PZero p_zero(double p, double delta, double kappa, double eta);

struct DominationReport {
  double value = 0;   // 1 - (1-p)(1-delta/kappa)^kappa
  double target = 0;  // p + delta
  double margin = 0;  // value - target, can be negative
};
DominationReport omega_total_domination_check(double p, double delta, double kappa);

struct SprinkleParams {
  double delta = 0;
  std::int64_t kappa = 1;
  double rate() const { return delta / static_cast<double>(kappa); }
};

// Precomputed window-side data shared by exploration runs.
struct RenormArena {
  RenormLayout layout;
  EdgeWindow win;
  std::int64_t z_side = 0;  // z in [-z_radius, z_radius]^2
  std::vector<std::vector<std::int32_t>> box_ids;        // per z index
  std::vector<std::vector<std::int32_t>> corridor_edges; // per z index
  std::vector<std::int32_t> edge_corridor_count;         // per edge
  std::vector<std::vector<GroupElement>> seed_paths;     // projected S(m)

  std::int64_t z_index(const Eigen::Vector2i& z) const {
    std::int64_t side = 2 * layout.z_radius + 1;
    return (z.y() + layout.z_radius) * side + (z.x() + layout.z_radius);
  }

  RenormArena(RenormLayout lay, EdgeWindow w) : layout(std::move(lay)), win(std::move(w)) {}
};

RenormArena build_arena(const RenormLayout& layout, std::int64_t m,
                        std::size_t saw_cap = 100000);

struct StepRecord {
  std::int64_t t = 0;
  Eigen::Vector2i z;
  int x_value = 0;
  std::int64_t cluster_size = 0;
  std::int64_t u_size_before = 0;
};

struct ExplorationState {
  std::vector<StepRecord> steps;      // step 0 is the origin site
  std::vector<Eigen::Vector2i> u_set; // sites with X = 1
  std::vector<Eigen::Vector2i> v_set; // sites with X = 0
  std::vector<std::uint8_t> omega;    // final accumulated configuration
  std::vector<std::uint8_t> omega0;   // initial p-configuration
  std::vector<Eigen::Vector2i> sprinkles_consumed;
  bool window_exhausted = false;
  rng::SeedRecord seed;
};

enum class TieBreak { kLexicographic, kClosestToOrigin };

// The box-by-box exploration of the origin cluster: each step sprinkles the
// chosen site's corridor at rate delta/kappa, recomputes the cluster and
// scores the site by whether the cluster meets its box.
ExplorationState explore(const RenormArena& arena, double p, double delta,
                         std::int64_t kappa_value, const rng::SeedRecord& seed,
                         TieBreak tie = TieBreak::kLexicographic);

// Post-hoc check on a finished run: every site scored 1 must be joined to
// the origin in the final configuration.
bool verify_exploration(const RenormArena& arena, const ExplorationState& st);

struct StratumStat {
  std::int64_t key = 0;  // step index or |U| bucket
  Estimate est;
};

struct ConditionalStats {
  std::vector<StratumStat> by_step;
  std::vector<StratumStat> by_u_size;
  Estimate overall;
};

ConditionalStats conditional_success_stats(const std::vector<ExplorationState>& runs);

}  // namespace abperc
