#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "abperc/marked_group.hpp"

namespace abperc {

// Simple-graph view of Cay(G; s_1..s_d): zero marks drop out, repeated marks
// and inverse pairs collapse to one edge.
class CayleyView {
 public:
  explicit CayleyView(MarkedAbelianGroup group);

  const MarkedAbelianGroup& group() const { return group_; }
  const std::vector<GroupElement>& steps() const { return steps_; }
  std::int64_t degree() const { return static_cast<std::int64_t>(steps_.size()); }

  // Deduplicated, lexicographically ordered neighbor list.
  std::vector<GroupElement> neighbors(const GroupElement& x) const;

 private:
  MarkedAbelianGroup group_;
  std::vector<GroupElement> steps_;
};

struct RootedBall {
  std::int64_t radius = 0;
  std::vector<GroupElement> vertices;             // BFS discovery order, root first
  std::vector<std::vector<std::int32_t>> adj;
  std::vector<std::int32_t> dist;                 // graph distance to root

  std::size_t size() const { return vertices.size(); }
  std::string to_text() const;                    // adjacency-list golden format
};

RootedBall word_ball(const CayleyView& view, std::int64_t k,
                     std::size_t vertex_budget = 2'000'000);

enum class IsoResult { kIsomorphic, kNotIsomorphic, kBudgetExceeded };

// Root-preserving graph isomorphism, backtracking over BFS layers with
// distance/degree/color-refinement pruning.
IsoResult rooted_isomorphic(const RootedBall& b1, const RootedBall& b2,
                            std::uint64_t node_budget = 20'000'000);

struct BsDistance {
  double value = 1.0;
  std::int64_t agree_radius = -1;
  bool budget_hit = false;
  bool exhausted_k_max = false;
};

BsDistance bs_distance(const MarkedAbelianGroup& g, const MarkedAbelianGroup& h,
                       std::int64_t k_max, std::uint64_t node_budget = 20'000'000);

}  // namespace abperc
