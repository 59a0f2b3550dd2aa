#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "abperc/cayley.hpp"
#include "abperc/geometry.hpp"

namespace abperc {

// A finite vertex/edge window of a Cayley graph. Vertices are enumerated in
// a deterministic order (free coordinates lexicographic, then torsion), so
// edge indices are stable and can key RNG streams.
struct EdgeWindow {
  CayleyView view;
  std::vector<GroupElement> vertices;
  std::unordered_map<GroupElement, std::int32_t, GroupElementHash> index;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;  // u < v
  std::vector<char> on_boundary;  // some neighbor falls outside the window
  std::vector<std::int32_t> boundary_ids;
  std::int32_t origin = -1;
  std::string id;

  // CSR adjacency carrying the incident edge index
  std::vector<std::int32_t> adj_off;
  std::vector<std::int32_t> adj_nbr;
  std::vector<std::int32_t> adj_edge;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t edge_count() const { return edges.size(); }
  std::int32_t vertex_id(const GroupElement& x) const {
    auto it = index.find(x);
    return it == index.end() ? -1 : it->second;
  }

  explicit EdgeWindow(CayleyView v) : view(std::move(v)) {}
};

// All elements whose free part lies in the integer box [-box[i], box[i]] and
// satisfies `keep`, with the full torsion fiber.
EdgeWindow predicate_window(const CayleyView& view, const IVec& box,
                            const std::function<bool(const IVec&)>& keep,
                            std::string_view tag);

// Geometric ball window {x : ||x_free||_2 <= radius} x T.
EdgeWindow ball_window(const CayleyView& view, double radius, std::string_view tag);

// Vertices of the quotient graph whose planar image lies within `margin` of
// the region's bounding box. Requires quotient rank exactly 2.
EdgeWindow planar_window(const CayleyView& quot_view, const RenormLayout& layout,
                         const Vec2& lo, const Vec2& hi, double margin,
                         std::string_view tag);

// ids of window vertices inside a Graph set (planar projections precomputed
// against the given basis).
std::vector<std::int32_t> graph_set_ids(const EdgeWindow& w, const Basis& basis,
                                        const GraphSet& gs, double margin = 0.0);

// Planar projections of all window vertices.
std::vector<Vec2> planar_images(const EdgeWindow& w, const Basis& basis);

}  // namespace abperc
