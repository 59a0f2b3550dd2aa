#include "abperc/window.hpp"

#include <stdexcept>

namespace abperc {

namespace {

void finish_window(EdgeWindow& w) {
  const auto& g = w.view.group();
  for (std::size_t i = 0; i < w.vertices.size(); ++i)
    w.index.emplace(w.vertices[i], static_cast<std::int32_t>(i));

  for (std::size_t i = 0; i < w.vertices.size(); ++i) {
    bool edge_out = false;
    for (const auto& s : w.view.steps()) {
      GroupElement y = g.add(w.vertices[i], s);
      auto it = w.index.find(y);
      if (it == w.index.end()) {
        edge_out = true;
        continue;
      }
      std::int32_t j = it->second;
      if (static_cast<std::int32_t>(i) < j)
        w.edges.emplace_back(static_cast<std::int32_t>(i), j);
    }
    w.on_boundary.push_back(edge_out ? 1 : 0);
    if (edge_out) w.boundary_ids.push_back(static_cast<std::int32_t>(i));
  }
  std::sort(w.edges.begin(), w.edges.end());
  w.edges.erase(std::unique(w.edges.begin(), w.edges.end()), w.edges.end());

  w.adj_off.assign(w.vertices.size() + 1, 0);
  for (const auto& [u, v] : w.edges) {
    ++w.adj_off[static_cast<std::size_t>(u) + 1];
    ++w.adj_off[static_cast<std::size_t>(v) + 1];
  }
  for (std::size_t i = 1; i < w.adj_off.size(); ++i) w.adj_off[i] += w.adj_off[i - 1];
  w.adj_nbr.assign(static_cast<std::size_t>(w.adj_off.back()), 0);
  w.adj_edge.assign(static_cast<std::size_t>(w.adj_off.back()), 0);
  std::vector<std::int32_t> fill(w.adj_off.begin(), w.adj_off.end() - 1);
  for (std::size_t e = 0; e < w.edges.size(); ++e) {
    auto [u, v] = w.edges[e];
    w.adj_nbr[static_cast<std::size_t>(fill[static_cast<std::size_t>(u)])] = v;
    w.adj_edge[static_cast<std::size_t>(fill[static_cast<std::size_t>(u)])] =
        static_cast<std::int32_t>(e);
    ++fill[static_cast<std::size_t>(u)];
    w.adj_nbr[static_cast<std::size_t>(fill[static_cast<std::size_t>(v)])] = u;
    w.adj_edge[static_cast<std::size_t>(fill[static_cast<std::size_t>(v)])] =
        static_cast<std::int32_t>(e);
    ++fill[static_cast<std::size_t>(v)];
  }

  w.origin = w.vertex_id(g.zero());
}

}  // namespace

EdgeWindow predicate_window(const CayleyView& view, const IVec& box,
                            const std::function<bool(const IVec&)>& keep,
                            std::string_view tag) {
  const auto& g = view.group();
  Eigen::Index r = g.rank();
  if (box.size() != r) throw std::invalid_argument("predicate_window: box dim mismatch");

  EdgeWindow w(view);
  w.id = std::string(tag);

  std::int64_t tor_count = 1;
  for (std::int64_t t : g.torsion()) tor_count *= t;

  IVec c(r);
  for (Eigen::Index i = 0; i < r; ++i) c[i] = -box[i];
  for (;;) {
    if (keep(c)) {
      for (std::int64_t t = 0; t < tor_count; ++t) {
        GroupElement x;
        x.free = c;
        x.tor = IVec::Zero(static_cast<Eigen::Index>(g.torsion().size()));
        std::int64_t rem = t;
        for (std::size_t i = 0; i < g.torsion().size(); ++i) {
          x.tor[static_cast<Eigen::Index>(i)] = rem % g.torsion()[i];
          rem /= g.torsion()[i];
        }
        w.vertices.push_back(std::move(x));
      }
    }
    Eigen::Index lv = 0;
    while (lv < r) {
      if (c[lv] < box[lv]) {
        ++c[lv];
        break;
      }
      c[lv] = -box[lv];
      ++lv;
    }
    if (lv == r) break;
  }

  finish_window(w);
  return w;
}

EdgeWindow ball_window(const CayleyView& view, double radius, std::string_view tag) {
  Eigen::Index r = view.group().rank();
  IVec box = IVec::Constant(r, static_cast<std::int64_t>(std::floor(radius + 1e-9)));
  double r2 = radius * radius + 1e-9;
  auto keep = [r2](const IVec& c) {
    double n2 = 0;
    for (Eigen::Index i = 0; i < c.size(); ++i)
      n2 += static_cast<double>(c[i]) * static_cast<double>(c[i]);
    return n2 <= r2;
  };
  return predicate_window(view, box, keep, tag);
}

EdgeWindow planar_window(const CayleyView& quot_view, const RenormLayout& layout,
                         const Vec2& lo, const Vec2& hi, double margin,
                         std::string_view tag) {
  const auto& h = quot_view.group();
  if (h.rank() != 2)
    throw std::invalid_argument("planar_window: quotient rank must be 2");

  // planar image is linear in the free coordinates and kills torsion
  GroupElement f1 = h.zero(), f2 = h.zero();
  f1.free[0] = 1;
  f2.free[1] = 1;
  Eigen::Matrix2d pmat;
  pmat.col(0) = layout.planar(f1) - layout.planar(h.zero());
  pmat.col(1) = layout.planar(f2) - layout.planar(h.zero());
  if (std::abs(pmat.determinant()) < 1e-9)
    throw std::invalid_argument("planar_window: degenerate planar map");
  Eigen::Matrix2d pinv = pmat.inverse();

  Vec2 corners[4] = {Vec2(lo.x() - margin, lo.y() - margin),
                     Vec2(hi.x() + margin, lo.y() - margin),
                     Vec2(lo.x() - margin, hi.y() + margin),
                     Vec2(hi.x() + margin, hi.y() + margin)};
  double f0_lo = 1e18, f0_hi = -1e18, f1_lo = 1e18, f1_hi = -1e18;
  for (const Vec2& c : corners) {
    Vec2 f = pinv * c;
    f0_lo = std::min(f0_lo, f.x());
    f0_hi = std::max(f0_hi, f.x());
    f1_lo = std::min(f1_lo, f.y());
    f1_hi = std::max(f1_hi, f.y());
  }
  IVec box(2);
  box[0] = static_cast<std::int64_t>(std::ceil(std::max(std::abs(f0_lo), std::abs(f0_hi)))) + 1;
  box[1] = static_cast<std::int64_t>(std::ceil(std::max(std::abs(f1_lo), std::abs(f1_hi)))) + 1;

  auto keep = [&](const IVec& c) {
    Vec2 pi = pmat * Vec2(static_cast<double>(c[0]), static_cast<double>(c[1]));
    return pi.x() >= lo.x() - margin && pi.x() <= hi.x() + margin &&
           pi.y() >= lo.y() - margin && pi.y() <= hi.y() + margin;
  };
  return predicate_window(quot_view, box, keep, tag);
}

std::vector<Vec2> planar_images(const EdgeWindow& w, const Basis& basis) {
  std::vector<Vec2> out;
  out.reserve(w.vertices.size());
  for (const auto& x : w.vertices) out.push_back(basis.project_i(x.free));
  return out;
}

std::vector<std::int32_t> graph_set_ids(const EdgeWindow& w, const Basis& basis,
                                        const GraphSet& gs, double margin) {
  std::vector<std::int32_t> out;
  for (std::size_t i = 0; i < w.vertices.size(); ++i)
    if (gs.contains(basis.project_i(w.vertices[i].free), margin))
      out.push_back(static_cast<std::int32_t>(i));
  return out;
}

}  // namespace abperc
