#include "abperc/cayley.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "abperc/rng.hpp"

namespace abperc {

CayleyView::CayleyView(MarkedAbelianGroup group) : group_(std::move(group)) {
  for (const auto& s : group_.generator_images()) {
    if (s.is_zero()) continue;
    for (const auto& t : {s, group_.negate(s)}) {
      if (std::find(steps_.begin(), steps_.end(), t) == steps_.end())
        steps_.push_back(t);
    }
  }
  std::sort(steps_.begin(), steps_.end(), lex_less);
}

std::vector<GroupElement> CayleyView::neighbors(const GroupElement& x) const {
  group_.check_element(x);
  std::vector<GroupElement> out;
  out.reserve(steps_.size());
  for (const auto& s : steps_) {
    GroupElement y = group_.add(x, s);
    if (std::find(out.begin(), out.end(), y) == out.end()) out.push_back(std::move(y));
  }
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

RootedBall word_ball(const CayleyView& view, std::int64_t k, std::size_t vertex_budget) {
  RootedBall ball;
  ball.radius = k;
  const auto& g = view.group();

  std::unordered_map<GroupElement, std::int32_t, GroupElementHash> index;
  ball.vertices.push_back(g.zero());
  ball.dist.push_back(0);
  index.emplace(g.zero(), 0);

  std::size_t frontier = 0;
  while (frontier < ball.vertices.size()) {
    std::int32_t du = ball.dist[frontier];
    if (du == k) break;
    GroupElement x = ball.vertices[frontier];
    for (const auto& s : view.steps()) {
      GroupElement y = g.add(x, s);
      if (index.find(y) != index.end()) continue;
      index.emplace(y, static_cast<std::int32_t>(ball.vertices.size()));
      ball.vertices.push_back(std::move(y));
      ball.dist.push_back(du + 1);
      if (ball.vertices.size() > vertex_budget)
        throw std::runtime_error("word_ball: vertex budget exceeded");
    }
    ++frontier;
  }

  ball.adj.assign(ball.vertices.size(), {});
  for (std::size_t i = 0; i < ball.vertices.size(); ++i) {
    for (const auto& s : view.steps()) {
      GroupElement y = g.add(ball.vertices[i], s);
      auto it = index.find(y);
      if (it == index.end()) continue;
      std::int32_t j = it->second;
      if (j == static_cast<std::int32_t>(i)) continue;
      if (std::find(ball.adj[i].begin(), ball.adj[i].end(), j) == ball.adj[i].end())
        ball.adj[i].push_back(j);
    }
    std::sort(ball.adj[i].begin(), ball.adj[i].end());
  }
  return ball;
}

std::string RootedBall::to_text() const {
  std::ostringstream s;
  s << "radius " << radius << " vertices " << vertices.size() << "\n";
  for (std::size_t i = 0; i < adj.size(); ++i) {
    s << i << ':';
    for (std::int32_t j : adj[i]) s << ' ' << j;
    s << '\n';
  }
  return s.str();
}

namespace {

// Iterated neighborhood color refinement seeded with (distance, degree).
std::vector<std::uint64_t> refine_colors(const RootedBall& b) {
  std::size_t n = b.size();
  std::vector<std::uint64_t> color(n);
  for (std::size_t i = 0; i < n; ++i)
    color[i] = rng::mix64(static_cast<std::uint64_t>(b.dist[i]) * 131 +
                          static_cast<std::uint64_t>(b.adj[i].size()));
  std::vector<std::uint64_t> next(n);
  for (int round = 0; round < 8; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::uint64_t> nb;
      nb.reserve(b.adj[i].size());
      for (std::int32_t j : b.adj[i]) nb.push_back(color[static_cast<std::size_t>(j)]);
      std::sort(nb.begin(), nb.end());
      std::uint64_t h = color[i];
      for (std::uint64_t c : nb) h = rng::mix64(h ^ c);
      next[i] = h;
    }
    if (next == color) break;
    color = next;
  }
  return color;
}

struct IsoSearch {
  const RootedBall& b1;
  const RootedBall& b2;
  std::vector<std::uint64_t> c1, c2;
  std::vector<std::int32_t> map12;   // -1 unset
  std::vector<std::int32_t> map21;
  std::uint64_t nodes = 0;
  std::uint64_t budget;
  bool exceeded = false;

  bool compatible(std::int32_t u, std::int32_t v) const {
    if (b1.dist[static_cast<std::size_t>(u)] != b2.dist[static_cast<std::size_t>(v)])
      return false;
    if (c1[static_cast<std::size_t>(u)] != c2[static_cast<std::size_t>(v)]) return false;
    if (b1.adj[static_cast<std::size_t>(u)].size() !=
        b2.adj[static_cast<std::size_t>(v)].size())
      return false;
    // already-mapped neighbors must correspond both ways
    for (std::int32_t w : b1.adj[static_cast<std::size_t>(u)]) {
      std::int32_t mw = map12[static_cast<std::size_t>(w)];
      if (mw >= 0) {
        const auto& a2 = b2.adj[static_cast<std::size_t>(v)];
        if (!std::binary_search(a2.begin(), a2.end(), mw)) return false;
      }
    }
    for (std::int32_t w : b2.adj[static_cast<std::size_t>(v)]) {
      std::int32_t mw = map21[static_cast<std::size_t>(w)];
      if (mw >= 0) {
        const auto& a1 = b1.adj[static_cast<std::size_t>(u)];
        if (!std::binary_search(a1.begin(), a1.end(), mw)) return false;
      }
    }
    return true;
  }

  bool extend(std::size_t u) {
    if (u == b1.size()) return true;
    if (++nodes > budget) {
      exceeded = true;
      return false;
    }
    for (std::size_t v = 0; v < b2.size(); ++v) {
      if (map21[v] >= 0) continue;
      if (!compatible(static_cast<std::int32_t>(u), static_cast<std::int32_t>(v)))
        continue;
      map12[u] = static_cast<std::int32_t>(v);
      map21[v] = static_cast<std::int32_t>(u);
      if (extend(u + 1)) return true;
      if (exceeded) return false;
      map12[u] = -1;
      map21[v] = -1;
    }
    return false;
  }
};

bool multiset_equal(std::vector<std::uint64_t> a, std::vector<std::uint64_t> b) {
  if (a.size() != b.size()) return false;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

}  // namespace

IsoResult rooted_isomorphic(const RootedBall& b1, const RootedBall& b2,
                            std::uint64_t node_budget) {
  if (b1.radius != b2.radius)
    throw std::invalid_argument("rooted_isomorphic: radius mismatch");
  if (b1.size() != b2.size()) return IsoResult::kNotIsomorphic;

  IsoSearch s{b1, b2, refine_colors(b1), refine_colors(b2), {}, {}, 0, node_budget, false};
  if (!multiset_equal(s.c1, s.c2)) return IsoResult::kNotIsomorphic;

  s.map12.assign(b1.size(), -1);
  s.map21.assign(b2.size(), -1);
  // roots must correspond (both are vertex 0)
  if (!s.compatible(0, 0)) return IsoResult::kNotIsomorphic;
  s.map12[0] = 0;
  s.map21[0] = 0;
  bool ok = s.extend(1);
  if (s.exceeded) return IsoResult::kBudgetExceeded;
  return ok ? IsoResult::kIsomorphic : IsoResult::kNotIsomorphic;
}

BsDistance bs_distance(const MarkedAbelianGroup& g, const MarkedAbelianGroup& h,
                       std::int64_t k_max, std::uint64_t node_budget) {
  BsDistance out;
  CayleyView vg(g), vh(h);
  std::int64_t n = -1;
  for (std::int64_t k = 0; k <= k_max; ++k) {
    RootedBall bg = word_ball(vg, k);
    RootedBall bh = word_ball(vh, k);
    IsoResult r = rooted_isomorphic(bg, bh, node_budget);
    if (r == IsoResult::kBudgetExceeded) {
      out.budget_hit = true;
      break;
    }
    if (r == IsoResult::kNotIsomorphic) break;
    n = k;
  }
  out.agree_radius = n;
  if (n >= k_max) {
    out.value = 0.0;
    out.exhausted_k_max = true;
  } else {
    out.value = std::ldexp(1.0, static_cast<int>(-std::max<std::int64_t>(n, 0)));
  }
  return out;
}

}  // namespace abperc
