#include "abperc/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "abperc/parallel.hpp"

namespace abperc {

PercConfig sample(const EdgeWindow& w, double p, const rng::SeedRecord& seed) {
  if (p < 0 || p > 1) throw std::invalid_argument("sample: p outside [0,1]");
  PercConfig c;
  c.window = &w;
  c.p = p;
  c.seed = seed;
  c.open.resize(w.edge_count());
  for (std::size_t e = 0; e < w.edge_count(); ++e)
    c.open[e] = edge_open(seed, e, p) ? 1 : 0;
  return c;
}

std::string config_hex(const PercConfig& c) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  std::size_t nbytes = (c.open.size() + 7) / 8;
  out.reserve(nbytes * 2);
  for (std::size_t b = 0; b < nbytes; ++b) {
    unsigned byte = 0;
    for (std::size_t k = 0; k < 8; ++k) {
      std::size_t e = b * 8 + k;
      if (e < c.open.size() && c.open[e]) byte |= 1u << k;
    }
    out.push_back(digits[byte >> 4]);
    out.push_back(digits[byte & 0xf]);
  }
  return out;
}

namespace {

// Union-find over open edges with both endpoints in C. Returns the UF and
// the C mask.
void build_restricted(const PercConfig& c, const std::vector<std::int32_t>& cset,
                      UnionFind& uf, std::vector<char>& mask) {
  const EdgeWindow& w = *c.window;
  mask.assign(w.vertex_count(), 0);
  for (std::int32_t v : cset) mask[static_cast<std::size_t>(v)] = 1;
  uf.reset(w.vertex_count());
  for (std::size_t e = 0; e < w.edge_count(); ++e) {
    if (!c.open[e]) continue;
    auto [u, v] = w.edges[e];
    if (mask[static_cast<std::size_t>(u)] && mask[static_cast<std::size_t>(v)])
      uf.unite(u, v);
  }
}

}  // namespace

bool connected_in(const PercConfig& c, const std::vector<std::int32_t>& a,
                  const std::vector<std::int32_t>& b,
                  const std::vector<std::int32_t>& cset) {
  UnionFind uf;
  std::vector<char> mask;
  build_restricted(c, cset, uf, mask);

  std::vector<char> a_root(c.window->vertex_count(), 0);
  bool any_a = false;
  for (std::int32_t v : a) {
    if (!mask[static_cast<std::size_t>(v)]) continue;
    a_root[static_cast<std::size_t>(uf.find(v))] = 1;
    any_a = true;
  }
  if (!any_a) return false;
  for (std::int32_t v : b) {
    if (!mask[static_cast<std::size_t>(v)]) continue;
    if (a_root[static_cast<std::size_t>(uf.find(v))]) return true;
  }
  return false;
}

bool unique_crossing(const PercConfig& c, const std::vector<std::int32_t>& a,
                     const std::vector<std::int32_t>& b,
                     const std::vector<std::int32_t>& cset) {
  UnionFind uf;
  std::vector<char> mask;
  build_restricted(c, cset, uf, mask);

  std::vector<char> in_a(c.window->vertex_count(), 0), in_b(c.window->vertex_count(), 0);
  for (std::int32_t v : a)
    if (mask[static_cast<std::size_t>(v)]) in_a[static_cast<std::size_t>(uf.find(v))] = 1;
  for (std::int32_t v : b)
    if (mask[static_cast<std::size_t>(v)]) in_b[static_cast<std::size_t>(uf.find(v))] = 1;
  std::int64_t crossing = 0;
  for (std::size_t r = 0; r < in_a.size(); ++r)
    if (in_a[r] && in_b[r]) ++crossing;
  return crossing == 1;
}

bool reaches_boundary(const PercConfig& c, const std::vector<std::int32_t>& a) {
  std::vector<std::int32_t> all(c.window->vertex_count());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::int32_t>(i);
  return connected_in(c, a, c.window->boundary_ids, all);
}

bool reach_boundary_lazy(const EdgeWindow& w, double p, const rng::SeedRecord& seed,
                         const std::vector<std::int32_t>& starts) {
  std::vector<char> visited(w.vertex_count(), 0);
  std::vector<std::int32_t> stack;
  for (std::int32_t s : starts) {
    if (visited[static_cast<std::size_t>(s)]) continue;
    visited[static_cast<std::size_t>(s)] = 1;
    if (w.on_boundary[static_cast<std::size_t>(s)]) return true;
    stack.push_back(s);
  }
  while (!stack.empty()) {
    std::int32_t u = stack.back();
    stack.pop_back();
    for (std::int32_t k = w.adj_off[static_cast<std::size_t>(u)];
         k < w.adj_off[static_cast<std::size_t>(u) + 1]; ++k) {
      std::int32_t v = w.adj_nbr[static_cast<std::size_t>(k)];
      if (visited[static_cast<std::size_t>(v)]) continue;
      std::int32_t e = w.adj_edge[static_cast<std::size_t>(k)];
      if (!edge_open(seed, static_cast<std::uint64_t>(e), p)) continue;
      visited[static_cast<std::size_t>(v)] = 1;
      if (w.on_boundary[static_cast<std::size_t>(v)]) return true;
      stack.push_back(v);
    }
  }
  return false;
}

Estimate wilson_bounds(std::uint64_t successes, std::uint64_t trials, double z) {
  Estimate e;
  e.successes = successes;
  e.trials = trials;
  if (trials == 0) return e;
  double n = static_cast<double>(trials);
  double phat = static_cast<double>(successes) / n;
  e.phat = phat;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (phat + z2 / (2 * n)) / denom;
  double half = z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denom;
  e.lo = std::max(0.0, center - half);
  e.hi = std::min(1.0, center + half);
  return e;
}

Estimate estimate(const EdgeWindow& w, double p, std::uint64_t trials,
                  const rng::SeedRecord& seed,
                  const std::function<bool(const PercConfig&)>& event, int threads) {
  std::vector<std::uint8_t> hits(trials, 0);
  parallel_for(static_cast<std::int64_t>(trials), threads, [&](std::int64_t t) {
    PercConfig c = sample(w, p, seed.with_trial(static_cast<std::uint64_t>(t)));
    hits[static_cast<std::size_t>(t)] = event(c) ? 1 : 0;
  });
  std::uint64_t s = 0;
  for (std::uint8_t h : hits) s += h;
  return wilson_bounds(s, trials);
}

Estimate estimate_lazy(std::uint64_t trials, const rng::SeedRecord& seed,
                       const std::function<bool(const rng::SeedRecord&)>& event,
                       int threads) {
  std::vector<std::uint8_t> hits(trials, 0);
  parallel_for(static_cast<std::int64_t>(trials), threads, [&](std::int64_t t) {
    hits[static_cast<std::size_t>(t)] =
        event(seed.with_trial(static_cast<std::uint64_t>(t))) ? 1 : 0;
  });
  std::uint64_t s = 0;
  for (std::uint8_t h : hits) s += h;
  return wilson_bounds(s, trials);
}

std::vector<GroupElement> geometric_ball(const MarkedAbelianGroup& g, double radius) {
  std::vector<GroupElement> out;
  auto offsets = integer_ball_offsets(g.rank(), radius);
  std::int64_t tor_count = 1;
  for (std::int64_t t : g.torsion()) tor_count *= t;
  for (const auto& f : offsets) {
    for (std::int64_t t = 0; t < tor_count; ++t) {
      GroupElement x;
      x.free = f;
      x.tor = IVec::Zero(static_cast<Eigen::Index>(g.torsion().size()));
      std::int64_t rem = t;
      for (std::size_t i = 0; i < g.torsion().size(); ++i) {
        x.tor[static_cast<Eigen::Index>(i)] = rem % g.torsion()[i];
        rem /= g.torsion()[i];
      }
      out.push_back(std::move(x));
    }
  }
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

namespace {

void saw_dfs(const CayleyView& view, std::vector<GroupElement>& path, std::int64_t m,
             std::size_t cap, SAWSet& out) {
  if (out.truncated) return;
  if (static_cast<std::int64_t>(path.size()) == m + 1) {
    if (out.paths.size() >= cap) {
      out.truncated = true;
      return;
    }
    out.paths.push_back(path);
    return;
  }
  for (const auto& s : view.steps()) {
    GroupElement y = view.group().add(path.back(), s);
    if (std::find(path.begin(), path.end(), y) != path.end()) continue;
    path.push_back(std::move(y));
    saw_dfs(view, path, m, cap, out);
    path.pop_back();
    if (out.truncated) return;
  }
}

}  // namespace

SAWSet enumerate_saw_from(const CayleyView& view, const std::vector<GroupElement>& starts,
                          std::int64_t m, std::size_t cap) {
  if (m < 1) throw std::invalid_argument("enumerate_saw: need m >= 1");
  SAWSet out;
  out.length = m;
  for (const auto& s : starts) {
    std::vector<GroupElement> path{s};
    saw_dfs(view, path, m, cap, out);
    if (out.truncated) break;
  }
  return out;
}

SAWSet enumerate_saw(const CayleyView& view, std::int64_t m, double start_radius_units,
                     std::size_t cap) {
  double radius = start_radius_units * r_s(view.group());
  return enumerate_saw_from(view, geometric_ball(view.group(), radius), m, cap);
}

}  // namespace abperc
