#include "abperc/renorm.hpp"

#include <algorithm>
#include <map>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace abperc {

PZero p_zero(double p, double delta, double kappa, double eta) {
  if (!(p > 0 && p < 1)) throw std::invalid_argument("p_zero: need 0 < p < 1");
  double rate = delta / kappa;
  if (!(rate > 0 && rate < 1)) throw std::invalid_argument("p_zero: need 0 < delta/kappa < 1");
  if (eta < 0) throw std::invalid_argument("p_zero: eta >= 0");

  PZero out;
  if (eta == 0) {
    out.value = 1.0;
    out.t_star = -1;
    out.infinite_t = true;
    return out;
  }
  // f(t) = 1 - (1-rate)^t - eta*(1-p)^{-t} is concave in t; scan to the peak
  double best = -std::numeric_limits<double>::infinity();
  std::int64_t best_t = 1;
  double gain = 1.0 - rate;       // (1-rate)^t
  double penalty = 1.0 / (1.0 - p);  // (1-p)^{-t}
  double gpow = gain, ppow = penalty;
  for (std::int64_t t = 1; t <= 4000000; ++t) {
    double f = 1.0 - gpow - eta * ppow;
    if (f > best) {
      best = f;
      best_t = t;
    } else if (f < best - 1.0) {
      break;  // far past the peak
    }
    gpow *= gain;
    ppow *= penalty;
    if (eta * ppow > 2.0 && t > best_t) break;
  }
  out.value = best;
  out.t_star = best_t;
  return out;
}

DominationReport omega_total_domination_check(double p, double delta, double kappa) {
  DominationReport r;
  r.value = 1.0 - (1.0 - p) * std::pow(1.0 - delta / kappa, kappa);
  r.target = p + delta;
  r.margin = r.value - r.target;
  return r;
}

RenormArena build_arena(const RenormLayout& layout, std::int64_t m, std::size_t saw_cap) {
  CayleyView qview(layout.quot);

  // planar bounding box over all corridors in the z-window
  double zr = static_cast<double>(layout.z_radius);
  Vec2 u = layout.quad.u();
  double cx = zr * (std::abs(u.x()) + std::abs(layout.quad.v.x()));
  double cy = zr * (std::abs(u.y()) + std::abs(layout.quad.v.y()));
  double px = 4.0 * (std::abs(layout.quad.a.x()) + std::abs(layout.quad.b.x()));
  double py = 4.0 * (std::abs(layout.quad.a.y()) + std::abs(layout.quad.b.y()));
  Vec2 lo(-cx - px, -cy - py), hi(cx + px, cy + py);

  EdgeWindow win = planar_window(qview, layout, lo, hi, layout.rs + 1.0,
                                 "renorm/" + layout.quot.key());

  RenormArena arena(layout, std::move(win));
  arena.z_side = 2 * layout.z_radius + 1;

  std::vector<Vec2> pis;
  pis.reserve(arena.win.vertex_count());
  for (const auto& x : arena.win.vertices) pis.push_back(layout.planar(x));

  std::int64_t cells = arena.z_side * arena.z_side;
  arena.box_ids.resize(static_cast<std::size_t>(cells));
  arena.corridor_edges.resize(static_cast<std::size_t>(cells));
  arena.edge_corridor_count.assign(arena.win.edge_count(), 0);

  for (std::int64_t zy = -layout.z_radius; zy <= layout.z_radius; ++zy)
    for (std::int64_t zx = -layout.z_radius; zx <= layout.z_radius; ++zx) {
      Eigen::Vector2i z(static_cast<int>(zx), static_cast<int>(zy));
      std::size_t zi = static_cast<std::size_t>(arena.z_index(z));
      GraphSet box(layout.box_region(z), layout.rs);
      GraphSet cor(layout.corridor_region(z), layout.rs);
      std::vector<char> in_cor(arena.win.vertex_count(), 0);
      for (std::size_t i = 0; i < arena.win.vertex_count(); ++i) {
        if (box.contains(pis[i])) arena.box_ids[zi].push_back(static_cast<std::int32_t>(i));
        if (cor.contains(pis[i])) in_cor[i] = 1;
      }
      for (std::size_t e = 0; e < arena.win.edge_count(); ++e) {
        auto [a, b] = arena.win.edges[e];
        if (in_cor[static_cast<std::size_t>(a)] && in_cor[static_cast<std::size_t>(b)]) {
          arena.corridor_edges[zi].push_back(static_cast<std::int32_t>(e));
          ++arena.edge_corridor_count[e];
        }
      }
    }

  // seed paths: S(m) enumerated upstairs and pushed to the quotient
  CayleyView bview(layout.base);
  SAWSet saws = enumerate_saw(bview, m, 1.0, saw_cap);
  std::unordered_set<std::size_t> dedup;
  for (const auto& path : saws.paths) {
    std::vector<GroupElement> proj;
    proj.reserve(path.size());
    std::size_t h = 1469598103934665603ull;
    GroupElementHash hasher;
    for (const auto& x : path) {
      GroupElement q = layout.quot.project(layout.base.lift(x));
      h = rng::mix64(h ^ hasher(q));
      proj.push_back(std::move(q));
    }
    if (dedup.insert(h).second) arena.seed_paths.push_back(std::move(proj));
  }
  return arena;
}

namespace {

struct Cluster {
  UnionFind uf;
  std::vector<std::uint8_t> omega;
  const EdgeWindow& win;

  explicit Cluster(const EdgeWindow& w) : uf(w.vertex_count()), omega(w.edge_count(), 0), win(w) {}

  void open_edge(std::size_t e) {
    if (omega[e]) return;
    omega[e] = 1;
    auto [a, b] = win.edges[e];
    uf.unite(a, b);
  }
};

}  // namespace

ExplorationState explore(const RenormArena& arena, double p, double delta,
                         std::int64_t kappa_value, const rng::SeedRecord& seed,
                         TieBreak tie) {
  if (kappa_value < 1) throw std::invalid_argument("explore: kappa must be >= 1");
  double rate = delta / static_cast<double>(kappa_value);
  if (rate >= 1.0) throw std::invalid_argument("explore: delta/kappa must be < 1");
  const EdgeWindow& win = arena.win;
  if (win.origin < 0) throw std::logic_error("explore: window does not contain the origin");

  ExplorationState st;
  st.seed = seed;

  Cluster cl(win);
  rng::SeedRecord s0 = seed.substream("omega0");
  for (std::size_t e = 0; e < win.edge_count(); ++e)
    if (edge_open(s0, e, p)) cl.open_edge(e);
  st.omega0 = cl.omega;

  std::int64_t side = arena.z_side;
  std::int64_t cells = side * side;
  std::vector<std::uint8_t> state(static_cast<std::size_t>(cells), 0);  // 0 unexplored, 1 in U, 2 in V

  auto in_window = [&](const Eigen::Vector2i& z) {
    return std::abs(z.x()) <= arena.layout.z_radius && std::abs(z.y()) <= arena.layout.z_radius;
  };

  auto cluster_hits_box = [&](std::size_t zi) {
    std::int32_t root = cl.uf.find(win.origin);
    for (std::int32_t v : arena.box_ids[zi])
      if (cl.uf.find(v) == root) return true;
    return false;
  };

  // step 0: does the origin cluster contain a full seed path
  bool seeded = false;
  {
    std::int32_t root = cl.uf.find(win.origin);
    for (const auto& path : arena.seed_paths) {
      bool all = true;
      for (const auto& x : path) {
        std::int32_t id = win.vertex_id(x);
        if (id < 0 || cl.uf.find(id) != root) {
          all = false;
          break;
        }
      }
      if (all) {
        seeded = true;
        break;
      }
    }
  }
  Eigen::Vector2i z0(0, 0);
  st.steps.push_back({0, z0, seeded ? 1 : 0, cl.uf.component_size(win.origin), 0});
  state[static_cast<std::size_t>(arena.z_index(z0))] = seeded ? 1 : 2;
  (seeded ? st.u_set : st.v_set).push_back(z0);
  if (!seeded) {
    st.omega = cl.omega;
    return st;
  }

  const Eigen::Vector2i dirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  std::int64_t t = 1;
  for (;;) {
    // collect unexplored neighbors of U
    std::vector<Eigen::Vector2i> frontier;
    bool out_of_window = false;
    for (const auto& zu : st.u_set)
      for (const auto& d : dirs) {
        Eigen::Vector2i z = zu + d;
        if (!in_window(z)) {
          out_of_window = true;
          continue;
        }
        std::size_t zi = static_cast<std::size_t>(arena.z_index(z));
        if (state[zi] != 0) continue;
        if (std::find(frontier.begin(), frontier.end(), z) == frontier.end())
          frontier.push_back(z);
      }
    if (frontier.empty()) {
      st.window_exhausted = out_of_window;
      break;
    }

    auto lex = [](const Eigen::Vector2i& x, const Eigen::Vector2i& y) {
      if (x.y() != y.y()) return x.y() < y.y();
      return x.x() < y.x();
    };
    Eigen::Vector2i zt = frontier[0];
    for (const auto& z : frontier) {
      if (tie == TieBreak::kLexicographic) {
        if (lex(z, zt)) zt = z;
      } else {
        std::int64_t nz = static_cast<std::int64_t>(z.x()) * z.x() +
                          static_cast<std::int64_t>(z.y()) * z.y();
        std::int64_t nt = static_cast<std::int64_t>(zt.x()) * zt.x() +
                          static_cast<std::int64_t>(zt.y()) * zt.y();
        if (nz < nt || (nz == nt && lex(z, zt))) zt = z;
      }
    }

    std::size_t zi = static_cast<std::size_t>(arena.z_index(zt));
    rng::SeedRecord sz = seed.substream("xi")
                             .substream(static_cast<std::uint64_t>(zt.x() + (1 << 20)))
                             .substream(static_cast<std::uint64_t>(zt.y() + (1 << 20)));
    for (std::int32_t e : arena.corridor_edges[zi])
      if (edge_open(sz, static_cast<std::uint64_t>(e), rate))
        cl.open_edge(static_cast<std::size_t>(e));
    st.sprinkles_consumed.push_back(zt);

    bool hit = cluster_hits_box(zi);
    st.steps.push_back({t, zt, hit ? 1 : 0, cl.uf.component_size(win.origin),
                        static_cast<std::int64_t>(st.u_set.size())});
    if (hit) {
      state[zi] = 1;
      st.u_set.push_back(zt);
    } else {
      state[zi] = 2;
      st.v_set.push_back(zt);
    }
    ++t;
  }

  st.omega = cl.omega;
  return st;
}

bool verify_exploration(const RenormArena& arena, const ExplorationState& st) {
  const EdgeWindow& win = arena.win;
  UnionFind uf(win.vertex_count());
  for (std::size_t e = 0; e < win.edge_count(); ++e)
    if (st.omega[e]) {
      auto [a, b] = win.edges[e];
      uf.unite(a, b);
    }
  std::int32_t root = uf.find(win.origin);
  for (const auto& step : st.steps) {
    if (step.x_value != 1 || step.t == 0) continue;
    std::size_t zi = static_cast<std::size_t>(arena.z_index(step.z));
    bool hit = false;
    for (std::int32_t v : arena.box_ids[zi])
      if (uf.find(v) == root) {
        hit = true;
        break;
      }
    if (!hit) return false;
  }
  return true;
}

ConditionalStats conditional_success_stats(const std::vector<ExplorationState>& runs) {
  if (runs.size() < 30)
    throw std::invalid_argument("conditional_success_stats: need at least 30 runs");

  std::map<std::int64_t, std::pair<std::uint64_t, std::uint64_t>> by_step, by_u;
  std::uint64_t succ = 0, tot = 0;
  for (const auto& run : runs) {
    for (const auto& step : run.steps) {
      if (step.t == 0) continue;  // origin site has its own seeding rule
      auto& s1 = by_step[step.t];
      auto& s2 = by_u[step.u_size_before];
      ++s1.second;
      ++s2.second;
      ++tot;
      if (step.x_value == 1) {
        ++s1.first;
        ++s2.first;
        ++succ;
      }
    }
  }
  ConditionalStats out;
  for (const auto& [k, sc] : by_step)
    out.by_step.push_back({k, wilson_bounds(sc.first, sc.second)});
  for (const auto& [k, sc] : by_u)
    out.by_u_size.push_back({k, wilson_bounds(sc.first, sc.second)});
  out.overall = wilson_bounds(succ, tot);
  return out;
}

}  // namespace abperc
