#include "abperc/criterion.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "abperc/parallel.hpp"

namespace abperc {

namespace {

std::vector<std::int32_t> ball_ids(const EdgeWindow& w, double radius) {
  std::vector<std::int32_t> out;
  double r2 = radius * radius + 1e-9;
  for (std::size_t i = 0; i < w.vertices.size(); ++i) {
    double n2 = w.vertices[i].free.cast<double>().squaredNorm();
    if (n2 <= r2) out.push_back(static_cast<std::int32_t>(i));
  }
  return out;
}

// Batched "many sources, few targets" evaluator: one union-find pass per
// trial over the C-restricted open edges, then every (source set, target
// bit) pair is read off the cluster roots. Failure counts are atomic
// integers, so the tally is thread-count independent.
struct BatchConnect {
  const EdgeWindow& w;
  std::vector<char> cmask;
  std::vector<std::vector<std::int32_t>> targets;   // per target set: ids
  std::vector<std::vector<std::int32_t>> sources;   // per source set: ids

  std::vector<std::uint64_t> run(double p, std::uint64_t trials,
                                 const rng::SeedRecord& seed, int threads) const {
    std::size_t pairs = sources.size() * targets.size();
    std::vector<std::atomic<std::uint64_t>> failures(pairs);
    for (auto& f : failures) f.store(0);
    parallel_for(static_cast<std::int64_t>(trials), threads, [&](std::int64_t t) {
      rng::SeedRecord ts = seed.with_trial(static_cast<std::uint64_t>(t));
      UnionFind uf(w.vertex_count());
      for (std::size_t e = 0; e < w.edge_count(); ++e) {
        auto [a, b] = w.edges[e];
        if (!cmask[static_cast<std::size_t>(a)] || !cmask[static_cast<std::size_t>(b)])
          continue;
        if (edge_open(ts, e, p)) uf.unite(a, b);
      }
      std::vector<std::uint8_t> root_bits(w.vertex_count(), 0);
      for (std::size_t z = 0; z < targets.size(); ++z)
        for (std::int32_t v : targets[z])
          root_bits[static_cast<std::size_t>(uf.find(v))] |=
              static_cast<std::uint8_t>(1u << z);
      for (std::size_t s = 0; s < sources.size(); ++s) {
        std::uint8_t acc = 0;
        for (std::int32_t v : sources[s]) {
          if (!cmask[static_cast<std::size_t>(v)]) continue;
          acc |= root_bits[static_cast<std::size_t>(uf.find(v))];
        }
        for (std::size_t z = 0; z < targets.size(); ++z)
          if (!(acc & (1u << z)))
            failures[s * targets.size() + z].fetch_add(1, std::memory_order_relaxed);
      }
    });
    std::vector<std::uint64_t> out(pairs);
    for (std::size_t i = 0; i < pairs; ++i) out[i] = failures[i].load();
    return out;
  }
};

std::vector<char> mask_of(const EdgeWindow& w, const std::vector<std::int32_t>& ids) {
  std::vector<char> m(w.vertex_count(), 0);
  for (std::int32_t v : ids) m[static_cast<std::size_t>(v)] = 1;
  return m;
}

}  // namespace

EdgeWindow e_box_window(const CayleyView& view, const Basis& basis, double half_x,
                        double half_y, double half_perp, std::string_view tag) {
  Eigen::Index r = view.group().rank();
  IVec box(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    double b = half_x * std::abs(basis.e(i, 0)) + half_y * std::abs(basis.e(i, 1));
    for (Eigen::Index j = 2; j < r; ++j) b += half_perp * std::abs(basis.e(i, j));
    box[i] = static_cast<std::int64_t>(std::ceil(b)) + 1;
  }
  auto keep = [&, half_x, half_y, half_perp](const IVec& c) {
    Eigen::VectorXd x = c.cast<double>();
    if (std::abs(basis.e.col(0).dot(x)) > half_x + 1e-9) return false;
    if (std::abs(basis.e.col(1).dot(x)) > half_y + 1e-9) return false;
    for (Eigen::Index j = 2; j < basis.dim(); ++j)
      if (std::abs(basis.e.col(j).dot(x)) > half_perp + 1e-9) return false;
    return true;
  };
  return predicate_window(view, box, keep, tag);
}

std::string FCParams::serialize() const {
  std::ostringstream s;
  s.precision(17);
  s << "fcparams v1\n";
  s << "group " << group_key << "\n";
  s << "p " << p << "\n";
  s << "N " << n_window << "\n";
  s << "eta " << eta << "\n";
  s << "m " << m << "\n";
  s << "basis " << basis.dim();
  for (Eigen::Index i = 0; i < basis.dim(); ++i)
    for (Eigen::Index j = 0; j < basis.dim(); ++j) s << ' ' << basis.e(i, j);
  s << "\n";
  s << "quad " << quad.a.x() << ' ' << quad.a.y() << ' ' << quad.b.x() << ' '
    << quad.b.y() << ' ' << quad.v.x() << ' ' << quad.v.y() << "\n";
  return s.str();
}

FCParams FCParams::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line, word;
  FCParams fc;
  if (!std::getline(in, line) || line != "fcparams v1")
    throw std::invalid_argument("fcparams: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    ls >> word;
    if (word == "group")
      ls >> fc.group_key;
    else if (word == "p")
      ls >> fc.p;
    else if (word == "N")
      ls >> fc.n_window;
    else if (word == "eta")
      ls >> fc.eta;
    else if (word == "m")
      ls >> fc.m;
    else if (word == "basis") {
      Eigen::Index r;
      ls >> r;
      fc.basis.e.resize(r, r);
      for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < r; ++j) ls >> fc.basis.e(i, j);
    } else if (word == "quad") {
      ls >> fc.quad.a.x() >> fc.quad.a.y() >> fc.quad.b.x() >> fc.quad.b.y() >>
          fc.quad.v.x() >> fc.quad.v.y();
    } else {
      throw std::invalid_argument("fcparams: unknown field " + word);
    }
    if (ls.fail()) throw std::invalid_argument("fcparams: malformed line: " + line);
  }
  return fc;
}

FcReport fc_check(const MarkedAbelianGroup& g, const FCParams& fc, std::uint64_t trials,
                  const rng::SeedRecord& seed, int threads, std::size_t saw_cap) {
  FcReport rep;
  rep.threshold = 1.0 - fc.eta;
  rep.trials = trials;
  if (g.rank() < 2) throw std::invalid_argument("fc_check: group rank must be >= 2");
  if (fc.basis.dim() != g.rank())
    throw std::invalid_argument("fc_check: basis dimension mismatch");
  if (fc.m < 1 || fc.m >= fc.n_window)
    throw std::invalid_argument("fc_check: need 1 <= m < N");

  double rs = r_s(g);
  auto diag = is_good_quadruple(fc.quad.a, fc.quad.b, fc.quad.v, rs);
  if (!diag.good) {
    rep.note = "quadruple is not good";
    return rep;
  }

  CayleyView view(g);
  EdgeWindow win =
      ball_window(view, static_cast<double>(fc.n_window) * rs, "fc/" + g.key());
  rep.window_vertices = win.vertex_count();
  rep.window_edges = win.edge_count();

  auto pis = planar_images(win, fc.basis);
  auto offs = planar_ball_offsets(fc.basis, rs);

  PlanarSet rset = PlanarSet::parallelogram(3.0 * fc.quad.a, 3.0 * fc.quad.b);
  BatchConnect batch{win, {}, {}, {}};
  batch.cmask.assign(win.vertex_count(), 0);
  for (std::size_t i = 0; i < win.vertex_count(); ++i)
    if (inflated_contains(rset, rs, pis[i], offs)) batch.cmask[i] = 1;

  auto zsegs = zone_segments(fc.quad);
  for (const auto& zs : zsegs) {
    PlanarSet region = PlanarSet::segment(zs.a, zs.b);
    std::vector<std::int32_t> ids;
    for (std::size_t i = 0; i < win.vertex_count(); ++i)
      if (batch.cmask[i] && inflated_contains(region, rs, pis[i], offs))
        ids.push_back(static_cast<std::int32_t>(i));
    if (ids.empty()) {
      rep.note = "a zone is empty inside the window";
      return rep;
    }
    batch.targets.push_back(std::move(ids));
  }

  SAWSet saws = enumerate_saw(view, fc.m, 1.0, saw_cap);
  rep.saw_count = saws.paths.size();
  rep.saw_truncated = saws.truncated;
  if (saws.paths.empty()) {
    rep.note = "no self-avoiding paths enumerated";
    return rep;
  }
  for (const auto& path : saws.paths) {
    std::vector<std::int32_t> ids;
    for (const auto& v : path) {
      std::int32_t id = win.vertex_id(v);
      if (id >= 0) ids.push_back(id);
    }
    batch.sources.push_back(std::move(ids));
  }

  auto failures = batch.run(fc.p, trials, seed, threads);

  rep.pass = true;
  double worst_lo = 2.0;
  for (std::size_t s = 0; s < batch.sources.size(); ++s)
    for (std::size_t z = 0; z < batch.targets.size(); ++z) {
      std::uint64_t f = failures[s * batch.targets.size() + z];
      Estimate e = wilson_bounds(trials - f, trials);
      if (e.lo < worst_lo) {
        worst_lo = e.lo;
        rep.worst = {static_cast<std::int64_t>(s), static_cast<int>(z), e};
      }
      if (!(e.lo > rep.threshold)) rep.pass = false;
    }
  return rep;
}

namespace {

struct PairedComparison {
  Estimate ud, lr;
  std::uint64_t discordant_ud = 0;  // trials where UD connects and LR does not
  std::uint64_t discordant_lr = 0;

  // sign test on the discordant trials; near-1 probabilities tie on the
  // concordant mass, only the discordant counts are informative
  int verdict() const {
    double n = static_cast<double>(discordant_ud + discordant_lr);
    if (n == 0) return 0;
    double diff = static_cast<double>(discordant_ud) - static_cast<double>(discordant_lr);
    if (diff > 2.576 * std::sqrt(n)) return +1;
    if (diff < -2.576 * std::sqrt(n)) return -1;
    return 0;
  }
};

}  // namespace

EllEqEstimate ell_eq_estimate(const MarkedAbelianGroup& g, const Basis& basis,
                              double chimney_n, double h, double n_b, double p,
                              std::uint64_t trials, const rng::SeedRecord& seed,
                              int threads, double ell_hi, std::int64_t ball_k) {
  double rs = r_s(g);
  double ell_lo = std::max(ell_b(chimney_n, h, n_b) - 1.0, 1.0);
  if (ell_hi <= ell_lo) ell_hi = 8.0 * std::max(n_b, 2.0) + std::abs(h);

  CayleyView view(g);
  EdgeWindow win = e_box_window(view, basis, chimney_n + 3 * rs,
                                std::abs(h) + ell_hi + 3 * rs,
                                std::max(4.0 * rs, 8.0), "elleq/" + g.key());
  auto pis = planar_images(win, basis);
  auto a_ids = ball_ids(win, static_cast<double>(ball_k) * rs);

  auto eval = [&](double ell, const rng::SeedRecord& sd) -> PairedComparison {
    ChimneySets cs = chimney_sets(chimney_n, h, ell);
    GraphSet gc(cs.c, rs), gud(cs.ud, rs), glr(cs.lr, rs);
    std::vector<char> cmask(win.vertex_count(), 0);
    std::vector<std::int32_t> ud_ids, lr_ids;
    for (std::size_t i = 0; i < win.vertex_count(); ++i) {
      if (!gc.contains(pis[i])) continue;
      cmask[i] = 1;
      if (gud.contains(pis[i])) ud_ids.push_back(static_cast<std::int32_t>(i));
      if (glr.contains(pis[i])) lr_ids.push_back(static_cast<std::int32_t>(i));
    }
    std::atomic<std::uint64_t> ud_fail{0}, lr_fail{0}, d_ud{0}, d_lr{0};
    parallel_for(static_cast<std::int64_t>(trials), threads, [&](std::int64_t t) {
      rng::SeedRecord ts = sd.with_trial(static_cast<std::uint64_t>(t));
      UnionFind uf(win.vertex_count());
      for (std::size_t e = 0; e < win.edge_count(); ++e) {
        auto [a, b] = win.edges[e];
        if (!cmask[static_cast<std::size_t>(a)] || !cmask[static_cast<std::size_t>(b)])
          continue;
        if (edge_open(ts, e, p)) uf.unite(a, b);
      }
      std::vector<std::uint8_t> a_root(win.vertex_count(), 0);
      for (std::int32_t v : a_ids)
        if (cmask[static_cast<std::size_t>(v)])
          a_root[static_cast<std::size_t>(uf.find(v))] = 1;
      auto touches = [&](const std::vector<std::int32_t>& ids) {
        for (std::int32_t v : ids)
          if (a_root[static_cast<std::size_t>(uf.find(v))]) return true;
        return false;
      };
      bool ud = touches(ud_ids), lr = touches(lr_ids);
      if (!ud) ud_fail.fetch_add(1, std::memory_order_relaxed);
      if (!lr) lr_fail.fetch_add(1, std::memory_order_relaxed);
      if (ud && !lr) d_ud.fetch_add(1, std::memory_order_relaxed);
      if (lr && !ud) d_lr.fetch_add(1, std::memory_order_relaxed);
    });
    PairedComparison out;
    out.ud = wilson_bounds(trials - ud_fail.load(), trials);
    out.lr = wilson_bounds(trials - lr_fail.load(), trials);
    out.discordant_ud = d_ud.load();
    out.discordant_lr = d_lr.load();
    return out;
  };

  EllEqEstimate out;
  PairedComparison bottom = eval(ell_lo, seed.substream("bottom"));
  out.ud_bottom = bottom.ud;
  out.lr_bottom = bottom.lr;
  out.bottom_ud = bottom.verdict() == +1;
  out.bottom_tie = bottom.verdict() == 0;

  PairedComparison top = eval(ell_hi, seed.substream("top"));
  if (top.verdict() != -1) {
    ell_hi *= 1.5;
    top = eval(ell_hi, seed.substream("top2"));
  }
  out.ud_top = top.ud;
  out.lr_top = top.lr;
  out.top_lr = top.verdict() == -1;

  double lo = ell_lo, hi = ell_hi;
  if (!out.top_lr) {
    out.lo = lo;
    out.hi = hi;
    out.ell_hat = hi;
    out.flip_found = false;
    return out;
  }
  std::uint64_t iter = 0;
  while (hi - lo > 0.5) {
    double mid = 0.5 * (lo + hi);
    int v = eval(mid, seed.substream(1000 + iter)).verdict();
    ++iter;
    if (v == +1) {
      lo = mid;
    } else if (v == -1) {
      hi = mid;
    } else {
      break;  // tie: keep the wide bracket rather than guess
    }
  }
  out.lo = lo;
  out.hi = hi;
  out.ell_hat = 0.5 * (lo + hi);
  out.flip_found = (out.bottom_ud || out.bottom_tie) && out.top_lr;
  return out;
}

SplitScan split_segment(const EdgeWindow& w, const Basis& basis, const Vec2& alpha,
                        const Vec2& beta, const std::vector<std::int32_t>& a_ids,
                        const std::vector<std::int32_t>& c_ids, double rs, double p,
                        std::uint64_t trials, const rng::SeedRecord& seed, int threads) {
  auto pis = planar_images(w, basis);
  std::vector<char> cmask = mask_of(w, c_ids);
  const double kFar = 3.0;

  auto min_param = [&](const Vec2& from, const Vec2& to, const Vec2& pt) -> double {
    auto dist_at = [&](double t) {
      Vec2 end = from + t * (to - from);
      Vec2 ab = end - from;
      double len2 = ab.squaredNorm();
      double s = len2 > 0 ? std::clamp((pt - from).dot(ab) / len2, 0.0, 1.0) : 0.0;
      return (pt - (from + s * ab)).norm();
    };
    if (dist_at(0.0) <= rs + kGeomTol) return 0.0;
    if (dist_at(1.0) > rs + kGeomTol) return kFar;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 50; ++it) {
      double mid = 0.5 * (lo + hi);
      if (dist_at(mid) <= rs + kGeomTol)
        hi = mid;
      else
        lo = mid;
    }
    return hi;
  };

  std::vector<double> tmin(w.vertex_count(), kFar), smin(w.vertex_count(), kFar);
  for (std::int32_t v : c_ids) {
    tmin[static_cast<std::size_t>(v)] = min_param(alpha, beta, pis[static_cast<std::size_t>(v)]);
    smin[static_cast<std::size_t>(v)] = min_param(beta, alpha, pis[static_cast<std::size_t>(v)]);
  }

  SplitScan scan;
  {
    std::vector<double> cand;
    cand.push_back(0.0);
    cand.push_back(1.0);
    for (std::int32_t v : c_ids) {
      double t = tmin[static_cast<std::size_t>(v)];
      if (t < kFar) cand.push_back(t);
    }
    std::sort(cand.begin(), cand.end());
    for (double t : cand)
      if (scan.t.empty() || t - scan.t.back() > 1e-6) scan.t.push_back(t);
  }

  std::vector<double> tau(trials, kFar), sig(trials, kFar);
  parallel_for(static_cast<std::int64_t>(trials), threads, [&](std::int64_t tr) {
    rng::SeedRecord ts = seed.with_trial(static_cast<std::uint64_t>(tr));
    UnionFind uf(w.vertex_count());
    for (std::size_t e = 0; e < w.edge_count(); ++e) {
      auto [a, b] = w.edges[e];
      if (!cmask[static_cast<std::size_t>(a)] || !cmask[static_cast<std::size_t>(b)])
        continue;
      if (edge_open(ts, e, p)) uf.unite(a, b);
    }
    std::vector<std::uint8_t> a_root(w.vertex_count(), 0);
    bool any = false;
    for (std::int32_t v : a_ids) {
      if (!cmask[static_cast<std::size_t>(v)]) continue;
      a_root[static_cast<std::size_t>(uf.find(v))] = 1;
      any = true;
    }
    if (!any) return;
    double best_t = kFar, best_s = kFar;
    for (std::int32_t v : c_ids) {
      std::size_t sv = static_cast<std::size_t>(v);
      if (tmin[sv] >= kFar && smin[sv] >= kFar) continue;
      if (!a_root[static_cast<std::size_t>(uf.find(v))]) continue;
      best_t = std::min(best_t, tmin[sv]);
      best_s = std::min(best_s, smin[sv]);
    }
    tau[static_cast<std::size_t>(tr)] = best_t;
    sig[static_cast<std::size_t>(tr)] = best_s;
  });

  std::vector<double> tau_sorted = tau, sig_sorted = sig;
  std::sort(tau_sorted.begin(), tau_sorted.end());
  std::sort(sig_sorted.begin(), sig_sorted.end());
  auto count_le = [](const std::vector<double>& v, double x) {
    return static_cast<std::uint64_t>(
        std::upper_bound(v.begin(), v.end(), x + 1e-9) - v.begin());
  };

  for (double t : scan.t) {
    scan.left.push_back(wilson_bounds(count_le(tau_sorted, t), trials));
    scan.right.push_back(wilson_bounds(count_le(sig_sorted, 1.0 - t), trials));
  }

  // balance point: maximize the worse of the two half-segment connection
  // rates (the breakpoint scan of the constructive argument picks a point
  // with the same guarantee, but is ill-conditioned when both rates ride
  // near 1 at MC resolution)
  scan.pick = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < scan.t.size(); ++i) {
    double worse = std::min(scan.left[i].phat, scan.right[i].phat);
    bool better = worse > best + 1e-12;
    bool tie_nearer_mid =
        worse > best - 1e-12 &&
        std::abs(scan.t[i] - 0.5) <
            std::abs(scan.t[static_cast<std::size_t>(scan.pick)] - 0.5);
    if (better || tie_nearer_mid) {
      best = std::max(best, worse);
      scan.pick = static_cast<std::int64_t>(i);
    }
  }
  scan.point = alpha + scan.t[static_cast<std::size_t>(scan.pick)] * (beta - alpha);
  return scan;
}

FcSearchResult fc_search(const MarkedAbelianGroup& g, double p, double eta,
                         const FcSearchBudget& budget, const rng::SeedRecord& seed,
                         int threads) {
  using Clock = std::chrono::steady_clock;
  auto start = Clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start)
        .count();
  };

  FcSearchResult res;
  if (g.rank() < 2) {
    res.stage_reached = 0;
    res.diagnostic = "group rank < 2";
    return res;
  }
  double rs = r_s(g);
  CayleyView view(g);

  // (1) seed length m: every length-m self-avoiding path near the origin
  // reaches the K-window boundary with frequency > 1 - eta
  EdgeWindow wk = ball_window(view, static_cast<double>(budget.window_scale) * rs,
                              "fcsearch/K/" + g.key());
  std::vector<std::int32_t> all_ids(wk.vertex_count());
  for (std::size_t i = 0; i < all_ids.size(); ++i)
    all_ids[i] = static_cast<std::int32_t>(i);

  std::int64_t m_found = -1;
  for (std::int64_t m = 1; m <= budget.m_max; ++m) {
    SAWSet saws = enumerate_saw(view, m, 1.0, budget.saw_cap);
    BatchConnect batch{wk, mask_of(wk, all_ids), {wk.boundary_ids}, {}};
    for (const auto& path : saws.paths) {
      std::vector<std::int32_t> ids;
      for (const auto& v : path) {
        std::int32_t id = wk.vertex_id(v);
        if (id >= 0) ids.push_back(id);
      }
      batch.sources.push_back(std::move(ids));
    }
    auto fails =
        batch.run(p, budget.stage_trials, seed.substream("stage1").substream(m), threads);
    std::uint64_t worst = 0;
    for (std::uint64_t f : fails) worst = std::max(worst, f);
    double worst_phat =
        1.0 - static_cast<double>(worst) / static_cast<double>(budget.stage_trials);
    if (worst_phat > 1.0 - eta) {
      m_found = m;
      break;
    }
    if (elapsed_ms() > budget.wall_ms) {
      res.stage_reached = 1;
      res.diagnostic = "budget exhausted during stage 1";
      return res;
    }
  }
  if (m_found < 0) {
    res.stage_reached = 1;
    res.diagnostic = "no m <= m_max with all seeds reaching the boundary";
    return res;
  }
  res.m = m_found;

  // (2) ball scale k with a stronger boundary-reach level (eta^2 staging)
  double eta2 = std::max(eta * eta, 2.0 / static_cast<double>(budget.stage_trials));
  std::int64_t k_found = -1;
  for (std::int64_t k = std::max<std::int64_t>(m_found, 1); k <= budget.k_max; ++k) {
    BatchConnect batch{wk, mask_of(wk, all_ids), {wk.boundary_ids},
                       {ball_ids(wk, static_cast<double>(k) * rs)}};
    auto fails =
        batch.run(p, budget.stage_trials, seed.substream("stage2").substream(k), threads);
    double phat =
        1.0 - static_cast<double>(fails[0]) / static_cast<double>(budget.stage_trials);
    if (phat > 1.0 - eta2) {
      k_found = k;
      break;
    }
  }
  if (k_found < 0) {
    res.stage_reached = 2;
    res.diagnostic = "no k <= k_max passing the eta^2 staging level";
    return res;
  }
  res.k = k_found;

  // (3) uniqueness annulus: unique crossing cluster from B(k) to B(n)^c
  // inside B(n+1)
  std::int64_t n_found = -1;
  for (std::int64_t n = k_found + 1; n <= budget.n_max; ++n) {
    EdgeWindow wn = ball_window(view, static_cast<double>(n + 1) * rs,
                                "fcsearch/n/" + g.key() + "/" + std::to_string(n));
    auto a = ball_ids(wn, static_cast<double>(k_found) * rs);
    std::vector<std::int32_t> outer;
    double n_r2 = static_cast<double>(n) * rs;
    n_r2 = n_r2 * n_r2 + 1e-9;
    for (std::size_t i = 0; i < wn.vertex_count(); ++i)
      if (wn.vertices[i].free.cast<double>().squaredNorm() > n_r2)
        outer.push_back(static_cast<std::int32_t>(i));
    std::vector<std::int32_t> all(wn.vertex_count());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::int32_t>(i);
    Estimate e = estimate(
        wn, p, budget.stage_trials, seed.substream("stage3").substream(n),
        [&](const PercConfig& c) { return unique_crossing(c, a, outer, all); }, threads);
    if (e.phat > 1.0 - eta) {
      n_found = n;
      break;
    }
    if (elapsed_ms() > budget.wall_ms) {
      res.stage_reached = 3;
      res.diagnostic = "budget exhausted during stage 3";
      return res;
    }
  }
  if (n_found < 0) {
    res.stage_reached = 3;
    res.diagnostic = "no n <= n_max with a unique crossing annulus";
    return res;
  }
  res.n = n_found;

  // (4) crossover scale at h = 0
  Basis basis = Basis::standard(g.rank());
  double n_b = std::ceil(static_cast<double>(n_found + 2) * rs) + 2.0;
  double chimney_n = n_b + std::ceil(2.0 * rs) + 2.0;
  EllEqEstimate ee0;
  bool ok_bottom = false;
  for (int attempt = 0; attempt < 3; ++attempt) {
    ee0 = ell_eq_estimate(g, basis, chimney_n, 0.0, n_b, p, budget.stage_trials,
                          seed.substream("stage4").substream(attempt), threads,
                          budget.ell_hi_factor * n_b, k_found);
    if ((ee0.bottom_ud || ee0.bottom_tie) && ee0.top_lr) {
      ok_bottom = true;
      break;
    }
    chimney_n += std::max(2.0, 2.0 * rs);
  }
  if (!ok_bottom) {
    res.stage_reached = 4;
    res.diagnostic = "no crossover bracket at h = 0";
    return res;
  }
  // just inside the LR regime; a tie-wide bracket is capped so the final
  // window stays at desk scale (ties mean any height here works)
  double ell0 =
      std::min(ee0.hi, std::max(ee0.lo + 1.0, ell_b(chimney_n, 0.0, n_b) + 6.0)) + 0.25;
  res.ell0 = ell0;

  // (5a) split the right edge to get u = (chimney_n, h_u)
  Vec2 a0(chimney_n, -ell0), b0(chimney_n, ell0);
  {
    EdgeWindow wc = e_box_window(view, basis, chimney_n + 3 * rs, ell0 + 3 * rs,
                                 std::max(4.0 * rs, 8.0), "fcsearch/split-u/" + g.key());
    auto pis = planar_images(wc, basis);
    GraphSet gc(chimney_sets(chimney_n, 0.0, ell0).c, rs);
    std::vector<std::int32_t> c_ids;
    for (std::size_t i = 0; i < wc.vertex_count(); ++i)
      if (gc.contains(pis[i])) c_ids.push_back(static_cast<std::int32_t>(i));
    SplitScan scan = split_segment(wc, basis, a0, b0, ball_ids(wc, k_found * rs), c_ids,
                                   rs, p, budget.stage_trials,
                                   seed.substream("stage5u"), threads);
    res.h_u = scan.point.y();
  }

  // (5b) working height: ell just below the crossover at h_u
  EllEqEstimate ee1 = ell_eq_estimate(g, basis, chimney_n, res.h_u, n_b, p,
                                      budget.stage_trials, seed.substream("stage5l"),
                                      threads, budget.ell_hi_factor * n_b, k_found);
  double ell = ee1.lo;
  res.ell = ell;
  Vec2 qa(chimney_n, res.h_u - ell), qb(chimney_n, res.h_u + ell);

  // (5c) split [-a, b] to get v
  Vec2 v_pick;
  {
    EdgeWindow wc = e_box_window(view, basis, chimney_n + 3 * rs,
                                 std::abs(res.h_u) + ell + 3 * rs,
                                 std::max(4.0 * rs, 8.0), "fcsearch/split-v/" + g.key());
    auto pis = planar_images(wc, basis);
    GraphSet gc(chimney_sets(chimney_n, res.h_u, ell).c, rs);
    std::vector<std::int32_t> c_ids;
    for (std::size_t i = 0; i < wc.vertex_count(); ++i)
      if (gc.contains(pis[i])) c_ids.push_back(static_cast<std::int32_t>(i));
    SplitScan scan = split_segment(wc, basis, -qa, qb, ball_ids(wc, k_found * rs), c_ids,
                                   rs, p, budget.stage_trials,
                                   seed.substream("stage5v"), threads);
    v_pick = scan.point;
  }

  GoodQuadruple quad{qa, qb, v_pick};
  auto qdiag = is_good_quadruple(qa, qb, v_pick, rs);
  if (!qdiag.good) {
    res.stage_reached = 5;
    std::ostringstream d;
    d << "assembled quadruple is not good (disk margin " << qdiag.disk_margin << ")";
    res.diagnostic = d.str();
    return res;
  }

  // (6) final verification
  FCParams fc;
  fc.group_key = g.key();
  fc.p = p;
  fc.eta = eta;
  fc.m = m_found;
  fc.basis = basis;
  fc.quad = quad;
  double reach = 3.0 * std::max(qa.norm(), qb.norm()) + 2.0 * rs;
  fc.n_window = static_cast<std::int64_t>(std::ceil(reach / rs)) + 1;

  res.final_report =
      fc_check(g, fc, budget.final_trials, seed.substream("final"), threads,
               budget.saw_cap);
  if (!res.final_report.pass) {
    res.stage_reached = 6;
    res.diagnostic = "assembled witness failed verification; worst pair lcb " +
                     std::to_string(res.final_report.worst.est.lo);
    return res;
  }
  res.stage_reached = 7;
  res.params = fc;
  res.diagnostic = "ok";
  return res;
}

std::vector<Basis> basis_cover(const MarkedAbelianGroup& g, int resolution) {
  Eigen::Index r = g.rank();
  if (r == 2) return {Basis::standard(2)};
  if (r != 3)
    throw std::invalid_argument("basis_cover: supported for rank 2 and 3 only");

  std::vector<Basis> out;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < resolution; ++k) {
    double z = 1.0 - 2.0 * (k + 0.5) / resolution;
    double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden * k;
    Eigen::Vector3d n(rad * std::cos(phi), rad * std::sin(phi), z);
    int least = 0;
    n.cwiseAbs().minCoeff(&least);
    Eigen::Vector3d axis = Eigen::Vector3d::Zero();
    axis[least] = 1.0;
    Eigen::Vector3d e0 = (axis - axis.dot(n) * n).normalized();
    Eigen::Vector3d e1 = n.cross(e0);
    Basis b;
    b.e.resize(3, 3);
    b.e.col(0) = e0;
    b.e.col(1) = e1;
    b.e.col(2) = n;
    out.push_back(std::move(b));
  }
  return out;
}

double estimate_cover_radius(const MarkedAbelianGroup& g, const PlanarSet& x,
                             const Basis& e, std::int64_t n_window, int samples,
                             const rng::SeedRecord& seed) {
  double rs = r_s(g);
  CayleyView view(g);
  EdgeWindow win =
      ball_window(view, static_cast<double>(n_window) * rs, "cover/" + g.key());
  auto offs_cache = integer_ball_offsets(g.rank(), rs);

  auto holds_at = [&](double theta) {
    for (int s = 0; s < samples; ++s) {
      // random small rotation: Q = orthonormalized (I + theta * A), A skew
      Eigen::Index r = g.rank();
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(r, r);
      rng::SeedRecord sr = seed.substream("rot").substream(s);
      std::uint64_t ctr = 0;
      for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = i + 1; j < r; ++j) {
          double w = 2.0 * rng::uniform(sr, ctr++) - 1.0;
          a(i, j) = w;
          a(j, i) = -w;
        }
      double norm = a.norm();
      if (norm > 0) a *= theta / norm;
      // nearest orthogonal matrix to I + a (polar factor)
      Eigen::JacobiSVD<Eigen::MatrixXd> psvd(Eigen::MatrixXd::Identity(r, r) + a,
                                             Eigen::ComputeFullU | Eigen::ComputeFullV);
      Eigen::MatrixXd q = psvd.matrixU() * psvd.matrixV().transpose();
      Basis f;
      f.e = q * e.e;

      GraphSet ge(x, rs);
      for (std::size_t i = 0; i < win.vertex_count(); ++i) {
        Vec2 pe = e.project_i(win.vertices[i].free);
        if (!ge.contains(pe)) continue;
        // needs membership in Graph_f(X) + B(1)
        bool ok = false;
        for (const auto& o : offs_cache) {
          Vec2 pf = f.project_i(IVec(win.vertices[i].free - o));
          if (x.distance(pf) <= rs + kGeomTol) {
            ok = true;
            break;
          }
        }
        if (!ok) return false;
      }
    }
    return true;
  };

  double lo = 0.0, hi = 0.5;
  if (!holds_at(1e-3)) return 0.0;
  lo = 1e-3;
  for (int it = 0; it < 20; ++it) {
    double mid = 0.5 * (lo + hi);
    if (holds_at(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace abperc
