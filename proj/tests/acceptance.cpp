// Acceptance suite: one numbered check per run criterion, each printing a
// single PASS/FAIL line. Run all, or a single one with --only N.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "abperc/experiments.hpp"
#include "abperc/parallel.hpp"
#include "oracles.hpp"

using namespace abperc;

namespace {

using Clock = std::chrono::steady_clock;

int g_failures = 0;

struct Criterion {
  int id;
  std::string name;
  Clock::time_point start = Clock::now();

  Criterion(int id_, std::string name_) : id(id_), name(std::move(name_)) {}

  void finish(bool pass, const std::string& detail) const {
    double secs =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start)
            .count() /
        1000.0;
    std::printf("[%s] criterion %2d (%s): %s  [%.1fs]\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++g_failures;
  }
};

IVec vec(std::initializer_list<std::int64_t> xs) {
  IVec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (auto x : xs) v[i++] = x;
  return v;
}

MarkedAbelianGroup group_of(std::int64_t d, std::vector<IVec> gens) {
  return MarkedAbelianGroup::from_subgroup(d, hermite_normal_form(d, gens));
}

// int64 forward solve against an echelon basis (acceptance-local, applied to
// both the library basis and the oracle basis)
bool solve_member(const std::vector<std::vector<std::int64_t>>& rows,
                  std::vector<std::int64_t> v) {
  for (const auto& row : rows) {
    std::size_t p = 0;
    while (p < row.size() && row[p] == 0) ++p;
    if (p == row.size()) continue;
    if (v[p] % row[p] != 0) return false;
    std::int64_t q = v[p] / row[p];
    for (std::size_t j = 0; j < v.size(); ++j) v[j] -= q * row[j];
  }
  for (std::int64_t x : v)
    if (x != 0) return false;
  return true;
}

std::vector<std::vector<std::int64_t>> narrow(const BigMat& m) {
  std::vector<std::vector<std::int64_t>> out;
  for (const auto& row : m) {
    std::vector<std::int64_t> r;
    for (const auto& x : row) r.push_back(static_cast<std::int64_t>(x));
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------- criterion 1
void criterion_1() {
  Criterion c(1, "lattice algebra vs brute-force enumeration");
  rng::SeedRecord seed{20240801, rng::fnv1a("acc1"), 0};
  std::uint64_t ctr = 0;
  std::int64_t mismatches = 0, instances = 0, closure_checks = 0;

  for (int inst = 0; inst < 1000; ++inst) {
    std::int64_t d = 1 + static_cast<std::int64_t>(rng::below(seed, ctr++, 4));
    std::int64_t count = 1 + static_cast<std::int64_t>(rng::below(seed, ctr++, 3));
    std::vector<IVec> gens;
    BigMat big;
    for (std::int64_t i = 0; i < count; ++i) {
      IVec v(d);
      for (std::int64_t j = 0; j < d; ++j)
        v[j] = static_cast<std::int64_t>(rng::below(seed, ctr++, 11)) - 5;
      gens.push_back(v);
      big.push_back(to_big(v));
    }
    ++instances;

    IntegerLattice lib = hermite_normal_form(d, gens);
    BigMat oracle_basis = oracle::hnf(d, big);
    auto lib64 = narrow(lib.basis());
    auto ora64 = narrow(oracle_basis);

    // box membership must agree pointwise
    std::vector<std::int64_t> pt(static_cast<std::size_t>(d), -8);
    for (;;) {
      bool in_lib = solve_member(lib64, pt);
      bool in_ora = solve_member(ora64, pt);
      if (in_lib != in_ora) ++mismatches;
      std::size_t lv = 0;
      while (lv < pt.size() && ++pt[lv] > 8) pt[lv++] = -8;
      if (lv == pt.size()) break;
    }
    // spot-check the library solver itself
    for (int rep = 0; rep < 20; ++rep) {
      IVec v(d);
      for (std::int64_t j = 0; j < d; ++j)
        v[j] = static_cast<std::int64_t>(rng::below(seed, ctr++, 17)) - 8;
      std::vector<std::int64_t> p64(v.data(), v.data() + v.size());
      if (lib.contains(v) != solve_member(lib64, p64)) ++mismatches;
    }

    // invariant factors against the minor-gcd divisors
    auto s = smith_decomposition(lib);
    auto divisors = oracle::smith_divisors(big, d);
    if (s.diag.size() != divisors.size()) {
      ++mismatches;
    } else {
      for (std::size_t i = 0; i < divisors.size(); ++i)
        if (s.diag[i] != divisors[i]) ++mismatches;
    }

    // independent walk-closure anchor in low dimension
    if (d <= 2 && closure_checks < 120) {
      ++closure_checks;
      auto pts = oracle::closure_points(gens, 8, 40);
      std::vector<std::int64_t> q(static_cast<std::size_t>(d), -8);
      for (;;) {
        bool in_lib = solve_member(lib64, q);
        if (in_lib != (pts.count(q) > 0)) ++mismatches;
        std::size_t lv = 0;
        while (lv < q.size() && ++q[lv] > 8) q[lv++] = -8;
        if (lv == q.size()) break;
      }
    }
  }
  std::ostringstream d;
  d << instances << " instances, " << closure_checks << " closure anchors, "
    << mismatches << " mismatches";
  c.finish(mismatches == 0, d.str());
}

// ---------------------------------------------------------------- criterion 2
void criterion_2() {
  Criterion c(2, "subgroup <-> marked group round trip");
  rng::SeedRecord seed{20240802, rng::fnv1a("acc2"), 0};
  std::uint64_t ctr = 0;
  int failures = 0;
  for (int inst = 0; inst < 500; ++inst) {
    std::int64_t d = 1 + static_cast<std::int64_t>(rng::below(seed, ctr++, 4));
    std::int64_t count = static_cast<std::int64_t>(rng::below(seed, ctr++, 4));
    std::vector<IVec> gens;
    for (std::int64_t i = 0; i < count; ++i) {
      IVec v(d);
      for (std::int64_t j = 0; j < d; ++j)
        v[j] = static_cast<std::int64_t>(rng::below(seed, ctr++, 11)) - 5;
      gens.push_back(v);
    }
    IntegerLattice gamma = hermite_normal_form(d, gens);
    auto g = MarkedAbelianGroup::from_subgroup(d, gamma);
    if (!(g.defining_lattice() == gamma)) ++failures;
    if (!(g.relation_lattice() == gamma)) ++failures;
    if (MarkedAbelianGroup::parse(g.format()).key() != g.key()) ++failures;
  }
  c.finish(failures == 0, "500 round trips, " + std::to_string(failures) + " failures");
}

// ---------------------------------------------------------------- criterion 3
void criterion_3() {
  Criterion c(3, "certificates imply rooted ball isomorphism");
  rng::SeedRecord seed{20240803, rng::fnv1a("acc3"), 0};
  std::uint64_t ctr = 0;
  int done = 0, failures = 0, attempts = 0;
  while (done < 50 && attempts < 500) {
    ++attempts;
    std::int64_t d = 2 + static_cast<std::int64_t>(rng::below(seed, ctr++, 3));
    std::vector<IVec> gens;
    for (std::int64_t i = 0; i + 2 < d; ++i) {
      IVec v(d);
      for (std::int64_t j = 0; j < d; ++j)
        v[j] = static_cast<std::int64_t>(rng::below(seed, ctr++, 7)) - 3;
      gens.push_back(v);
    }
    auto g = group_of(d, gens);
    if (g.rank() < 1) continue;

    IVec w(d);
    for (std::int64_t j = 0; j < d; ++j)
      w[j] = (static_cast<std::int64_t>(rng::below(seed, ctr++, 5)) - 2) * 7 +
             ((j == 0) ? 35 : 0);
    std::vector<IVec> hgens = gens;
    hgens.push_back(w);
    auto h = group_of(d, hgens);

    std::int64_t k = 4 + static_cast<std::int64_t>(rng::below(seed, ctr++, 3));
    auto cert = convergence_certificate(g, h, k);
    if (!cert.has_value() || cert->empty()) continue;
    ++done;
    auto bg = word_ball(CayleyView(g), k / 2);
    auto bh = word_ball(CayleyView(h), k / 2);
    if (rooted_isomorphic(bg, bh, 50'000'000) != IsoResult::kIsomorphic) ++failures;
  }
  std::ostringstream d;
  d << done << " certified triples, " << failures << " failures";
  c.finish(done >= 50 && failures == 0, d.str());
}

// ---------------------------------------------------------------- criterion 4
void criterion_4() {
  Criterion c(4, "harris and square-root trick by full enumeration");
  // 3x3 block of the square lattice: 9 vertices, 12 edges
  auto z2 = group_of(2, {});
  CayleyView view(z2);
  auto keep = [](const IVec& v) {
    return v[0] >= 0 && v[0] <= 2 && v[1] >= 0 && v[1] <= 2;
  };
  EdgeWindow w = predicate_window(view, vec({2, 2}), keep, "acc4");
  if (w.edge_count() != 12) {
    c.finish(false, "window has " + std::to_string(w.edge_count()) + " edges");
    return;
  }

  auto id_of = [&](std::int64_t x, std::int64_t y) {
    GroupElement e;
    e.free = vec({x, y});
    e.tor = IVec(0);
    return w.vertex_id(e);
  };
  std::vector<std::int32_t> all(w.vertex_count());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::int32_t>(i);
  std::vector<std::vector<std::int32_t>> terms = {
      {id_of(0, 0)}, {id_of(2, 2)}, {id_of(2, 0), id_of(0, 2)}};

  // all monotone events generated from the three terminal sets: pairwise
  // connections, plus unions and intersections of those
  using Event = std::function<bool(const PercConfig&)>;
  std::vector<Event> events;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      events.push_back([&, i, j](const PercConfig& cc) {
        return connected_in(cc, terms[static_cast<std::size_t>(i)],
                            terms[static_cast<std::size_t>(j)], all);
      });
  std::size_t base = events.size();
  for (std::size_t i = 0; i < base; ++i)
    for (std::size_t j = i + 1; j < base; ++j) {
      events.push_back(
          [&, i, j](const PercConfig& cc) { return events[i](cc) || events[j](cc); });
      events.push_back(
          [&, i, j](const PercConfig& cc) { return events[i](cc) && events[j](cc); });
    }

  int violations = 0;
  long checks = 0;
  for (double p : {0.25, 0.5, 0.75}) {
    // exact probabilities of every event and every pairwise conjunction
    std::size_t n = events.size();
    std::vector<double> prob(n, 0.0);
    std::vector<std::vector<double>> conj(n, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> disj(n, std::vector<double>(n, 0.0));
    PercConfig cc;
    cc.window = &w;
    cc.p = p;
    cc.open.assign(12, 0);
    std::vector<char> val(n);
    for (std::uint32_t mask = 0; mask < (1u << 12); ++mask) {
      double weight = 1.0;
      for (std::size_t e = 0; e < 12; ++e) {
        bool open = (mask >> e) & 1;
        cc.open[e] = open ? 1 : 0;
        weight *= open ? p : 1 - p;
      }
      for (std::size_t i = 0; i < n; ++i) val[i] = events[i](cc) ? 1 : 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (val[i]) prob[i] += weight;
        for (std::size_t j = i + 1; j < n; ++j) {
          if (val[i] && val[j]) conj[i][j] += weight;
          if (val[i] || val[j]) disj[i][j] += weight;
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        ++checks;
        if (conj[i][j] < prob[i] * prob[j] - 1e-12) ++violations;
        double hi = std::max(prob[i], prob[j]);
        if (hi < 1 - std::sqrt(1 - disj[i][j]) - 1e-12) ++violations;
      }
  }
  std::ostringstream d;
  d << checks << " event-pair checks across 3 levels of p, " << violations
    << " violations";
  c.finish(violations == 0, d.str());
}

// ---------------------------------------------------------------- criterion 5
PcSettings acceptance_pc_settings(int threads) {
  PcSettings s;
  s.window = 128;
  s.trials = 10000;
  s.tol = 0.005;
  s.threads = threads;
  s.with_2l = false;
  return s;
}

void criterion_5(int threads) {
  Criterion c(5, "square and triangular critical points");
  PcSettings s = acceptance_pc_settings(threads);
  PcEstimate sq = estimate_pc(group_of(2, {}), s, 20240805);
  PcEstimate tr = estimate_pc(group_of(3, {vec({1, 1, -1})}), s, 20240805);
  bool ok = sq.p_hat >= 0.48 && sq.p_hat <= 0.52 && tr.p_hat >= 0.33 && tr.p_hat <= 0.37;
  std::ostringstream d;
  d << "square " << format_double(sq.p_hat) << " in [0.48,0.52], triangular "
    << format_double(tr.p_hat) << " in [0.33,0.37]";
  c.finish(ok, d.str());
}

// ---------------------------------------------------------------- criterion 6
void criterion_6(int threads) {
  Criterion c(6, "quotients cannot lower the critical point");
  PcSettings s = acceptance_pc_settings(threads);
  auto z2 = group_of(2, {});
  GroupElement lam;
  lam.free = vec({0, 5});
  lam.tor = IVec(0);
  MonotonicityResult r = run_monotonicity(z2, {{lam}}, s, 20240806);
  double diff = r.rows[0].est.p_hat - r.base.p_hat;
  double combined = r.rows[0].est.ci + r.base.ci;
  std::ostringstream d;
  d << "quotient " << format_double(r.rows[0].est.p_hat) << " (" << r.rows[0].est.flag
    << ") vs base " << format_double(r.base.p_hat) << ", diff " << format_double(diff)
    << " > ci " << format_double(combined);
  c.finish(diff > combined, d.str());
}

// ---------------------------------------------------------------- criterion 7
void criterion_7(int threads) {
  Criterion c(7, "chain family approaches the triangular critical point");
  std::string text =
      "abperc v1\n"
      "kind locality\n"
      "family zchain 3,5,8,12,20\n"
      "limit 3;1,1,-1\n";
  ExperimentSpec spec = ExperimentSpec::parse_text(text, "acc7");
  spec.settings = acceptance_pc_settings(threads);
  spec.seed = 20240807;
  LocalityResult r = run_locality(spec);

  bool ok = r.rows.size() == 5;
  std::ostringstream d;
  d << "gaps";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    d << ' ' << format_double(r.rows[i].gap);
    if (i > 0) {
      double slack = r.rows[i].est.ci + r.rows[i - 1].est.ci;
      if (r.rows[i].gap > r.rows[i - 1].gap + slack) ok = false;
    }
  }
  double final_gap = r.rows.empty() ? 1.0 : r.rows.back().gap;
  d << ", final " << format_double(final_gap);
  if (!(final_gap < 0.03)) ok = false;
  c.finish(ok, d.str());
}

// ---------------------------------------------------------------- criterion 8
void criterion_8() {
  Criterion c(8, "corridor overlap bound");
  double th = 0.5235987755982988;  // 30 degrees
  Eigen::Matrix2d rot;
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  std::vector<GoodQuadruple> quads = {
      {Vec2(5, -3), Vec2(5, 3), Vec2(5, 3)},
      {Vec2(7, -2), Vec2(7, 4), Vec2(0, 3)},
      {rot * Vec2(5, -3), rot * Vec2(5, 3), rot * Vec2(5, 3)},
  };
  rng::SeedRecord seed{20240808, rng::fnv1a("acc8"), 0};
  std::uint64_t ctr = 0;
  int violations = 0;
  std::ostringstream d;
  for (const auto& q : quads) {
    auto diag = is_good_quadruple(q.a, q.b, q.v, 1.0);
    if (!diag.good) {
      ++violations;
      continue;
    }
    KappaResult k = kappa(q);
    d << " kappa=" << k.value << (k.exact ? "" : "~");
    PlanarSet corridor = PlanarSet::parallelogram(4.0 * q.a, 4.0 * q.b);
    Vec2 u = q.u();
    for (int rep = 0; rep < 10000; ++rep) {
      Vec2 w(120 * rng::uniform(seed, ctr++) - 60, 120 * rng::uniform(seed, ctr++) - 60);
      std::int64_t count = 0;
      for (std::int64_t z1 = -30; z1 <= 30; ++z1)
        for (std::int64_t z2 = -30; z2 <= 30; ++z2) {
          Vec2 pt = w - static_cast<double>(z1) * u - static_cast<double>(z2) * q.v;
          if (corridor.distance(pt) <= 1.0 + kGeomTol) ++count;
        }
      if (count > k.value) ++violations;
    }
  }
  c.finish(violations == 0,
           "3 quadruples x 10000 offsets," + d.str() + ", " +
               std::to_string(violations) + " violations");
}

// ---------------------------------------------------------------- criterion 9
void criterion_9(int threads) {
  Criterion c(9, "finite-size witness search and re-verification");
  auto z2 = group_of(2, {});
  FcSearchBudget budget;
  budget.stage_trials = 3000;
  budget.final_trials = 10000;
  budget.window_scale = 20;
  budget.wall_ms = 20 * 60 * 1000;
  FcSearchResult r =
      fc_search(z2, 0.8, 0.1, budget, {20240809, rng::fnv1a("acc9"), 0}, threads);
  if (!r.params) {
    c.finish(false, "search stopped at stage " + std::to_string(r.stage_reached) + ": " +
                        r.diagnostic);
    return;
  }
  // round trip through the text witness, then an independent seed
  FCParams reloaded = FCParams::parse(r.params->serialize());
  FcReport rep =
      fc_check(z2, reloaded, 10000, {987654321, rng::fnv1a("acc9-verify"), 0}, threads);
  std::ostringstream d;
  d << "witness m=" << reloaded.m << " N=" << reloaded.n_window << " quad=("
    << format_double(reloaded.quad.a.x()) << ',' << format_double(reloaded.quad.a.y())
    << ")..(" << format_double(reloaded.quad.b.x()) << ','
    << format_double(reloaded.quad.b.y()) << "), re-verified lcb "
    << format_double(rep.worst.est.lo) << " > " << format_double(1 - reloaded.eta);
  c.finish(rep.pass, d.str());
}

// --------------------------------------------------------------- criterion 10
void criterion_10(int threads) {
  Criterion c(10, "sprinkled exploration clears the p_zero floor");
  auto z3 = group_of(3, {});
  GoodQuadruple quad{Vec2(5, -3), Vec2(5, 3), Vec2(5, 3)};
  RenormLayout lay = make_layout(z3, {z3.project(vec({0, 0, 4}))}, quad, 5);
  RenormArena arena = build_arena(lay, 2);
  KappaResult k = kappa(quad);
  double eta = 1e-8;
  PZero p0 = p_zero(0.65, 0.05, static_cast<double>(k.value), eta);

  const std::int64_t runs = 120;
  std::vector<ExplorationState> states(static_cast<std::size_t>(runs));
  parallel_for(runs, threads, [&](std::int64_t r) {
    rng::SeedRecord rs{20240810, rng::fnv1a("acc10"), static_cast<std::uint64_t>(r)};
    states[static_cast<std::size_t>(r)] =
        explore(arena, 0.65, 0.05, k.value, rs.substream("run").substream(r));
  });
  for (const auto& st : states)
    if (!verify_exploration(arena, st)) {
      c.finish(false, "post-hoc connectivity replay failed");
      return;
    }

  ConditionalStats stats = conditional_success_stats(states);
  int strata = 0, failures = 0;
  double worst = 1.0;
  auto check = [&](const std::vector<StratumStat>& table) {
    for (const auto& s : table) {
      if (s.est.trials < 30) continue;
      ++strata;
      worst = std::min(worst, s.est.phat);
      if (s.est.phat < p0.value - 2 * s.est.ci_halfwidth()) ++failures;
    }
  };
  check(stats.by_step);
  check(stats.by_u_size);
  std::ostringstream d;
  d << runs << " runs, kappa " << k.value << ", p_zero " << format_double(p0.value)
    << " (t*=" << p0.t_star << "), " << strata << " strata, worst frequency "
    << format_double(worst) << ", " << failures << " below the floor";
  c.finish(strata > 0 && failures == 0, d.str());
}

// --------------------------------------------------------------- criterion 11
std::string cli_path(const char* argv0) {
  if (const char* env = std::getenv("ABPERC_CLI")) return env;
  auto dir = std::filesystem::path(argv0).parent_path();
  auto guess = dir / "abperc";
  if (std::filesystem::exists(guess)) return guess.string();
  return "";
}

void criterion_11(const char* argv0) {
  Criterion c(11, "byte-identical reruns across thread counts");
  std::string cli = cli_path(argv0);
  if (cli.empty()) {
    c.finish(false, "CLI binary not found (set ABPERC_CLI)");
    return;
  }
  auto tmp = std::filesystem::temp_directory_path() / "abperc_acc11";
  std::filesystem::remove_all(tmp);
  std::filesystem::create_directories(tmp);

  std::ofstream(tmp / "loc.spec") << "abperc v1\nkind locality\nfamily zchain 3,5\n"
                                     "limit 3;1,1,-1\nwindow 10\ntrials 300\n"
                                     "tol 0.05\nseed 5\n";

  // a small witness for fc-check determinism
  std::string fcfile = (tmp / "w.fc").string();
  {
    FCParams fc;
    auto z2 = group_of(2, {});
    fc.group_key = z2.key();
    fc.p = 0.85;
    fc.eta = 0.25;
    fc.m = 1;
    fc.basis = Basis::standard(2);
    fc.quad = GoodQuadruple{Vec2(5, -3), Vec2(5, 3), Vec2(5, 3)};
    fc.n_window = 20;
    std::ofstream(fcfile) << fc.serialize();
  }

  std::vector<std::pair<std::string, std::string>> cases = {
      {"pc", "estimate-pc --group 2 --window 10 --trials 400 --tol 0.04 --seed 9"},
      {"pc2", "estimate-pc --group \"3;1,1,-1\" --window 8 --trials 300 --tol 0.05 "
              "--seed 4"},
      {"loc", "locality --spec " + (tmp / "loc.spec").string() + " --seed 5"},
      {"dist", "distance --g1 \"3;1,1,-1\" --g2 \"3;1,1,-1;9,0,0\" --kmax 6"},
      {"fc", "fc-check --group 2 --params " + fcfile + " --trials 500 --seed 12"},
      {"rd", "renorm-demo --base 3 --lambda 0,0,4 --p 0.7 --delta 0.05 --m 2 "
             "--z-radius 3 --runs 40 --seed 8"},
  };

  int failures = 0;
  std::ostringstream detail;
  for (const auto& [name, args] : cases) {
    std::vector<std::string> outputs;
    for (int threads : {1, 8}) {
      for (int rep = 0; rep < 2; ++rep) {
        auto outfile = tmp / (name + "_" + std::to_string(threads) + "_" +
                              std::to_string(rep) + ".csv");
        std::string cmd = cli + " " + args + " --threads " + std::to_string(threads) +
                          " --out " + outfile.string() + " >/dev/null 2>&1";
        int rc = std::system(cmd.c_str());
        if (WEXITSTATUS(rc) != 0) {
          ++failures;
          detail << ' ' << name << ":exit" << WEXITSTATUS(rc);
        }
        std::ifstream in(outfile);
        std::stringstream ss;
        ss << in.rdbuf();
        outputs.push_back(ss.str());
      }
    }
    for (std::size_t i = 1; i < outputs.size(); ++i)
      if (outputs[i] != outputs[0] || outputs[i].empty()) {
        ++failures;
        detail << ' ' << name << ":mismatch";
        break;
      }
  }
  std::filesystem::remove_all(tmp);
  c.finish(failures == 0,
           std::to_string(cases.size()) + " subcommands x {1,8} threads x 2 reruns" +
               detail.str());
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
  }
  int threads = resolve_threads(0);

  auto want = [&](int k) { return only == 0 || only == k; };
  if (want(1)) criterion_1();
  if (want(2)) criterion_2();
  if (want(3)) criterion_3();
  if (want(4)) criterion_4();
  if (want(5)) criterion_5(threads);
  if (want(6)) criterion_6(threads);
  if (want(7)) criterion_7(threads);
  if (want(8)) criterion_8();
  if (want(9)) criterion_9(threads);
  if (want(10)) criterion_10(threads);
  if (want(11)) criterion_11(argv[0]);

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  return 0;
}
