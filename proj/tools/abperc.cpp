#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "abperc/experiments.hpp"
#include "abperc/parallel.hpp"

namespace {

using namespace abperc;

constexpr int kExitFailure = 2;

void write_out(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string env_cache_dir() {
  const char* v = std::getenv("ABPERC_CACHE_DIR");
  return v ? v : "";
}

int cmd_estimate_pc(const std::string& group, PcSettings s, std::uint64_t seed,
                    const std::string& out) {
  MarkedAbelianGroup g = parse_group_literal(group);
  PcEstimate e = estimate_pc(g, s, seed);
  write_out(out, PcEstimate::csv_header() + "\n" + e.csv_row() + "\n");
  return 0;
}

int cmd_locality(const std::string& spec_path, const PcSettings& overrides,
                 bool has_overrides, std::uint64_t seed_override, bool has_seed,
                 const std::string& out_override) {
  ExperimentSpec spec = ExperimentSpec::parse_file(spec_path);
  if (has_overrides) {
    spec.settings.trials = overrides.trials;
    spec.settings.window = overrides.window;
    spec.settings.threads = overrides.threads;
    if (!overrides.cache_dir.empty()) spec.settings.cache_dir = overrides.cache_dir;
  }
  if (has_seed) spec.seed = seed_override;
  std::string out = out_override.empty() ? spec.out_path : out_override;

  if (spec.kind == "locality") {
    LocalityResult r = run_locality(spec);
    write_out(out, r.csv());
    for (const auto& row : r.rows)
      if (row.est.flag == "rejected_rank0") {
        std::cerr << "row '" << row.label
                  << "' has rank 0: critical parameter is constant equal to 1\n";
        return kExitFailure;
      }
    return 0;
  }
  if (spec.kind == "monotonicity") {
    if (spec.groups.size() != 1)
      throw std::invalid_argument("monotonicity spec needs exactly one 'group'");
    MarkedAbelianGroup g = parse_group_literal(spec.groups[0].second);
    std::vector<std::vector<GroupElement>> lambdas;
    for (const auto& row : spec.lambda_rows) {
      if (row.size() != g.marks())
        throw std::invalid_argument("lambda vector dimension mismatch");
      lambdas.push_back({g.project(row)});
    }
    MonotonicityResult r = run_monotonicity(g, lambdas, spec.settings, spec.seed);
    write_out(out, r.csv());
    return 0;
  }
  if (spec.kind == "estimate-pc") {
    std::ostringstream s;
    s << PcEstimate::csv_header() << "\n";
    for (const auto& [label, literal] : spec.groups) {
      MarkedAbelianGroup g = parse_group_literal(literal);
      s << estimate_pc(g, spec.settings, spec.seed).csv_row() << "\n";
    }
    write_out(out, s.str());
    return 0;
  }
  throw std::invalid_argument("unknown spec kind: " + spec.kind);
}

int cmd_fc_search(const std::string& group, double p, double eta, FcSearchBudget budget,
                  std::uint64_t seed, int threads, const std::string& params_out,
                  const std::string& out) {
  MarkedAbelianGroup g = parse_group_literal(group);
  FcSearchResult r = fc_search(g, p, eta, budget, {seed, rng::fnv1a("fc-search"), 0},
                               threads);
  std::ostringstream s;
  s << "group,p,eta,stage,m,k,n,ell0,h_u,ell,pass,worst_lcb,saw_count,trials\n";
  s << g.key() << ',' << format_double(p) << ',' << format_double(eta) << ','
    << r.stage_reached << ',' << r.m << ',' << r.k << ',' << r.n << ','
    << format_double(r.ell0) << ',' << format_double(r.h_u) << ','
    << format_double(r.ell) << ',' << (r.params ? 1 : 0) << ','
    << format_double(r.final_report.worst.est.lo) << ',' << r.final_report.saw_count
    << ',' << r.final_report.trials << "\n";
  write_out(out, s.str());
  if (!r.params) {
    std::cerr << "fc-search failed at stage " << r.stage_reached << ": " << r.diagnostic
              << "\n";
    return kExitFailure;
  }
  if (!params_out.empty()) {
    std::ofstream pf(params_out);
    pf << r.params->serialize();
  }
  return 0;
}

int cmd_fc_check(const std::string& group, const std::string& params_path,
                 std::uint64_t trials, std::uint64_t seed, int threads,
                 const std::string& out) {
  MarkedAbelianGroup g = parse_group_literal(group);
  std::ifstream pf(params_path);
  if (!pf) throw std::runtime_error("cannot read " + params_path);
  std::stringstream buf;
  buf << pf.rdbuf();
  FCParams fc = FCParams::parse(buf.str());
  if (fc.group_key != g.key())
    throw std::invalid_argument("fcparams group does not match --group");
  FcReport rep = fc_check(g, fc, trials, {seed, rng::fnv1a("fc-check"), 0}, threads);
  std::ostringstream s;
  s << "group,p,eta,N,m,pass,worst_lcb,worst_gamma,worst_zone,saw_count,trials\n";
  s << g.key() << ',' << format_double(fc.p) << ',' << format_double(fc.eta) << ','
    << fc.n_window << ',' << fc.m << ',' << (rep.pass ? 1 : 0) << ','
    << format_double(rep.worst.est.lo) << ',' << rep.worst.gamma << ','
    << rep.worst.zone << ',' << rep.saw_count << ',' << rep.trials << "\n";
  write_out(out, s.str());
  if (!rep.pass) {
    std::cerr << "fc-check failed: " << rep.note << "\n";
    return kExitFailure;
  }
  return 0;
}

int cmd_distance(const std::string& g1l, const std::string& g2l, std::int64_t kmax,
                 const std::string& out) {
  MarkedAbelianGroup g1 = parse_group_literal(g1l);
  MarkedAbelianGroup g2 = parse_group_literal(g2l);
  MgDistance md = mg_distance(g1, g2, kmax);
  BsDistance bd = bs_distance(g1, g2, std::max<std::int64_t>(2, kmax / 2));
  auto cert = convergence_certificate(g1, g2, kmax);
  std::ostringstream s;
  s << "g1,g2,k_max,mg_distance,mg_agree_radius,bs_distance,bs_agree_radius,"
       "certificate\n";
  s << g1.key() << ',' << g2.key() << ',' << kmax << ',' << format_double(md.value)
    << ',' << md.agree_radius << ',' << format_double(bd.value) << ','
    << bd.agree_radius << ',' << (cert ? std::to_string(cert->size()) : "none") << "\n";
  write_out(out, s.str());
  return 0;
}

int cmd_renorm_demo(const std::string& base_lit, const std::string& lambda_row,
                    double p, double delta, double eta, std::int64_t m,
                    std::int64_t z_radius, std::int64_t runs, std::uint64_t seed,
                    int threads, const std::string& quad_spec, double site_threshold,
                    const std::string& out, const std::string& trace_path) {
  MarkedAbelianGroup base = parse_group_literal(base_lit);

  // lambda: one integer vector in Z^d, projected into the base group
  IVec lam(base.marks());
  {
    std::istringstream ls(lambda_row);
    std::string tok;
    Eigen::Index i = 0;
    while (std::getline(ls, tok, ',')) {
      if (i >= lam.size()) throw std::invalid_argument("lambda vector too long");
      lam[i++] = std::stoll(tok);
    }
    if (i != lam.size()) throw std::invalid_argument("lambda vector too short");
  }

  GoodQuadruple quad;
  {
    std::istringstream qs(quad_spec);
    std::string tok;
    double vals[6];
    int i = 0;
    while (std::getline(qs, tok, ',')) {
      if (i >= 6) throw std::invalid_argument("quad needs 6 numbers");
      vals[i++] = std::stod(tok);
    }
    if (i != 6) throw std::invalid_argument("quad needs 6 numbers");
    quad.a = Vec2(vals[0], vals[1]);
    quad.b = Vec2(vals[2], vals[3]);
    quad.v = Vec2(vals[4], vals[5]);
  }

  RenormLayout layout = make_layout(base, {base.project(lam)}, quad, z_radius);
  RenormArena arena = build_arena(layout, m);

  KappaResult kap = kappa(quad);
  PZero p0 = p_zero(p, delta, static_cast<double>(kap.value), eta);
  DominationReport dom = omega_total_domination_check(p, delta,
                                                      static_cast<double>(kap.value));

  std::vector<ExplorationState> states(static_cast<std::size_t>(runs));
  parallel_for(runs, threads, [&](std::int64_t r) {
    rng::SeedRecord rs{seed, rng::fnv1a("renorm-demo"), static_cast<std::uint64_t>(r)};
    states[static_cast<std::size_t>(r)] =
        explore(arena, p, delta, kap.value, rs.substream("run").substream(r));
  });

  ConditionalStats stats = conditional_success_stats(states);

  std::ostringstream s;
  s << "kind,key,successes,trials,phat,lo,hi\n";
  s << "meta,kappa," << kap.value << ',' << (kap.exact ? 1 : 0) << ",0,0,0\n";
  s << "meta,p_zero," << p0.t_star << ",1," << format_double(p0.value) << ",0,0\n";
  s << "meta,domination_margin,0,1," << format_double(dom.margin) << ",0,0\n";
  s << "meta,site_gate," << (p0.value > site_threshold ? 1 : 0) << ",1,"
    << format_double(site_threshold) << ",0,0\n";
  s << "overall,all," << stats.overall.successes << ',' << stats.overall.trials << ','
    << format_double(stats.overall.phat) << ',' << format_double(stats.overall.lo)
    << ',' << format_double(stats.overall.hi) << "\n";
  for (const auto& st : stats.by_step)
    s << "by_step," << st.key << ',' << st.est.successes << ',' << st.est.trials << ','
      << format_double(st.est.phat) << ',' << format_double(st.est.lo) << ','
      << format_double(st.est.hi) << "\n";
  for (const auto& st : stats.by_u_size)
    s << "by_u," << st.key << ',' << st.est.successes << ',' << st.est.trials << ','
      << format_double(st.est.phat) << ',' << format_double(st.est.lo) << ','
      << format_double(st.est.hi) << "\n";
  write_out(out, s.str());

  if (!trace_path.empty()) {
    std::ofstream tf(trace_path);
    tf << "run,step,z1,z2,x,cluster_size,u_before\n";
    for (std::size_t r = 0; r < states.size(); ++r)
      for (const auto& step : states[r].steps)
        tf << r << ',' << step.t << ',' << step.z.x() << ',' << step.z.y() << ','
           << step.x_value << ',' << step.cluster_size << ',' << step.u_size_before
           << "\n";
  }

  // X map of run 0 on stderr-ish friendly stdout when not writing to a file
  if (out.empty()) {
    const auto& st = states[0];
    std::int64_t zr = layout.z_radius;
    std::vector<std::string> grid(static_cast<std::size_t>(2 * zr + 1),
                                  std::string(static_cast<std::size_t>(2 * zr + 1), '.'));
    for (const auto& step : st.steps)
      grid[static_cast<std::size_t>(step.z.y() + zr)]
          [static_cast<std::size_t>(step.z.x() + zr)] = step.x_value ? '#' : 'o';
    std::cout << "# X map of run 0 ('#'=1, 'o'=0, '.'=unexplored)\n";
    for (auto it = grid.rbegin(); it != grid.rend(); ++it) std::cout << *it << "\n";
    if (p0.value > site_threshold)
      std::cout << "# renormalized site process exceeds the site threshold gate\n";
    else
      std::cout << "# site gate not met at this scale (p_zero = "
                << format_double(p0.value) << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bond percolation laboratory for abelian Cayley graphs"};
  app.require_subcommand(1);

  std::string group, group2, out, spec_path, params_path, cache_dir = env_cache_dir();
  std::string lambda_row = "0,0,4", quad_spec = "5,-3,5,3,5,3", trace_path;
  std::uint64_t seed = 42, trials = 10000;
  std::int64_t window = 128, kmax = 8, m = 2, z_radius = 5, runs = 100;
  double tol = 0.01, p = 0.65, eta = 0.1, delta = 0.05, theta = 0.5;
  double site_threshold = 0.592746;
  int threads = 0;
  std::int64_t budget_ms = 20 * 60 * 1000;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--seed", seed, "master seed");
    c->add_option("--threads", threads, "worker threads (0 = hardware)");
    c->add_option("--out", out, "output CSV path (default stdout)");
  };

  auto* pc = app.add_subcommand("estimate-pc", "critical point estimate");
  pc->add_option("--group", group, "group literal")->required();
  pc->add_option("--window", window, "ball window radius L (units of R_S)");
  pc->add_option("--trials", trials, "trials per bisection step");
  pc->add_option("--tol", tol, "bisection width");
  pc->add_option("--theta", theta, "reach level");
  pc->add_option("--cache-dir", cache_dir, "result cache directory");
  add_common(pc);

  auto* loc = app.add_subcommand("locality", "run a spec file (locality and friends)");
  loc->add_option("--spec", spec_path, "experiment spec file")->required();
  bool loc_override = false;
  loc->add_flag("--override", loc_override, "apply --trials/--window/--threads");
  loc->add_option("--trials", trials);
  loc->add_option("--window", window);
  loc->add_option("--cache-dir", cache_dir);
  add_common(loc);

  auto* fs = app.add_subcommand("fc-search", "search a finite-size witness");
  fs->add_option("--group", group)->required();
  fs->add_option("--p", p)->required();
  fs->add_option("--eta", eta)->required();
  fs->add_option("--trials", trials, "final verification trials");
  fs->add_option("--budget-ms", budget_ms);
  fs->add_option("--params-out", params_path, "write the witness here");
  add_common(fs);

  auto* fk = app.add_subcommand("fc-check", "re-verify a witness");
  fk->add_option("--group", group)->required();
  fk->add_option("--params", params_path, "witness file")->required();
  fk->add_option("--trials", trials);
  add_common(fk);

  auto* dist = app.add_subcommand("distance", "marked-group and ball distances");
  dist->add_option("--g1", group)->required();
  dist->add_option("--g2", group2)->required();
  dist->add_option("--kmax", kmax);
  add_common(dist);

  double rd_eta = 1e-8;
  auto* rd = app.add_subcommand("renorm-demo", "sprinkled exploration demo");
  rd->add_option("--base", group, "base group literal");
  rd->add_option("--lambda", lambda_row, "quotient vector in Z^d");
  rd->add_option("--p", p);
  rd->add_option("--delta", delta);
  rd->add_option("--eta", rd_eta, "floor parameter for p_zero");
  rd->add_option("--m", m, "seed path length");
  rd->add_option("--z-radius", z_radius);
  rd->add_option("--runs", runs);
  rd->add_option("--quad", quad_spec, "ax,ay,bx,by,vx,vy");
  rd->add_option("--site-threshold", site_threshold);
  rd->add_option("--trace", trace_path, "per-step trace CSV");
  add_common(rd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (pc->parsed()) {
      PcSettings s;
      s.window = window;
      s.trials = trials;
      s.tol = tol;
      s.theta = theta;
      s.threads = threads;
      s.cache_dir = cache_dir;
      return cmd_estimate_pc(group, s, seed, out);
    }
    if (loc->parsed()) {
      PcSettings s;
      s.window = window;
      s.trials = trials;
      s.threads = threads;
      s.cache_dir = cache_dir;
      bool has_seed = loc->count("--seed") > 0;
      return cmd_locality(spec_path, s, loc_override, seed, has_seed, out);
    }
    if (fs->parsed()) {
      FcSearchBudget budget;
      budget.final_trials = trials;
      budget.wall_ms = budget_ms;
      return cmd_fc_search(group, p, eta, budget, seed, threads, params_path, out);
    }
    if (fk->parsed()) return cmd_fc_check(group, params_path, trials, seed, threads, out);
    if (dist->parsed()) return cmd_distance(group, group2, kmax, out);
    if (rd->parsed()) {
      if (group.empty()) group = "3";
      return cmd_renorm_demo(group, lambda_row, p, delta, rd_eta, m, z_radius, runs,
                             seed, threads, quad_spec, site_threshold, out, trace_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
