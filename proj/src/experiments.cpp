#include "abperc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace abperc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, sep)) out.push_back(tok);
  return out;
}

// affine expressions in n: "5", "n", "-n", "2n", "2n+1", "-n+3"
std::int64_t eval_affine(const std::string& expr, std::int64_t n, bool* uses_n) {
  std::string s = trim(expr);
  std::size_t pos = s.find('n');
  if (pos == std::string::npos) return std::stoll(s);
  if (uses_n) *uses_n = true;
  std::string coef = trim(s.substr(0, pos));
  std::int64_t a = coef.empty() ? 1 : (coef == "-" ? -1 : std::stoll(coef));
  std::string rest = trim(s.substr(pos + 1));
  std::int64_t b = rest.empty() ? 0 : std::stoll(rest);
  return a * n + b;
}

std::vector<IVec> parse_vector_list(const std::string& text, std::int64_t n,
                                    std::int64_t* dim_out) {
  // "(1,0),(0,1),(n,1)"
  std::vector<IVec> out;
  std::int64_t dim = -1;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ',' || text[i] == ' ')) ++i;
    if (i >= text.size()) break;
    if (text[i] != '(') throw std::invalid_argument("expected '(' in vector list");
    std::size_t j = text.find(')', i);
    if (j == std::string::npos) throw std::invalid_argument("unbalanced '(' in vector list");
    auto comps = split(text.substr(i + 1, j - i - 1), ',');
    IVec v(static_cast<Eigen::Index>(comps.size()));
    for (std::size_t k = 0; k < comps.size(); ++k)
      v[static_cast<Eigen::Index>(k)] = eval_affine(comps[k], n, nullptr);
    if (dim < 0) dim = v.size();
    if (v.size() != dim) throw std::invalid_argument("inconsistent vector dimensions");
    out.push_back(std::move(v));
    i = j + 1;
  }
  if (dim_out) *dim_out = dim;
  return out;
}

}  // namespace

MarkedAbelianGroup parse_group_literal(const std::string& literal) {
  std::string s = trim(literal);
  if (s.rfind("Z^", 0) == 0) {
    std::size_t colon = s.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("marks literal needs ':' after Z^D");
    std::int64_t ambient = std::stoll(s.substr(2, colon - 2));
    std::int64_t dim = -1;
    auto marks = parse_vector_list(s.substr(colon + 1), 0, &dim);
    if (marks.empty()) throw std::invalid_argument("marks literal has no marks");
    if (dim != ambient) throw std::invalid_argument("mark dimension differs from Z^D");
    return MarkedAbelianGroup::from_marks(ambient, marks);
  }
  return MarkedAbelianGroup::parse(s);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string PcEstimate::csv_header() {
  return "group,L,trials,seed,p_hat,ci,p_hat_2L,drift,flag,method";
}

std::string PcEstimate::csv_row() const {
  std::ostringstream s;
  s << group_key << ',' << window << ',' << trials << ',' << seed << ','
    << format_double(p_hat) << ',' << format_double(ci) << ','
    << format_double(p_hat_2l) << ',' << format_double(drift) << ',' << flag << ','
    << method;
  return s.str();
}

std::optional<PcEstimate> PcEstimate::from_csv_row(const std::string& row) {
  auto f = split(row, ',');
  if (f.size() != 10) return std::nullopt;
  PcEstimate e;
  e.group_key = f[0];
  e.window = std::stoll(f[1]);
  e.trials = std::stoull(f[2]);
  e.seed = std::stoull(f[3]);
  e.p_hat = std::stod(f[4]);
  e.ci = std::stod(f[5]);
  e.p_hat_2l = std::stod(f[6]);
  e.drift = std::stod(f[7]);
  e.flag = f[8];
  e.method = f[9];
  return e;
}

std::string cache_lookup(const std::string& dir, const std::string& key) {
  if (dir.empty()) return "";
  std::filesystem::path p =
      std::filesystem::path(dir) / (std::to_string(rng::fnv1a(key)) + ".row");
  std::ifstream in(p);
  if (!in) return "";
  std::string row;
  std::getline(in, row);
  return row;
}

void cache_store(const std::string& dir, const std::string& key, const std::string& row) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  std::filesystem::path p =
      std::filesystem::path(dir) / (std::to_string(rng::fnv1a(key)) + ".row");
  std::ofstream out(p);
  out << row << "\n";
}

namespace {

struct ReachCurve {
  std::vector<std::pair<double, Estimate>> evals;

  const Estimate* nearest_below(double p) const {
    const std::pair<double, Estimate>* best = nullptr;
    for (const auto& e : evals)
      if (e.first <= p && (!best || e.first > best->first)) best = &e;
    return best ? &best->second : nullptr;
  }
};

double bisect_reach(const EdgeWindow& win, const PcSettings& s,
                    const rng::SeedRecord& base, ReachCurve& curve) {
  std::vector<std::int32_t> origin{win.origin};
  double lo = 0.0, hi = 1.0;
  int step = 0;
  while (hi - lo > s.tol) {
    double mid = 0.5 * (lo + hi);
    Estimate e = estimate_lazy(
        s.trials, base.substream(static_cast<std::uint64_t>(step)),
        [&](const rng::SeedRecord& ts) {
          return reach_boundary_lazy(win, mid, ts, origin);
        },
        s.threads);
    curve.evals.emplace_back(mid, e);
    if (e.phat >= s.theta)
      hi = mid;
    else
      lo = mid;
    ++step;
  }
  return 0.5 * (lo + hi);
}

double slope_near(const ReachCurve& curve, double p_hat) {
  // local slope of the reach probability, from the two recorded evaluations
  // bracketing p_hat most tightly
  const std::pair<double, Estimate>*lo = nullptr, *hi = nullptr;
  for (const auto& e : curve.evals) {
    if (e.first <= p_hat && (!lo || e.first > lo->first)) lo = &e;
    if (e.first > p_hat && (!hi || e.first < hi->first)) hi = &e;
  }
  if (!lo || !hi || hi->first - lo->first < 1e-12) return 1.0;
  double sl = (hi->second.phat - lo->second.phat) / (hi->first - lo->first);
  return std::max(sl, 0.25);
}

}  // namespace

PcEstimate estimate_pc(const MarkedAbelianGroup& g, const PcSettings& s,
                       std::uint64_t seed) {
  PcEstimate out;
  out.group_key = g.key();
  out.window = s.window;
  out.trials = s.trials;
  out.seed = seed;

  std::ostringstream key;
  key << "pc|" << g.key() << "|L=" << s.window << "|trials=" << s.trials
      << "|tol=" << s.tol << "|theta=" << s.theta << "|seed=" << seed
      << "|2l=" << (s.with_2l ? 1 : 0) << "|pseudo=" << (s.pseudo_for_rank1 ? 1 : 0);
  std::string cached = cache_lookup(s.cache_dir, key.str());
  if (!cached.empty()) {
    auto parsed = PcEstimate::from_csv_row(cached);
    if (parsed) return *parsed;
  }

  if (g.rank() == 0) {
    out.flag = "rejected_rank0";
    out.p_hat = 1.0;
    out.p_hat_2l = 1.0;
    cache_store(s.cache_dir, key.str(), out.csv_row());
    return out;
  }
  if (g.rank() < 2 && !s.pseudo_for_rank1) {
    out.flag = "sentinel_rank";
    out.p_hat = 1.0;
    out.p_hat_2l = 1.0;
    cache_store(s.cache_dir, key.str(), out.csv_row());
    return out;
  }
  if (g.rank() < 2) out.flag = "pseudo_rank1";

  double rs = r_s(g);
  CayleyView view(g);
  rng::SeedRecord base{seed, rng::fnv1a(key.str()), 0};

  EdgeWindow win = ball_window(view, static_cast<double>(s.window) * rs,
                               "pc/" + g.key() + "/L=" + std::to_string(s.window));
  ReachCurve curve;
  out.p_hat = bisect_reach(win, s, base.substream("L"), curve);
  double mc_ci = 0.0;
  if (const Estimate* e = curve.nearest_below(out.p_hat)) mc_ci = e->ci_halfwidth();
  out.ci = 0.5 * s.tol + std::min(0.2, mc_ci / slope_near(curve, out.p_hat));

  if (s.with_2l) {
    EdgeWindow win2 = ball_window(view, 2.0 * static_cast<double>(s.window) * rs,
                                  "pc/" + g.key() + "/L=" + std::to_string(2 * s.window));
    ReachCurve curve2;
    out.p_hat_2l = bisect_reach(win2, s, base.substream("2L"), curve2);
    out.drift = std::abs(out.p_hat - out.p_hat_2l);
  } else {
    out.p_hat_2l = out.p_hat;
    out.drift = 0.0;
  }

  cache_store(s.cache_dir, key.str(), out.csv_row());
  return out;
}

ExperimentSpec ExperimentSpec::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open spec file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

ExperimentSpec ExperimentSpec::parse_text(const std::string& text, const std::string& name) {
  ExperimentSpec spec;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header_seen = false;

  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument(name + ":" + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (!header_seen) {
      if (s != "abperc v1") fail("expected header 'abperc v1'");
      header_seen = true;
      continue;
    }
    std::istringstream ls(s);
    std::string word;
    ls >> word;
    std::string rest = trim(s.substr(word.size()));
    try {
      if (word == "experiment") {
        spec.id = rest;
      } else if (word == "kind") {
        if (rest != "locality" && rest != "monotonicity" && rest != "estimate-pc")
          fail("unknown kind '" + rest + "'");
        spec.kind = rest;
      } else if (word == "group") {
        spec.groups.emplace_back(rest, rest);
      } else if (word == "limit") {
        spec.limit_literal = rest;
      } else if (word == "lambda") {
        auto rows = parse_vector_list(rest, 0, nullptr);
        if (rows.size() != 1) fail("lambda expects a single vector per line");
        spec.lambda_rows.push_back(rows[0]);
      } else if (word == "family") {
        std::istringstream fs(rest);
        std::string fam;
        fs >> fam;
        if (fam == "zchain") {
          std::string list;
          fs >> list;
          for (const auto& tok : split(list, ',')) {
            std::int64_t n = std::stoll(tok);
            std::ostringstream lit;
            lit << "Z^1:(1),(" << n << "),(" << n + 1 << ")";
            spec.groups.emplace_back("zchain n=" + tok, lit.str());
          }
        } else if (fam == "addmark" || fam == "quotient") {
          std::map<std::string, std::string> kv;
          std::string tok;
          while (fs >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) fail("family option needs key=value");
            kv[tok.substr(0, eq)] = tok.substr(eq + 1);
          }
          if (!kv.count("base") || !kv.count("vec") || !kv.count("n"))
            fail("family needs base=, vec=, n=");
          for (const auto& ntok : split(kv["n"], ',')) {
            std::int64_t n = std::stoll(ntok);
            auto vecs = parse_vector_list(kv["vec"], n, nullptr);
            if (vecs.size() != 1) fail("vec= expects one vector");
            std::ostringstream lit;
            if (fam == "addmark") {
              // base must be a marks literal; append the extra mark
              if (kv["base"].rfind("Z^", 0) != 0) fail("addmark base must be Z^D:(...)");
              lit << kv["base"] << ",(";
              for (Eigen::Index i = 0; i < vecs[0].size(); ++i) {
                if (i) lit << ',';
                lit << vecs[0][i];
              }
              lit << ')';
            } else {
              // canonical base; adjoin the row to the defining lattice
              MarkedAbelianGroup base = parse_group_literal(kv["base"]);
              BigMat rows = base.defining_lattice().basis();
              rows.push_back(to_big(vecs[0]));
              IntegerLattice l =
                  hermite_normal_form_big(base.defining_lattice().ambient_dim(), rows);
              lit << l.key();
            }
            spec.groups.emplace_back(fam + " n=" + ntok, lit.str());
          }
        } else {
          fail("unknown family '" + fam + "'");
        }
      } else if (word == "window") {
        spec.settings.window = std::stoll(rest);
      } else if (word == "trials") {
        spec.settings.trials = std::stoull(rest);
      } else if (word == "tol") {
        spec.settings.tol = std::stod(rest);
      } else if (word == "theta") {
        spec.settings.theta = std::stod(rest);
      } else if (word == "threads") {
        spec.settings.threads = std::stoi(rest);
      } else if (word == "seed") {
        spec.seed = std::stoull(rest);
      } else if (word == "cache-dir") {
        spec.settings.cache_dir = rest;
      } else if (word == "out") {
        spec.out_path = rest;
      } else {
        fail("unknown directive '" + word + "'");
      }
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
  if (!header_seen) {
    lineno = 0;
    fail("missing header 'abperc v1'");
  }
  if (spec.kind.empty()) {
    lineno = 0;
    fail("missing 'kind'");
  }
  return spec;
}

std::string LocalityResult::csv() const {
  std::ostringstream s;
  s << "index,label,group,flag,p_hat,ci,L,trials,seed,mg_distance,mg_radius,"
       "cert_radius,cert_size,gap\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    s << i << ',' << r.label << ',' << r.est.group_key << ',' << r.est.flag << ','
      << format_double(r.est.p_hat) << ',' << format_double(r.est.ci) << ','
      << r.est.window << ',' << r.est.trials << ',' << r.est.seed << ','
      << format_double(r.dist.value) << ',' << r.dist.agree_radius << ','
      << (r.has_certificate ? std::to_string(r.certificate_radius) : "none") << ','
      << (r.has_certificate ? std::to_string(r.certificate_size) : "none") << ','
      << format_double(r.gap) << '\n';
  }
  s << "limit,limit," << limit.group_key << ',' << limit.flag << ','
    << format_double(limit.p_hat) << ',' << format_double(limit.ci) << ','
    << limit.window << ',' << limit.trials << ',' << limit.seed << ','
    << format_double(0.0) << ",-1,none,none," << format_double(0.0) << '\n';
  return s.str();
}

LocalityResult run_locality(const ExperimentSpec& spec) {
  if (spec.limit_literal.empty())
    throw std::invalid_argument("run_locality: spec needs a limit group");
  MarkedAbelianGroup limit_g = parse_group_literal(spec.limit_literal);
  if (limit_g.rank() < 2)
    throw std::invalid_argument("run_locality: limit group must have rank >= 2");

  LocalityResult out;
  out.limit = estimate_pc(limit_g, spec.settings, spec.seed);

  PcSettings row_settings = spec.settings;
  row_settings.pseudo_for_rank1 = true;

  for (const auto& [label, literal] : spec.groups) {
    MarkedAbelianGroup g = parse_group_literal(literal);
    LocalityRow row;
    row.label = label;
    row.est = estimate_pc(g, row_settings, spec.seed);
    if (g.marks() == limit_g.marks()) {
      row.dist = mg_distance(g, limit_g, 8);
      for (std::int64_t k = 6; k >= 1; --k) {
        auto cert = convergence_certificate(limit_g, g, k);
        if (cert) {
          row.has_certificate = true;
          row.certificate_size = cert->size();
          row.certificate_radius = k;
          break;
        }
      }
    }
    row.gap = std::abs(row.est.p_hat - out.limit.p_hat);
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::string MonotonicityResult::csv() const {
  std::ostringstream s;
  s << "label,group,flag,p_hat,ci,L,trials,seed,ordered_vs_base\n";
  s << "base," << base.group_key << ',' << base.flag << ',' << format_double(base.p_hat)
    << ',' << format_double(base.ci) << ',' << base.window << ',' << base.trials << ','
    << base.seed << ",1\n";
  for (const auto& r : rows)
    s << r.label << ',' << r.est.group_key << ',' << r.est.flag << ','
      << format_double(r.est.p_hat) << ',' << format_double(r.est.ci) << ','
      << r.est.window << ',' << r.est.trials << ',' << r.est.seed << ','
      << (r.ordered_vs_base ? 1 : 0) << '\n';
  return s.str();
}

MonotonicityResult run_monotonicity(const MarkedAbelianGroup& g,
                                    const std::vector<std::vector<GroupElement>>& lambdas,
                                    const PcSettings& s, std::uint64_t seed) {
  MonotonicityResult out;
  out.base = estimate_pc(g, s, seed);
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    MarkedAbelianGroup q = g.quotient(lambdas[i]);
    MonotonicityRow row;
    row.label = "quotient" + std::to_string(i);
    row.est = estimate_pc(q, s, seed);
    row.ordered_vs_base =
        row.est.p_hat >= out.base.p_hat - (row.est.ci + out.base.ci);
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace abperc
