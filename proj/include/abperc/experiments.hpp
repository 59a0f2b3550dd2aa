#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "abperc/renorm.hpp"

namespace abperc {

// Accepted forms:
//   "3;1,1,-1"                canonical: mark count, then lattice rows
//   "Z^2:(1,0),(0,1),(1,1)"   marks of Z^D; the relation kernel is computed
MarkedAbelianGroup parse_group_literal(const std::string& literal);

struct PcSettings {
  std::int64_t window = 128;  // ball radius in units of R_S
  std::uint64_t trials = 10000;
  double tol = 0.01;
  double theta = 0.5;  // boundary-reach level the bisection targets
  int threads = 1;
  bool with_2l = true;
  bool pseudo_for_rank1 = false;  // window pseudo-threshold instead of the sentinel
  std::string cache_dir;
};

struct PcEstimate {
  std::string group_key;
  double p_hat = 1.0;
  double ci = 0.0;
  std::int64_t window = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double p_hat_2l = 1.0;
  double drift = 0.0;
  std::string flag = "ok";  // ok | sentinel_rank | pseudo_rank1 | rejected_rank0
  std::string method = "reach-bisect";

  std::string csv_row() const;
  static std::string csv_header();
  static std::optional<PcEstimate> from_csv_row(const std::string& row);
};

// Bisection of p against P_p(0 <-> boundary of the L-ball window) = theta,
// reported at L and 2L to expose finite-size drift. Rank < 2 yields the
// sentinel p_c = 1 unless pseudo_for_rank1 asks for the window
// pseudo-threshold (rank 0 is always rejected).
PcEstimate estimate_pc(const MarkedAbelianGroup& g, const PcSettings& s,
                       std::uint64_t seed);

struct ExperimentSpec {
  std::string id = "exp";
  std::string kind;  // locality | monotonicity | estimate-pc
  std::vector<std::pair<std::string, std::string>> groups;  // label, literal
  std::string limit_literal;
  std::vector<IVec> lambda_rows;  // monotonicity: Z^d lift vectors, one per quotient
  PcSettings settings;
  std::uint64_t seed = 0;
  std::string out_path;

  static ExperimentSpec parse_file(const std::string& path);
  static ExperimentSpec parse_text(const std::string& text, const std::string& name);
};

struct LocalityRow {
  std::string label;
  PcEstimate est;
  MgDistance dist;
  bool has_certificate = false;
  std::size_t certificate_size = 0;
  std::int64_t certificate_radius = 0;  // largest k <= 6 with a certificate
  double gap = 0;  // |p_hat - limit p_hat|
};

struct LocalityResult {
  std::vector<LocalityRow> rows;
  PcEstimate limit;
  std::string csv() const;
};

LocalityResult run_locality(const ExperimentSpec& spec);

struct MonotonicityRow {
  std::string label;
  PcEstimate est;
  bool ordered_vs_base = false;  // p_hat >= base p_hat - combined ci
};

struct MonotonicityResult {
  PcEstimate base;
  std::vector<MonotonicityRow> rows;
  std::string csv() const;
};

MonotonicityResult run_monotonicity(const MarkedAbelianGroup& g,
                                    const std::vector<std::vector<GroupElement>>& lambdas,
                                    const PcSettings& s, std::uint64_t seed);

// cache: key -> verbatim row
std::string cache_lookup(const std::string& dir, const std::string& key);
void cache_store(const std::string& dir, const std::string& key, const std::string& row);

std::string format_double(double v);

}  // namespace abperc
