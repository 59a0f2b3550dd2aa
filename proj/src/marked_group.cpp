#include "abperc/marked_group.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include "abperc/rng.hpp"

namespace abperc {

bool lex_less(const GroupElement& a, const GroupElement& b) {
  for (Eigen::Index i = 0; i < a.free.size(); ++i)
    if (a.free[i] != b.free[i]) return a.free[i] < b.free[i];
  for (Eigen::Index i = 0; i < a.tor.size(); ++i)
    if (a.tor[i] != b.tor[i]) return a.tor[i] < b.tor[i];
  return false;
}

std::size_t GroupElementHash::operator()(const GroupElement& x) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ull;
  for (Eigen::Index i = 0; i < x.free.size(); ++i)
    h = rng::mix64(h ^ static_cast<std::uint64_t>(x.free[i]));
  for (Eigen::Index i = 0; i < x.tor.size(); ++i)
    h = rng::mix64(h ^ static_cast<std::uint64_t>(x.tor[i]));
  return static_cast<std::size_t>(h);
}

MarkedAbelianGroup MarkedAbelianGroup::from_subgroup(std::int64_t d,
                                                     const IntegerLattice& gamma) {
  if (gamma.ambient_dim() != d)
    throw std::invalid_argument("from_subgroup: dimension mismatch");
  MarkedAbelianGroup g;
  g.d_ = d;
  g.gamma_ = gamma;

  SmithDecomposition snf = smith_decomposition(gamma);
  g.rank_ = snf.quotient_rank;
  g.torsion_ = snf.torsion;
  g.v_ = std::move(snf.v);
  g.v_inv_ = std::move(snf.v_inv);
  g.diag_ = snf.diag;
  std::int64_t m = gamma.rank();
  for (std::int64_t i = 0; i < m; ++i)
    if (g.diag_[static_cast<std::size_t>(i)] >= 2) g.tor_slot_.push_back(i);

  for (std::int64_t i = 0; i < d; ++i) {
    IVec e = IVec::Zero(d);
    e[i] = 1;
    g.images_.push_back(g.project(e));
  }
  return g;
}

MarkedAbelianGroup MarkedAbelianGroup::from_marks(std::int64_t ambient,
                                                  const std::vector<IVec>& marks) {
  std::int64_t d = static_cast<std::int64_t>(marks.size());
  if (d == 0) throw std::invalid_argument("from_marks: need at least one mark");
  BigMat a(static_cast<std::size_t>(d), BigRow(static_cast<std::size_t>(ambient), 0));
  for (std::int64_t i = 0; i < d; ++i) {
    if (marks[static_cast<std::size_t>(i)].size() != ambient)
      throw std::invalid_argument("from_marks: mark dimension mismatch");
    a[static_cast<std::size_t>(i)] = to_big(marks[static_cast<std::size_t>(i)]);
  }
  return from_subgroup(d, integer_kernel(d, a));
}

GroupElement MarkedAbelianGroup::zero() const {
  GroupElement x;
  x.free = IVec::Zero(rank_);
  x.tor = IVec::Zero(static_cast<Eigen::Index>(torsion_.size()));
  return x;
}

GroupElement MarkedAbelianGroup::canonicalize(GroupElement x) const {
  for (std::size_t i = 0; i < torsion_.size(); ++i) {
    std::int64_t t = torsion_[i];
    std::int64_t r = x.tor[static_cast<Eigen::Index>(i)] % t;
    if (r < 0) r += t;
    x.tor[static_cast<Eigen::Index>(i)] = r;
  }
  return x;
}

void MarkedAbelianGroup::check_element(const GroupElement& x) const {
  if (x.free.size() != rank_ || x.tor.size() != static_cast<Eigen::Index>(torsion_.size()))
    throw std::invalid_argument("element shape does not match group");
}

GroupElement MarkedAbelianGroup::add(const GroupElement& a, const GroupElement& b) const {
  check_element(a);
  check_element(b);
  GroupElement c;
  c.free = a.free + b.free;
  c.tor = a.tor + b.tor;
  return canonicalize(std::move(c));
}

GroupElement MarkedAbelianGroup::negate(const GroupElement& a) const {
  check_element(a);
  GroupElement c;
  c.free = -a.free;
  c.tor = -a.tor;
  return canonicalize(std::move(c));
}

GroupElement MarkedAbelianGroup::sub(const GroupElement& a, const GroupElement& b) const {
  return add(a, negate(b));
}

GroupElement MarkedAbelianGroup::project(const IVec& z) const {
  if (z.size() != d_) throw std::invalid_argument("project: dimension mismatch");
  std::int64_t m = gamma_.rank();
  BigRow y(static_cast<std::size_t>(d_), 0);
  for (std::int64_t j = 0; j < d_; ++j) {
    BigInt s = 0;
    for (std::int64_t i = 0; i < d_; ++i)
      s += BigInt(z[i]) * v_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(j)] = s;
  }
  GroupElement x;
  x.free = IVec::Zero(rank_);
  for (std::int64_t j = 0; j < rank_; ++j) {
    BigRow tmp{y[static_cast<std::size_t>(m + j)]};
    x.free[j] = to_i64(tmp)[0];
  }
  x.tor = IVec::Zero(static_cast<Eigen::Index>(tor_slot_.size()));
  for (std::size_t i = 0; i < tor_slot_.size(); ++i) {
    BigInt t = diag_[static_cast<std::size_t>(tor_slot_[i])];
    BigInt r = y[static_cast<std::size_t>(tor_slot_[i])] % t;
    if (r < 0) r += t;
    BigRow tmp{r};
    x.tor[static_cast<Eigen::Index>(i)] = to_i64(tmp)[0];
  }
  return x;
}

IVec MarkedAbelianGroup::lift(const GroupElement& x) const {
  check_element(x);
  std::int64_t m = gamma_.rank();
  BigRow y(static_cast<std::size_t>(d_), 0);
  for (std::int64_t j = 0; j < rank_; ++j)
    y[static_cast<std::size_t>(m + j)] = x.free[j];
  for (std::size_t i = 0; i < tor_slot_.size(); ++i)
    y[static_cast<std::size_t>(tor_slot_[i])] = x.tor[static_cast<Eigen::Index>(i)];
  BigRow z(static_cast<std::size_t>(d_), 0);
  for (std::int64_t j = 0; j < d_; ++j) {
    BigInt s = 0;
    for (std::int64_t i = 0; i < d_; ++i)
      s += y[static_cast<std::size_t>(i)] *
           v_inv_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    z[static_cast<std::size_t>(j)] = s;
  }
  return to_i64(z);
}

IntegerLattice MarkedAbelianGroup::relation_lattice() const {
  // kernel of c -> sum c_i images_[i], with torsion congruences absorbed by
  // auxiliary columns scaled by t_j.
  std::size_t q = torsion_.size();
  std::size_t cols = static_cast<std::size_t>(rank_) + q;
  BigMat a(static_cast<std::size_t>(d_ + static_cast<std::int64_t>(q)), BigRow(cols, 0));
  for (std::int64_t i = 0; i < d_; ++i) {
    const GroupElement& s = images_[static_cast<std::size_t>(i)];
    for (std::int64_t j = 0; j < rank_; ++j)
      a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s.free[j];
    for (std::size_t j = 0; j < q; ++j)
      a[static_cast<std::size_t>(i)][static_cast<std::size_t>(rank_) + j] =
          s.tor[static_cast<Eigen::Index>(j)];
  }
  for (std::size_t j = 0; j < q; ++j)
    a[static_cast<std::size_t>(d_) + j][static_cast<std::size_t>(rank_) + j] = torsion_[j];

  IntegerLattice k = integer_kernel(d_ + static_cast<std::int64_t>(q), a);
  // drop the auxiliary coordinates
  BigMat rows;
  for (const auto& row : k.basis())
    rows.emplace_back(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(d_));
  return hermite_normal_form_big(d_, rows);
}

MarkedAbelianGroup MarkedAbelianGroup::quotient(
    const std::vector<GroupElement>& lambda_gens) const {
  BigMat rows = gamma_.basis();
  for (const auto& x : lambda_gens) rows.push_back(to_big(lift(x)));
  return from_subgroup(d_, hermite_normal_form_big(d_, rows));
}

MarkedAbelianGroup MarkedAbelianGroup::parse(const std::string& literal) {
  IntegerLattice l = IntegerLattice::parse(literal);
  return from_subgroup(l.ambient_dim(), l);
}

MgDistance mg_distance(const MarkedAbelianGroup& g, const MarkedAbelianGroup& h,
                       std::int64_t k_max) {
  MgDistance out;
  if (g.marks() != h.marks()) return out;  // distance 1 by convention
  std::int64_t n = -1;
  for (std::int64_t k = 0; k <= k_max; ++k) {
    auto pg = g.defining_lattice().points_in_ball(static_cast<double>(k));
    auto ph = h.defining_lattice().points_in_ball(static_cast<double>(k));
    if (pg.size() != ph.size() || !std::equal(pg.begin(), pg.end(), ph.begin()))
      break;
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

std::vector<GroupElement> word_ball_elements(const MarkedAbelianGroup& g, std::int64_t k,
                                             std::size_t vertex_budget) {
  std::vector<GroupElement> steps;
  for (const auto& s : g.generator_images()) {
    if (s.is_zero()) continue;
    GroupElement ns = g.negate(s);
    bool seen = false;
    for (const auto& t : steps)
      if (t == s) {
        seen = true;
        break;
      }
    if (!seen) steps.push_back(s);
    seen = false;
    for (const auto& t : steps)
      if (t == ns) {
        seen = true;
        break;
      }
    if (!seen) steps.push_back(ns);
  }

  std::vector<GroupElement> ball{g.zero()};
  std::unordered_set<GroupElement, GroupElementHash> seen{g.zero()};
  std::size_t frontier_begin = 0;
  for (std::int64_t level = 0; level < k; ++level) {
    std::size_t frontier_end = ball.size();
    for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
      for (const auto& s : steps) {
        GroupElement y = g.add(ball[i], s);
        if (seen.insert(y).second) {
          ball.push_back(std::move(y));
          if (ball.size() > vertex_budget)
            throw std::runtime_error("word_ball: vertex budget exceeded");
        }
      }
    }
    frontier_begin = frontier_end;
  }
  return ball;
}

std::optional<std::vector<GroupElement>> convergence_certificate(
    const MarkedAbelianGroup& g, const MarkedAbelianGroup& h, std::int64_t k) {
  if (g.marks() != h.marks()) return std::nullopt;
  // need Gamma_g contained in Gamma_h
  for (const auto& row : g.defining_lattice().basis())
    if (!h.defining_lattice().contains(row)) return std::nullopt;

  std::vector<GroupElement> lambda;
  for (const auto& row : h.defining_lattice().basis()) {
    GroupElement x = g.project(to_i64(row));
    if (!x.is_zero()) lambda.push_back(x);
  }

  for (const auto& x : word_ball_elements(g, k)) {
    if (x.is_zero()) continue;
    if (h.defining_lattice().contains(g.lift(x))) return std::nullopt;
  }
  return lambda;
}

}  // namespace abperc
