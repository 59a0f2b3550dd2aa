#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "abperc/lattice.hpp"

namespace abperc {

// Element of Z^r x T in canonical form: torsion residue i lies in [0, t_i).
struct GroupElement {
  IVec free;
  IVec tor;

  bool operator==(const GroupElement& o) const {
    return free == o.free && tor == o.tor;
  }
  bool operator!=(const GroupElement& o) const { return !(*this == o); }
  bool is_zero() const { return free.isZero() && tor.isZero(); }
};

bool lex_less(const GroupElement& a, const GroupElement& b);

struct GroupElementHash {
  std::size_t operator()(const GroupElement& x) const noexcept;
};

// An abelian group with an ordered generating d-tuple, keyed canonically by
// the subgroup of Z^d of relations among the marks. Realized as Z^r x T with
// T = prod Z/t_i, t_1 | t_2 | ... , each t_i >= 2.
class MarkedAbelianGroup {
 public:
  static MarkedAbelianGroup from_subgroup(std::int64_t d, const IntegerLattice& gamma);

  // [Z^D; given marks]: the group is Z^D, the relation lattice is the kernel
  // of Z^d -> Z^D sending e_i to marks[i].
  static MarkedAbelianGroup from_marks(std::int64_t ambient, const std::vector<IVec>& marks);

  std::int64_t marks() const { return d_; }
  const IntegerLattice& defining_lattice() const { return gamma_; }
  std::int64_t rank() const { return rank_; }
  const std::vector<std::int64_t>& torsion() const { return torsion_; }
  const std::vector<GroupElement>& generator_images() const { return images_; }

  GroupElement zero() const;
  GroupElement canonicalize(GroupElement x) const;
  GroupElement add(const GroupElement& a, const GroupElement& b) const;
  GroupElement negate(const GroupElement& a) const;
  GroupElement sub(const GroupElement& a, const GroupElement& b) const;
  void check_element(const GroupElement& x) const;

  // Z^d -> G along the marks.
  GroupElement project(const IVec& z) const;
  // Some integer preimage of x under Z^d -> G (well defined mod Gamma).
  IVec lift(const GroupElement& x) const;

  // Kernel of Z^d -> G computed from the generator images; equals the
  // defining lattice by construction, recomputed here as a consistency check.
  IntegerLattice relation_lattice() const;

  MarkedAbelianGroup quotient(const std::vector<GroupElement>& lambda_gens) const;

  std::string key() const { return gamma_.key(); }
  std::string format() const { return key(); }
  static MarkedAbelianGroup parse(const std::string& literal);

  bool operator==(const MarkedAbelianGroup& o) const {
    return d_ == o.d_ && gamma_ == o.gamma_;
  }

 private:
  std::int64_t d_ = 0;
  IntegerLattice gamma_;
  std::int64_t rank_ = 0;
  std::vector<std::int64_t> torsion_;
  std::vector<GroupElement> images_;
  // columns of v_ change coordinates: x in Z^d maps to y = x * v_, whose last
  // `rank_` entries are the free part and whose entries at torsion slots are
  // residues. v_inv_ undoes it for lifts.
  BigMat v_;
  BigMat v_inv_;
  std::vector<std::int64_t> tor_slot_;   // positions in y carrying torsion
  std::vector<BigInt> diag_;
};

// 2^{-n} with n the largest k <= k_max at which the two defining lattices
// have identical point sets in the Euclidean ball of radius k; 0 means
// agreement everywhere up to k_max. Different mark counts give distance 1.
struct MgDistance {
  double value = 1.0;
  std::int64_t agree_radius = -1;   // largest verified k, -1 if none
  bool exhausted_k_max = false;     // agreed all the way to k_max
};
MgDistance mg_distance(const MarkedAbelianGroup& g, const MarkedAbelianGroup& h,
                       std::int64_t k_max);

// Word-metric ball of radius k as a list of elements (BFS order).
std::vector<GroupElement> word_ball_elements(const MarkedAbelianGroup& g, std::int64_t k,
                                             std::size_t vertex_budget = 2'000'000);

// If h = g / Lambda with Lambda meeting the word ball of radius k only in 0,
// returns generators of Lambda (as elements of g); otherwise nullopt.
std::optional<std::vector<GroupElement>> convergence_certificate(
    const MarkedAbelianGroup& g, const MarkedAbelianGroup& h, std::int64_t k);

}  // namespace abperc
