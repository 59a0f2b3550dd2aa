#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <vector>

namespace abperc {

using BigInt = boost::multiprecision::cpp_int;
using BigRow = std::vector<BigInt>;
using BigMat = std::vector<BigRow>;

using IVec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using IMat64 = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

BigRow to_big(const IVec& v);
IVec to_i64(const BigRow& r);  // throws on overflow

// A subgroup of Z^d stored in canonical row Hermite normal form: pivot
// columns strictly increasing, pivots positive, entries above a pivot reduced
// into [0, pivot). Two values generate the same subgroup iff their stored
// bases are identical.
class IntegerLattice {
 public:
  IntegerLattice() = default;
  static IntegerLattice zero(std::int64_t ambient_dim);

  std::int64_t ambient_dim() const { return d_; }
  std::int64_t rank() const { return static_cast<std::int64_t>(rows_.size()); }
  const BigMat& basis() const { return rows_; }
  IMat64 basis_i64() const;

  bool contains(const BigRow& v) const;
  bool contains(const IVec& v) const { return contains(to_big(v)); }

  // Exactly the lattice points x with ||x||_2 <= radius, sorted
  // lexicographically. The comparison against radius^2 is exact (the double
  // is expanded as m * 2^e).
  std::vector<IVec> points_in_ball(double radius) const;

  bool operator==(const IntegerLattice& o) const {
    return d_ == o.d_ && rows_ == o.rows_;
  }
  bool operator!=(const IntegerLattice& o) const { return !(*this == o); }

  // Canonical text form "d;a,b,..;c,d,.." (zero lattice: just "d").
  std::string key() const;
  static IntegerLattice parse(const std::string& text);

  friend IntegerLattice hermite_normal_form_big(std::int64_t d, const BigMat& gens);

 private:
  std::int64_t d_ = 0;
  BigMat rows_;
};

IntegerLattice hermite_normal_form(std::int64_t d, const std::vector<IVec>& generators);
IntegerLattice hermite_normal_form_big(std::int64_t d, const BigMat& generators);
IntegerLattice lattice_sum(const IntegerLattice& a, const IntegerLattice& b);

// U * M * V = D for the canonical basis M of the lattice (rank m rows, d
// cols). diag holds d_1 | d_2 | ... | d_m, all positive. V and its inverse
// are unimodular d x d.
struct SmithDecomposition {
  BigMat u;               // m x m
  BigMat v;               // d x d
  BigMat v_inv;           // d x d
  std::vector<BigInt> diag;
  std::int64_t quotient_rank = 0;           // d - m
  std::vector<std::int64_t> torsion;        // diag entries >= 2
};

SmithDecomposition smith_decomposition(const IntegerLattice& lattice);

// Rows c in Z^d with c * A = 0, for A a d x n integer matrix.
IntegerLattice integer_kernel(std::int64_t d, const BigMat& a);

// Plain helpers on BigMat (row-major, rectangular).
BigMat big_identity(std::int64_t n);
BigMat big_mul(const BigMat& a, const BigMat& b);
BigInt big_det(BigMat a);  // Bareiss, square input

}  // namespace abperc
