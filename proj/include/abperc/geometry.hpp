#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "abperc/marked_group.hpp"

namespace abperc {

using Vec2 = Eigen::Vector2d;

inline constexpr double kGeomTol = 1e-9;

// Orthonormal basis of R^r; the planar projection reads off the first two
// coordinates in this basis.
struct Basis {
  Eigen::MatrixXd e;  // r x r, orthonormal columns

  static Basis standard(Eigen::Index r);
  Eigen::Index dim() const { return e.rows(); }
  double ortho_residual() const;
  Vec2 project(const Eigen::VectorXd& x_free) const {
    return Vec2(e.col(0).dot(x_free), e.col(1).dot(x_free));
  }
  Vec2 project_i(const IVec& x_free) const {
    return project(x_free.cast<double>());
  }
};

struct PlanarBox {
  double x0, x1, y0, y1;  // closed; +-inf allowed
};
struct PlanarSegment {
  Vec2 a, b;
};
// center + { lam*p + mu*q : |lam| + |mu| <= 1 }
struct PlanarParallelogram {
  Vec2 center, p, q;
};

// Finite union of convex pieces with exact point-distance queries.
class PlanarSet {
 public:
  using Piece = std::variant<PlanarBox, PlanarSegment, PlanarParallelogram>;

  PlanarSet() = default;

  static PlanarSet point(const Vec2& p) { return segment(p, p); }
  static PlanarSet segment(const Vec2& a, const Vec2& b);
  static PlanarSet parallelogram(const Vec2& a, const Vec2& b);  // spanned at 0
  static PlanarSet box(double x0, double x1, double y0, double y1);

  PlanarSet& add(Piece piece);
  PlanarSet unite(const PlanarSet& other) const;
  PlanarSet translated(const Vec2& t) const;
  PlanarSet scaled(double s) const;

  bool empty() const { return pieces_.empty(); }
  double distance(const Vec2& pt) const;
  bool contains(const Vec2& pt, double tol = kGeomTol) const {
    return distance(pt) <= tol;
  }

  // Union of per-piece topological boundaries; a superset of the boundary of
  // the union, which keeps the path-crossing oracle sound.
  PlanarSet boundary() const;

  const std::vector<Piece>& pieces() const { return pieces_; }

 private:
  std::vector<Piece> pieces_;
};

double piece_distance(const PlanarSet::Piece& piece, const Vec2& pt);

// Max Euclidean norm of the free parts of the marks.
double r_s(const MarkedAbelianGroup& g);

struct GoodQuadruple {
  Vec2 a, b, v;
  Vec2 u() const { return 0.5 * (a + b); }
};

struct QuadrupleDiagnostics {
  bool good = false;
  double v_line_residual = 0;  // distance from v to the segment [-a, b]
  double disk_margin = 0;      // min edge-line distance minus r_s
  bool boundary_touch = false; // disk condition holds with ~zero margin
};

QuadrupleDiagnostics is_good_quadruple(const Vec2& a, const Vec2& b, const Vec2& v,
                                       double rs, double tol = kGeomTol);

// Membership in Graph(X) = ((pi^{-1}(X) + B(R_S)) cap Z^r) x T reduces to a
// planar distance test because pi is a coordinate projection in an
// orthonormal basis.
class GraphSet {
 public:
  GraphSet() = default;
  GraphSet(PlanarSet region, double rs) : region_(std::move(region)), rs_(rs) {}

  const PlanarSet& region() const { return region_; }
  double rs() const { return rs_; }
  bool contains(const Vec2& pi, double margin = 0.0) const {
    return region_.distance(pi) <= rs_ + margin + kGeomTol;
  }

 private:
  PlanarSet region_;
  double rs_ = 0;
};

// The four zone segments [a,u], [u,b], [b,v], [v,-a].
std::array<PlanarSegment, 4> zone_segments(const GoodQuadruple& q);

struct ChimneySets {
  PlanarSet c;   // parallelogram spanned by a=(n,h-l), b=(n,h+l)
  PlanarSet lr;  // [a,b] u [-a,-b]
  PlanarSet ud;  // [-a,b] u [-b,a]
};
ChimneySets chimney_sets(double n, double h, double l);

inline double ell_b(double n, double h, double n_b) {
  return n_b * (1.0 + std::abs(h) / n);
}

// Planar pieces used by the ell_eq harness: a quarter-plane union X with the
// two boundary rays, the truncated version X_n with its side/corner exits,
// and the vertical strip Y.
struct EllEqSets {
  PlanarSet x, x_boundary;
  PlanarSet x_n, x_n_exit_sides, x_n_exit_corner;
  PlanarSet y, y_boundary;
};
EllEqSets ell_eq_sets(double n, double n_b);

// Upper bound on max_w Card{ z in Z^2 : w + z1*u + z2*v in 5*[a,b,-a,-b] },
// evaluated exactly on the arrangement of translated parallelograms when
// small, else on a grid with an inflation slack.
struct KappaResult {
  std::int64_t value = 0;
  bool exact = false;
};
KappaResult kappa(const GoodQuadruple& q);

// Basis with the plane orthogonal to the free span of lambda; prefers
// coordinate axes when they qualify, otherwise uses an SVD null space.
Basis aligned_basis(const MarkedAbelianGroup& base, const std::vector<GroupElement>& lambda);

// Coarse graining layout on a quotient H = G/Lambda of rank exactly 2.
struct RenormLayout {
  MarkedAbelianGroup base;
  MarkedAbelianGroup quot;
  std::vector<GroupElement> lambda;  // generators of Lambda inside base
  Basis basis;
  GoodQuadruple quad;
  double rs = 0;
  std::int64_t z_radius = 0;

  // planar image of a quotient vertex (well defined by the alignment)
  Vec2 planar(const GroupElement& quot_elt) const;
  PlanarSet box_region(const Eigen::Vector2i& z) const;
  PlanarSet corridor_region(const Eigen::Vector2i& z) const;
  double alignment_residual() const;
};

RenormLayout make_layout(const MarkedAbelianGroup& base,
                         const std::vector<GroupElement>& lambda,
                         const GoodQuadruple& quad, std::int64_t z_radius);

// Path oracle: a path entering/leaving Graph(X) must meet Graph(boundary).
// Precondition: first vertex inside, last outside.
bool boundary_separation_check(const std::vector<GroupElement>& path,
                               const PlanarSet& x, const Basis& basis,
                               const MarkedAbelianGroup& g);

// Integer points of the closed r-dimensional ball of the given radius.
std::vector<IVec> integer_ball_offsets(Eigen::Index r, double radius);

// Planar images of the integer R_S-ball, deduplicated. Membership of x in
// the Minkowski sum Graph(X) + B(1) reduces to: some offset o with
// dist(pi(x) - o, X) <= R_S.
std::vector<Vec2> planar_ball_offsets(const Basis& basis, double rs);
bool inflated_contains(const PlanarSet& region, double rs, const Vec2& pi,
                       const std::vector<Vec2>& offsets);

}  // namespace abperc
