#include "abperc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abperc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Vec2& a, const Vec2& b, const Vec2& pt) {
  Vec2 ab = b - a;
  double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (pt - a).norm();
  double t = std::clamp((pt - a).dot(ab) / len2, 0.0, 1.0);
  return (pt - (a + t * ab)).norm();
}

double box_distance(const PlanarBox& box, const Vec2& pt) {
  double dx = std::max({box.x0 - pt.x(), 0.0, pt.x() - box.x1});
  double dy = std::max({box.y0 - pt.y(), 0.0, pt.y() - box.y1});
  return std::hypot(dx, dy);
}

double parallelogram_distance(const PlanarParallelogram& par, const Vec2& pt) {
  double det = cross2(par.p, par.q);
  double scale = std::max(par.p.norm(), par.q.norm());
  if (std::abs(det) <= kGeomTol * scale * scale) {
    Vec2 w = par.p.norm() >= par.q.norm() ? par.p : par.q;
    return segment_distance(par.center - w, par.center + w, pt);
  }
  Vec2 d = pt - par.center;
  double lam = (d.x() * par.q.y() - d.y() * par.q.x()) / det;
  double mu = (par.p.x() * d.y() - par.p.y() * d.x()) / det;
  if (std::abs(lam) + std::abs(mu) <= 1.0) return 0.0;
  Vec2 v1 = par.center + par.p, v2 = par.center + par.q;
  Vec2 v3 = par.center - par.p, v4 = par.center - par.q;
  return std::min({segment_distance(v1, v2, pt), segment_distance(v2, v3, pt),
                   segment_distance(v3, v4, pt), segment_distance(v4, v1, pt)});
}

}  // namespace

Basis Basis::standard(Eigen::Index r) {
  Basis b;
  b.e = Eigen::MatrixXd::Identity(r, r);
  return b;
}

double Basis::ortho_residual() const {
  return (e.transpose() * e - Eigen::MatrixXd::Identity(e.cols(), e.cols()))
      .cwiseAbs()
      .maxCoeff();
}

PlanarSet PlanarSet::segment(const Vec2& a, const Vec2& b) {
  PlanarSet s;
  s.pieces_.push_back(PlanarSegment{a, b});
  return s;
}

PlanarSet PlanarSet::parallelogram(const Vec2& a, const Vec2& b) {
  PlanarSet s;
  s.pieces_.push_back(PlanarParallelogram{Vec2::Zero(), a, b});
  return s;
}

PlanarSet PlanarSet::box(double x0, double x1, double y0, double y1) {
  PlanarSet s;
  s.pieces_.push_back(PlanarBox{x0, x1, y0, y1});
  return s;
}

PlanarSet& PlanarSet::add(Piece piece) {
  pieces_.push_back(std::move(piece));
  return *this;
}

PlanarSet PlanarSet::unite(const PlanarSet& other) const {
  PlanarSet s = *this;
  for (const auto& p : other.pieces_) s.pieces_.push_back(p);
  return s;
}

PlanarSet PlanarSet::translated(const Vec2& t) const {
  PlanarSet s;
  for (const auto& piece : pieces_) {
    if (const auto* b = std::get_if<PlanarBox>(&piece))
      s.pieces_.push_back(PlanarBox{b->x0 + t.x(), b->x1 + t.x(), b->y0 + t.y(), b->y1 + t.y()});
    else if (const auto* seg = std::get_if<PlanarSegment>(&piece))
      s.pieces_.push_back(PlanarSegment{seg->a + t, seg->b + t});
    else {
      const auto& par = std::get<PlanarParallelogram>(piece);
      s.pieces_.push_back(PlanarParallelogram{par.center + t, par.p, par.q});
    }
  }
  return s;
}

PlanarSet PlanarSet::scaled(double k) const {
  PlanarSet s;
  for (const auto& piece : pieces_) {
    if (const auto* b = std::get_if<PlanarBox>(&piece))
      s.pieces_.push_back(PlanarBox{b->x0 * k, b->x1 * k, b->y0 * k, b->y1 * k});
    else if (const auto* seg = std::get_if<PlanarSegment>(&piece))
      s.pieces_.push_back(PlanarSegment{seg->a * k, seg->b * k});
    else {
      const auto& par = std::get<PlanarParallelogram>(piece);
      s.pieces_.push_back(PlanarParallelogram{par.center * k, par.p * k, par.q * k});
    }
  }
  return s;
}

double piece_distance(const PlanarSet::Piece& piece, const Vec2& pt) {
  if (const auto* b = std::get_if<PlanarBox>(&piece)) return box_distance(*b, pt);
  if (const auto* s = std::get_if<PlanarSegment>(&piece))
    return segment_distance(s->a, s->b, pt);
  return parallelogram_distance(std::get<PlanarParallelogram>(piece), pt);
}

double PlanarSet::distance(const Vec2& pt) const {
  double d = kInf;
  for (const auto& piece : pieces_) d = std::min(d, piece_distance(piece, pt));
  return d;
}

PlanarSet PlanarSet::boundary() const {
  PlanarSet out;
  for (const auto& piece : pieces_) {
    if (const auto* b = std::get_if<PlanarBox>(&piece)) {
      if (std::isfinite(b->x0)) out.add(PlanarBox{b->x0, b->x0, b->y0, b->y1});
      if (std::isfinite(b->x1)) out.add(PlanarBox{b->x1, b->x1, b->y0, b->y1});
      if (std::isfinite(b->y0)) out.add(PlanarBox{b->x0, b->x1, b->y0, b->y0});
      if (std::isfinite(b->y1)) out.add(PlanarBox{b->x0, b->x1, b->y1, b->y1});
    } else if (const auto* s = std::get_if<PlanarSegment>(&piece)) {
      out.add(*s);
    } else {
      const auto& par = std::get<PlanarParallelogram>(piece);
      double det = cross2(par.p, par.q);
      double scale = std::max(par.p.norm(), par.q.norm());
      if (std::abs(det) <= kGeomTol * scale * scale) {
        Vec2 w = par.p.norm() >= par.q.norm() ? par.p : par.q;
        out.add(PlanarSegment{par.center - w, par.center + w});
      } else {
        Vec2 v1 = par.center + par.p, v2 = par.center + par.q;
        Vec2 v3 = par.center - par.p, v4 = par.center - par.q;
        out.add(PlanarSegment{v1, v2});
        out.add(PlanarSegment{v2, v3});
        out.add(PlanarSegment{v3, v4});
        out.add(PlanarSegment{v4, v1});
      }
    }
  }
  return out;
}

double r_s(const MarkedAbelianGroup& g) {
  if (g.rank() < 1) throw std::invalid_argument("r_s: group has rank 0");
  double best = 0;
  for (const auto& s : g.generator_images())
    best = std::max(best, s.free.cast<double>().norm());
  return best;
}

QuadrupleDiagnostics is_good_quadruple(const Vec2& a, const Vec2& b, const Vec2& v,
                                       double rs, double tol) {
  QuadrupleDiagnostics d;
  d.v_line_residual = segment_distance(-a, b, v);

  double cr = std::abs(cross2(a, b));
  double e1 = (b - a).norm();
  double e2 = (a + b).norm();
  double dist1 = e1 > 0 ? cr / e1 : 0.0;
  double dist2 = e2 > 0 ? cr / e2 : 0.0;
  d.disk_margin = std::min(dist1, dist2) - rs;
  d.boundary_touch = d.disk_margin >= -tol && d.disk_margin <= tol;
  d.good = d.v_line_residual <= tol && d.disk_margin >= -tol;
  return d;
}

std::array<PlanarSegment, 4> zone_segments(const GoodQuadruple& q) {
  Vec2 u = q.u();
  return {PlanarSegment{q.a, u}, PlanarSegment{u, q.b}, PlanarSegment{q.b, q.v},
          PlanarSegment{q.v, -q.a}};
}

ChimneySets chimney_sets(double n, double h, double l) {
  if (n <= 0 || l <= 0) throw std::invalid_argument("chimney_sets: need n, l > 0");
  Vec2 a(n, h - l), b(n, h + l);
  ChimneySets cs;
  cs.c = PlanarSet::parallelogram(a, b);
  cs.lr = PlanarSet::segment(a, b).unite(PlanarSet::segment(-a, -b));
  cs.ud = PlanarSet::segment(-a, b).unite(PlanarSet::segment(-b, a));
  return cs;
}

EllEqSets ell_eq_sets(double n, double n_b) {
  EllEqSets s;
  s.x = PlanarSet::box(-kInf, n_b, -kInf, kInf)
            .unite(PlanarSet::box(-kInf, kInf, -n_b, kInf));
  s.x_boundary = PlanarSet::box(n_b, n_b, -kInf, -n_b)
                     .unite(PlanarSet::box(n_b, kInf, -n_b, -n_b));
  s.x_n = PlanarSet::box(-n, n_b, -kInf, kInf)
              .unite(PlanarSet::box(-n, n, -n_b, kInf));
  s.x_n_exit_sides = PlanarSet::box(-n, -n, -kInf, kInf)
                         .unite(PlanarSet::box(n, n, -n_b, kInf));
  s.x_n_exit_corner = PlanarSet::box(n_b, n_b, -kInf, -n_b)
                          .unite(PlanarSet::box(n_b, n, -n_b, -n_b));
  s.y = PlanarSet::box(-n, n, -kInf, kInf);
  s.y_boundary =
      PlanarSet::box(-n, -n, -kInf, kInf).unite(PlanarSet::box(n, n, -kInf, kInf));
  return s;
}

namespace {

std::optional<Vec2> segment_intersection(const Vec2& p1, const Vec2& p2, const Vec2& p3,
                                         const Vec2& p4) {
  Vec2 r = p2 - p1, s = p4 - p3;
  double denom = cross2(r, s);
  if (std::abs(denom) < 1e-14) return std::nullopt;
  double t = cross2(p3 - p1, s) / denom;
  double u = cross2(p3 - p1, r) / denom;
  if (t < -1e-9 || t > 1 + 1e-9 || u < -1e-9 || u > 1 + 1e-9) return std::nullopt;
  return p1 + t * r;
}

}  // namespace

KappaResult kappa(const GoodQuadruple& q) {
  Vec2 u = q.u(), v = q.v;
  Eigen::Matrix2d m;
  m << u.x(), v.x(), u.y(), v.y();
  double det = m.determinant();
  double sc = std::max(u.norm(), v.norm());
  if (std::abs(det) <= 1e-12 * sc * sc)
    throw std::invalid_argument("kappa: u and v are collinear");
  Eigen::Matrix2d minv = m.inverse();

  // In z-coordinates the body is the parallelogram spanned by 5*M^{-1}a and
  // 5*M^{-1}b; the count of z-hits at offset w is the number of integer
  // points in a translate. The count function is Z^2-periodic and upper
  // semicontinuous, so its maximum is attained at an arrangement vertex of
  // the translated copies.
  Vec2 p = 5.0 * (minv * q.a);
  Vec2 qq = 5.0 * (minv * q.b);
  double ext_x = std::abs(p.x()) + std::abs(qq.x());
  double ext_y = std::abs(p.y()) + std::abs(qq.y());

  auto count_at = [&](const Vec2& tau, double inflate) -> std::int64_t {
    std::int64_t zx0 = static_cast<std::int64_t>(std::floor(tau.x() - ext_x - inflate - 1));
    std::int64_t zx1 = static_cast<std::int64_t>(std::ceil(tau.x() + ext_x + inflate + 1));
    std::int64_t zy0 = static_cast<std::int64_t>(std::floor(tau.y() - ext_y - inflate - 1));
    std::int64_t zy1 = static_cast<std::int64_t>(std::ceil(tau.y() + ext_y + inflate + 1));
    PlanarParallelogram body{tau, p, qq};
    std::int64_t c = 0;
    for (std::int64_t zx = zx0; zx <= zx1; ++zx)
      for (std::int64_t zy = zy0; zy <= zy1; ++zy)
        if (parallelogram_distance(body, Vec2(static_cast<double>(zx),
                                              static_cast<double>(zy))) <=
            inflate + 1e-9)
          ++c;
    return c;
  };

  // copies z + Q whose edges can carry arrangement vertices near the unit cell
  std::vector<Vec2> centers;
  for (std::int64_t zx = static_cast<std::int64_t>(std::floor(-ext_x - 1));
       zx <= static_cast<std::int64_t>(std::ceil(ext_x + 2)); ++zx)
    for (std::int64_t zy = static_cast<std::int64_t>(std::floor(-ext_y - 1));
         zy <= static_cast<std::int64_t>(std::ceil(ext_y + 2)); ++zy)
      centers.emplace_back(static_cast<double>(zx), static_cast<double>(zy));

  KappaResult out;
  if (centers.size() <= 4000) {
    std::vector<std::array<Vec2, 2>> edges;
    edges.reserve(centers.size() * 4);
    std::vector<Vec2> candidates;
    candidates.emplace_back(0.0, 0.0);
    for (const Vec2& c : centers) {
      Vec2 v1 = c + p, v2 = c + qq, v3 = c - p, v4 = c - qq;
      edges.push_back({v1, v2});
      edges.push_back({v2, v3});
      edges.push_back({v3, v4});
      edges.push_back({v4, v1});
      for (const Vec2& vert : {v1, v2, v3, v4})
        if (vert.x() > -0.6 && vert.x() < 1.6 && vert.y() > -0.6 && vert.y() < 1.6)
          candidates.push_back(vert);
    }
    for (std::size_t i = 0; i < edges.size(); ++i)
      for (std::size_t j = i + 1; j < edges.size(); ++j) {
        auto pt = segment_intersection(edges[i][0], edges[i][1], edges[j][0], edges[j][1]);
        if (pt && pt->x() > -0.6 && pt->x() < 1.6 && pt->y() > -0.6 && pt->y() < 1.6)
          candidates.push_back(*pt);
      }
    std::int64_t best = 0;
    for (const Vec2& tau : candidates) best = std::max(best, count_at(tau, 1e-7));
    out.value = best;
    out.exact = true;
  } else {
    const int grid = 48;
    double pitch = 1.0 / grid;
    double inflate = pitch * std::sqrt(2.0) / 2.0;
    std::int64_t best = 0;
    for (int i = 0; i <= grid; ++i)
      for (int j = 0; j <= grid; ++j)
        best = std::max(best, count_at(Vec2(i * pitch, j * pitch), inflate));
    out.value = best;
    out.exact = false;
  }
  return out;
}

Basis aligned_basis(const MarkedAbelianGroup& base,
                    const std::vector<GroupElement>& lambda) {
  Eigen::Index r = base.rank();
  if (r < 2) throw std::invalid_argument("aligned_basis: base rank must be >= 2");
  if (lambda.empty()) return Basis::standard(r);

  // coordinate axes orthogonal to every lambda generator, if available
  std::vector<Eigen::Index> clear_axes;
  for (Eigen::Index i = 0; i < r; ++i) {
    bool ok = true;
    for (const auto& x : lambda)
      if (x.free[i] != 0) {
        ok = false;
        break;
      }
    if (ok) clear_axes.push_back(i);
  }
  if (clear_axes.size() >= 2) {
    Basis b;
    b.e = Eigen::MatrixXd::Zero(r, r);
    b.e(clear_axes[0], 0) = 1.0;
    b.e(clear_axes[1], 1) = 1.0;
    Eigen::Index col = 2;
    for (Eigen::Index i = 0; i < r; ++i) {
      if (i == clear_axes[0] || i == clear_axes[1]) continue;
      b.e(i, col++) = 1.0;
    }
    return b;
  }

  Eigen::MatrixXd l(r, static_cast<Eigen::Index>(lambda.size()));
  for (std::size_t j = 0; j < lambda.size(); ++j)
    l.col(static_cast<Eigen::Index>(j)) = lambda[j].free.cast<double>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(l, Eigen::ComputeFullU);
  Eigen::Index nullity = r - svd.rank();
  if (nullity < 2)
    throw std::invalid_argument("aligned_basis: lambda has corank < 2 in the free part");
  Eigen::MatrixXd uu = svd.matrixU();
  Basis b;
  b.e = Eigen::MatrixXd::Zero(r, r);
  b.e.col(0) = uu.col(r - 1);
  b.e.col(1) = uu.col(r - 2);
  Eigen::Index col = 2;
  for (Eigen::Index i = 0; i < r - 2; ++i) b.e.col(col++) = uu.col(i);
  for (Eigen::Index j = 0; j < r; ++j) {
    Eigen::Index arg = 0;
    b.e.col(j).cwiseAbs().maxCoeff(&arg);
    if (b.e(arg, j) < 0) b.e.col(j) = -b.e.col(j);
  }
  return b;
}

Vec2 RenormLayout::planar(const GroupElement& quot_elt) const {
  IVec z = quot.lift(quot_elt);
  GroupElement gx = base.project(z);
  return basis.project_i(gx.free);
}

PlanarSet RenormLayout::box_region(const Eigen::Vector2i& z) const {
  Vec2 c = static_cast<double>(z.x()) * quad.u() + static_cast<double>(z.y()) * quad.v;
  PlanarSet s;
  s.add(PlanarParallelogram{c, quad.a, quad.b});
  return s;
}

PlanarSet RenormLayout::corridor_region(const Eigen::Vector2i& z) const {
  Vec2 c = static_cast<double>(z.x()) * quad.u() + static_cast<double>(z.y()) * quad.v;
  PlanarSet s;
  s.add(PlanarParallelogram{c, 4.0 * quad.a, 4.0 * quad.b});
  return s;
}

double RenormLayout::alignment_residual() const {
  double worst = 0;
  for (const auto& x : lambda)
    worst = std::max(worst, basis.project_i(x.free).norm());
  return worst;
}

RenormLayout make_layout(const MarkedAbelianGroup& base,
                         const std::vector<GroupElement>& lambda,
                         const GoodQuadruple& quad, std::int64_t z_radius) {
  RenormLayout lay;
  lay.base = base;
  lay.quot = base.quotient(lambda);
  lay.lambda = lambda;
  lay.basis = aligned_basis(base, lambda);
  lay.quad = quad;
  lay.rs = r_s(base);
  lay.z_radius = z_radius;

  if (lay.quot.rank() != 2)
    throw std::invalid_argument("make_layout: quotient rank must be exactly 2");
  auto diag = is_good_quadruple(quad.a, quad.b, quad.v, lay.rs);
  if (!diag.good) throw std::invalid_argument("make_layout: quadruple is not good");
  if (lay.alignment_residual() > 1e-7)
    throw std::invalid_argument("make_layout: basis is not aligned with lambda");
  return lay;
}

bool boundary_separation_check(const std::vector<GroupElement>& path,
                               const PlanarSet& x, const Basis& basis,
                               const MarkedAbelianGroup& g) {
  if (path.size() < 2) throw std::invalid_argument("boundary_separation_check: short path");
  double rs = r_s(g);
  GraphSet inside(x, rs);
  auto pin = [&](const GroupElement& e) { return basis.project_i(e.free); };
  if (!inside.contains(pin(path.front())))
    throw std::invalid_argument("boundary_separation_check: path does not start inside");
  if (inside.contains(pin(path.back())))
    throw std::invalid_argument("boundary_separation_check: path does not end outside");
  GraphSet edge(x.boundary(), rs);
  for (const auto& v : path)
    if (edge.contains(pin(v))) return true;
  return false;
}

std::vector<Vec2> planar_ball_offsets(const Basis& basis, double rs) {
  std::vector<Vec2> out;
  for (const auto& o : integer_ball_offsets(basis.dim(), rs)) {
    Vec2 po = basis.project_i(o);
    bool dup = false;
    for (const auto& q : out)
      if ((q - po).norm() < 1e-12) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(po);
  }
  return out;
}

bool inflated_contains(const PlanarSet& region, double rs, const Vec2& pi,
                       const std::vector<Vec2>& offsets) {
  for (const auto& o : offsets)
    if (region.distance(pi - o) <= rs + kGeomTol) return true;
  return false;
}

std::vector<IVec> integer_ball_offsets(Eigen::Index r, double radius) {
  std::vector<IVec> out;
  std::int64_t lim = static_cast<std::int64_t>(std::floor(radius + 1e-9));
  IVec c = IVec::Constant(r, -lim);
  double r2 = radius * radius + 1e-9;
  for (;;) {
    double n2 = 0;
    for (Eigen::Index i = 0; i < r; ++i)
      n2 += static_cast<double>(c[i]) * static_cast<double>(c[i]);
    if (n2 <= r2) out.push_back(c);
    Eigen::Index lv = 0;
    while (lv < r) {
      if (c[lv] < lim) {
        ++c[lv];
        break;
      }
      c[lv] = -lim;
      ++lv;
    }
    if (lv == r) break;
  }
  return out;
}

}  // namespace abperc
