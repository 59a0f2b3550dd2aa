#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "abperc/criterion.hpp"
#include "abperc/rng.hpp"

using namespace abperc;

namespace {

IVec vec(std::initializer_list<std::int64_t> xs) {
  IVec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (auto x : xs) v[i++] = x;
  return v;
}

MarkedAbelianGroup group_of(std::int64_t d, std::vector<IVec> gens) {
  return MarkedAbelianGroup::from_subgroup(d, hermite_normal_form(d, gens));
}

const MarkedAbelianGroup kZ2 = group_of(2, {});
const GoodQuadruple kQuad{Vec2(5, -3), Vec2(5, 3), Vec2(5, 3)};

FCParams canonical_params(double p, double eta, std::int64_t m) {
  FCParams fc;
  fc.group_key = kZ2.key();
  fc.p = p;
  fc.eta = eta;
  fc.m = m;
  fc.basis = Basis::standard(2);
  fc.quad = kQuad;
  double reach = 3.0 * std::max(kQuad.a.norm(), kQuad.b.norm()) + 2.0;
  fc.n_window = static_cast<std::int64_t>(std::ceil(reach)) + 1;
  return fc;
}

}  // namespace

TEST_CASE("fcparams text round trip") {
  FCParams fc = canonical_params(0.77, 0.15, 2);
  FCParams back = FCParams::parse(fc.serialize());
  CHECK(back.group_key == fc.group_key);
  CHECK(back.p == fc.p);
  CHECK(back.eta == fc.eta);
  CHECK(back.m == fc.m);
  CHECK(back.n_window == fc.n_window);
  CHECK((back.basis.e - fc.basis.e).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.quad.a == fc.quad.a);
  CHECK(back.quad.b == fc.quad.b);
  CHECK(back.quad.v == fc.quad.v);
  CHECK_THROWS(FCParams::parse("nonsense"));
}

TEST_CASE("fc_check degenerate parameters") {
  SUBCASE("p = 1 always passes") {
    FCParams fc = canonical_params(1.0, 0.2, 1);
    FcReport r = fc_check(kZ2, fc, 60, {1, 1, 0}, 2);
    CHECK(r.pass);
    CHECK(r.saw_count == 20);
  }
  SUBCASE("p = 0 always fails") {
    FCParams fc = canonical_params(0.0, 0.2, 1);
    FcReport r = fc_check(kZ2, fc, 60, {1, 1, 0}, 2);
    CHECK(!r.pass);
    CHECK(r.worst.est.phat == 0.0);
  }
  SUBCASE("rank precondition") {
    auto z1 = group_of(1, {});
    FCParams fc = canonical_params(0.8, 0.2, 1);
    CHECK_THROWS(fc_check(z1, fc, 10, {1, 1, 0}));
  }
  SUBCASE("bad quadruple reported, not thrown") {
    FCParams fc = canonical_params(0.9, 0.2, 1);
    fc.quad.v = Vec2(50, 50);
    FcReport r = fc_check(kZ2, fc, 10, {1, 1, 0});
    CHECK(!r.pass);
    CHECK(r.note == "quadruple is not good");
  }
}

TEST_CASE("fc_check passes on the square lattice well above threshold") {
  FCParams fc = canonical_params(0.75, 0.2, 1);
  FcReport r = fc_check(kZ2, fc, 3000, {2024, rng::fnv1a("fc75"), 0}, 4);
  CHECK(r.pass);
  CHECK(r.worst.est.lo > 0.8);
}

TEST_CASE("fc_check is monotone in p on coupled samples") {
  FCParams lo = canonical_params(0.72, 0.2, 1);
  FCParams hi = canonical_params(0.9, 0.2, 1);
  rng::SeedRecord seed{77, rng::fnv1a("mono"), 0};
  FcReport rlo = fc_check(kZ2, lo, 1500, seed, 4);
  FcReport rhi = fc_check(kZ2, hi, 1500, seed, 4);
  // shared uniforms: every pair's failure count can only shrink as p grows
  CHECK(rhi.worst.est.lo >= rlo.worst.est.lo - 1e-12);
  if (rlo.pass) CHECK(rhi.pass);
}

TEST_CASE("e_box_window dimensions") {
  CayleyView view(kZ2);
  EdgeWindow w = e_box_window(view, Basis::standard(2), 3.0, 2.0, 4.0, "box");
  CHECK(w.vertex_count() == 7 * 5);
  CHECK(w.origin >= 0);
}

TEST_CASE("ell_eq bracketing on the square lattice") {
  // moderately supercritical, so the two exit probabilities separate crisply
  EllEqEstimate ee = ell_eq_estimate(kZ2, Basis::standard(2), 8.0, 0.0, 5.0, 0.55,
                                     2000, {11, rng::fnv1a("elleq"), 0}, 4, 40.0, 1);
  CHECK(ee.bottom_ud);   // flat chimney: the near exits dominate
  CHECK(ee.top_lr);      // tall chimney: the vertical edges take over
  CHECK(ee.flip_found);
  CHECK(ee.lo >= ell_b(8.0, 0.0, 5.0) - 1.0);
  CHECK(ee.lo <= ee.hi);
  CHECK(ee.ud_bottom.phat > ee.lr_bottom.phat);
  CHECK(ee.lr_top.phat > ee.ud_top.phat);
}

TEST_CASE("ell_eq ties are reported, not guessed") {
  // deep supercritical on a small chimney: both probabilities ride near 1
  EllEqEstimate ee = ell_eq_estimate(kZ2, Basis::standard(2), 8.0, 0.0, 5.0, 0.92,
                                     400, {12, rng::fnv1a("elleq-tie"), 0}, 4, 20.0, 1);
  if (!ee.bottom_ud) CHECK(ee.bottom_tie);
}

TEST_CASE("split_segment picks an interior balance point") {
  CayleyView view(kZ2);
  double ell0 = 12.0, n = 8.0;
  EdgeWindow w = e_box_window(view, Basis::standard(2), n + 3, ell0 + 3, 8.0, "split");
  auto pis = planar_images(w, Basis::standard(2));
  GraphSet gc(chimney_sets(n, 0.0, ell0).c, 1.0);
  std::vector<std::int32_t> c_ids;
  for (std::size_t i = 0; i < w.vertex_count(); ++i)
    if (gc.contains(pis[i])) c_ids.push_back(static_cast<std::int32_t>(i));
  std::vector<std::int32_t> a_ids;
  for (std::size_t i = 0; i < w.vertex_count(); ++i)
    if (w.vertices[i].free.cast<double>().norm() <= 1.0)
      a_ids.push_back(static_cast<std::int32_t>(i));

  SplitScan scan = split_segment(w, Basis::standard(2), Vec2(n, -ell0), Vec2(n, ell0),
                                 a_ids, c_ids, 1.0, 0.8, 1500,
                                 {5, rng::fnv1a("split"), 0}, 4);
  REQUIRE(scan.t.size() >= 3);
  REQUIRE(scan.pick >= 0);
  CHECK(scan.point.x() == doctest::Approx(n));
  // both halves connect with decent probability at p = 0.8
  CHECK(scan.left[static_cast<std::size_t>(scan.pick)].phat > 0.5);
  CHECK(scan.right[static_cast<std::size_t>(scan.pick)].phat > 0.5);
  // the maximin pick beats the endpoints' worse side
  double at_pick = std::min(scan.left[static_cast<std::size_t>(scan.pick)].phat,
                            scan.right[static_cast<std::size_t>(scan.pick)].phat);
  double at_start = std::min(scan.left.front().phat, scan.right.front().phat);
  double at_end = std::min(scan.left.back().phat, scan.right.back().phat);
  CHECK(at_pick >= std::max(at_start, at_end) - 1e-12);
}

TEST_CASE("fc_search succeeds supercritically and fails subcritically") {
  SUBCASE("p = 0.85 on the square lattice") {
    FcSearchBudget budget;
    budget.stage_trials = 1000;
    budget.final_trials = 2000;
    budget.window_scale = 16;
    FcSearchResult r = fc_search(kZ2, 0.85, 0.2, budget, {31, rng::fnv1a("fs"), 0}, 4);
    INFO(r.diagnostic);
    REQUIRE(r.stage_reached == 7);
    REQUIRE(r.params.has_value());
    CHECK(r.final_report.pass);
    auto d = is_good_quadruple(r.params->quad.a, r.params->quad.b, r.params->quad.v, 1.0);
    CHECK(d.good);
    CHECK(r.params->m < r.params->n_window);
  }
  SUBCASE("subcritical p fails in the early stages") {
    FcSearchBudget budget;
    budget.stage_trials = 400;
    budget.window_scale = 12;
    budget.m_max = 3;
    budget.k_max = 3;
    FcSearchResult r = fc_search(kZ2, 0.3, 0.1, budget, {32, rng::fnv1a("fs2"), 0}, 4);
    CHECK(!r.params.has_value());
    CHECK(r.stage_reached <= 3);
  }
  SUBCASE("rank below two is rejected up front") {
    auto z1 = group_of(1, {});
    FcSearchResult r = fc_search(z1, 0.9, 0.1, {}, {33, 1, 0});
    CHECK(r.stage_reached == 0);
    CHECK(!r.params.has_value());
  }
}

TEST_CASE("basis covers") {
  CHECK(basis_cover(kZ2).size() == 1);
  auto z3 = group_of(3, {});
  auto cover = basis_cover(z3, 16);
  CHECK(cover.size() == 16);
  for (const auto& b : cover) CHECK(b.ortho_residual() < 1e-9);
  auto z4 = group_of(4, {});
  CHECK_THROWS(basis_cover(z4));
}

TEST_CASE("perturbed bases keep the window inclusion up to a positive angle") {
  PlanarSet x = PlanarSet::segment(Vec2(0, 0), Vec2(3, 1));
  double radius = estimate_cover_radius(kZ2, x, Basis::standard(2), 4, 3,
                                        {51, rng::fnv1a("cover"), 0});
  CHECK(radius > 0.0);
  CHECK(radius <= 0.5);
}
