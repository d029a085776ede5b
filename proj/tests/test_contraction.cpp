#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "gromolab/contraction.hpp"

using namespace gromolab;

namespace {

Isometry axis(double L) {
  return Isometry::from_matrix(ModelKind::H2, std::exp(L / 2), 0, 0, std::exp(-L / 2));
}

// Axis translation of length L conjugated so its axis ends at a and b.
Isometry axis_between(double L, double a, double b) {
  // h maps 0 -> a, inf -> b, sign chosen so det > 0
  double sg = b > a ? 1.0 : -1.0, s = 1.0 / std::sqrt(std::abs(b - a));
  auto h = Isometry::from_matrix(ModelKind::H2, sg * b * s, a * s, sg * s, s);
  return compose(compose(h, axis(L)), inverse(h));
}

}  // namespace

TEST_CASE("X_gamma membership") {
  auto g = Isometry::from_matrix(ModelKind::H2, 2, 0, 0, 0.5);
  CHECK(in_X_gamma(g, AnyPoint{Point{{0, 0}, 4}}));
  CHECK_FALSE(in_X_gamma(g, AnyPoint{Point{}}));
  CHECK(in_X_gamma(g, AnyPoint{BoundaryPoint::infinity()}));
  CHECK_FALSE(in_X_gamma(g, AnyPoint{BoundaryPoint::finite(0.0)}));
  CHECK_THROWS_AS(in_X_gamma(Isometry::identity(ModelKind::H2), AnyPoint{Point{}}), PreconditionFailed);

  // trace agrees with the defining rule on sampled boundary points
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1);
  for (auto kind : {ModelKind::H2, ModelKind::H3}) {
    for (int k = 0; k < 10; ++k) {
      auto gam = Isometry::from_matrix(kind, cplx(1.5, kind == ModelKind::H3 ? 0.3 : 0), cplx(n(rng), 0),
                                       cplx(0.2 * n(rng), 0), 0.0);
      // fix d from det = 1
      cplx a = gam.a(), b = gam.b(), c = gam.c();
      gam = Isometry::from_matrix(kind, a, b, c, (1.0 + b * c) / a);
      auto dom = HalfSpaceDomain::of(gam);
      auto tr = dom.trace();
      for (int i = 0; i < 100; ++i) {
        cplx xi(3 * n(rng), kind == ModelKind::H3 ? 3 * n(rng) : 0.0);
        auto bp = BoundaryPoint::finite(xi);
        CHECK(tr.contains(bp) == dom.contains(AnyPoint{bp}));
      }
      CHECK(dom.contains(AnyPoint{gam.apply(Point{})}));
      CHECK_FALSE(dom.contains(AnyPoint{Point{}}));
    }
  }
}

TEST_CASE("contracting isometry check") {
  auto c = contracting_isometry_check(axis(10), 0.8);
  CHECK(c.certified);
  CHECK(c.product == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(c.threshold == doctest::Approx(5 - 2.4));

  auto p = contracting_isometry_check(Isometry::from_matrix(ModelKind::H2, 1, 1, 0, 1), 0.8);
  CHECK_FALSE(p.certified);
  // independent computation of both sides
  double d1 = std::acosh(1.5), d2 = std::acosh(3.0);
  CHECK(p.displacement == doctest::Approx(d1));
  CHECK(p.product == doctest::Approx(d1 - d2 / 2));
  for (double L : {1.0, 3.0, 4.8})
    CHECK_FALSE(contracting_isometry_check(axis(L), 0.8).certified);
  CHECK_THROWS_AS(contracting_isometry_check(Isometry::identity(ModelKind::H2), 0.8), PreconditionFailed);
}

TEST_CASE("contraction certificate") {
  auto cert = contraction_certificate({axis(10)}, 0.8);
  REQUIRE(cert);
  CHECK(cert->M == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(cert->d_min == doctest::Approx(10.0));
  CHECK(cert->margin == doctest::Approx(5 - 2.4 - cert->M));
  CHECK_FALSE(contraction_certificate({axis(10), axis(3)}, 0.8));
  CHECK_THROWS_AS(contraction_certificate({}, 0.8), PreconditionFailed);

  // two axes with endpoints apart
  std::vector<Isometry> A{axis_between(8, -1, 1), axis_between(8, -3, 3)};
  auto two = contraction_certificate(A, 0.5);
  REQUIRE(two);
  double M = 0;
  for (const auto& g : A)
    for (const auto& h : A)
      M = std::max(M, gromov_product(inverse(g).apply(Point{}), h.apply(Point{}), Point{}));
  CHECK(two->M == doctest::Approx(M).epsilon(1e-9));

  // the inverse set is certified with domains swapped
  std::vector<Isometry> inv;
  for (const auto& g : A) inv.push_back(inverse(g));
  auto back = contraction_certificate(inv, 0.5);
  REQUIRE(back);
  CHECK(back->M == doctest::Approx(two->M).epsilon(1e-9));
  CHECK(angle_between(back->plus_cap.n, two->minus_cap.n) < 1e-9);
  CHECK(certificate_summary(*two).find("margin") != std::string::npos);
}

TEST_CASE("diagnostics on certified sets") {
  auto cert = *contraction_certificate({axis(10)}, 0.8);
  auto rep = contraction_diagnostics(cert, 10, 20, 12);
  CHECK(rep.ok);
  CHECK(rep.worst_triangle_margin >= -1e-9);
  // exact additivity along the axis
  Point o{};
  auto g = axis(10);
  Isometry w = g;
  for (int n = 2; n <= 8; ++n) {
    w = compose(w, g);
    CHECK(distance(o, w.apply(o)) == doctest::Approx(10.0 * n).epsilon(1e-9));
  }

  std::vector<Isometry> A{axis_between(8, -1, 1), axis_between(8, -3, 3), axis_between(9, 2, -0.5)};
  auto c3 = contraction_certificate(A, 0.5);
  REQUIRE(c3);
  auto r3 = contraction_diagnostics(*c3, 1000, 200, 15);
  CHECK(r3.ok);
  CHECK(r3.worst_triangle_margin >= -1e-9);
  CHECK(r3.worst_image_margin >= -1e-9);
  CHECK(r3.worst_increment > 0.0);
  // telescoping bound for powers
  for (const auto& h : A) {
    Isometry p = h;
    double d = distance(o, h.apply(o));
    for (int n = 2; n <= 6; ++n) {
      p = compose(p, h);
      CHECK(distance(o, p.apply(o)) >= n * d - 2 * (n - 1) * c3->M - 1e-9);
    }
  }
}

TEST_CASE("contracting elements push the complement inside") {
  auto g = axis_between(7, -2, 0.5);
  REQUIRE(contracting_isometry_check(g, 0.8).certified);
  auto dom = HalfSpaceDomain::of(g), dom_inv = HalfSpaceDomain::of(inverse(g));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-4, 4), lh(-4, 3);
  int tested = 0;
  while (tested < 1000) {
    Point x{{u(rng), 0}, std::exp(lh(rng))};
    if (dom_inv.contains(AnyPoint{x})) continue;
    ++tested;
    CHECK(dom.contains(AnyPoint{g.apply(x)}));
  }
  // powers: displacement strictly increasing and unbounded
  Point o{}, x = g.apply(o);
  double last = distance(o, x);
  for (int n = 2; n <= 50; ++n) {
    x = g.apply(x);
    double d = distance(o, x);
    CHECK(d > last);
    last = d;
  }
  CHECK(last > 300.0);
}

TEST_CASE("pairs in X_gamma have large products") {
  auto g = axis_between(8, -1, 2);
  auto h = HalfSpaceDomain::of(g).half_space;
  auto pts = sample_half_space(h, Point{}, ModelKind::H2, 200, 3);
  double half = 0.5 * distance(Point{}, g.apply(Point{}));
  double dhat = default_delta(ModelKind::H2);
  for (std::size_t i = 0; i + 1 < pts.size(); i += 2)
    CHECK(gromov_product(pts[i], pts[i + 1], Point{}) >= half - dhat - 1e-6);
}

TEST_CASE("sup products bound sampled ones") {
  auto a = HalfSpaceDomain::of(axis_between(6, -1, 1)).half_space;
  auto b = HalfSpaceDomain::of(inverse(axis_between(6, -1, 1))).half_space;
  double sup = sup_product(a, b, Point{}, ModelKind::H2);
  CHECK(std::isfinite(sup));
  auto pa = sample_half_space(a, Point{}, ModelKind::H2, 300, 1);
  auto pb = sample_half_space(b, Point{}, ModelKind::H2, 300, 2);
  for (std::size_t i = 0; i < pa.size(); ++i)
    CHECK(gromov_product(pa[i], pb[i], Point{}) <= sup + 1e-9);
  CHECK(std::isinf(sup_product(a, a, Point{}, ModelKind::H2)));
  CHECK_THROWS_AS(sup_product(Point{{0, 0}, 2}, HalfSpace::bisector(Point{}, Point{{0, 0}, 4}), Point{}),
                  PreconditionFailed);
}

TEST_CASE("enclosing cap") {
  std::vector<Cap> caps{{{1, 0, 0}, 0.2}, {{0, 0, 1}, 0.2}};
  auto c = enclosing_cap(caps, ModelKind::H2);
  for (const auto& k : caps) CHECK(angle_between(c.n, k.n) + k.alpha <= c.alpha + 1e-9);
  CHECK(c.alpha == doctest::Approx(M_PI / 4 + 0.2).epsilon(1e-6));
  CHECK_THROWS_AS(enclosing_cap({}, ModelKind::H2), PreconditionFailed);
}

TEST_CASE("contracting element search") {
  auto found = find_contracting_element({axis(10)}, 0.8, 3);
  REQUIRE(found);
  CHECK(found->word.letters.size() == 1);
  CHECK_FALSE(found->from_product);

  std::vector<Isometry> pp{Isometry::from_matrix(ModelKind::H2, 1, 2, 0, 1),
                           Isometry::from_matrix(ModelKind::H2, 1, 0, 2, 1)};
  auto prod = find_contracting_element(pp, 0.8, 2);
  REQUIRE(prod);
  CHECK(contracting_isometry_check(prod->isometry, 0.8).certified);

  auto none = find_contracting_element({Isometry::from_matrix(ModelKind::H2, 1, 1, 0, 1)}, 0.8, 6);
  CHECK_FALSE(none);
  CHECK_THROWS_AS(find_contracting_element(pp, 0.8, 0), PreconditionFailed);
}

TEST_CASE("semigroup store of a certificate") {
  std::vector<Isometry> A{axis_between(8, -1, 1), axis_between(8, -3, 3)};
  auto cert = *contraction_certificate(A, 0.5);
  auto st = contracting_semigroup_store(cert, 30.0);
  CHECK(st.size() > 2);
  for (std::size_t i = 0; i < st.size(); ++i) CHECK(st.displacement[i] <= 30.0 + 1e-9);
  // complete: all words of length 2 whose displacement fits are present
  std::size_t fit = 0;
  for (const auto& g : A)
    for (const auto& h : A) fit += distance(Point{}, compose(g, h).apply(Point{})) <= 30.0;
  std::size_t len2 = 0;
  for (std::size_t i = 0; i < st.size(); ++i) len2 += st.word(i).letters.size() == 2;
  CHECK(len2 == fit);

  auto part = contracting_part(st, 10.0, std::nullopt, std::nullopt);
  for (auto i : part) CHECK(st.displacement[i] >= 10.0);
}
