#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "gromolab/config.hpp"
#include "gromolab/schottky.hpp"

using namespace gromolab;

namespace {

Isometry axis(double L) {
  return Isometry::from_matrix(ModelKind::H2, std::exp(L / 2), 0, 0, std::exp(-L / 2));
}

Isometry axis_between(double L, double a, double b) {
  double sg = b > a ? 1.0 : -1.0, s = 1.0 / std::sqrt(std::abs(b - a));
  auto h = Isometry::from_matrix(ModelKind::H2, sg * b * s, a * s, sg * s, s);
  return compose(compose(h, axis(L)), inverse(h));
}

std::vector<Isometry> beta4(ModelKind kind) {
  return {affine_to_isometry(4.0, 0.0, kind), affine_to_isometry(4.0, 1.0, kind)};
}

}  // namespace

TEST_CASE("affine beta 4 system is Schottky") {
  const double delta = default_delta(ModelKind::H3);
  auto plus = HalfSpace::disk({1.0, 0.0}, 1.1);
  auto cert = schottky_certificate(beta4(ModelKind::H3), plus, delta);
  REQUIRE(cert);
  CHECK(cert->size() == 2);
  CHECK(cert->witness_radius > 0.0);
  CHECK(cert->min_gap > 0.0);
  CHECK(cert->min_inset > 0.0);
  CHECK(std::isfinite(cert->max_disjunction));
  // witness ball sits in X+ and outside every image
  CHECK(plus.contains(cert->witness_center));
  for (const auto& g : cert->generators) CHECK_FALSE(plus.image(g).contains(cert->witness_center));
  CHECK(verify_certificate(*cert).ok);
  // image traces: disks of radius 1.1/4 around g(1)
  for (const auto& g : cert->generators) {
    auto img = plus.image(g);
    auto c = g.apply(BoundaryPoint::finite(1.0)).value;
    CHECK(img.contains(BoundaryPoint::finite(c + 0.27)));
    CHECK_FALSE(img.contains(BoundaryPoint::finite(c + 0.28)));
  }

  CHECK(schottky_certificate(beta4(ModelKind::H2), plus, default_delta(ModelKind::H2)));
}

TEST_CASE("two conjugated axis translations") {
  // attracting at -2 and 2, repelling far outside the disk of radius 3
  std::vector<Isometry> gens{axis_between(6, 20, -2), axis_between(6, -20, 2)};
  auto cert = schottky_certificate(gens, HalfSpace::disk({0, 0}, 3.0), 0.7);
  REQUIRE(cert);
  CHECK(cert->disjunction.size() == 3);
}

TEST_CASE("failures are reported, never certified") {
  auto plus = HalfSpace::disk({1.0, 0.0}, 1.1);
  auto g = affine_to_isometry(4.0, 0.0, ModelKind::H3);
  CHECK_FALSE(schottky_certificate({g, g}, plus, 0.7));
  auto chk = check_schottky({g, g}, plus, 0.7);
  CHECK_FALSE(chk.ok);
  CHECK_FALSE(chk.failure.empty());
  // images overlap for beta 2
  std::vector<Isometry> two{affine_to_isometry(2.0, 0.0, ModelKind::H3),
                            affine_to_isometry(2.0, 1.0, ModelKind::H3)};
  CHECK_FALSE(schottky_certificate(two, HalfSpace::disk({1.0, 0.0}, 1.1), 0.7));
  // image leaves X+
  CHECK_FALSE(schottky_certificate(beta4(ModelKind::H3), HalfSpace::disk({5.0, 0.0}, 1.0), 0.7));
  // threshold below the constants
  SchottkyOptions tight;
  tight.threshold = 1e-3;
  CHECK_FALSE(schottky_certificate(beta4(ModelKind::H3), plus, 0.7, Point{}, tight));
}

TEST_CASE("certified systems are free") {
  auto cfg = preset("beta4");
  auto gens = build_generators(cfg);
  REQUIRE(schottky_certificate(gens, HalfSpace::disk({1.0, 0.0}, 1.1), resolve_delta(cfg)));
  OrbitLimit lim;
  lim.max_word_length = 12;
  auto st = enumerate_orbit(gens, Point{}, lim, {DedupMode::Exact, 1e-9}, exact_system(cfg));
  CHECK(st.size() == (std::size_t(2) << 12) - 2);
  CHECK(collision_groups(st).groups.empty());
}

TEST_CASE("certificate record round trip") {
  auto cert = *schottky_certificate(beta4(ModelKind::H3), HalfSpace::disk({1.0, 0.0}, 1.1),
                                    default_delta(ModelKind::H3));
  cert.words = {Word{{0}}, Word{{1}}};
  std::stringstream ss;
  write_certificate(cert, ss);
  CHECK(ss.str().rfind("SCHOTTKY-CERT/1", 0) == 0);
  auto back = read_certificate(ss);
  CHECK(back.size() == cert.size());
  CHECK(back.words == cert.words);
  CHECK(back.max_disjunction == doctest::Approx(cert.max_disjunction).epsilon(1e-12));
  CHECK(verify_certificate(back).ok);

  // tampered constants are caught
  auto bad = back;
  bad.min_gap *= 2.0;
  CHECK_FALSE(verify_certificate(bad).ok);
  bad = back;
  bad.generators[1] = bad.generators[0];
  CHECK_FALSE(verify_certificate(bad).ok);

  std::stringstream junk("not a certificate\n");
  CHECK_THROWS_AS(read_certificate(junk), ParseError);
}

TEST_CASE("lower bound from generator count") {
  // #S = 2 with max displacement 3
  auto g = Isometry::from_matrix(ModelKind::H2, std::exp(1.5), 0, 0, std::exp(-1.5));
  auto h = Isometry::from_matrix(ModelKind::H2, std::exp(1.0), 0, 0, std::exp(-1.0));
  CHECK(schottky_lower_bound({g, h}) == doctest::Approx(std::log(2.0) / 3.0));
  CHECK(schottky_lower_bound({g}) == 0.0);
}

TEST_CASE("annulus extraction") {
  std::vector<Isometry> A{axis_between(8, -1, 1), axis_between(8, -3, 3)};
  auto cert = *contraction_certificate(A, 0.5);
  double n0 = extraction_threshold(cert);
  CHECK(n0 > 0.0);
  auto store = contracting_semigroup_store(cert, n0 + 20.0);
  int n = static_cast<int>(std::ceil(n0));
  while (store.annulus(n).empty()) ++n;
  REQUIRE(n < n0 + 19);
  auto ex = extract_schottky_from_annulus(store, cert, n);
  CHECK(ex.r == doctest::Approx(4 * ex.C + 4 * cert.delta + 2));
  REQUIRE(ex.certificate);
  CHECK(ex.check.ok);
  CHECK(ex.reverified.ok);
  CHECK(ex.generators.size() >= 1);
  CHECK(ex.lower_bound == doctest::Approx(std::log(double(ex.generators.size())) / (n + 1)));
  std::vector<Point> pts;
  for (auto i : ex.indices) {
    pts.push_back(store.points[i]);
    CHECK(store.displacement[i] >= n);
    CHECK(store.displacement[i] < n + 1);
  }
  CHECK(separation_cover_check(pts, pts, ex.r).is_separated);

  CHECK_THROWS_AS(extract_schottky_from_annulus(store, cert, static_cast<int>(std::floor(n0)) - 1),
                  PreconditionFailed);
  // an annulus past the store
  CHECK_THROWS(extract_schottky_from_annulus(store, cert, static_cast<int>(n0) + 40));
}

TEST_CASE("group from a semigroup") {
  auto g = axis_between(8, -2, 2);
  auto cert = *contraction_certificate({g}, 0.5);
  auto grp = schottky_group_from_semigroup({g}, g, cert.plus, cert.minus, 0.5);
  REQUIRE(grp.generators.size() == 1);
  auto cube = compose(compose(g, g), g);
  CHECK(grp.generators[0].entry_distance(cube) < 1e-6 * std::abs(cube.a()));
  CHECK(grp.worst_displacement_slack >= -1e-9);
}
