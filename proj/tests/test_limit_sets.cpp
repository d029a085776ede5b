#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gromolab/config.hpp"
#include "gromolab/growth.hpp"
#include "gromolab/limit_sets.hpp"

using namespace gromolab;

namespace {

std::vector<Isometry> affine(double beta, std::initializer_list<double> digits,
                             ModelKind kind = ModelKind::H2) {
  std::vector<Isometry> out;
  for (double a : digits) out.push_back(affine_to_isometry(beta, a, kind));
  return out;
}

std::vector<double> sorted_reals(const BoundarySample& s) {
  std::vector<double> xs;
  for (const auto& p : s.points) xs.push_back(p.value.real());
  std::sort(xs.begin(), xs.end());
  return xs;
}

// Attractor of x -> x/4, x -> x/4 + 1, checked to the given number of levels.
bool in_quarter_cantor(double x, int levels, double tol = 1e-9) {
  for (int k = 0; k < levels; ++k) {
    if (x >= -tol && x <= 1.0 / 3.0 + tol)
      x = 4.0 * x;
    else if (x >= 1.0 - tol && x <= 4.0 / 3.0 + tol)
      x = 4.0 * (x - 1.0);
    else
      return false;
    tol *= 4.0;
  }
  return true;
}

}  // namespace

TEST_CASE("dyadic sample fills the interval") {
  auto s = sample_limit_set(affine(2.0, {0, 1}), 12, SampleMode::IFSFixedPoint);
  REQUIRE(s.size() == 4096);
  auto xs = sorted_reals(s);
  CHECK(xs.front() >= -1e-12);
  CHECK(xs.back() <= 2.0 + 1e-12);
  double gap = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) gap = std::max(gap, xs[i] - xs[i - 1]);
  gap = std::max({gap, xs.front(), 2.0 - xs.back()});
  CHECK(gap < std::pow(2.0, -10));
  for (const auto& w : s.words) CHECK(w.letters.size() <= 12);
  CHECK(to_string(s.mode) == "ifs");
}

TEST_CASE("single generator collapses to its fixed point") {
  auto s = sample_limit_set(affine(3.0, {1.0}), 6, SampleMode::IFSFixedPoint);
  for (const auto& p : s.points) CHECK(std::abs(p.value - cplx(1.5)) < 1e-12);
  CHECK(self_similarity_defect(s, affine(3.0, {1.0})) < 1e-12);
}

TEST_CASE("quarter Cantor set") {
  auto gens = affine(4.0, {0, 1});
  auto s = sample_limit_set(gens, 8, SampleMode::IFSFixedPoint);
  REQUIRE(s.size() == 256);
  for (const auto& p : s.points) CHECK(in_quarter_cantor(p.value.real(), 8));
  auto [lo, hi] = limit_set_hull(gens);
  CHECK(lo == doctest::Approx(0.0));
  CHECK(hi == doctest::Approx(4.0 / 3.0));
  // images of the sample stay near the sample
  CHECK(self_similarity_defect(s, gens) <= std::pow(4.0, -7));

  auto orbit = sample_limit_set(gens, 8, SampleMode::OrbitProjection);
  REQUIRE(orbit.size() == 256);
  for (const auto& p : orbit.points) CHECK(in_quarter_cantor(p.value.real(), 6, 1e-3));
  CHECK(to_string(orbit.mode) == "orbit");
}

TEST_CASE("sampling preconditions") {
  CHECK_THROWS_AS(sample_limit_set(affine(0.5, {0, 1}), 4, SampleMode::IFSFixedPoint),
                  PreconditionFailed);
  std::vector<Isometry> para{Isometry::from_matrix(ModelKind::H2, 1, 1, 0, 1)};
  CHECK_THROWS(sample_limit_set(para, 4, SampleMode::IFSFixedPoint));
  CHECK_THROWS_AS(sample_limit_set(affine(2.0, {0, 1}), 12, SampleMode::IFSFixedPoint, Point{}, 1000),
                  BudgetExceeded);
  auto kh = limit_set_hull(affine(3.0, {0, 2.0 / 3.0, 1}));
  CHECK(kh.first == doctest::Approx(0.0));
  CHECK(kh.second == doctest::Approx(1.5));
}

TEST_CASE("samples from a store") {
  OrbitLimit lim;
  lim.max_word_length = 10;
  auto st = enumerate_orbit(affine(4.0, {0, 1}), Point{}, lim);
  auto s = sample_from_store(st, 10.0);
  CHECK(s.size() > 0);
  CHECK(s.size() < st.size());
  for (const auto& p : s.points) CHECK(in_quarter_cantor(p.value.real(), 3, 1e-2));
}

TEST_CASE("box counting") {
  auto dyadic = sample_limit_set(affine(2.0, {0, 1}), 14, SampleMode::IFSFixedPoint);
  auto c1 = box_counting_dim(dyadic);
  CHECK(c1.fitted_dim == doctest::Approx(1.0).epsilon(0.05));
  for (std::size_t i = 1; i < c1.eps.size(); ++i) {
    CHECK(c1.eps[i] < c1.eps[i - 1]);
    CHECK(c1.counts[i] >= c1.counts[i - 1]);
  }
  CHECK(c1.resolution == doctest::Approx(4 * median_nearest_neighbor([&] {
                                           std::vector<cplx> v;
                                           for (const auto& p : dyadic.points) v.push_back(p.value);
                                           return v;
                                         }())));

  auto cantor = sample_limit_set(affine(4.0, {0, 1}), 12, SampleMode::IFSFixedPoint);
  CHECK(std::abs(box_counting_dim(cantor).fitted_dim - 0.5) <= 0.05);

  BoundarySample point;
  point.points.assign(200, BoundaryPoint::finite(0.25));
  CHECK(box_counting_dim(point).fitted_dim == 0.0);

  CHECK_THROWS_AS(box_counting_dim(cantor, std::vector<double>{0.1, 1e-9}), PreconditionFailed);
  try {
    box_counting_dim(cantor, std::vector<double>{0.1, 1e-9});
  } catch (const PreconditionFailed& e) {
    CHECK(std::string(e.what()).find("0.000000") == std::string::npos);
  }
  BoundarySample tiny;
  tiny.points.assign(10, BoundaryPoint::finite(0.0));
  CHECK_THROWS(box_counting_dim(tiny));

  // H3 digit sets fill a planar region
  auto gauss = sample_limit_set({affine_to_isometry(cplx(1, 1), 0.0, ModelKind::H3),
                                 affine_to_isometry(cplx(1, 1), 1.0, ModelKind::H3)},
                                14, SampleMode::IFSFixedPoint);
  CHECK(box_counting_dim(gauss).fitted_dim == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("median nearest neighbour") {
  CHECK(median_nearest_neighbor({0.0, 1.0, 3.0}) == doctest::Approx(1.0));
  // nearest distances 2, 2, 1, 1, 5
  CHECK(median_nearest_neighbor({cplx(0, 0), cplx(0, 2), cplx(5, 5), cplx(5, 6), cplx(9, 9)}) ==
        doctest::Approx(2.0));
}

TEST_CASE("shadows") {
  Point o{};
  auto product_at = [](const Point& x, const BoundaryPoint& xi) {
    return gromov_product(AnyPoint{Point{}}, AnyPoint{xi}, x);
  };
  for (double h : {std::exp(-5.0), std::exp(-2.0), std::exp(5.0)}) {
    Point x{{0.0, 0.0}, h};
    auto sh = shadow(x, 1.0);
    for (double t = -50; t <= 50; t += 0.01) {
      auto xi = BoundaryPoint::finite(t);
      CHECK(sh.contains(xi) == (product_at(x, xi) <= 1.0 + 1e-12));
    }
    CHECK(sh.contains(BoundaryPoint::infinity()) == (product_at(x, BoundaryPoint::infinity()) <= 1.0));
  }
  // below the base the shadow is an interval around 0 that shrinks with h
  double prev = 1e9;
  for (double h : {std::exp(-2.0), std::exp(-3.0), std::exp(-5.0)}) {
    auto sh = shadow(Point{{0, 0}, h}, 1.0);
    REQUIRE(sh.kind == BoundaryRegion::Kind::Form);
    CHECK(sh.contains(BoundaryPoint::finite(0.0)));
    CHECK(std::abs(sh.center()) < 1e-12);
    CHECK(sh.radius() < prev);
    prev = sh.radius();
  }
  // above the base the shadow surrounds infinity
  auto up = shadow(Point{{0, 0}, std::exp(5.0)}, 1.0);
  CHECK(up.contains(BoundaryPoint::infinity()));
  CHECK_FALSE(up.contains(BoundaryPoint::finite(0.0)));

  CHECK(shadow(Point{{0.3, 0}, 0.2}, 100.0).kind == BoundaryRegion::Kind::Whole);
  CHECK(shadow(o, 0.0).kind == BoundaryRegion::Kind::Whole);
  CHECK(shadow(o, 0.5).contains(BoundaryPoint::finite(17.0)));
  // contains the radial projection
  Point x{{2.0, 0.0}, 0.1};
  CHECK(shadow(x, 0.5).contains(BoundaryPoint::finite(2.0)));
}

TEST_CASE("patterson measures") {
  auto g = Isometry::from_matrix(ModelKind::H2, std::exp(1.0), 0, 0, std::exp(-1.0));
  OrbitLimit lim;
  lim.max_word_length = 1;
  auto one = enumerate_orbit({g}, Point{}, lim);
  auto dirac = patterson_measure(one, 1.0, 0.0);
  REQUIRE(dirac.weights.size() == 1);
  CHECK(dirac.weights[0] == doctest::Approx(1.0));

  lim.max_word_length = 2;
  auto two = enumerate_orbit({g}, Point{}, lim);
  auto mu = patterson_measure(two, 0.7, 0.0);
  CHECK(mu.weights[0] / mu.weights[1] == doctest::Approx(std::exp(0.7 * 2.0)));
  CHECK(mu.weights[0] + mu.weights[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(patterson_measure(two, 0.01, 0.0), PreconditionFailed);

  auto cfg = preset("beta4");
  lim.max_word_length = 16;
  auto st = enumerate_orbit(build_generators(cfg), Point{{2.0 / 3.0, 0}, 0.5}, lim);
  double est = critical_exponent(growth_series(st)).value;
  CHECK_THROWS_AS(patterson_measure(st, est + 0.01), PreconditionFailed);
  double total = 0;
  auto m = patterson_measure(st, est + 0.05);
  for (double w : m.weights) {
    CHECK(w >= 0.0);
    total += w;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  // mass below a fixed displacement drops as s decreases toward the exponent
  double last = 2.0;
  for (double ds : {0.5, 0.2, 0.05}) {
    double below = 1.0 - patterson_measure(st, est + ds).mass_beyond(6.0);
    CHECK(below < last);
    last = below;
  }
}

TEST_CASE("frostman checks") {
  // a Dirac mass fails at every small radius
  DiscreteMeasure dirac;
  dirac.atoms = {Point{{0.5, 0}, 1e-6}};
  dirac.displacement = {distance(Point{}, dirac.atoms[0])};
  dirac.weights = {1.0};
  auto d = frostman_check(dirac, 0.5, 10);
  CHECK(d.divergent);
  CHECK(d.C_max >= std::pow(0.003, -0.5) * 0.99);

  // uniform mass on [0, 1] against delta = 1
  DiscreteMeasure uni;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    uni.atoms.push_back(Point{{(i + 0.5) / n, 0}, 1e-7});
    uni.displacement.push_back(distance(Point{}, uni.atoms.back()));
    uni.weights.push_back(1.0 / n);
  }
  auto u = frostman_check(uni, 1.0, 200);
  CHECK_FALSE(u.divergent);
  CHECK(u.C_max < 10.0);
  CHECK(u.variation < 3.0);
  CHECK(u.radii.size() == 9);
  CHECK(u.radii.front() == doctest::Approx(0.3));
  CHECK(u.radii.back() == doctest::Approx(0.003));
  CHECK_THROWS_AS(frostman_check(DiscreteMeasure{}, 1.0, 10), PreconditionFailed);
}

TEST_CASE("self-similarity defect") {
  for (int depth : {8, 12}) {
    auto s = sample_limit_set(affine(2.0, {0, 1}), depth, SampleMode::IFSFixedPoint);
    CHECK(self_similarity_defect(s, affine(2.0, {0, 1})) <= std::pow(2.0, -depth) + 1e-12);
  }
  auto s = sample_limit_set(affine(4.0, {0, 1}), 8, SampleMode::IFSFixedPoint);
  s.points.push_back(BoundaryPoint::finite(3.0));
  s.words.push_back(Word{});
  // images of the outlier land at 3/4 and 7/4; the outlier is 5/4 from the nearest image
  CHECK(self_similarity_defect(s, affine(4.0, {0, 1})) == doctest::Approx(1.25).epsilon(1e-9));
}

TEST_CASE("rendering") {
  BoundarySample empty;
  auto blank = render(empty, 64, 32, {0, 2, 0, 1});
  CHECK(blank.plotted == 0);
  CHECK(std::all_of(blank.pixels.begin(), blank.pixels.end(), [](auto p) { return p == 0; }));

  auto golden = build_generators(preset("golden"));
  auto s = sample_limit_set(golden, 14, SampleMode::IFSFixedPoint);
  auto [lo, hi] = limit_set_hull(golden);
  auto img = render(s, 200, 40, {lo, hi, 0, 1});
  CHECK(img.plotted == s.size());
  // interval-like: every column inside the hull is lit
  std::size_t dark = 0;
  for (int c = 1; c + 1 < img.width; ++c) dark += img.pixels[c] == 0;
  CHECK(dark == 0);
  CHECK(render(s, 200, 40, {lo, hi, 0, 1}).pixels == img.pixels);

  std::stringstream ss;
  write_pgm(img, ss);
  CHECK(ss.str().rfind("P5\n200 40\n255\n", 0) == 0);
  CHECK(ss.str().size() == std::string("P5\n200 40\n255\n").size() + 200 * 40);

  auto dir = std::filesystem::temp_directory_path() / "gromolab_render_test";
  std::filesystem::create_directories(dir);
  auto path = (dir / "golden.pgm").string();
  write_pgm(img, path, "golden");
  CHECK(std::filesystem::exists(path));
  std::ifstream side(path + ".json");
  std::string json((std::istreambuf_iterator<char>(side)), {});
  CHECK(json.find("viewport") != std::string::npos);
  std::filesystem::remove_all(dir);

  OrbitLimit lim;
  lim.max_word_length = 8;
  auto st = enumerate_orbit(golden, Point{}, lim);
  auto orbit_img = render(st, 64, 64, {-1, 3, 0, 1.2});
  CHECK(orbit_img.plotted > 0);
}
