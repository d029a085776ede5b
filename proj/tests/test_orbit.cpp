#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "gromolab/config.hpp"
#include "gromolab/orbit.hpp"

using namespace gromolab;

namespace {

std::vector<Isometry> exee() { return build_generators(preset("exee")); }

OrbitStore by_length(const std::vector<Isometry>& gens, int n, DedupSpec dedup = {},
                     std::shared_ptr<const ExactAffineSystem> exact = nullptr) {
  OrbitLimit lim;
  lim.max_word_length = n;
  return enumerate_orbit(gens, Point{}, lim, dedup, exact);
}

}  // namespace

TEST_CASE("cyclic orbit on the axis") {
  auto g = Isometry::from_matrix(ModelKind::H2, 2, 0, 0, 0.5);
  auto st = by_length({g}, 3);
  REQUIRE(st.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(st.displacement[k] == doctest::Approx((k + 1) * std::log(4.0)));
  CHECK(ball_count(st, 2.5 * std::log(4.0)) == 2);
  CHECK(ball_count(st, -1.0) == 0);
}

TEST_CASE("free binary words") {
  auto b4 = preset("beta4");
  auto gens = build_generators(b4);
  auto exact = exact_system(b4);
  REQUIRE(exact);
  for (int n : {1, 4, 8}) {
    auto st = by_length(gens, n, {DedupMode::Exact, 1e-9}, exact);
    CHECK(st.size() == (std::size_t(2) << n) - 2);
    CHECK(collision_groups(st).groups.empty());
  }
  // duplicated scaling, no dedup: words of length k all sit at k log 4
  auto s1 = Isometry::from_matrix(ModelKind::H2, 2, 0, 0, 0.5);
  auto s2 = Isometry::from_matrix(ModelKind::H2, 2, 0, 0, 0.5);
  auto st = by_length({s1, s2}, 4);
  CHECK(ball_count(st, 4 * std::log(4.0) + 1e-9) == 30);
}

TEST_CASE("exee semigroup is free") {
  auto gens = exee();
  auto none = by_length(gens, 10);
  auto flt = by_length(gens, 10, {DedupMode::Float, 1e-9});
  CHECK(none.size() == flt.size());
  CHECK(none.size() == 2046);
  CHECK(collision_groups(none).groups.empty());
}

TEST_CASE("record cap fails loudly") {
  OrbitLimit lim;
  lim.max_word_length = 20;
  lim.record_cap = 1000;
  CHECK_THROWS_AS(enumerate_orbit(exee(), Point{}, lim), BudgetExceeded);
  OrbitLimit none;
  CHECK_THROWS_AS(enumerate_orbit(exee(), Point{}, none), PreconditionFailed);
}

TEST_CASE("annuli partition the store") {
  auto st = by_length(exee(), 12);
  std::size_t total = 0;
  for (const auto& [n, ids] : st.annuli()) {
    for (auto i : ids) {
      CHECK(st.displacement[i] >= n);
      CHECK(st.displacement[i] < n + 1);
    }
    total += ids.size();
  }
  CHECK(total == st.size());
  for (int N = 0; N < 8; ++N) {
    std::size_t below = 0;
    for (int n = 0; n <= N; ++n) below += st.annulus(n).size();
    CHECK(below == ball_count(st, N + 1 - 1e-12));
  }
  for (std::size_t i = 0; i < st.size(); ++i)
    CHECK(st.displacement[i] == doctest::Approx(distance(st.base, st.points[i])).epsilon(1e-9));
}

TEST_CASE("proximity index has no false negatives") {
  auto st = by_length(exee(), 11);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> pick(0, st.size() - 1);
  for (int k = 0; k < 50; ++k) {
    auto p = st.points[pick(rng)];
    for (double r : {0.1, 0.5, 2.0}) {
      auto got = st.within(p, r);
      std::size_t brute = 0;
      for (const auto& q : st.points) brute += distance(p, q) <= r;
      CHECK(got.size() == brute);
    }
  }
}

TEST_CASE("greedy nets are separated and covering") {
  CHECK(greedy_separated_net(by_length({Isometry::from_matrix(ModelKind::H2, 2, 0, 0, 0.5)}, 1), 1.0).size() == 1);
  // two points at distance 0.5, r = 1
  auto g = Isometry::from_matrix(ModelKind::H2, std::exp(0.25), 0, 0, std::exp(-0.25));
  auto two = by_length({g}, 2);
  CHECK(greedy_separated_net(two, 1.0).size() == 1);

  auto st = by_length(exee(), 13);
  REQUIRE(st.size() > 10000);
  std::vector<Point> all = st.points;
  for (double r : {0.2, 1.0}) {
    auto net = greedy_separated_net(st, r);
    std::vector<Point> S;
    for (auto i : net) S.push_back(st.points[i]);
    auto rep = separation_cover_check(S, all, r);
    CHECK(rep.is_separated);
    CHECK(rep.is_cover);
    CHECK(rep.worst_gap <= r);
  }
  auto empty = separation_cover_check({}, all, 1.0);
  CHECK_FALSE(empty.is_cover);
  auto self = separation_cover_check({Point{}, Point{{0, 0}, 10}}, {Point{}, Point{{0, 0}, 10}}, 0.5);
  CHECK(self.is_separated);
  CHECK(self.is_cover);
}

TEST_CASE("net counts stay within a constant of each other") {
  auto st = by_length(exee(), 14);
  auto a = greedy_separated_net(st, 0.5), b = greedy_separated_net(st, 1.0);
  auto sa = st.subset(a), sb = st.subset(b);
  for (double R : {6.0, 8.0, 10.0}) {
    double na = static_cast<double>(ball_count(sa, R)), nb = static_cast<double>(ball_count(sb, R + 1.0));
    CHECK(na <= 40.0 * nb);
  }
}

TEST_CASE("quasi-geodesic defect") {
  CHECK(quasi_geodesic_defect({Point{}, Point{{0, 0}, 2}, Point{{0, 0}, 4}}) < 1e-12);
  CHECK(quasi_geodesic_defect({Point{}, Point{{0, 0}, 2}}) == 0.0);
  double d = quasi_geodesic_defect({Point{{-1, 0}, 1}, Point{{0, 0}, 1}, Point{{1, 0}, 1}});
  CHECK(d > 0.0);
}

TEST_CASE("kenyon collisions") {
  auto cfg = preset("kenyon");
  auto gens = build_generators(cfg);
  auto exact = exact_system(cfg);
  REQUIRE(exact);
  auto ex = by_length(gens, 6, {DedupMode::Exact, 1e-9}, exact);
  auto groups = collision_groups(ex);
  CHECK_FALSE(groups.groups.empty());
  // float dedup finds the same identifications
  auto fl = by_length(gens, 6, {DedupMode::Float, 1e-9});
  CHECK(fl.size() == ex.size());
  auto single = by_length({gens[1]}, 6);
  CHECK(collision_groups(single).groups.empty());
}

TEST_CASE("gorb round trip") {
  auto st = by_length(exee(), 6);
  std::stringstream ss;
  write_gorb(st, ss);
  CHECK(ss.str().rfind("GORB1", 0) == 0);
  auto table = read_gorb(ss);
  REQUIRE(table.points.size() == st.size());
  for (std::size_t i = 0; i < st.size(); ++i) {
    CHECK(table.words[i] == st.word(i));
    CHECK(table.points[i] == st.points[i]);
    CHECK(table.displacement[i] == st.displacement[i]);
  }
  CHECK(parse_word(format_word(st.word(7))) == st.word(7));
}

TEST_CASE("deep words keep exact displacements") {
  // displacement 10 per letter, far past the determinant test of from_matrix
  auto g = Isometry::from_matrix(ModelKind::H2, std::exp(5.0), 0, 0, std::exp(-5.0));
  OrbitLimit lim;
  lim.max_word_length = 12;
  auto st = enumerate_orbit({g}, Point{}, lim);
  REQUIRE(st.size() == 12);
  for (std::size_t i = 0; i < st.size(); ++i) {
    CHECK(st.displacement[i] == doctest::Approx(10.0 * st.length[i]).epsilon(1e-12));
    CHECK(distance(Point{}, st.isometry(i).apply(Point{})) ==
          doctest::Approx(st.displacement[i]).epsilon(1e-12));
  }
}
