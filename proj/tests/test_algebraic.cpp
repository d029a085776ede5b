#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "gromolab/algebraic.hpp"

using namespace gromolab;

namespace {

AlgebraicInteger golden() { return AlgebraicInteger::from_poly({-1, -1, 1}, 0); }
AlgebraicInteger lehmer() {
  return AlgebraicInteger::from_poly({1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1}, 0);
}

std::vector<BetaRingElement> int_digits(const AlgebraicInteger& b, std::initializer_list<int> ds) {
  std::vector<BetaRingElement> out;
  for (int d : ds) out.push_back(ring_constant(b, d));
  return out;
}

// Brute-force count of sum a_k beta^k over integer beta and integer digits.
std::size_t brute_integer(long long beta, const std::vector<long long>& digits, int n) {
  std::set<long long> level(digits.begin(), digits.end());
  for (int k = 2; k <= n; ++k) {
    std::set<long long> next;
    for (auto s : level)
      for (auto a : digits) next.insert(beta * s + a);
    level = std::move(next);
  }
  return level.size();
}

}  // namespace

TEST_CASE("roots and irreducibility") {
  auto g = golden();
  CHECK(g.root().real() == doctest::Approx((1 + std::sqrt(5.0)) / 2).epsilon(1e-14));
  CHECK(g.degree() == 2);
  CHECK(lehmer().root().real() == doctest::Approx(1.17628081826).epsilon(1e-10));
  CHECK_FALSE(is_irreducible({-1, 0, 1}));
  CHECK_FALSE(is_irreducible({2, -3, 1}));
  CHECK(is_irreducible({-2, 0, 1}));
  CHECK_THROWS_AS(AlgebraicInteger::from_poly({-1, 0, 1}, 0), PreconditionFailed);
  CHECK_THROWS_AS(AlgebraicInteger::from_poly({-1, 0, 2}, 0), PreconditionFailed);
  CHECK_THROWS_AS(AlgebraicInteger::from_poly({-1, -1, 1}, 2), PreconditionFailed);
  auto r = polynomial_roots({-6, 11, -6, 1});
  REQUIRE(r.size() == 3);
  CHECK(r[0].real() == doctest::Approx(3.0));
  CHECK(r[2].real() == doctest::Approx(1.0));
}

TEST_CASE("ring arithmetic") {
  auto g = golden();
  auto phi = ring_reduce(g, {0, 1});
  auto sq = ring_mul(g, phi, phi);
  CHECK(sq.coeffs == std::vector<BigInt>{1, 1});
  CHECK(ring_reduce(g, {0, 0, 1}) == sq);
  CHECK(ring_mul_beta(g, phi) == sq);
  CHECK(ring_eval(sq, g.root()).real() == doctest::Approx(std::pow(g.root().real(), 2)));
  CHECK(ring_equal(ring_sub(ring_add(sq, phi), phi), sq));
  CHECK(ring_key(sq) == ring_key(ring_reduce(g, {1, 1})));
  CHECK(ring_hash(sq) == ring_hash(ring_reduce(g, {1, 1})));
  // phi^200 stays exact well past double precision
  BetaRingElement p = ring_constant(g, 1);
  for (int i = 0; i < 200; ++i) p = ring_mul_beta(g, p);
  CHECK(p.coeffs[0] > BigInt(1) << 130);
}

TEST_CASE("places and norm") {
  auto g = golden();
  auto pl = make_places(g);
  CHECK(pl.expanding.size() == 1);
  CHECK(pl.contracting.size() == 1);
  CHECK(pl.neutral.empty());
  // the norm of phi is |-1| = 1
  CHECK(archimedean_norm(ring_reduce(g, {0, 1}), pl) == doctest::Approx(1.0));
  CHECK(archimedean_norm(ring_constant(g, 3), pl) == doctest::Approx(9.0));
  auto emb = embed_places(ring_reduce(g, {0, 1}), pl);
  CHECK(std::abs(emb[0] * emb[1] + 1.0) < 1e-12);

  auto lp = make_places(lehmer());
  CHECK(lp.expanding.size() == 1);
  CHECK(lp.contracting.size() == 1);
  CHECK(lp.neutral.size() == 4);  // four complex pairs on the circle
}

TEST_CASE("pisot and salem classification") {
  CHECK(classify_beta(golden()) == BetaClass::Pisot);
  CHECK(classify_beta(AlgebraicInteger::integer(3)) == BetaClass::Pisot);
  CHECK(classify_beta(lehmer()) == BetaClass::Salem);
  CHECK(classify_beta(AlgebraicInteger::from_poly({-2, 0, 1}, 0)) == BetaClass::Neither);
  CHECK(classify_beta(parse_beta("poly:[1,-1,-1,-1,1];root:0").algebraic) == BetaClass::Salem);
  CHECK(to_string(BetaClass::Pisot) == "Pisot");
}

TEST_CASE("distinct counts against a brute-force oracle") {
  auto two = AlgebraicInteger::integer(2);
  CHECK(distinct_count(two, int_digits(two, {0, 1}), 5) == 32);
  auto three = AlgebraicInteger::integer(3);
  CHECK(distinct_count(three, int_digits(three, {0, 2, 3}), 2) == 8);
  CHECK(distinct_count(three, int_digits(three, {0, 2, 3}), 1) == 3);
  for (int n = 1; n <= 9; ++n) {
    CHECK(distinct_count(three, int_digits(three, {0, 2, 3}), n) == brute_integer(3, {0, 2, 3}, n));
    CHECK(distinct_count(two, int_digits(two, {0, 1, 3}), n) == brute_integer(2, {0, 1, 3}, n));
  }
  CHECK_THROWS_AS(distinct_count(two, int_digits(two, {0, 1}), 17), BudgetExceeded);
  CHECK_THROWS_AS(distinct_count(two, int_digits(two, {0, 1}), 12, 16, 100), BudgetExceeded);

  // exact and numeric agree for the golden mean
  auto g = golden();
  for (int n = 1; n <= 10; ++n)
    CHECK(distinct_count(g, int_digits(g, {0, 1}), n) ==
          distinct_count_numeric(g.root(), {0.0, 1.0}, n));
  // golden words of length n give Fibonacci-many sums, not 2^n
  CHECK(distinct_count(g, int_digits(g, {0, 1}), 10) < 1024);
}

TEST_CASE("rational digits") {
  auto three = AlgebraicInteger::integer(3);
  auto ds = make_digits(three, {"0", "2/3", "1"});
  CHECK(ds.scale == 3);
  CHECK(ds.values[1] == doctest::Approx(2.0 / 3.0));
  CHECK(ds.digits[2].coeffs[0] == 3);
  // digits {0, 1/3} under beta 3 never collide
  auto third = make_digits(three, {"0", "1/3"});
  CHECK(distinct_count(three, third.digits, 6) == 64);
  CHECK_THROWS(make_digits(three, {"0", "x"}));
}

TEST_CASE("growth of distinct sums") {
  auto two = AlgebraicInteger::integer(2);
  auto gd = growth_delta(two, int_digits(two, {0, 1}), 10);
  REQUIRE(gd.table.size() == 10);
  CHECK(gd.estimate == doctest::Approx(1.0));
  CHECK(gd.table[4].count == 32);
  auto four = AlgebraicInteger::integer(4);
  CHECK(growth_delta(four, int_digits(four, {0, 1}), 8).estimate == doctest::Approx(0.5));
  auto g = golden();
  CHECK(growth_delta(g, int_digits(g, {0, 1}), 14).estimate == doctest::Approx(1.0).epsilon(0.02));
  auto num = growth_delta_numeric(cplx(4.0), {0.0, 1.0}, 8);
  CHECK(num.estimate == doctest::Approx(0.5));
  CHECK_THROWS_AS(growth_delta_numeric(cplx(0.5), {0.0, 1.0}, 4), OutOfScope);
}

TEST_CASE("translation bound") {
  CHECK(translation_bound(2.0, {0.0, 1.0}) == doctest::Approx(2.0));
  CHECK(translation_bound(4.0, {0.0, 1.0}) == doctest::Approx(4.0 / 3.0));
  CHECK(translation_bound(3.0, {0.0}) == 0.0);
  CHECK_THROWS_AS(translation_bound(1.0, {0.0, 1.0}), OutOfScope);
}

TEST_CASE("overlap count") {
  auto four = overlap_count(4.0, {0.0, 1.0}, 8.0, 300);
  CHECK(four.max_multiplicity >= 1);
  CHECK(four.max_multiplicity <= 4);
  auto two = overlap_count(2.0, {0.0, 1.0}, 8.0, 300);
  CHECK(two.max_multiplicity >= four.max_multiplicity);
}

TEST_CASE("beta spec parsing") {
  auto a = parse_beta("poly:[-1,-1,1];root:0");
  CHECK(a.exact);
  CHECK(a.value().real() == doctest::Approx(1.6180339887));
  auto b = parse_beta("1.5");
  CHECK_FALSE(b.exact);
  CHECK(b.value() == cplx(1.5, 0));
  CHECK(parse_beta("1.2+0.3i").value() == cplx(1.2, 0.3));
  CHECK(parse_beta("-2i").value() == cplx(0, -2));
  CHECK_THROWS_AS(parse_beta("poly:[1,2"), ParseError);
  CHECK_THROWS(parse_beta("abc"));
}
