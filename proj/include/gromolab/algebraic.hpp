#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "gromolab/models.hpp"

namespace gromolab {

using BigInt = boost::multiprecision::cpp_int;

// Root of a monic irreducible integer polynomial; min_poly holds c0..c_{d-1}, 1.
struct AlgebraicInteger {
  std::vector<BigInt> min_poly;
  int root_index = 0;             // position in `roots` (descending modulus)
  std::vector<cplx> roots;        // all conjugates, descending modulus
  cplx root() const { return roots.at(root_index); }
  int degree() const { return static_cast<int>(min_poly.size()) - 1; }

  static AlgebraicInteger from_poly(std::vector<BigInt> coeffs, int root_index);
  static AlgebraicInteger integer(std::int64_t n);
};

// Polynomial roots through the companion matrix, Newton-polished; descending modulus.
std::vector<cplx> polynomial_roots(const std::vector<BigInt>& monic);
// Numerical factor search over root subsets; degree <= 16.
bool is_irreducible(const std::vector<BigInt>& monic);

// Coordinates in the power basis 1, beta, ..., beta^{d-1}.
struct BetaRingElement {
  std::vector<BigInt> coeffs;
  friend bool operator==(const BetaRingElement&, const BetaRingElement&) = default;
};

BetaRingElement ring_reduce(const AlgebraicInteger& beta, std::vector<BigInt> poly);
BetaRingElement ring_constant(const AlgebraicInteger& beta, const BigInt& c);
bool ring_equal(const BetaRingElement& u, const BetaRingElement& v);
BetaRingElement ring_add(const BetaRingElement& u, const BetaRingElement& v);
BetaRingElement ring_sub(const BetaRingElement& u, const BetaRingElement& v);
BetaRingElement ring_mul(const AlgebraicInteger& beta, const BetaRingElement& u,
                         const BetaRingElement& v);
BetaRingElement ring_mul_beta(const AlgebraicInteger& beta, const BetaRingElement& u);
std::string ring_key(const BetaRingElement& u);
std::size_t ring_hash(const BetaRingElement& u);
cplx ring_eval(const BetaRingElement& u, cplx at);

struct Place {
  cplx value;         // the conjugate of beta at this place
  bool real = true;   // complex places stand for a conjugate pair
};

struct PlaceSet {
  std::vector<Place> places;
  std::vector<int> contracting;  // |beta|_v < 1
  std::vector<int> neutral;      // |beta|_v = 1 within tolerance
  std::vector<int> expanding;    // |beta|_v > 1
};

PlaceSet make_places(const AlgebraicInteger& beta, double unit_tol = 1e-10);
std::vector<cplx> embed_places(const BetaRingElement& u, const PlaceSet& places);
// Product of |u|_v over archimedean places, complex places counted twice.
double archimedean_norm(const BetaRingElement& u, const PlaceSet& places);

enum class BetaClass { Pisot, Salem, Neither };
std::string to_string(BetaClass c);
BetaClass classify_beta(const AlgebraicInteger& beta, double unit_tol = 1e-10);

// Digits with rational entries cleared to ring elements by a common denominator.
struct DigitSet {
  std::vector<BetaRingElement> digits;  // scaled by `scale`
  BigInt scale = 1;
  std::vector<double> values;           // unscaled numeric values
};

// Parses "0,1", "0,2/3,1"; rational digits only.
DigitSet make_digits(const AlgebraicInteger& beta, const std::vector<std::string>& digits);

// Affine system x -> x/beta + a_i with exact ring digits, used for exact dedup.
struct ExactAffineSystem {
  AlgebraicInteger beta;
  DigitSet digits;
};

std::uint64_t distinct_count(const AlgebraicInteger& beta, const std::vector<BetaRingElement>& digits,
                             int n, int n_cap = 16, std::size_t memory_cap = 60'000'000);
// Float mode for non-algebraic beta: distinct values up to tolerance.
std::uint64_t distinct_count_numeric(cplx beta, const std::vector<cplx>& digits, int n,
                                     double tol = 1e-9, int n_cap = 24);

struct GrowthDeltaRow {
  int n = 0;
  std::uint64_t count = 0;
  double per_n = 0.0;   // log D(n) / (n log|beta|)
  double ratio = 0.0;   // log(D(n)/D(n-1)) / log|beta|
};

struct GrowthDelta {
  std::vector<GrowthDeltaRow> table;
  double estimate = 0.0;  // ratio column at n_max
  double last_per_n = 0.0;
};

GrowthDelta growth_delta(const AlgebraicInteger& beta, const std::vector<BetaRingElement>& digits,
                         int n_max, int n_cap = 16);
GrowthDelta growth_delta_numeric(cplx beta, const std::vector<cplx>& digits, int n_max,
                                 double tol = 1e-9);

double translation_bound(cplx beta, const std::vector<cplx>& digits);

struct OverlapReport {
  std::vector<std::pair<double, std::size_t>> by_distance;  // (band distance, max multiplicity)
  std::size_t max_multiplicity = 0;
  double fitted_exponent = 0.0;  // slope of log multiplicity vs log distance
};

OverlapReport overlap_count(cplx beta, const std::vector<cplx>& digits, double radius,
                            std::size_t max_centers = 2000, std::uint64_t seed = 1);

// "poly:[c0,c1,...,1];root:k" (exact) or a decimal / complex literal such as "1.5" or "1.2+0.3i".
struct BetaSpec {
  bool exact = false;
  AlgebraicInteger algebraic;
  cplx numeric{0.0, 0.0};
  std::string text;
  cplx value() const { return exact ? algebraic.root() : numeric; }
};

BetaSpec parse_beta(const std::string& text);

}  // namespace gromolab
