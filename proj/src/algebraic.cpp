#include "gromolab/algebraic.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <regex>
#include <sstream>
#include <unordered_set>

#include "gromolab/orbit.hpp"

namespace gromolab {

namespace {

using lcplx = std::complex<long double>;

lcplx eval_poly(const std::vector<BigInt>& p, lcplx x) {
  lcplx v = 0;
  for (std::size_t i = p.size(); i-- > 0;) v = v * x + static_cast<long double>(p[i]);
  return v;
}

lcplx eval_derivative(const std::vector<BigInt>& p, lcplx x) {
  lcplx v = 0;
  for (std::size_t i = p.size(); i-- > 1;)
    v = v * x + static_cast<long double>(p[i]) * static_cast<long double>(i);
  return v;
}

bool root_order(cplx a, cplx b) {
  double ma = std::abs(a), mb = std::abs(b);
  if (std::abs(ma - mb) > 1e-12 * std::max(1.0, ma)) return ma > mb;
  if (std::abs(a.real() - b.real()) > 1e-12) return a.real() > b.real();
  return a.imag() > b.imag();
}

BigInt parse_bigint(const std::string& s) {
  std::string t;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.empty() || !std::regex_match(t, std::regex("[+-]?[0-9]+")))
    throw ParseError("not an integer: '" + s + "'");
  if (t[0] == '+') t = t.substr(1);
  return BigInt(t);
}

double parse_real_term(const std::string& s) {
  std::string t;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t == "pi") return M_PI;
  std::smatch m;
  if (std::regex_match(t, m, std::regex(R"(sqrt\((.+)\))"))) return std::sqrt(parse_real_term(m[1]));
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + s + "'");
  }
  if (pos != t.size()) throw ParseError("not a number: '" + s + "'");
  return v;
}

// a, a/b, with a and b terms ("pi", decimals, sqrt(x)) and an optional sign.
double parse_real(const std::string& s) {
  std::string t = s;
  double sign = 1.0;
  if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
    if (t[0] == '-') sign = -1.0;
    t = t.substr(1);
  }
  auto slash = t.find('/');
  if (slash == std::string::npos) return sign * parse_real_term(t);
  return sign * parse_real_term(t.substr(0, slash)) / parse_real_term(t.substr(slash + 1));
}

}  // namespace

// ------------------------------------------------------------------- roots

std::vector<cplx> polynomial_roots(const std::vector<BigInt>& p) {
  const int d = static_cast<int>(p.size()) - 1;
  if (d < 1) throw PreconditionFailed("polynomial of degree < 1 has no roots");
  if (p.back() != 1) throw PreconditionFailed("polynomial must be monic");
  std::vector<cplx> roots;
  if (d == 1) {
    roots.push_back(-static_cast<double>(p[0]));
    return roots;
  }
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(d, d);
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -static_cast<double>(p[i]);
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  for (int i = 0; i < d; ++i) {
    lcplx x(es.eigenvalues()[i].real(), es.eigenvalues()[i].imag());
    for (int it = 0; it < 50; ++it) {
      lcplx f = eval_poly(p, x), df = eval_derivative(p, x);
      if (std::abs(df) == 0.0L) break;
      lcplx step = f / df;
      x -= step;
      if (std::abs(step) <= 1e-19L * std::max(1.0L, std::abs(x))) break;
    }
    cplx r(static_cast<double>(x.real()), static_cast<double>(x.imag()));
    if (std::abs(r.imag()) < 1e-14 * std::max(1.0, std::abs(r))) r = cplx(r.real(), 0.0);
    roots.push_back(r);
  }
  std::sort(roots.begin(), roots.end(), root_order);
  return roots;
}

bool is_irreducible(const std::vector<BigInt>& p) {
  const int d = static_cast<int>(p.size()) - 1;
  if (d <= 1) return true;
  if (d > 16) throw OutOfScope("irreducibility check limited to degree 16");
  auto roots = polynomial_roots(p);
  for (unsigned mask = 1; mask < (1u << d) - 1; ++mask) {
    int k = __builtin_popcount(mask);
    if (2 * k > d) continue;
    std::vector<lcplx> f{1.0L};
    for (int i = 0; i < d; ++i) {
      if (!(mask & (1u << i))) continue;
      std::vector<lcplx> g(f.size() + 1, 0.0L);
      for (std::size_t j = 0; j < f.size(); ++j) {
        g[j + 1] += f[j];
        g[j] -= f[j] * lcplx(roots[i].real(), roots[i].imag());
      }
      f = g;
    }
    bool integral = true;
    for (const auto& c : f) {
      long double tol = 1e-6L * std::max(1.0L, std::abs(c));
      if (std::abs(c.imag()) > tol || std::abs(c.real() - std::round(c.real())) > tol) {
        integral = false;
        break;
      }
    }
    if (integral) return false;
  }
  return true;
}

AlgebraicInteger AlgebraicInteger::from_poly(std::vector<BigInt> coeffs, int root_index) {
  while (coeffs.size() > 1 && coeffs.back() == 0) coeffs.pop_back();
  if (coeffs.size() < 2) throw PreconditionFailed("minimal polynomial must have degree >= 1");
  if (coeffs.back() != 1) throw PreconditionFailed("minimal polynomial must be monic");
  if (!is_irreducible(coeffs)) throw PreconditionFailed("polynomial is reducible over Q");
  AlgebraicInteger a;
  a.min_poly = std::move(coeffs);
  a.roots = polynomial_roots(a.min_poly);
  if (root_index < 0 || root_index >= a.degree())
    throw PreconditionFailed("root index out of range");
  a.root_index = root_index;
  long double residual = std::abs(eval_poly(a.min_poly, lcplx(a.root().real(), a.root().imag())));
  long double scale = 1.0L;
  for (const auto& c : a.min_poly)
    scale += std::abs(static_cast<long double>(c)) *
             std::pow(std::max(1.0L, std::abs(lcplx(a.root().real(), a.root().imag()))),
                      static_cast<long double>(a.degree()));
  if (residual > 1e-10L * scale) throw PreconditionFailed("root does not satisfy the polynomial");
  return a;
}

AlgebraicInteger AlgebraicInteger::integer(std::int64_t n) {
  return from_poly({BigInt(-n), BigInt(1)}, 0);
}

// ------------------------------------------------------------ ring elements

BetaRingElement ring_reduce(const AlgebraicInteger& beta, std::vector<BigInt> poly) {
  const int d = beta.degree();
  const auto& m = beta.min_poly;
  for (int i = static_cast<int>(poly.size()) - 1; i >= d; --i) {
    if (poly[i] == 0) continue;
    BigInt c = poly[i];
    for (int j = 0; j < d; ++j) poly[i - d + j] -= c * m[j];
    poly[i] = 0;
  }
  poly.resize(d, 0);
  return {std::move(poly)};
}

BetaRingElement ring_constant(const AlgebraicInteger& beta, const BigInt& c) {
  std::vector<BigInt> v(beta.degree(), 0);
  v[0] = c;
  return {std::move(v)};
}

bool ring_equal(const BetaRingElement& u, const BetaRingElement& v) { return u.coeffs == v.coeffs; }

BetaRingElement ring_add(const BetaRingElement& u, const BetaRingElement& v) {
  BetaRingElement r = u;
  for (std::size_t i = 0; i < r.coeffs.size(); ++i) r.coeffs[i] += v.coeffs[i];
  return r;
}

BetaRingElement ring_sub(const BetaRingElement& u, const BetaRingElement& v) {
  BetaRingElement r = u;
  for (std::size_t i = 0; i < r.coeffs.size(); ++i) r.coeffs[i] -= v.coeffs[i];
  return r;
}

BetaRingElement ring_mul(const AlgebraicInteger& beta, const BetaRingElement& u,
                         const BetaRingElement& v) {
  std::vector<BigInt> prod(u.coeffs.size() + v.coeffs.size(), 0);
  for (std::size_t i = 0; i < u.coeffs.size(); ++i) {
    if (u.coeffs[i] == 0) continue;
    for (std::size_t j = 0; j < v.coeffs.size(); ++j) prod[i + j] += u.coeffs[i] * v.coeffs[j];
  }
  return ring_reduce(beta, std::move(prod));
}

BetaRingElement ring_mul_beta(const AlgebraicInteger& beta, const BetaRingElement& u) {
  std::vector<BigInt> shifted(u.coeffs.size() + 1, 0);
  for (std::size_t i = 0; i < u.coeffs.size(); ++i) shifted[i + 1] = u.coeffs[i];
  return ring_reduce(beta, std::move(shifted));
}

std::string ring_key(const BetaRingElement& u) {
  std::string s;
  for (std::size_t i = 0; i < u.coeffs.size(); ++i) {
    if (i) s += ',';
    s += u.coeffs[i].str();
  }
  return s;
}

std::size_t ring_hash(const BetaRingElement& u) {
  std::size_t h = 0x345678;
  for (const auto& c : u.coeffs) h = h * 1000003u ^ hash_value(c);
  return h;
}

cplx ring_eval(const BetaRingElement& u, cplx at) {
  cplx v = 0.0;
  for (std::size_t i = u.coeffs.size(); i-- > 0;) v = v * at + static_cast<double>(u.coeffs[i]);
  return v;
}

// ------------------------------------------------------------------- places

PlaceSet make_places(const AlgebraicInteger& beta, double unit_tol) {
  PlaceSet ps;
  for (const auto& r : beta.roots) {
    if (r.imag() < 0.0) continue;
    Place pl{r, r.imag() == 0.0};
    int idx = static_cast<int>(ps.places.size());
    ps.places.push_back(pl);
    double m = std::abs(r);
    if (std::abs(m - 1.0) <= unit_tol) ps.neutral.push_back(idx);
    else if (m < 1.0) ps.contracting.push_back(idx);
    else ps.expanding.push_back(idx);
  }
  return ps;
}

std::vector<cplx> embed_places(const BetaRingElement& u, const PlaceSet& places) {
  std::vector<cplx> out;
  for (const auto& p : places.places) out.push_back(ring_eval(u, p.value));
  return out;
}

double archimedean_norm(const BetaRingElement& u, const PlaceSet& places) {
  double n = 1.0;
  for (const auto& p : places.places) {
    double a = std::abs(ring_eval(u, p.value));
    n *= p.real ? a : a * a;
  }
  return n;
}

std::string to_string(BetaClass c) {
  switch (c) {
    case BetaClass::Pisot: return "Pisot";
    case BetaClass::Salem: return "Salem";
    case BetaClass::Neither: return "Neither";
  }
  return "?";
}

BetaClass classify_beta(const AlgebraicInteger& beta, double unit_tol) {
  cplx b = beta.root();
  if (std::abs(b) <= 1.0) throw OutOfScope("classify_beta requires |beta| > 1");
  bool all_inside = true, all_closed = true, touches = false;
  for (const auto& r : beta.roots) {
    if (std::abs(r - b) <= 1e-12 * std::abs(b) || std::abs(r - std::conj(b)) <= 1e-12 * std::abs(b))
      continue;
    double m = std::abs(r);
    if (!(m < 1.0 - unit_tol)) all_inside = false;
    if (m > 1.0 + unit_tol) all_closed = false;
    if (std::abs(m - 1.0) <= unit_tol) touches = true;
  }
  if (all_inside) return BetaClass::Pisot;
  if (all_closed && touches) return BetaClass::Salem;
  return BetaClass::Neither;
}

DigitSet make_digits(const AlgebraicInteger& beta, const std::vector<std::string>& digits) {
  std::vector<std::pair<BigInt, BigInt>> rational;
  BigInt scale = 1;
  for (const auto& s : digits) {
    auto slash = s.find('/');
    BigInt num = parse_bigint(s.substr(0, slash));
    BigInt den = slash == std::string::npos ? BigInt(1) : parse_bigint(s.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator in digit " + s);
    if (den < 0) {
      num = -num;
      den = -den;
    }
    rational.emplace_back(num, den);
    scale = boost::multiprecision::lcm(scale, den);
  }
  DigitSet ds;
  ds.scale = scale;
  for (const auto& [num, den] : rational) {
    ds.digits.push_back(ring_constant(beta, num * (scale / den)));
    ds.values.push_back(static_cast<double>(num) / static_cast<double>(den));
  }
  return ds;
}

// ----------------------------------------------------------------- counting

namespace {

struct RingHash {
  std::size_t operator()(const BetaRingElement& u) const { return ring_hash(u); }
};

}  // namespace

std::uint64_t distinct_count(const AlgebraicInteger& beta, const std::vector<BetaRingElement>& digits,
                             int n, int n_cap, std::size_t memory_cap) {
  if (n < 1) throw PreconditionFailed("distinct_count needs n >= 1");
  if (n > n_cap)
    throw BudgetExceeded("distinct_count: n = " + std::to_string(n) + " exceeds the cap " +
                         std::to_string(n_cap));
  std::unordered_set<BetaRingElement, RingHash> level(digits.begin(), digits.end());
  for (int k = 2; k <= n; ++k) {
    std::unordered_set<BetaRingElement, RingHash> next;
    next.reserve(level.size() * digits.size());
    for (const auto& s : level) {
      BetaRingElement bs = ring_mul_beta(beta, s);
      for (const auto& a : digits) {
        next.insert(ring_add(bs, a));
        if (next.size() > memory_cap)
          throw BudgetExceeded("distinct_count: more than " + std::to_string(memory_cap) +
                               " distinct values");
      }
    }
    level = std::move(next);
  }
  return level.size();
}

namespace {

std::vector<cplx> dedup_values(std::vector<cplx> v, double tol) {
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  std::vector<cplx> out;
  std::size_t window_start = 0;
  for (const auto& x : v) {
    while (window_start < out.size() && out[window_start].real() < x.real() - tol) ++window_start;
    bool dup = false;
    for (std::size_t j = window_start; j < out.size(); ++j)
      if (std::abs(out[j] - x) <= tol) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(x);
  }
  return out;
}

}  // namespace

std::uint64_t distinct_count_numeric(cplx beta, const std::vector<cplx>& digits, int n, double tol,
                                     int n_cap) {
  if (n < 1) throw PreconditionFailed("distinct_count needs n >= 1");
  if (n > n_cap) throw BudgetExceeded("distinct_count_numeric: n exceeds the cap");
  // Values sum_{k<n} a_k beta^{-k}, bounded by the translation bound.
  std::vector<cplx> level = dedup_values(digits, tol);
  cplx scale = 1.0;
  for (int k = 2; k <= n; ++k) {
    scale /= beta;
    std::vector<cplx> next;
    next.reserve(level.size() * digits.size());
    for (const auto& s : level)
      for (const auto& a : digits) next.push_back(s + a * scale);
    level = dedup_values(std::move(next), tol);
  }
  return level.size();
}

namespace {

GrowthDelta table_from_counts(const std::vector<std::uint64_t>& counts, double log_beta) {
  GrowthDelta g;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    GrowthDeltaRow row;
    row.n = static_cast<int>(i + 1);
    row.count = counts[i];
    row.per_n = std::log(static_cast<double>(counts[i])) / (row.n * log_beta);
    double prev = i == 0 ? 1.0 : static_cast<double>(counts[i - 1]);
    row.ratio = std::log(static_cast<double>(counts[i]) / prev) / log_beta;
    g.table.push_back(row);
  }
  g.estimate = g.table.back().ratio;
  g.last_per_n = g.table.back().per_n;
  return g;
}

}  // namespace

GrowthDelta growth_delta(const AlgebraicInteger& beta, const std::vector<BetaRingElement>& digits,
                         int n_max, int n_cap) {
  double lb = std::log(std::abs(beta.root()));
  if (!(lb > 0.0)) throw OutOfScope("growth_delta requires |beta| > 1");
  if (n_max < 1) throw PreconditionFailed("growth_delta needs n_max >= 1");
  if (n_max > n_cap) throw BudgetExceeded("growth_delta: n_max exceeds the cap");
  std::vector<std::uint64_t> counts;
  std::unordered_set<BetaRingElement, RingHash> level(digits.begin(), digits.end());
  counts.push_back(level.size());
  for (int k = 2; k <= n_max; ++k) {
    std::unordered_set<BetaRingElement, RingHash> next;
    next.reserve(level.size() * digits.size());
    for (const auto& s : level) {
      BetaRingElement bs = ring_mul_beta(beta, s);
      for (const auto& a : digits) next.insert(ring_add(bs, a));
    }
    level = std::move(next);
    counts.push_back(level.size());
  }
  return table_from_counts(counts, lb);
}

GrowthDelta growth_delta_numeric(cplx beta, const std::vector<cplx>& digits, int n_max, double tol) {
  double lb = std::log(std::abs(beta));
  if (!(lb > 0.0)) throw OutOfScope("growth_delta requires |beta| > 1");
  std::vector<std::uint64_t> counts;
  for (int n = 1; n <= n_max; ++n) counts.push_back(distinct_count_numeric(beta, digits, n, tol));
  return table_from_counts(counts, lb);
}

double translation_bound(cplx beta, const std::vector<cplx>& digits) {
  double b = std::abs(beta);
  if (!(b > 1.0)) throw OutOfScope("translation_bound requires |beta| > 1");
  double m = 0.0;
  for (const auto& a : digits) m = std::max(m, std::abs(a));
  return m / (1.0 - 1.0 / b);
}

OverlapReport overlap_count(cplx beta, const std::vector<cplx>& digits, double radius,
                            std::size_t max_centers, std::uint64_t seed) {
  double lb = std::log(std::abs(beta));
  if (!(lb > 0.0)) throw OutOfScope("overlap_count requires |beta| > 1");
  std::vector<Isometry> gens;
  for (const auto& a : digits) gens.push_back(affine_to_isometry(beta, a, ModelKind::H3));
  // Elements within distance 1 of a point at distance <= radius from j have length at most
  // (radius + 1 + C') / log|beta|; enumerate by displacement with a slack covering that window.
  OrbitLimit limit;
  limit.max_displacement = radius + 1.0;
  limit.prune_slack = 2.0 * std::log1p(translation_bound(beta, digits)) + 1.0;
  OrbitStore store = enumerate_orbit(gens, Point{}, limit);
  OverlapReport rep;
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> centers(store.size());
  std::iota(centers.begin(), centers.end(), 0u);
  std::shuffle(centers.begin(), centers.end(), rng);
  if (centers.size() > max_centers) centers.resize(max_centers);
  std::map<int, std::size_t> band;
  for (auto c : centers) {
    if (store.displacement[c] > radius) continue;
    std::size_t mult = store.within(store.points[c], 1.0).size();
    int b = static_cast<int>(std::ceil(store.displacement[c]));
    band[b] = std::max(band[b], mult);
    rep.max_multiplicity = std::max(rep.max_multiplicity, mult);
  }
  std::vector<double> xs, ys;
  for (const auto& [b, m] : band) {
    rep.by_distance.emplace_back(b, m);
    if (b >= 1) {
      xs.push_back(std::log(static_cast<double>(b)));
      ys.push_back(std::log(static_cast<double>(m)));
    }
  }
  if (xs.size() >= 2) {
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    rep.fitted_exponent = sxx > 0 ? sxy / sxx : 0.0;
  }
  return rep;
}

// ------------------------------------------------------------------ parsing

BetaSpec parse_beta(const std::string& text) {
  BetaSpec spec;
  spec.text = text;
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  std::smatch m;
  if (std::regex_match(t, m, std::regex(R"(poly:\[([^\]]*)\];root:(\d+))"))) {
    std::vector<BigInt> coeffs;
    std::stringstream ss(m[1].str());
    std::string item;
    while (std::getline(ss, item, ',')) coeffs.push_back(parse_bigint(item));
    spec.exact = true;
    spec.algebraic = AlgebraicInteger::from_poly(coeffs, std::stoi(m[2].str()));
    return spec;
  }
  if (t.rfind("poly:", 0) == 0) throw ParseError("malformed beta spec: " + text);
  // Complex literal: re, im i, re+im i, re-im i.
  if (!t.empty() && t.back() == 'i') {
    std::string body = t.substr(0, t.size() - 1);
    std::size_t split = std::string::npos;
    for (std::size_t i = body.size(); i-- > 1;) {
      if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
        split = i;
        break;
      }
    }
    double re = 0.0, im;
    if (split == std::string::npos) {
      im = body.empty() || body == "+" ? 1.0 : body == "-" ? -1.0 : parse_real(body);
    } else {
      re = parse_real(body.substr(0, split));
      std::string ims = body.substr(split);
      im = ims == "+" ? 1.0 : ims == "-" ? -1.0 : parse_real(ims);
    }
    spec.numeric = cplx(re, im);
    return spec;
  }
  spec.numeric = cplx(parse_real(t), 0.0);
  return spec;
}

}  // namespace gromolab
