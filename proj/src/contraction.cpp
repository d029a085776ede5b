#include "gromolab/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace gromolab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::array<double, 3> unit(std::array<double, 3> u) {
  double n = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  for (auto& x : u) x /= n;
  return u;
}

Point along_ray(const Point& base, const std::array<double, 3>& u, double t) {
  return exp_map(base, u[0], u[1], u[2], t);
}

std::array<double, 3> random_direction(ModelKind kind, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  if (kind == ModelKind::H2) {
    double th = std::uniform_real_distribution<double>(0.0, 2.0 * M_PI)(rng);
    return {std::sin(th), 0.0, std::cos(th)};
  }
  return unit({g(rng), g(rng), g(rng)});
}

// Fixed direction set for pivot searches.
std::vector<std::array<double, 3>> direction_grid(ModelKind kind) {
  std::vector<std::array<double, 3>> out;
  if (kind == ModelKind::H2) {
    for (int i = 0; i < 96; ++i) {
      double th = 2.0 * M_PI * i / 96.0;
      out.push_back({std::sin(th), 0.0, std::cos(th)});
    }
    return out;
  }
  const int n = 240;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    double y = 1.0 - 2.0 * (i + 0.5) / n;
    double r = std::sqrt(1.0 - y * y);
    out.push_back({r * std::cos(golden * i), r * std::sin(golden * i), y});
  }
  return out;
}

double pivot_bound(const HalfSpace& a, const HalfSpace& b, const Point& base, ModelKind kind) {
  double best = kInf;
  for (const auto& u : direction_grid(kind)) {
    for (double r = 0.05; r < 14.0; r *= 1.25) {
      Point p = along_ray(base, u, r);
      if (!(a.form(p) > 0.0 && b.form(p) > 0.0)) continue;
      double g = cap_gap(visual_cap(a, p), visual_cap(b, p));
      if (g > 0.0) best = std::min(best, gap_to_product(g) + r);
    }
  }
  return best;
}

}  // namespace

// ------------------------------------------------------------------ domains

HalfSpaceDomain HalfSpaceDomain::of(const Isometry& gamma, const Point& base) {
  Point go = gamma.apply(base);
  if (!(distance(go, base) > 1e-12))
    throw PreconditionFailed("X_gamma is undefined when gamma fixes the basepoint");
  return {gamma, base, HalfSpace::bisector(go, base)};
}

bool HalfSpaceDomain::contains(const AnyPoint& x) const {
  Point go = gamma.apply(base);
  if (const auto* p = std::get_if<Point>(&x)) return distance(*p, go) <= distance(*p, base);
  // (xi | gamma o) >= d(o, gamma o) / 2 is the same as B_xi(gamma o, o) <= 0.
  return busemann(std::get<BoundaryPoint>(x), go, base) <= 0.0;
}

bool HalfSpaceDomain::Trace::contains(const BoundaryPoint& xi) const {
  switch (shape) {
    case Shape::Disk:
      return !xi.at_infinity && std::abs(xi.value - center) <= radius;
    case Shape::Exterior:
      return xi.at_infinity || std::abs(xi.value - center) >= radius;
    case Shape::HalfPlane:
      return xi.at_infinity || 2.0 * (std::conj(normal) * xi.value).real() + offset <= 0.0;
  }
  return false;
}

HalfSpaceDomain::Trace HalfSpaceDomain::trace() const {
  Trace t;
  const auto& hs = half_space;
  if (hs.A > 0.0) {
    t.shape = Trace::Shape::Disk;
  } else if (hs.A < 0.0) {
    t.shape = Trace::Shape::Exterior;
  } else {
    t.shape = Trace::Shape::HalfPlane;
    t.normal = hs.B;
    t.offset = hs.C;
    return t;
  }
  t.center = hs.circle_center();
  t.radius = hs.circle_radius();
  return t;
}

bool in_X_gamma(const Isometry& gamma, const AnyPoint& x, const Point& base) {
  return HalfSpaceDomain::of(gamma, base).contains(x);
}

ContractingCheck contracting_isometry_check(const Isometry& gamma, double delta,
                                            const Point& base) {
  ContractingCheck c;
  c.x = gamma.apply(base);
  c.displacement = distance(base, c.x);
  if (!(c.displacement > 1e-12))
    throw PreconditionFailed("contracting_isometry_check: gamma fixes the basepoint");
  c.x_prime = inverse(gamma).apply(base);
  c.product = gromov_product(c.x, c.x_prime, base);
  c.threshold = 0.5 * c.displacement - 3.0 * delta;
  c.certified = c.product < c.threshold;
  return c;
}

// ----------------------------------------------------------------- sampling

std::vector<AnyPoint> sample_half_space(const HalfSpace& h, const Point& base, ModelKind kind,
                                        int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<AnyPoint> out;
  out.reserve(count);
  const bool inside = h.contains(base);
  const Cap cap = visual_cap(h, base);
  for (int i = 0, tries = 0; static_cast<int>(out.size()) < count && tries < 50 * count; ++tries) {
    const bool boundary = (i % 4) == 0;
    std::array<double, 3> u;
    if (!inside) {
      double around = kind == ModelKind::H2 ? (u01(rng) < 0.5 ? 0.0 : M_PI) : 2.0 * M_PI * u01(rng);
      double along = cap.alpha * std::sqrt(u01(rng)) * 0.999;
      BoundaryPoint xi = cap_point(cap, along, around, base);
      if (boundary) {
        out.push_back(xi);
        ++i;
        continue;
      }
      u = visual_direction(xi, base);
      double hi = 1.0;
      while (!h.contains(along_ray(base, u, hi)) && hi < 40.0) hi *= 2.0;
      if (!h.contains(along_ray(base, u, hi))) continue;
      double lo = 0.0;
      for (int k = 0; k < 60; ++k) {
        double mid = 0.5 * (lo + hi);
        (h.contains(along_ray(base, u, mid)) ? hi : lo) = mid;
      }
      if (hi > 25.0) {
        out.push_back(xi);
      } else {
        out.push_back(along_ray(base, u, hi + std::min(8.0, -1.5 * std::log(1.0 - u01(rng)))));
      }
      ++i;
    } else {
      u = random_direction(kind, rng);
      if (boundary) {
        BoundaryPoint xi = from_visual_direction(u, base);
        if (!h.contains(xi)) continue;
        out.push_back(xi);
      } else {
        Point p = along_ray(base, u, 6.0 * u01(rng));
        if (!h.contains(p)) continue;
        out.push_back(p);
      }
      ++i;
    }
  }
  return out;
}

double sup_product(const HalfSpace& a, const HalfSpace& b, const Point& base, ModelKind kind,
                   int interior_samples, std::uint64_t seed) {
  Cap ca = visual_cap(a, base), cb = visual_cap(b, base);
  double gap = cap_gap(ca, cb);
  if (!(gap > 0.0)) return kInf;
  double closed = (!a.contains(base) && !b.contains(base)) ? gap_to_product(gap)
                                                           : pivot_bound(a, b, base, kind);
  if (interior_samples <= 0) return closed;
  auto xs = sample_half_space(a, base, kind, interior_samples, seed);
  auto ys = sample_half_space(b, base, kind, interior_samples, seed + 1);
  double sampled = -kInf;
  if (!xs.empty() && !ys.empty()) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t k = 0; k < 8; ++k)
        sampled = std::max(sampled, gromov_product(xs[i], ys[(i + 17 * k) % ys.size()], base));
  }
  return std::max(closed, sampled);
}

double sup_product(const Point& p, const HalfSpace& h, const Point& base) {
  if (h.contains(base)) throw PreconditionFailed("sup_product: half-space contains the base");
  return sup_product_point_cap(p, visual_cap(h, base), base);
}

Cap enclosing_cap(const std::vector<Cap>& caps, ModelKind kind) {
  if (caps.empty()) throw PreconditionFailed("enclosing_cap needs at least one cap");
  const Cap whole{{0, 0, 1}, M_PI};
  if (kind == ModelKind::H2) {
    const double two_pi = 2.0 * M_PI;
    std::vector<std::pair<double, double>> iv;
    for (const auto& c : caps) {
      if (c.alpha >= M_PI) return whole;
      double phi = std::atan2(c.n[0], c.n[2]);
      double s = std::fmod(phi - c.alpha + 4.0 * M_PI, two_pi);
      double e = s + 2.0 * c.alpha;
      if (e >= two_pi) {
        iv.push_back({s, two_pi});
        iv.push_back({0.0, e - two_pi});
      } else {
        iv.push_back({s, e});
      }
    }
    std::sort(iv.begin(), iv.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& x : iv) {
      if (!merged.empty() && x.first <= merged.back().second)
        merged.back().second = std::max(merged.back().second, x.second);
      else
        merged.push_back(x);
    }
    double best_gap = -1.0, gap_start = 0.0;
    for (std::size_t k = 0; k < merged.size(); ++k) {
      double next = k + 1 < merged.size() ? merged[k + 1].first : merged[0].first + two_pi;
      double g = next - merged[k].second;
      if (g > best_gap) {
        best_gap = g;
        gap_start = merged[k].second;
      }
    }
    if (!(best_gap > 0.0)) return whole;
    double width = two_pi - best_gap;
    double center = gap_start + best_gap + 0.5 * width;
    return {{std::sin(center), 0.0, std::cos(center)}, 0.5 * width};
  }
  auto radius_at = [&](const std::array<double, 3>& n, std::size_t* far) {
    double r = 0.0;
    for (std::size_t i = 0; i < caps.size(); ++i) {
      double v = angle_between(n, caps[i].n) + caps[i].alpha;
      if (v > r) {
        r = v;
        if (far) *far = i;
      }
    }
    return r;
  };
  std::array<double, 3> s{0, 0, 0};
  for (const auto& c : caps)
    for (int i = 0; i < 3; ++i) s[i] += c.n[i];
  std::array<double, 3> n =
      std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]) > 1e-12 ? unit(s) : caps[0].n;
  std::array<double, 3> best = n;
  double best_r = radius_at(n, nullptr);
  for (int it = 0; it < 400; ++it) {
    std::size_t far = 0;
    radius_at(n, &far);
    double step = 1.0 / (it + 2);
    std::array<double, 3> m;
    for (int i = 0; i < 3; ++i) m[i] = n[i] + step * (caps[far].n[i] - n[i]);
    double mn = std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
    if (mn < 1e-12) break;
    n = unit(m);
    double r = radius_at(n, nullptr);
    if (r < best_r) {
      best_r = r;
      best = n;
    }
  }
  if (best_r >= M_PI) return whole;
  return {best, best_r};
}

// ------------------------------------------------------------- certificates

std::optional<ContractionCertificate> contraction_certificate(const std::vector<Isometry>& A,
                                                              double delta, const Point& base) {
  if (A.empty()) throw PreconditionFailed("contraction_certificate needs a nonempty set");
  const std::size_t n = A.size();
  std::vector<Point> p(n), q(n);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = A[i].apply(base);
    q[i] = inverse(A[i]).apply(base);
    d[i] = distance(base, p[i]);
    if (!(d[i] > 1e-12)) throw PreconditionFailed("contraction_certificate: an element fixes the basepoint");
  }
  ContractionCertificate cert;
  cert.kind = A[0].kind();
  cert.base = base;
  cert.delta = delta;
  cert.M = -kInf;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.5 * (d[i] + d[j] - distance(q[i], p[j]));
      if (v > cert.M) {
        cert.M = v;
        cert.worst_pair = {i, j};
      }
    }
  cert.d_min = *std::min_element(d.begin(), d.end());
  cert.margin = 0.5 * cert.d_min - 3.0 * delta - cert.M;
  if (!(cert.margin > 0.0)) return std::nullopt;
  cert.elements = A;
  for (std::size_t i = 0; i < n; ++i) {
    cert.plus_parts.push_back(visual_cap(HalfSpace::bisector(p[i], base), base));
    cert.minus_parts.push_back(visual_cap(HalfSpace::bisector(q[i], base), base));
  }
  cert.plus_cap = enclosing_cap(cert.plus_parts, cert.kind);
  cert.minus_cap = enclosing_cap(cert.minus_parts, cert.kind);
  cert.enclosed = cert.plus_cap.alpha < M_PI && cert.minus_cap.alpha < M_PI;
  if (cert.enclosed) {
    cert.plus = half_space_of_cap(cert.plus_cap, base, cert.kind);
    cert.minus = half_space_of_cap(cert.minus_cap, base, cert.kind);
  }
  cert.domain_gap = cap_gap(cert.plus_cap, cert.minus_cap);
  return cert;
}

double domain_product_bound(const ContractionCertificate& cert) {
  double c = -kInf;
  for (const auto& a : cert.plus_parts)
    for (const auto& b : cert.minus_parts) c = std::max(c, gap_to_product(cap_gap(a, b)));
  return c;
}

ContractionDiagnostics contraction_diagnostics(const ContractionCertificate& cert,
                                               std::size_t samples, std::size_t word_samples,
                                               int word_length, std::uint64_t seed) {
  ContractionDiagnostics rep;
  const auto& E = cert.elements;
  const std::size_t n = E.size();
  if (n == 0) throw PreconditionFailed("contraction_diagnostics: empty certificate");
  const Point o = cert.base;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<Point> p(n), q(n);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = E[i].apply(o);
    q[i] = inverse(E[i]).apply(o);
    d[i] = distance(o, p[i]);
  }

  rep.worst_triangle_margin = kInf;
  auto triangle = [&](std::size_t i, std::size_t j) {
    double v = distance(o, E[i].apply(p[j])) - (d[i] + d[j] - 2.0 * cert.M);
    rep.worst_triangle_margin = std::min(rep.worst_triangle_margin, v);
    ++rep.pairs_checked;
  };
  if (n * n <= samples) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) triangle(i, j);
  } else {
    for (std::size_t s = 0; s < samples; ++s) triangle(pick(rng), pick(rng));
  }

  std::vector<HalfSpace> plus(n);
  for (std::size_t i = 0; i < n; ++i) plus[i] = HalfSpace::bisector(p[i], o);
  rep.worst_image_margin = kInf;
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t i = pick(rng);
    double C = -kInf;
    for (std::size_t k = 0; k < n; ++k) C = std::max(C, sup_product_point_cap(q[i], cert.plus_parts[k], o));
    auto xs = sample_half_space(plus[pick(rng)], o, cert.kind, 1, rng());
    auto ys = sample_half_space(plus[pick(rng)], o, cert.kind, 1, rng());
    if (xs.empty() || ys.empty()) continue;
    double lhs = gromov_product(E[i].apply(xs[0]), E[i].apply(ys[0]), o);
    rep.worst_image_margin = std::min(rep.worst_image_margin, lhs - (d[i] - 2.0 * C));
    ++rep.image_checks;
  }

  rep.worst_increment = kInf;
  // Long words leave the range where matrix products keep their determinant, so path
  // distances use d(w_a o, w_c o) = d(o, g_{a+1} ... g_c o) with nested point images.
  for (std::size_t w = 0; w < word_samples; ++w) {
    std::vector<std::size_t> letters(word_length);
    for (auto& l : letters) l = pick(rng);
    const std::size_t m = letters.size() + 1;
    std::vector<double> dist(m * m, 0.0);
    for (std::size_t c = 1; c < m; ++c) {
      Point x = o;
      for (std::size_t a = c; a-- > 0;) {
        x = E[letters[a]].apply(x);
        dist[a * m + c] = dist[c * m + a] = distance(o, x);
      }
    }
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b)
        for (std::size_t c = b + 1; c < m; ++c)
          rep.worst_qg_defect =
              std::max(rep.worst_qg_defect, dist[a * m + b] + dist[b * m + c] - dist[a * m + c]);
    for (std::size_t k = 0; k + 1 < m; ++k) {
      double inc = dist[k + 1] - dist[k];
      rep.worst_increment = std::min(rep.worst_increment, inc);
      if (!(inc > 0.0)) rep.increasing_from = std::max(rep.increasing_from, static_cast<int>(k + 1));
    }
    ++rep.words_checked;
  }
  rep.ok = rep.worst_triangle_margin >= -1e-9 && rep.worst_image_margin >= -1e-9 &&
           rep.increasing_from < word_length;
  return rep;
}

// --------------------------------------------------------------- searching

std::optional<ContractingElement> find_contracting_element(const std::vector<Isometry>& gens,
                                                           double delta, int depth,
                                                           const Point& base) {
  if (depth < 1) throw PreconditionFailed("find_contracting_element needs depth >= 1");
  if (gens.empty()) return std::nullopt;
  const ModelKind kind = gens[0].kind();
  struct Item {
    Word w;
    Isometry g;
    double disp;
  };
  std::vector<Item> level{{Word{}, Isometry::identity(kind), 0.0}}, seen;
  const std::size_t budget = 200'000;
  for (int len = 1; len <= depth && seen.size() < budget; ++len) {
    std::vector<Item> next;
    for (const auto& it : level) {
      for (std::size_t k = 0; k < gens.size(); ++k) {
        Item c{it.w, compose(it.g, gens[k]), 0.0};
        c.w.letters.push_back(static_cast<std::uint16_t>(k));
        c.disp = distance(base, c.g.apply(base));
        if (c.disp > 1e-9) {
          auto chk = contracting_isometry_check(c.g, delta, base);
          if (chk.certified) return ContractingElement{c.g, c.w, chk, false};
        }
        next.push_back(c);
        if (seen.size() + next.size() >= budget) break;
      }
    }
    seen.insert(seen.end(), next.begin(), next.end());
    level = std::move(next);
  }
  // Products g' g of large elements, widest angle between attracting directions first.
  std::vector<Item> big;
  for (const auto& it : seen)
    if (it.disp > 1e-9) big.push_back(it);
  std::sort(big.begin(), big.end(), [](const Item& a, const Item& b) { return a.disp > b.disp; });
  if (big.size() > 64) big.resize(64);
  std::vector<std::array<double, 3>> dir(big.size());
  for (std::size_t i = 0; i < big.size(); ++i) dir[i] = visual_direction(big[i].g.apply(base), base);
  struct Pair {
    double angle;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < big.size(); ++i)
    for (std::size_t j = 0; j < big.size(); ++j) pairs.push_back({angle_between(dir[i], dir[j]), i, j});
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.angle > b.angle; });
  for (const auto& pr : pairs) {
    Isometry g = compose(big[pr.i].g, big[pr.j].g);
    if (!(distance(base, g.apply(base)) > 1e-9)) continue;
    auto chk = contracting_isometry_check(g, delta, base);
    if (chk.certified) {
      Word w = big[pr.i].w;
      w.letters.insert(w.letters.end(), big[pr.j].w.letters.begin(), big[pr.j].w.letters.end());
      return ContractingElement{g, w, chk, true};
    }
  }
  return std::nullopt;
}

OrbitStore contracting_semigroup_store(const ContractionCertificate& cert, double max_displacement,
                                       const DedupSpec& dedup) {
  const double defect = 2.0 * (cert.M + 2.0 * cert.delta);
  if (!(cert.d_min > defect))
    throw PreconditionFailed("contracting_semigroup_store: displacement is not monotone along words");
  OrbitLimit lim;
  lim.max_displacement = max_displacement;
  lim.growth_defect = defect;
  lim.word_cap = std::max(200, static_cast<int>(max_displacement / (cert.d_min - defect)) + 2);
  OrbitStore s = enumerate_orbit(cert.elements, cert.base, lim, dedup);
  s.complete_radius = max_displacement;
  s.label = "contracting-semigroup";
  return s;
}

std::vector<std::uint32_t> contracting_part(const OrbitStore& store, double d_lo,
                                            const std::optional<Cap>& attract,
                                            const std::optional<Cap>& repel) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < store.size(); ++i) {
    if (store.displacement[i] < d_lo) continue;
    if (attract && angle_between(visual_direction(store.points[i], store.base), attract->n) > attract->alpha)
      continue;
    if (repel) {
      Point back = inverse(store.isometry(i)).apply(store.base);
      if (angle_between(visual_direction(back, store.base), repel->n) > repel->alpha) continue;
    }
    out.push_back(i);
  }
  return out;
}

std::string certificate_summary(const ContractionCertificate& cert) {
  std::ostringstream os;
  os.precision(10);
  os << "elements " << cert.elements.size() << "\n"
     << "M " << cert.M << "\n"
     << "d_min " << cert.d_min << "\n"
     << "delta " << cert.delta << "\n"
     << "margin " << cert.margin << "\n"
     << "plus_alpha " << cert.plus_cap.alpha << "\n"
     << "minus_alpha " << cert.minus_cap.alpha << "\n"
     << "domain_gap " << cert.domain_gap << "\n";
  return os.str();
}

}  // namespace gromolab
