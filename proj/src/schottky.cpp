#include "gromolab/schottky.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>

namespace gromolab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Closed-form bound on sup (x|y) over two half-spaces with disjoint traces.
double closed_bound(const HalfSpace& a, const HalfSpace& b, const Point& base, ModelKind kind) {
  return sup_product(a, b, base, kind, 0);
}

std::array<double, 3> entry_direction(const Cap& cap, double along, double around, const Point& base) {
  return visual_direction(cap_point(cap, along, around, base), base);
}

// Distance along the ray from base in direction u to the first point of h; infinity if none.
double entry_distance(const HalfSpace& h, const Point& base, const std::array<double, 3>& u) {
  auto at = [&](double t) { return exp_map(base, u[0], u[1], u[2], t); };
  if (h.contains(base)) return 0.0;
  double hi = 1.0;
  while (!h.contains(at(hi)) && hi < 40.0) hi *= 2.0;
  if (!h.contains(at(hi))) return kInf;
  double lo = 0.0;
  for (int k = 0; k < 60; ++k) {
    double mid = 0.5 * (lo + hi);
    (h.contains(at(mid)) ? hi : lo) = mid;
  }
  return hi;
}

double witness_radius_at(const Point& p, const HalfSpace& plus, const std::vector<HalfSpace>& images) {
  double r = -plus.signed_distance(p);
  for (const auto& im : images) r = std::min(r, im.signed_distance(p));
  return r;
}

std::pair<Point, double> find_witness(const HalfSpace& plus, const std::vector<HalfSpace>& images,
                                      const Point& base, ModelKind kind) {
  Cap cp = visual_cap(plus, base);
  std::vector<double> arounds = kind == ModelKind::H2 ? std::vector<double>{0.0, M_PI}
                                                      : std::vector<double>{0, 0.785, 1.571, 2.356, 3.142,
                                                                            3.927, 4.712, 5.498};
  Point best{};
  double best_r = -kInf;
  for (double frac : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    for (double around : arounds) {
      auto u = entry_direction(cp, frac * cp.alpha, around, base);
      double t0 = entry_distance(plus, base, u);
      if (!std::isfinite(t0)) continue;
      for (double s : {0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0}) {
        Point p = exp_map(base, u[0], u[1], u[2], t0 + s);
        double r = witness_radius_at(p, plus, images);
        if (r > best_r) {
          best_r = r;
          best = p;
        }
      }
      if (kind == ModelKind::H2 && frac == 0.0) break;
    }
  }
  return {best, best_r};
}

}  // namespace

SchottkyCheck check_schottky(const std::vector<Isometry>& gens, const HalfSpace& X_plus,
                             double delta, const Point& base, const SchottkyOptions& opts,
                             SchottkyCertificate* out) {
  SchottkyCheck res;
  if (gens.empty()) {
    res.failure = "no generators";
    return res;
  }
  const ModelKind kind = gens[0].kind();
  const std::size_t k = gens.size();
  std::vector<HalfSpace> parts(k + 1);
  for (std::size_t i = 0; i < k; ++i) parts[i] = X_plus.image(gens[i]);
  parts[k] = X_plus.complement();
  std::vector<Cap> caps(k + 1);
  for (std::size_t i = 0; i < k; ++i) caps[i] = image_cap(X_plus, gens[i], base);
  caps[k] = visual_cap(parts[k], base);
  const Cap cp = visual_cap(X_plus, base);

  SchottkyCertificate cert;
  cert.kind = kind;
  cert.base = base;
  cert.delta = delta;
  cert.threshold = opts.threshold;
  cert.generators = gens;
  cert.plus = X_plus;

  cert.min_inset = kInf;
  for (std::size_t i = 0; i < k; ++i) {
    double in = cap_inset(caps[i], cp);
    cert.min_inset = std::min(cert.min_inset, in);
    if (!(in > 0.0)) {
      res.failure = "generator " + std::to_string(i) + ": image of X+ is not strictly inside X+";
      return res;
    }
  }
  // Pairwise gaps and closed-form constants; the largest pairs are also sampled.
  struct P {
    double v;
    std::size_t i, j;
    bool operator>(const P& o) const { return v > o.v; }
  };
  std::priority_queue<P, std::vector<P>, std::greater<P>> top;
  auto consider = [&](double v, std::size_t i, std::size_t j) {
    if (opts.interior_samples <= 0 || opts.sampled_pairs == 0) return;
    if (top.size() < opts.sampled_pairs) {
      top.push({v, i, j});
    } else if (v > top.top().v) {
      top.pop();
      top.push({v, i, j});
    }
  };
  cert.disjunction.assign(k + 1, -kInf);
  auto record = [&](std::size_t i, std::size_t j, double v) {
    cert.disjunction[i] = std::max(cert.disjunction[i], v);
    cert.disjunction[j] = std::max(cert.disjunction[j], v);
  };
  const bool plus_has_base = X_plus.contains(base);
  cert.min_gap = kInf;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      double g = cap_gap(caps[i], caps[j]);
      cert.min_gap = std::min(cert.min_gap, g);
      if (!(g > 0.0)) {
        res.failure = "generators " + std::to_string(i) + " and " + std::to_string(j) +
                      ": traces of the images of X+ meet";
        return res;
      }
      double v = plus_has_base ? closed_bound(parts[i], parts[j], base, kind) : gap_to_product(g);
      record(i, j, v);
      consider(v, i, j);
    }
  for (std::size_t i = 0; i < k; ++i) {
    double v = closed_bound(parts[i], parts[k], base, kind);
    record(i, k, v);
    consider(v, i, k);
  }
  if (!top.empty()) {
    std::vector<std::vector<AnyPoint>> samples(k + 1);
    auto pts = [&](std::size_t idx) -> const std::vector<AnyPoint>& {
      if (samples[idx].empty())
        samples[idx] = sample_half_space(parts[idx], base, kind, opts.interior_samples, opts.seed + idx);
      return samples[idx];
    };
    for (; !top.empty(); top.pop()) {
      const P pr = top.top();
      const auto& xs = pts(pr.i);
      const auto& ys = pts(pr.j);
      if (xs.empty() || ys.empty()) continue;
      double s = -kInf;
      for (std::size_t t = 0; t < xs.size(); ++t)
        s = std::max(s, gromov_product(xs[t], ys[(t * 7 + 3) % ys.size()], base));
      record(pr.i, pr.j, s);
    }
  }
  cert.max_disjunction = -kInf;
  for (std::size_t i = 0; i <= k; ++i) {
    double& v = cert.disjunction[i];
    v += delta;
    cert.max_disjunction = std::max(cert.max_disjunction, v);
    if (!std::isfinite(v) || !(v < opts.threshold)) {
      res.failure = "part " + std::to_string(i) +
                    fmt(": disjunction constant %.6g is not below %.6g", v, opts.threshold);
      return res;
    }
  }
  if (k == 1) cert.min_gap = kInf;

  std::vector<HalfSpace> images(parts.begin(), parts.begin() + k);
  auto [center, radius] = find_witness(X_plus, images, base, kind);
  cert.witness_center = center;
  cert.witness_radius = radius;
  if (!(radius > 1e-9)) {
    res.failure = "no interior witness ball in X+ outside the images";
    return res;
  }
  res.ok = true;
  if (out) *out = std::move(cert);
  return res;
}

std::optional<SchottkyCertificate> schottky_certificate(const std::vector<Isometry>& gens,
                                                        const HalfSpace& X_plus, double delta,
                                                        const Point& base,
                                                        const SchottkyOptions& opts) {
  SchottkyCertificate cert;
  if (!check_schottky(gens, X_plus, delta, base, opts, &cert).ok) return std::nullopt;
  return cert;
}

SchottkyCheck verify_certificate(const SchottkyCertificate& cert, double tol) {
  SchottkyCheck res;
  const std::size_t k = cert.generators.size();
  if (k == 0) {
    res.failure = "no generators";
    return res;
  }
  if (cert.disjunction.size() != k + 1) {
    res.failure = "disjunction list has the wrong size";
    return res;
  }
  std::vector<HalfSpace> parts(k + 1);
  for (std::size_t i = 0; i < k; ++i) parts[i] = cert.plus.image(cert.generators[i]);
  parts[k] = cert.plus.complement();
  std::vector<Cap> caps(k + 1);
  for (std::size_t i = 0; i < k; ++i) caps[i] = image_cap(cert.plus, cert.generators[i], cert.base);
  caps[k] = visual_cap(parts[k], cert.base);
  const Cap cp = visual_cap(cert.plus, cert.base);
  double inset = kInf, gap = kInf;
  for (std::size_t i = 0; i < k; ++i) inset = std::min(inset, cap_inset(caps[i], cp));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) gap = std::min(gap, cap_gap(caps[i], caps[j]));
  if (!(inset > 0.0) || std::abs(inset - cert.min_inset) > tol) {
    res.failure = fmt("inset %.12g does not match the record %.12g", inset, cert.min_inset);
    return res;
  }
  if (k > 1 && (!(gap > 0.0) || std::abs(gap - cert.min_gap) > tol)) {
    res.failure = fmt("gap %.12g does not match the record %.12g", gap, cert.min_gap);
    return res;
  }
  for (std::size_t i = 0; i <= k; ++i) {
    double v = cert.disjunction[i];
    if (!std::isfinite(v) || !(v < cert.threshold)) {
      res.failure = "part " + std::to_string(i) + fmt(": recorded constant %.12g is not below %.12g", v, cert.threshold);
      return res;
    }
  }
  const bool plus_has_base = cert.plus.contains(cert.base);
  for (std::size_t i = 0; i <= k; ++i)
    for (std::size_t j = i + 1; j <= k; ++j) {
      double c = (j < k && !plus_has_base) ? gap_to_product(cap_gap(caps[i], caps[j]))
                                           : closed_bound(parts[i], parts[j], cert.base, cert.kind);
      double need = c + cert.delta;
      if (!(need <= std::min(cert.disjunction[i], cert.disjunction[j]) + tol)) {
        res.failure = "parts " + std::to_string(i) + " and " + std::to_string(j) +
                      fmt(": recomputed bound %.12g exceeds the records %.12g, %.12g", need,
                          cert.disjunction[i], cert.disjunction[j]);
        return res;
      }
    }
  std::vector<HalfSpace> images(parts.begin(), parts.begin() + k);
  double r = witness_radius_at(cert.witness_center, cert.plus, images);
  if (!(r > 1e-9) || r < cert.witness_radius - tol) {
    res.failure = fmt("witness radius %.12g, recorded %.12g", r, cert.witness_radius);
    return res;
  }
  res.ok = true;
  return res;
}

// ------------------------------------------------------------------ records

namespace {

void put(std::ostream& os, double v) {
  if (std::isinf(v)) {
    os << (v > 0 ? "inf" : "-inf");
  } else {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  }
}

double get(std::istream& is) {
  std::string s;
  if (!(is >> s)) throw ParseError("SCHOTTKY-CERT/1: truncated record");
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw ParseError("SCHOTTKY-CERT/1: bad number '" + s + "'");
  }
}

void expect(std::istream& is, const std::string& key) {
  std::string s;
  if (!(is >> s) || s != key) throw ParseError("SCHOTTKY-CERT/1: expected '" + key + "', got '" + s + "'");
}

}  // namespace

void write_certificate(const SchottkyCertificate& cert, std::ostream& os) {
  auto sp = [&] { os << ' '; };
  os << "SCHOTTKY-CERT/1\n";
  os << "model " << to_string(cert.kind) << "\n";
  os << "base ";
  put(os, cert.base.z.real()); sp(); put(os, cert.base.z.imag()); sp(); put(os, cert.base.h);
  os << "\ndelta ";
  put(os, cert.delta);
  os << "\nthreshold ";
  put(os, cert.threshold);
  os << "\nplus ";
  put(os, cert.plus.A); sp(); put(os, cert.plus.B.real()); sp(); put(os, cert.plus.B.imag()); sp(); put(os, cert.plus.C);
  os << "\ngenerators " << cert.generators.size() << "\n";
  for (const auto& g : cert.generators) {
    os << "g";
    for (const auto& e : g.m()) {
      sp(); put(os, e.real()); sp(); put(os, e.imag());
    }
    os << "\n";
  }
  os << "words " << cert.words.size() << "\n";
  for (const auto& w : cert.words) os << "w " << (w.letters.empty() ? "-" : format_word(w)) << "\n";
  os << "min_gap "; put(os, cert.min_gap);
  os << "\nmin_inset "; put(os, cert.min_inset);
  os << "\nmax_disjunction "; put(os, cert.max_disjunction);
  os << "\nwitness ";
  put(os, cert.witness_center.z.real()); sp(); put(os, cert.witness_center.z.imag()); sp();
  put(os, cert.witness_center.h); sp(); put(os, cert.witness_radius);
  const std::size_t k = cert.generators.size();
  os << "\ndisjunction " << k + 1 << "\n";
  for (std::size_t i = 0; i <= k; ++i) {
    os << "d " << i << ' ';
    put(os, cert.disjunction[i]);
    os << "\n";
  }
  os << "end\n";
}

SchottkyCertificate read_certificate(std::istream& is) {
  SchottkyCertificate c;
  expect(is, "SCHOTTKY-CERT/1");
  expect(is, "model");
  std::string m;
  is >> m;
  c.kind = model_kind_from_string(m);
  expect(is, "base");
  double br = get(is), bi = get(is), bh = get(is);
  c.base = {cplx(br, bi), bh};
  expect(is, "delta");
  c.delta = get(is);
  expect(is, "threshold");
  c.threshold = get(is);
  expect(is, "plus");
  double A = get(is), Br = get(is), Bi = get(is), C = get(is);
  c.plus = HalfSpace{A, cplx(Br, Bi), C};
  expect(is, "generators");
  std::size_t k = 0;
  if (!(is >> k)) throw ParseError("SCHOTTKY-CERT/1: bad generator count");
  for (std::size_t i = 0; i < k; ++i) {
    expect(is, "g");
    std::array<cplx, 4> e;
    for (auto& x : e) {
      double re = get(is), im = get(is);
      x = cplx(re, im);
    }
    c.generators.push_back(Isometry::from_matrix(c.kind, e[0], e[1], e[2], e[3]));
  }
  expect(is, "words");
  std::size_t nw = 0;
  if (!(is >> nw)) throw ParseError("SCHOTTKY-CERT/1: bad word count");
  for (std::size_t i = 0; i < nw; ++i) {
    expect(is, "w");
    std::string w;
    is >> w;
    c.words.push_back(w == "-" ? Word{} : parse_word(w));
  }
  expect(is, "min_gap");
  c.min_gap = get(is);
  expect(is, "min_inset");
  c.min_inset = get(is);
  expect(is, "max_disjunction");
  c.max_disjunction = get(is);
  expect(is, "witness");
  double wr = get(is), wi = get(is), wh = get(is);
  c.witness_center = {cplx(wr, wi), wh};
  c.witness_radius = get(is);
  expect(is, "disjunction");
  std::size_t nd = 0;
  if (!(is >> nd) || nd != k + 1) throw ParseError("SCHOTTKY-CERT/1: bad disjunction count");
  c.disjunction.assign(k + 1, 0.0);
  for (std::size_t t = 0; t < nd; ++t) {
    expect(is, "d");
    std::size_t i;
    if (!(is >> i) || i > k) throw ParseError("SCHOTTKY-CERT/1: bad disjunction index");
    c.disjunction[i] = get(is);
  }
  expect(is, "end");
  return c;
}

// --------------------------------------------------------------- extraction

double extraction_threshold(const ContractionCertificate& cert) {
  double C = domain_product_bound(cert) + cert.delta;
  return 2.0 * C + 2.0 * cert.delta + 1.0;
}

Extraction extract_schottky_from_annulus(const OrbitStore& store, const ContractionCertificate& cert,
                                         int n, const ExtractionOptions& opts) {
  if (!cert.enclosed) throw PreconditionFailed("extract_schottky: the contracting domains have no enclosing half-spaces");
  Extraction ex;
  ex.n = n;
  ex.C = domain_product_bound(cert) + cert.delta;
  ex.r = 4.0 * ex.C + 4.0 * cert.delta + 2.0;
  if (!std::isfinite(ex.C)) throw PreconditionFailed("extract_schottky: X+ and X- traces meet");
  double n0 = extraction_threshold(cert);
  if (!(n > n0))
    throw PreconditionFailed(fmt("extract_schottky: n = %g is below the threshold %.4f", n, n0));
  double reach = cert.plus.signed_distance(store.base);
  if (!(reach < n - 1.0))
    throw PreconditionFailed(fmt("extract_schottky: X+ lies %.4f from the base, beyond n - 1 = %g", reach, n - 1.0));
  auto ann = store.annulus(n);
  ex.annulus_size = ann.size();
  if (ann.empty())
    throw PreconditionFailed("extract_schottky: annulus A_" + std::to_string(n) +
                             " is empty; enumerate the store to a larger depth");
  ProximityIndex fwd(ex.r), back(ex.r);
  for (auto i : ann) {
    const Point& p = store.points[i];
    if (fwd.any_within(p, ex.r)) continue;
    Isometry g = store.isometry(i);
    if (opts.separate_inverses) {
      Point q = inverse(g).apply(store.base);
      if (back.any_within(q, ex.r)) continue;
      back.insert(i, q);
    }
    fwd.insert(i, p);
    ex.indices.push_back(i);
    ex.generators.push_back(g);
    ex.words.push_back(store.word(i));
  }
  ex.lower_bound = std::log(static_cast<double>(ex.generators.size())) / (n + 1.0);
  SchottkyOptions so = opts.schottky;
  so.threshold = std::min(so.threshold, n - 2.0 * ex.C);
  SchottkyCertificate sc;
  ex.check = check_schottky(ex.generators, cert.plus, cert.delta, store.base, so, &sc);
  if (ex.check.ok) {
    sc.words = ex.words;
    ex.reverified = verify_certificate(sc);
    if (ex.reverified.ok) ex.certificate = std::move(sc);
  }
  return ex;
}

double schottky_lower_bound(const std::vector<Isometry>& S, const Point& base) {
  if (S.empty()) throw PreconditionFailed("schottky_lower_bound needs generators");
  if (S.size() == 1) return 0.0;
  double r = 0.0;
  for (const auto& g : S) r = std::max(r, distance(base, g.apply(base)));
  return std::log(static_cast<double>(S.size())) / r;
}

GroupCertificate schottky_group_from_semigroup(const std::vector<Isometry>& S,
                                               const Isometry& gamma0, const HalfSpace& X_plus,
                                               const HalfSpace& X_minus, double delta,
                                               const Point& base, int interior_samples) {
  GroupCertificate gc;
  if (S.empty()) {
    gc.failure = "no generators";
    return gc;
  }
  const ModelKind kind = gamma0.kind();
  const std::size_t k = S.size();
  const double d0 = distance(base, gamma0.apply(base));
  for (const auto& g : S) gc.generators.push_back(compose(compose(g, gamma0), g));

  // Parts: P_i = g_i X+ (index i), Q_i = g_i^-1 X- (index k + i).
  std::vector<HalfSpace> parts(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    parts[i] = X_plus.image(S[i]);
    parts[k + i] = X_minus.image(inverse(S[i]));
  }
  auto name = [&](std::size_t i) {
    return (i < k ? "P_" + std::to_string(i) : "Q_" + std::to_string(i - k));
  };
  std::vector<Cap> caps(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    caps[i] = image_cap(X_plus, S[i], base);
    caps[k + i] = image_cap(X_minus, inverse(S[i]), base);
  }
  const bool base_inside = X_plus.contains(base) || X_minus.contains(base);
  gc.min_gap = kInf;
  gc.max_disjunction = -kInf;
  for (std::size_t i = 0; i < 2 * k; ++i)
    for (std::size_t j = i + 1; j < 2 * k; ++j) {
      double g = cap_gap(caps[i], caps[j]);
      gc.min_gap = std::min(gc.min_gap, g);
      if (!(g > 0.0)) {
        gc.failure = "parts " + name(i) + " and " + name(j) + ": traces meet";
        return gc;
      }
      double v = base_inside ? sup_product(parts[i], parts[j], base, kind, interior_samples, 101 + i * 2 * k + j)
                             : gap_to_product(g);
      gc.max_disjunction = std::max(gc.max_disjunction, v + delta);
      if (!std::isfinite(v)) {
        gc.failure = "parts " + name(i) + " and " + name(j) + ": no finite disjunction constant";
        return gc;
      }
    }
  gc.min_inset = kInf;
  gc.worst_displacement_slack = kInf;
  const HalfSpace outside_minus = X_minus.complement();
  for (std::size_t i = 0; i < k; ++i) {
    // g gamma0 g (X - g^-1 X-) = g gamma0 (X - X-); mapped without the long product.
    double in = cap_inset(image_cap(outside_minus, compose(S[i], gamma0), base), caps[i]);
    gc.min_inset = std::min(gc.min_inset, in);
    if (!(in > 0.0)) {
      gc.failure = "generator " + std::to_string(i) + ": image of the complement of " + name(k + i) +
                   " is not strictly inside " + name(i);
      return gc;
    }
    double dg = distance(base, gc.generators[i].apply(base));
    double slack = 2.0 * distance(base, S[i].apply(base)) + d0 - dg;
    gc.max_displacement = std::max(gc.max_displacement, dg);
    gc.worst_displacement_slack = std::min(gc.worst_displacement_slack, slack);
    if (slack < -1e-9) {
      gc.failure = "generator " + std::to_string(i) + ": displacement bound fails";
      return gc;
    }
  }
  gc.lower_bound = k > 1 ? std::log(static_cast<double>(k)) / gc.max_displacement : 0.0;
  gc.ok = true;
  return gc;
}

}  // namespace gromolab
