#include "gromolab/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <vector>

namespace gromolab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm2(cplx z) { return std::norm(z); }

Isometry make_raw(ModelKind kind, std::array<cplx, 4> m) {
  return Isometry::from_unimodular(kind, m);
}

double max_entry(const std::array<cplx, 4>& m) {
  double s = 0.0;
  for (const auto& e : m) s = std::max(s, std::abs(e));
  return s;
}

// Relative accuracy of a 2x2 determinant computed in double precision.
bool det_reliable(cplx det, double scale) { return std::abs(det) >= 1e-8 * scale * scale; }

void sign_convention(std::array<cplx, 4>& m) {
  for (const auto& e : m) {
    if (std::abs(e) > 1e-14) {
      bool flip = e.real() < -1e-15 || (std::abs(e.real()) <= 1e-15 && e.imag() < 0.0);
      if (flip)
        for (auto& f : m) f = -f;
      break;
    }
  }
}

std::array<double, 3> cross(const std::array<double, 3>& u, const std::array<double, 3>& v) {
  return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
}

double dot(const std::array<double, 3>& u, const std::array<double, 3>& v) {
  return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
}

std::array<double, 3> normalized(std::array<double, 3> u) {
  double n = std::sqrt(dot(u, u));
  for (auto& x : u) x /= n;
  return u;
}

}  // namespace

std::string to_string(ModelKind kind) { return kind == ModelKind::H2 ? "H2" : "H3"; }

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "H2" || s == "h2") return ModelKind::H2;
  if (s == "H3" || s == "h3") return ModelKind::H3;
  throw ParseError("unknown model kind: " + s);
}

void validate(const Point& p) {
  if (!(p.h > 0.0) || !std::isfinite(p.h) || !std::isfinite(p.z.real()) ||
      !std::isfinite(p.z.imag()))
    throw InvalidPoint("point " + format_point(p) + " is not a finite interior point");
}

void validate(const ModelSpace& space) {
  validate(space.basepoint);
  if (space.kind == ModelKind::H2 && space.basepoint.z.imag() != 0.0)
    throw InvalidPoint("H2 basepoint must have real horizontal coordinate");
  if (!(space.delta_hyp >= 0.0)) throw PreconditionFailed("delta_hyp must be nonnegative");
}

ModelSpace ModelSpace::make(ModelKind kind, std::optional<double> delta, Point basepoint) {
  ModelSpace s{kind, basepoint, delta ? *delta : default_delta(kind)};
  validate(s);
  return s;
}

// ---------------------------------------------------------------- isometries

Isometry Isometry::from_matrix(ModelKind kind, cplx a, cplx b, cplx c, cplx d) {
  std::array<cplx, 4> m{a, b, c, d};
  double scale = 0.0;
  for (auto& e : m) {
    if (!std::isfinite(e.real()) || !std::isfinite(e.imag()))
      throw InvalidIsometry("non-finite matrix entry");
    scale = std::max(scale, std::abs(e));
  }
  if (kind == ModelKind::H2) {
    for (auto& e : m) {
      if (std::abs(e.imag()) > 1e-12 * scale)
        throw InvalidIsometry("H2 isometry requires real matrix entries");
      e = cplx(e.real(), 0.0);
    }
  }
  cplx det = m[0] * m[3] - m[1] * m[2];
  if (std::abs(det) <= 1e-300 || std::abs(det) < 1e-24 * scale * scale)
    throw InvalidIsometry("singular matrix");
  cplx s = kind == ModelKind::H2 ? cplx(std::sqrt(std::abs(det.real())), 0.0) : std::sqrt(det);
  for (auto& e : m) e /= s;
  sign_convention(m);
  Isometry g;
  g.kind_ = kind;
  g.m_ = m;
  return g;
}

Isometry Isometry::from_unimodular(ModelKind kind, std::array<cplx, 4> m) {
  for (const auto& e : m)
    if (!std::isfinite(e.real()) || !std::isfinite(e.imag()))
      throw InvalidIsometry("non-finite matrix entry");
  if (kind == ModelKind::H2)
    for (auto& e : m) e = cplx(e.real(), 0.0);
  cplx det = m[0] * m[3] - m[1] * m[2];
  if (det_reliable(det, max_entry(m))) {
    if (kind == ModelKind::H2 && det.real() <= 0.0) throw InvalidIsometry("orientation-reversing product");
    cplx s = kind == ModelKind::H2 ? cplx(std::sqrt(det.real()), 0.0) : std::sqrt(det);
    for (auto& e : m) e /= s;
  }
  sign_convention(m);
  Isometry g;
  g.kind_ = kind;
  g.m_ = m;
  return g;
}

Isometry Isometry::identity(ModelKind kind) {
  Isometry g;
  g.kind_ = kind;
  g.tag_ = AffineTag{};
  return g;
}

Point Isometry::apply(const Point& p) const {
  const auto& [a, b, c, d] = m_;
  cplx czd = c * p.z + d;
  double h2 = p.h * p.h;
  double D = norm2(czd) + norm2(c) * h2;
  cplx z = ((a * p.z + b) * std::conj(czd) + a * std::conj(c) * h2) / D;
  if (kind_ == ModelKind::H2) z = cplx(z.real(), 0.0);
  return {z, p.h / D};  // det is 1 for every stored matrix
}

BoundaryPoint Isometry::apply(const BoundaryPoint& p) const {
  const auto& [a, b, c, d] = m_;
  if (p.at_infinity) {
    if (c == 0.0) return BoundaryPoint::infinity();
    return BoundaryPoint::finite(a / c);
  }
  cplx den = c * p.value + d;
  if (den == 0.0) return BoundaryPoint::infinity();
  cplx v = (a * p.value + b) / den;
  if (kind_ == ModelKind::H2) v = cplx(v.real(), 0.0);
  return BoundaryPoint::finite(v);
}

AnyPoint Isometry::apply(const AnyPoint& p) const {
  return std::visit([this](const auto& q) -> AnyPoint { return apply(q); }, p);
}

double Isometry::entry_distance(const Isometry& other) const {
  double plus = 0.0, minus = 0.0;
  for (int i = 0; i < 4; ++i) {
    plus = std::max(plus, std::abs(m_[i] - other.m_[i]));
    minus = std::max(minus, std::abs(m_[i] + other.m_[i]));
  }
  return std::min(plus, minus);
}

bool Isometry::is_identity(double tol) const {
  return entry_distance(identity(kind_)) <= tol;
}

Isometry compose(const Isometry& x, const Isometry& y) {
  if (x.kind() != y.kind()) throw ModelMismatch("compose: isometries of different models");
  const auto& p = x.m();
  const auto& q = y.m();
  Isometry g = make_raw(x.kind(), {p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3],
                                   p[2] * q[0] + p[3] * q[2], p[2] * q[1] + p[3] * q[3]});
  if (x.affine_tag() && y.affine_tag()) {
    const auto& s = *x.affine_tag();
    const auto& t = *y.affine_tag();
    g.set_affine_tag(AffineTag{s.beta * t.beta, s.t + t.t / s.beta});
  }
  return g;
}

Isometry inverse(const Isometry& x) {
  const auto& p = x.m();
  cplx det = x.det();
  if (!det_reliable(det, max_entry(p))) det = 1.0;
  Isometry g = make_raw(x.kind(), {p[3] / det, -p[1] / det, -p[2] / det, p[0] / det});
  if (x.affine_tag()) {
    const auto& s = *x.affine_tag();
    g.set_affine_tag(AffineTag{1.0 / s.beta, -s.beta * s.t});
  }
  return g;
}

Isometry power(const Isometry& x, int n) {
  if (n < 0) return power(inverse(x), -n);
  Isometry result = Isometry::identity(x.kind());
  if (!x.affine_tag()) result.set_affine_tag(std::nullopt);
  Isometry base = x;
  while (n > 0) {
    if (n & 1) result = compose(result, base);
    base = compose(base, base);
    n >>= 1;
  }
  return result;
}

Isometry affine_to_isometry(cplx beta, cplx t, std::optional<ModelKind> kind) {
  if (beta == 0.0) throw InvalidIsometry("affine map with beta = 0");
  bool real = beta.imag() == 0.0 && t.imag() == 0.0;
  ModelKind k = kind ? *kind : (real ? ModelKind::H2 : ModelKind::H3);
  if (k == ModelKind::H2 && !real)
    throw ModelMismatch("affine map with complex beta or t needs H3");
  Isometry g;
  if (k == ModelKind::H2 && beta.real() < 0.0) {
    double s = std::sqrt(-beta.real());
    g = Isometry::from_matrix(k, 1.0 / s, t * beta / s, 0.0, beta / s);
  } else {
    cplx sb = std::sqrt(beta);
    g = Isometry::from_matrix(k, 1.0 / sb, t * sb, 0.0, sb);
  }
  g.set_affine_tag(AffineTag{beta, t});
  return g;
}

// ------------------------------------------------------------------ metrics

double distance(const Point& p, const Point& q) {
  double num = std::sqrt(norm2(p.z - q.z) + (p.h - q.h) * (p.h - q.h));
  return 2.0 * std::asinh(num / (2.0 * std::sqrt(p.h * q.h)));
}

double distance(const ModelSpace& space, const Point& p, const Point& q) {
  validate(p);
  validate(q);
  if (space.kind == ModelKind::H2 && (p.z.imag() != 0.0 || q.z.imag() != 0.0))
    throw InvalidPoint("H2 point with complex horizontal coordinate");
  return distance(p, q);
}

double busemann(const BoundaryPoint& xi, const Point& x, const Point& base) {
  if (xi.at_infinity) return std::log(base.h / x.h);
  auto poisson = [&](const Point& p) { return p.h / (norm2(p.z - xi.value) + p.h * p.h); };
  return std::log(poisson(base) / poisson(x));
}

namespace {

double product_interior(const Point& x, const Point& y, const Point& base) {
  return 0.5 * (distance(x, base) + distance(y, base) - distance(x, y));
}

double product_mixed(const Point& x, const BoundaryPoint& xi, const Point& base) {
  return 0.5 * (distance(x, base) - busemann(xi, x, base));
}

double product_boundary(const BoundaryPoint& xi, const BoundaryPoint& eta, const Point& base) {
  if (xi == eta) return kInf;
  double h = base.h;
  double h2 = h * h;
  if (xi.at_infinity || eta.at_infinity) {
    cplx v = xi.at_infinity ? eta.value : xi.value;
    return -std::log(h / std::sqrt(h2 + norm2(v - base.z)));
  }
  double num = h * std::abs(xi.value - eta.value);
  double den = std::sqrt((h2 + norm2(xi.value - base.z)) * (h2 + norm2(eta.value - base.z)));
  return -std::log(num / den);
}

}  // namespace

double gromov_product(const AnyPoint& x, const AnyPoint& y, const Point& base) {
  if (auto px = std::get_if<Point>(&x)) {
    if (auto py = std::get_if<Point>(&y)) return product_interior(*px, *py, base);
    return product_mixed(*px, std::get<BoundaryPoint>(y), base);
  }
  const auto& bx = std::get<BoundaryPoint>(x);
  if (auto py = std::get_if<Point>(&y)) return product_mixed(*py, bx, base);
  return product_boundary(bx, std::get<BoundaryPoint>(y), base);
}

double gromov_product(const ModelSpace& space, const AnyPoint& x, const AnyPoint& y,
                      const Point& base) {
  validate(base);
  for (const AnyPoint* p : {&x, &y}) {
    if (auto q = std::get_if<Point>(p)) validate(*q);
  }
  (void)space;
  return gromov_product(x, y, base);
}

double four_point_defect(const Point& x, const Point& y, const Point& z, const Point& base) {
  double xy = product_interior(x, y, base);
  double yz = product_interior(y, z, base);
  double xz = product_interior(x, z, base);
  return std::max(0.0, std::min(xy, yz) - xz);
}

Point exp_map(const Point& base, double dx, double dy, double dh, double r) {
  double n = std::sqrt(dx * dx + dy * dy + dh * dh);
  double t = std::tanh(r / 2.0);
  // Ball model point, reflected, then sent to the upper half-space by the inversion
  // centered at (0, 0, -1) with radius sqrt 2.
  double y0 = t * dx / n, y1 = t * dy / n, y2 = -t * dh / n;
  double v0 = y0, v1 = y1, v2 = y2 + 1.0;
  double s = 2.0 / (v0 * v0 + v1 * v1 + v2 * v2);
  cplx z(v0 * s, v1 * s);
  double h = v2 * s - 1.0;
  return {base.z + base.h * z, base.h * h};
}

double estimate_delta_hyp(const ModelSpace& space, std::int64_t n_samples, double radius,
                          std::uint64_t seed) {
  if (n_samples < 1) throw PreconditionFailed("estimate_delta_hyp needs n_samples >= 1");
  if (!(radius > 0.0)) throw PreconditionFailed("estimate_delta_hyp needs radius > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss;
  bool h3 = space.kind == ModelKind::H3;
  double peak = h3 ? std::sinh(radius) * std::sinh(radius) : std::sinh(radius);
  auto sample = [&]() {
    double r;
    for (;;) {
      r = radius * unit(rng);
      double w = h3 ? std::sinh(r) * std::sinh(r) : std::sinh(r);
      if (unit(rng) * peak <= w) break;
    }
    double dx = gauss(rng), dy = h3 ? gauss(rng) : 0.0, dh = gauss(rng);
    return exp_map(space.basepoint, dx, dy, dh, r);
  };
  double best = 0.0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    Point x = sample(), y = sample(), z = sample();
    best = std::max(best, four_point_defect(x, y, z, space.basepoint));
  }
  return best;
}

double default_delta(ModelKind kind) {
  static std::once_flag flags[2];
  static double values[2];
  int k = kind == ModelKind::H2 ? 0 : 1;
  std::call_once(flags[k], [&] {
    ModelSpace s{kind, Point{}, 0.0};
    values[k] = estimate_delta_hyp(s, 100000, 10.0, 1);
  });
  return values[k];
}

Isometry normalizing_isometry(ModelKind kind, const Point& base) {
  double s = std::sqrt(base.h);
  return Isometry::from_matrix(kind, 1.0 / s, -base.z / s, 0.0, s);
}

// -------------------------------------------------------------- half-spaces

HalfSpace HalfSpace::from_form(double A, cplx B, double C) {
  double disc = norm2(B) - A * C;
  if (!(disc > 0.0) || !std::isfinite(disc))
    throw PreconditionFailed("degenerate half-space form");
  double s = 1.0 / std::sqrt(disc);
  return {A * s, B * s, C * s};
}

HalfSpace HalfSpace::bisector(const Point& p, const Point& q) {
  return from_form(1.0 / p.h - 1.0 / q.h, -p.z / p.h + q.z / q.h,
                   (norm2(p.z) + p.h * p.h) / p.h - (norm2(q.z) + q.h * q.h) / q.h);
}

HalfSpace HalfSpace::disk(cplx center, double radius) {
  return from_form(1.0, -center, norm2(center) - radius * radius);
}

HalfSpace HalfSpace::disk_exterior(cplx center, double radius) {
  return disk(center, radius).complement();
}

double HalfSpace::form(const Point& x) const {
  return A * (norm2(x.z) + x.h * x.h) + 2.0 * (std::conj(B) * x.z).real() + C;
}

double HalfSpace::form(cplx xi) const {
  return A * norm2(xi) + 2.0 * (std::conj(B) * xi).real() + C;
}

bool HalfSpace::contains(const BoundaryPoint& xi) const {
  if (xi.at_infinity) return A <= 0.0;
  return form(xi.value) <= 0.0;
}

bool HalfSpace::contains(const AnyPoint& p) const {
  return std::visit([this](const auto& q) { return contains(q); }, p);
}

double HalfSpace::signed_distance(const Point& x) const {
  return std::asinh(form(x) / (2.0 * x.h));
}

HalfSpace HalfSpace::image(const Isometry& g) const {
  // Hermitian matrix H = [[A, B], [conj B, C]] transforms to N* H N with N = g^-1.
  Isometry n = inverse(g);
  cplx n00 = n.a(), n01 = n.b(), n10 = n.c(), n11 = n.d();
  // H N
  cplx h00 = A * n00 + B * n10, h01 = A * n01 + B * n11;
  cplx h10 = std::conj(B) * n00 + C * n10, h11 = std::conj(B) * n01 + C * n11;
  double a2 = (std::conj(n00) * h00 + std::conj(n10) * h10).real();
  cplx b2 = std::conj(n00) * h01 + std::conj(n10) * h11;
  double c2 = (std::conj(n01) * h01 + std::conj(n11) * h11).real();
  if (g.kind() == ModelKind::H2) b2 = cplx(b2.real(), 0.0);
  return from_form(a2, b2, c2);
}

// --------------------------------------------------------------------- caps

std::array<double, 3> visual_direction(const BoundaryPoint& xi, const Point& base) {
  if (xi.at_infinity) return {0.0, 0.0, 1.0};
  cplx w = (xi.value - base.z) / base.h;
  double n = norm2(w);
  return {2.0 * w.real() / (n + 1.0), 2.0 * w.imag() / (n + 1.0), (n - 1.0) / (n + 1.0)};
}

std::array<double, 3> visual_direction(const Point& p, const Point& base) {
  cplx w = (p.z - base.z) / base.h;
  double h = p.h / base.h;
  double r2 = norm2(w) + h * h;
  // Ball-model position is (2 Re w, 2 Im w, r2 - 1) / (r2 + 1 + 2h); only the direction matters.
  return normalized({2.0 * w.real(), 2.0 * w.imag(), r2 - 1.0});
}

BoundaryPoint from_visual_direction(const std::array<double, 3>& u, const Point& base) {
  if (u[2] >= 1.0 - 1e-15) return BoundaryPoint::infinity();
  cplx w(u[0] / (1.0 - u[2]), u[1] / (1.0 - u[2]));
  return BoundaryPoint::finite(base.z + base.h * w);
}

double angle_between(const std::array<double, 3>& u, const std::array<double, 3>& v) {
  // atan2 form stays accurate for nearly parallel vectors.
  auto c = cross(u, v);
  return std::atan2(std::sqrt(dot(c, c)), dot(u, v));
}

Cap visual_cap(const HalfSpace& hs, const Point& base) {
  double h = base.h;
  cplx c = base.z;
  double a1 = hs.A * h * h;
  cplx b1 = h * (hs.A * c + hs.B);
  double c1 = hs.A * norm2(c) + 2.0 * (std::conj(hs.B) * c).real() + hs.C;
  std::array<double, 3> w{2.0 * b1.real(), 2.0 * b1.imag(), a1 - c1};
  double wn = std::sqrt(dot(w, w));
  Cap cap;
  cap.n = {-w[0] / wn, -w[1] / wn, -w[2] / wn};
  cap.alpha = std::acos(std::clamp((a1 + c1) / wn, -1.0, 1.0));
  return cap;
}

HalfSpace half_space_of_cap(const Cap& cap, const Point& base, ModelKind kind) {
  if (!(cap.alpha > 0.0 && cap.alpha < M_PI)) throw PreconditionFailed("cap angle must lie in (0, pi)");
  double s = std::sin(cap.alpha), c = std::cos(cap.alpha);
  // Form at the normalized base j.
  double a1 = (c - cap.n[2]) / s;
  cplx b1 = -cplx(cap.n[0], kind == ModelKind::H2 ? 0.0 : cap.n[1]) / s;
  double c1 = (c + cap.n[2]) / s;
  double h = base.h;
  cplx z = base.z;
  double A = a1 / (h * h);
  cplx B = -a1 * z / (h * h) + b1 / h;
  double C = a1 * norm2(z) / (h * h) - 2.0 * (std::conj(b1) * z).real() / h + c1;
  if (kind == ModelKind::H2) B = cplx(B.real(), 0.0);
  return HalfSpace::from_form(A, B, C);
}

double sup_product_point_cap(const Point& p, const Cap& cap, const Point& base) {
  double d = distance(base, p);
  if (d < 1e-15) return 0.0;
  // Direction of p seen from base: the endpoint of the ray from base through p.
  std::array<double, 3> u = visual_direction(p, base);
  double theta = std::max(0.0, angle_between(u, cap.n) - cap.alpha);
  return 0.5 * (d - std::log(std::cosh(d) - std::sinh(d) * std::cos(theta)));
}

Cap image_cap(const HalfSpace& h, const Isometry& g, const Point& base) {
  const bool h2 = g.kind() == ModelKind::H2;
  // Points on the bounding circle (or line) of the trace.
  std::vector<BoundaryPoint> rim;
  if (h.A != 0.0) {
    cplx c = h.circle_center();
    double r = h.circle_radius();
    rim = {BoundaryPoint::finite(c + r), BoundaryPoint::finite(c - r)};
    if (!h2) rim.push_back(BoundaryPoint::finite(c + cplx(0.0, r)));
  } else {
    cplx z0 = -h.C * h.B / (2.0 * norm2(h.B));
    rim = {BoundaryPoint::finite(z0), BoundaryPoint::infinity()};
    if (!h2) rim.push_back(BoundaryPoint::finite(z0 + cplx(0.0, 1.0) * h.B));
  }
  BoundaryPoint inner = h.A > 0.0 ? BoundaryPoint::finite(h.circle_center()) : BoundaryPoint::infinity();
  std::vector<std::array<double, 3>> u;
  for (const auto& p : rim) u.push_back(visual_direction(g.apply(p), base));
  auto v = visual_direction(g.apply(inner), base);
  std::array<double, 3> n;
  if (h2) {
    std::array<double, 3> s{u[0][0] + u[1][0], 0.0, u[0][2] + u[1][2]};
    if (dot(s, s) < 1e-24) {
      // Half circle: the center is perpendicular to the rim points.
      s = {-u[0][2], 0.0, u[0][0]};
    }
    n = normalized(s);
  } else {
    std::array<double, 3> a{u[1][0] - u[0][0], u[1][1] - u[0][1], u[1][2] - u[0][2]};
    std::array<double, 3> b{u[2][0] - u[0][0], u[2][1] - u[0][1], u[2][2] - u[0][2]};
    n = normalized(cross(a, b));
  }
  double alpha = angle_between(n, u[0]);
  if (dot(v, n) < std::cos(alpha)) {
    n = {-n[0], -n[1], -n[2]};
    alpha = M_PI - alpha;
  }
  return {n, alpha};
}

BoundaryPoint cap_point(const Cap& cap, double along, double around, const Point& base) {
  std::array<double, 3> helper =
      std::abs(cap.n[2]) < 0.9 ? std::array<double, 3>{0, 0, 1} : std::array<double, 3>{1, 0, 0};
  auto e1 = normalized(cross(cap.n, helper));
  auto e2 = cross(cap.n, e1);
  // Keep H2 caps inside the plane u1-u3 by aligning e1 with it when possible.
  if (std::abs(cap.n[1]) < 1e-15) {
    e1 = normalized(cross({0, 1, 0}, cap.n));
    e2 = {0, 1, 0};
  }
  std::array<double, 3> u;
  for (int i = 0; i < 3; ++i)
    u[i] = std::cos(along) * cap.n[i] +
           std::sin(along) * (std::cos(around) * e1[i] + std::sin(around) * e2[i]);
  return from_visual_direction(normalized(u), base);
}

double cap_gap(const Cap& a, const Cap& b) { return angle_between(a.n, b.n) - a.alpha - b.alpha; }

double cap_inset(const Cap& a, const Cap& b) { return b.alpha - angle_between(a.n, b.n) - a.alpha; }

double gap_to_product(double gap) {
  if (!(gap > 0.0)) return kInf;
  return -std::log(std::sin(std::min(gap, M_PI) / 2.0));
}

std::string format_point(const Point& p) {
  std::ostringstream os;
  os.precision(12);
  os << "(" << p.z.real() << (p.z.imag() < 0 ? "" : "+") << p.z.imag() << "i, h=" << p.h << ")";
  return os.str();
}

std::string format_point(const BoundaryPoint& p) {
  if (p.at_infinity) return "inf";
  std::ostringstream os;
  os.precision(12);
  os << p.value.real() << (p.value.imag() < 0 ? "" : "+") << p.value.imag() << "i";
  return os.str();
}

}  // namespace gromolab
