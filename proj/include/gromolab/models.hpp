#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "gromolab/error.hpp"

namespace gromolab {

using cplx = std::complex<double>;

enum class ModelKind { H2, H3 };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

// Interior point of the upper half-plane (z real) or upper half-space.
struct Point {
  cplx z{0.0, 0.0};
  double h = 1.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct BoundaryPoint {
  bool at_infinity = false;
  cplx value{0.0, 0.0};

  static BoundaryPoint infinity() { return {true, {}}; }
  static BoundaryPoint finite(cplx v) { return {false, v}; }
  friend bool operator==(const BoundaryPoint&, const BoundaryPoint&) = default;
};

using AnyPoint = std::variant<Point, BoundaryPoint>;

struct ModelSpace {
  ModelKind kind = ModelKind::H2;
  Point basepoint{};
  double delta_hyp = 0.0;

  // delta_hyp defaults to the sampled estimate for the model.
  static ModelSpace make(ModelKind kind, std::optional<double> delta = std::nullopt,
                         Point basepoint = {});
};

void validate(const Point& p);
void validate(const ModelSpace& space);

// Provenance of an affine map x -> x/beta + t.
struct AffineTag {
  cplx beta{1.0, 0.0};
  cplx t{0.0, 0.0};
};

class Isometry {
 public:
  Isometry() = default;

  // Normalizes to |det| = 1 and canonical sign. For H2 the entries must be real;
  // a negative determinant denotes an orientation-reversing map.
  static Isometry from_matrix(ModelKind kind, cplx a, cplx b, cplx c, cplx d);
  // Entries of determinant one up to rounding, e.g. a product of normalized matrices.
  // Renormalizes only while the computed determinant is still accurate.
  static Isometry from_unimodular(ModelKind kind, std::array<cplx, 4> m);
  static Isometry identity(ModelKind kind);

  ModelKind kind() const { return kind_; }
  const std::array<cplx, 4>& m() const { return m_; }
  cplx a() const { return m_[0]; }
  cplx b() const { return m_[1]; }
  cplx c() const { return m_[2]; }
  cplx d() const { return m_[3]; }
  cplx det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }

  const std::optional<AffineTag>& affine_tag() const { return tag_; }
  void set_affine_tag(std::optional<AffineTag> tag) { tag_ = tag; }

  Point apply(const Point& p) const;
  BoundaryPoint apply(const BoundaryPoint& p) const;
  AnyPoint apply(const AnyPoint& p) const;

  // Max entry difference, minimized over the sign ambiguity.
  double entry_distance(const Isometry& other) const;
  bool is_identity(double tol = 1e-12) const;

 private:
  ModelKind kind_ = ModelKind::H2;
  std::array<cplx, 4> m_{cplx{1}, cplx{0}, cplx{0}, cplx{1}};
  std::optional<AffineTag> tag_;
};

Isometry compose(const Isometry& a, const Isometry& b);
Isometry inverse(const Isometry& a);
Isometry power(const Isometry& a, int n);

// x -> x/beta + t. Real beta and t give an H2 isometry unless kind says otherwise.
Isometry affine_to_isometry(cplx beta, cplx t, std::optional<ModelKind> kind = std::nullopt);

double distance(const Point& p, const Point& q);
double distance(const ModelSpace& space, const Point& p, const Point& q);

// Busemann function B_xi(x, base) = lim d(x, y) - d(base, y) as y -> xi.
double busemann(const BoundaryPoint& xi, const Point& x, const Point& base);

double gromov_product(const AnyPoint& x, const AnyPoint& y, const Point& base);
double gromov_product(const ModelSpace& space, const AnyPoint& x, const AnyPoint& y,
                      const Point& base);
inline double gromov_product(const ModelSpace& space, const AnyPoint& x, const AnyPoint& y) {
  return gromov_product(space, x, y, space.basepoint);
}

// min{(x|y),(y|z)} - (x|z) at the given base, clamped below at 0.
double four_point_defect(const Point& x, const Point& y, const Point& z, const Point& base);

double estimate_delta_hyp(const ModelSpace& space, std::int64_t n_samples, double radius,
                          std::uint64_t seed);

// Sampled estimate cached per model kind (basepoint independent).
double default_delta(ModelKind kind);

// Point at hyperbolic distance r from base along the unit direction (dx, dy, dh).
Point exp_map(const Point& base, double dx, double dy, double dh, double r);

// Isometry taking base to the point at height 1 over the origin.
Isometry normalizing_isometry(ModelKind kind, const Point& base);

// Closed half-space bounded by a hemisphere, vertical plane or their H2 analogues:
//   { (z, h) : A (|z|^2 + h^2) + 2 Re(conj(B) z) + C <= 0 },
// normalized so that |B|^2 - A C = 1. Its boundary trace is a generalized closed disk.
struct HalfSpace {
  double A = 0.0;
  cplx B{1.0, 0.0};
  double C = 0.0;

  static HalfSpace from_form(double A, cplx B, double C);
  // { x : d(x, p) <= d(x, q) }.
  static HalfSpace bisector(const Point& p, const Point& q);
  static HalfSpace disk(cplx center, double radius);
  static HalfSpace disk_exterior(cplx center, double radius);

  double form(const Point& x) const;
  double form(cplx xi) const;
  bool contains(const Point& x) const { return form(x) <= 0.0; }
  bool contains(const BoundaryPoint& xi) const;
  bool contains(const AnyPoint& p) const;
  // Negative inside. Exact hyperbolic distance to the bounding plane.
  double signed_distance(const Point& x) const;

  HalfSpace complement() const { return {-A, -B, -C}; }
  HalfSpace image(const Isometry& g) const;

  bool trace_is_disk() const { return A > 0.0; }
  bool trace_contains_infinity() const { return A <= 0.0; }
  // Euclidean center/radius of the bounding circle (A != 0).
  cplx circle_center() const { return -B / A; }
  double circle_radius() const { return 1.0 / std::abs(A); }
};

// The boundary trace of a half-space seen from a basepoint: a spherical cap
// { u in S^2 : <n, u> >= cos(alpha) } in the visual sphere at the base.
struct Cap {
  std::array<double, 3> n{0, 0, 1};
  double alpha = 0.0;
};

Cap visual_cap(const HalfSpace& hs, const Point& base);
// Inverse of visual_cap: the half-space whose trace seen from base is the cap (0 < alpha < pi).
HalfSpace half_space_of_cap(const Cap& cap, const Point& base, ModelKind kind);
// Sup of (p|xi) over xi in the cap, closed form.
double sup_product_point_cap(const Point& p, const Cap& cap, const Point& base);
// Visual cap of g(h) from mapped boundary points. Stays accurate for tiny image traces,
// where the normalized form of h.image(g) loses the radius to cancellation.
Cap image_cap(const HalfSpace& h, const Isometry& g, const Point& base);
BoundaryPoint cap_point(const Cap& cap, double along, double around, const Point& base);
std::array<double, 3> visual_direction(const BoundaryPoint& xi, const Point& base);
// Direction at base of the ray through p (p != base).
std::array<double, 3> visual_direction(const Point& p, const Point& base);
BoundaryPoint from_visual_direction(const std::array<double, 3>& u, const Point& base);
double angle_between(const std::array<double, 3>& u, const std::array<double, 3>& v);

// Angular gap between two caps (positive iff closed traces are disjoint).
double cap_gap(const Cap& a, const Cap& b);
// How far cap a sits strictly inside cap b (positive iff closure of a in interior of b).
double cap_inset(const Cap& a, const Cap& b);
// Sup of the boundary Gromov product between two caps with given angular gap.
double gap_to_product(double gap);

std::string format_point(const Point& p);
std::string format_point(const BoundaryPoint& p);

}  // namespace gromolab
