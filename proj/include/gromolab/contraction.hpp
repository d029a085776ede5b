#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gromolab/models.hpp"
#include "gromolab/orbit.hpp"

namespace gromolab {

// X_gamma = { x : d(x, gamma o) <= d(x, o) }, a closed half-space bounded by the bisector.
struct HalfSpaceDomain {
  Isometry gamma;
  Point base{};
  HalfSpace half_space;

  static HalfSpaceDomain of(const Isometry& gamma, const Point& base = {});
  // Membership by the defining rule (distances, or Busemann values at the boundary).
  bool contains(const AnyPoint& x) const;

  // Boundary trace as a generalized disk of the boundary plane (an interval in H2):
  // the closed disk |xi - center| <= radius, its exterior together with infinity, or the
  // half-plane 2 Re(conj(normal) xi) + offset <= 0 together with infinity.
  struct Trace {
    enum class Shape { Disk, Exterior, HalfPlane } shape = Shape::Disk;
    cplx center{};
    double radius = 0.0;
    cplx normal{};
    double offset = 0.0;
    bool contains(const BoundaryPoint& xi) const;
  };
  Trace trace() const;
};

bool in_X_gamma(const Isometry& gamma, const AnyPoint& x, const Point& base = {});

struct ContractingCheck {
  bool certified = false;
  Point x{};        // gamma o
  Point x_prime{};  // gamma^-1 o
  double product = 0.0;
  double displacement = 0.0;
  double threshold = 0.0;  // d(o, gamma o) / 2 - 3 delta
};

ContractingCheck contracting_isometry_check(const Isometry& gamma, double delta,
                                            const Point& base = {});

// Upper bound for the sup of (x|y) over x in a, y in b; infinite when the traces meet.
// Closed form from the traces when neither contains the base, otherwise through a pivot p
// outside both: (x|y)_o <= (x|y)_p + d(o, p). Sampled pairs are folded in, so the result
// is never below an observed product.
double sup_product(const HalfSpace& a, const HalfSpace& b, const Point& base, ModelKind kind,
                   int interior_samples = 256, std::uint64_t seed = 7);
// Sup of (p | x) over x in a half-space avoiding the base.
double sup_product(const Point& p, const HalfSpace& h, const Point& base);

struct ContractionCertificate {
  ModelKind kind = ModelKind::H2;
  Point base{};
  std::vector<Isometry> elements;
  std::vector<Word> words;  // provenance, empty when unknown
  double M = 0.0;           // max (gamma^-1 o | gamma' o)
  double d_min = 0.0;
  double delta = 0.0;
  double margin = 0.0;      // d_min / 2 - 3 delta - M
  std::pair<std::size_t, std::size_t> worst_pair{0, 0};
  // Visual caps of the parts X_gamma and X_gamma^-1.
  std::vector<Cap> plus_parts, minus_parts;
  // Caps enclosing X+ = U X_gamma and X- = U X_gamma^-1, and their half-spaces
  // (set when both caps are proper).
  Cap plus_cap, minus_cap;
  bool enclosed = false;
  HalfSpace plus, minus;
  double domain_gap = 0.0;  // angular gap between the enclosing caps
};

std::optional<ContractionCertificate> contraction_certificate(const std::vector<Isometry>& A,
                                                              double delta,
                                                              const Point& base = {});

struct ContractionDiagnostics {
  std::size_t pairs_checked = 0;
  double worst_triangle_margin = 0.0;  // min d(o, g g' o) - (d + d' - 2M)
  std::size_t image_checks = 0;
  double worst_image_margin = 0.0;     // min (g x | g x') - (d(o, g o) - 2 C_g)
  std::size_t words_checked = 0;
  int increasing_from = 0;             // rank after which every sampled path increases
  double worst_increment = 0.0;        // min d(o, w_{k+1} o) - d(o, w_k o) beyond that rank
  double worst_qg_defect = 0.0;        // max quasi-geodesic defect over sampled paths
  bool ok = false;
};

// Sup of (x|y) over X+ x X- from the part caps (boundary closed form).
double domain_product_bound(const ContractionCertificate& cert);

// Samples pairs (all of them when there are at most `samples`), image checks, and random
// words of the given length over cert.elements.
ContractionDiagnostics contraction_diagnostics(const ContractionCertificate& cert,
                                               std::size_t samples, std::size_t word_samples = 200,
                                               int word_length = 20, std::uint64_t seed = 1);

struct ContractingElement {
  Isometry isometry;
  Word word;
  ContractingCheck check;
  bool from_product = false;
};

// Breadth-first over words up to depth; then products g' g of the largest enumerated
// elements whose attracting directions differ.
std::optional<ContractingElement> find_contracting_element(const std::vector<Isometry>& gens,
                                                           double delta, int depth,
                                                           const Point& base = {});

// Members of the semigroup generated by cert.elements with displacement <= max_displacement.
// Words are over cert.elements. Enumeration is complete: displacement grows along words.
OrbitStore contracting_semigroup_store(const ContractionCertificate& cert, double max_displacement,
                                       const DedupSpec& dedup = {DedupMode::Float, 1e-9});

// Elements of the store with displacement >= d_lo whose orbit point lies in the closed cap
// `attract` and whose inverse orbit point lies in `repel` (both seen from the store base).
std::vector<std::uint32_t> contracting_part(const OrbitStore& store, double d_lo,
                                            const std::optional<Cap>& attract,
                                            const std::optional<Cap>& repel);

// Smallest cap found containing all the given caps (exact on the H2 circle, iterative in H3).
Cap enclosing_cap(const std::vector<Cap>& caps, ModelKind kind);

// Random points of a closed half-space: boundary points of its trace and interior points
// along rays from base.
std::vector<AnyPoint> sample_half_space(const HalfSpace& h, const Point& base, ModelKind kind,
                                        int count, std::uint64_t seed);

std::string certificate_summary(const ContractionCertificate& cert);

}  // namespace gromolab
