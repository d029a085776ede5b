#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gromolab/contraction.hpp"
#include "gromolab/models.hpp"
#include "gromolab/orbit.hpp"

namespace gromolab {

struct SchottkyOptions {
  // Every inflated disjunction constant must stay below this.
  double threshold = std::numeric_limits<double>::infinity();
  int interior_samples = 256;
  // Pairs beyond this many get sampled only for the largest closed-form values.
  std::size_t sampled_pairs = 4096;
  std::uint64_t seed = 11;
};

struct SchottkyCertificate {
  ModelKind kind = ModelKind::H2;
  Point base{};
  double delta = 0.0;
  double threshold = std::numeric_limits<double>::infinity();
  std::vector<Isometry> generators;
  std::vector<Word> words;  // provenance, may be empty
  HalfSpace plus;           // X+
  // Parts 0..k-1 are g_i X+, part k is the complement of X+. Entry i bounds the sup
  // product between part i and every other part, inflated by delta. Per-part maxima keep
  // the record linear in k; a verifier checks every pair against both of its rows.
  std::vector<double> disjunction;
  double max_disjunction = 0.0;
  double min_gap = 0.0;    // smallest angular gap between image traces
  double min_inset = 0.0;  // smallest margin of an image trace inside the X+ trace
  Point witness_center{};
  double witness_radius = 0.0;

  std::size_t size() const { return generators.size(); }
};

struct SchottkyCheck {
  bool ok = false;
  std::string failure;  // first failing condition, empty when ok
};

// Conservative: any condition that cannot be verified yields nothing.
std::optional<SchottkyCertificate> schottky_certificate(const std::vector<Isometry>& gens,
                                                        const HalfSpace& X_plus, double delta,
                                                        const Point& base = {},
                                                        const SchottkyOptions& opts = {});
// Same checks with the failing condition reported.
SchottkyCheck check_schottky(const std::vector<Isometry>& gens, const HalfSpace& X_plus,
                             double delta, const Point& base = {}, const SchottkyOptions& opts = {},
                             SchottkyCertificate* out = nullptr);

// Recomputes every stored quantity from generators, X+ and delta and compares.
SchottkyCheck verify_certificate(const SchottkyCertificate& cert, double tol = 1e-7);

void write_certificate(const SchottkyCertificate& cert, std::ostream& os);
SchottkyCertificate read_certificate(std::istream& is);

struct ExtractionOptions {
  // Also require the inverse orbit points to be r-separated.
  bool separate_inverses = false;
  SchottkyOptions schottky{};
};

struct Extraction {
  int n = 0;
  double C = 0.0;   // inflated sup over X+ x X-
  double r = 0.0;   // 4C + 4 delta + 2
  std::size_t annulus_size = 0;
  std::vector<std::uint32_t> indices;  // into the store
  std::vector<Isometry> generators;
  std::vector<Word> words;
  std::optional<SchottkyCertificate> certificate;
  SchottkyCheck check;      // construction result
  SchottkyCheck reverified; // independent pass over the issued certificate
  double lower_bound = 0.0; // log(#S) / (n + 1)
};

// Minimal n accepted by extract_schottky_from_annulus.
double extraction_threshold(const ContractionCertificate& cert);

Extraction extract_schottky_from_annulus(const OrbitStore& store, const ContractionCertificate& cert,
                                         int n, const ExtractionOptions& opts = {});

// log(#S) / max displacement; 0 for a single generator.
double schottky_lower_bound(const std::vector<Isometry>& S, const Point& base = {});

struct GroupCertificate {
  std::vector<Isometry> generators;  // g gamma0 g
  bool ok = false;
  std::string failure;
  double min_gap = 0.0;
  double max_disjunction = 0.0;
  double min_inset = 0.0;   // margin of g gamma0 g (X - g^-1 X-) inside g X+
  double max_displacement = 0.0;
  double worst_displacement_slack = 0.0;  // min of 2 d(g) + d(gamma0) - d(g gamma0 g)
  double lower_bound = 0.0;               // log(#G) / max displacement
};

GroupCertificate schottky_group_from_semigroup(const std::vector<Isometry>& S,
                                               const Isometry& gamma0, const HalfSpace& X_plus,
                                               const HalfSpace& X_minus, double delta,
                                               const Point& base = {}, int interior_samples = 64);

}  // namespace gromolab
