#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gromolab/models.hpp"
#include "gromolab/orbit.hpp"

namespace gromolab {

enum class SampleMode { OrbitProjection, IFSFixedPoint };
std::string to_string(SampleMode m);

struct BoundarySample {
  ModelKind kind = ModelKind::H2;
  SampleMode mode = SampleMode::IFSFixedPoint;
  int depth = 0;
  std::vector<BoundaryPoint> points;
  std::vector<Word> words;  // provenance, same order as points

  std::size_t size() const { return points.size(); }
};

// IFS mode: the fixed point of the first generator pushed through every word of length
// depth. Orbit mode: vertical projection of w o for every word of length depth.
BoundarySample sample_limit_set(const std::vector<Isometry>& gens, int depth, SampleMode mode,
                                const Point& base = {}, std::size_t budget = 20'000'000);
// Projections of store points with displacement >= min_displacement.
BoundarySample sample_from_store(const OrbitStore& store, double min_displacement);

// Convex hull on the real line of the attractor of a real affine system (H2 charts).
std::pair<double, double> limit_set_hull(const std::vector<Isometry>& gens);

struct BoxCountCurve {
  std::vector<double> eps;
  std::vector<std::uint64_t> counts;
  double fitted_dim = 0.0;
  std::pair<std::size_t, std::size_t> fit_window{0, 0};  // inclusive indices into eps
  double residual = 0.0;
  double resolution = 0.0;  // 4 x median nearest-neighbor distance
};

double median_nearest_neighbor(const std::vector<cplx>& pts);
// Default grid: 16 geometric steps from diameter/4 down to the resolution floor.
BoxCountCurve box_counting_dim(const BoundarySample& sample,
                               std::optional<std::vector<double>> eps_grid = std::nullopt);

// Boundary set given by a Hermitian form A|xi|^2 + 2 Re(conj(B) xi) + C <= 0 (A <= 0
// includes infinity), or all / nothing.
struct BoundaryRegion {
  enum class Kind { Empty, Whole, Form } kind = Kind::Form;
  double A = 0.0;
  cplx B{};
  double C = 0.0;
  bool contains(const BoundaryPoint& xi) const;
  // For Form regions with A != 0: bounding circle.
  cplx center() const { return -B / A; }
  double radius() const;
};

// { xi : (o | xi)_x <= r }.
BoundaryRegion shadow(const Point& x, double r, const Point& base = {});

struct DiscreteMeasure {
  std::vector<Point> atoms;
  std::vector<double> displacement;
  std::vector<double> weights;
  Point base{};
  double s = 0.0;
  int truncation = 0;
  double mass_beyond(double d) const;  // total weight on atoms with displacement >= d
};

// Refuses s <= estimate + 0.02; the estimate defaults to the store's critical exponent.
DiscreteMeasure patterson_measure(const OrbitStore& store, double s,
                                  std::optional<double> critical_estimate = std::nullopt);

struct FrostmanReport {
  double C_max = 0.0;
  BoundaryPoint worst_center;
  double worst_radius = 0.0;
  std::vector<double> radii;
  std::vector<double> C_by_radius;  // max over centers at each radius
  double variation = 0.0;           // max / min of C_by_radius
  bool divergent = false;           // C grows by >= 3 toward the smallest radius
};

// Visual balls { eta : (xi | eta) > -log r } centered at atom projections; radii
// log-spaced from r_max down by `decades` decades.
FrostmanReport frostman_check(const DiscreteMeasure& mu, double delta, std::size_t ball_samples,
                              double r_max = 0.3, double decades = 2.0, int radius_steps = 9,
                              std::uint64_t seed = 5);

// Symmetric Hausdorff distance in the chart between the sample and the union of its
// images under the generators.
double self_similarity_defect(const BoundarySample& sample, const std::vector<Isometry>& gens);

struct Viewport {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

struct Image {
  int width = 0, height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, top row first
  Viewport viewport;
  std::size_t plotted = 0;
};

// Boundary samples on a real chart render as vertical bands; other samples plot the chart.
Image render(const BoundarySample& sample, int width, int height, const Viewport& vp);
// Orbit points (Re z, h) in the upper half-plane picture.
Image render(const OrbitStore& store, int width, int height, const Viewport& vp);
void write_pgm(const Image& img, std::ostream& os);
// Writes path and path + ".json".
void write_pgm(const Image& img, const std::string& path, const std::string& source);

}  // namespace gromolab
