#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gromolab/orbit.hpp"

namespace gromolab {

// counts[n] = N(n) = #{records with displacement <= n}, n = 0..depth.
// annulus_counts[n] = N(n+1) - N(n), n = 0..depth-1.
struct GrowthSeries {
  std::vector<std::uint64_t> counts;
  std::vector<std::uint64_t> annulus_counts;
  std::string source;
  int depth() const { return static_cast<int>(counts.size()) - 1; }

  static GrowthSeries from_counts(std::vector<std::uint64_t> counts, std::string source = {});
};

// Depth defaults to floor(store.complete_radius), capped by the largest displacement.
GrowthSeries growth_series(const OrbitStore& store, std::optional<int> depth = std::nullopt);
GrowthSeries growth_series(const OrbitStore& store, const std::vector<std::uint32_t>& subset,
                           int depth);

struct ExponentEstimate {
  double value = 0.0;
  int n1 = 0, n2 = 0;
  double residual = 0.0;
  std::vector<double> per_n;  // per_n[n] = log N(n) / n, n >= 1 (NaN where undefined)
  double annulus_value = 0.0;
  double annulus_residual = 0.0;
};

ExponentEstimate critical_exponent(const GrowthSeries& series, double window_fraction = 0.5);
// Fit over the explicit window [n1, depth].
ExponentEstimate fit_exponent(const GrowthSeries& series, int n1);

// How a net relates to the orbit it was drawn from over the fit window.
//   Orbit:     the net kept (nearly) every orbit point, so it is the orbit itself.
//   Saturated: the net holds at most `saturation` of the orbit points from some radius on,
//              and the fit window starts there.
//   Transient: neither; the net is still tracking raw orbit growth and its slope overshoots.
enum class NetRegime { Orbit, Saturated, Transient };
std::string to_string(NetRegime r);

struct EntropyPoint {
  double eps = 0.0;
  std::size_t net_size = 0;
  NetRegime regime = NetRegime::Transient;
  ExponentEstimate estimate;
};

struct EntropyEstimate {
  ExponentEstimate best;
  double best_eps = 0.0;
  // False when every grid point was transient; best is then the plain grid max.
  bool settled = false;
  std::vector<EntropyPoint> curve;
};

std::vector<double> default_eps_grid();

struct EntropyOptions {
  double window_fraction = 0.5;
  double saturation = 0.25;   // net/orbit count ratio that marks a settled net
  double orbit_ratio = 0.9;   // ratio at depth above which the net counts as the orbit
  int min_points = 3;         // fit points required in a saturated window
};

EntropyEstimate entropy_estimate(const OrbitStore& store, const std::vector<double>& eps_grid,
                                 const EntropyOptions& opts = {});

double poincare_partial_sum(const OrbitStore& store, double s);

struct LimitDiagnostic {
  std::vector<int> window_start;
  std::vector<double> oscillation;
  bool decreasing = false;
};

// Oscillation of log N(n) / n over consecutive windows of width 4 starting at n = first.
LimitDiagnostic limit_diagnostic(const GrowthSeries& series, int first = 4);

void write_series_csv(const GrowthSeries& series, const ExponentEstimate& est, std::ostream& os);
std::string exponent_json(const ExponentEstimate& est);
std::string entropy_json(const EntropyEstimate& est);

}  // namespace gromolab
