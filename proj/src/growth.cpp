#include "gromolab/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include "json.hpp"
#include <ostream>

namespace gromolab {

namespace {

struct Fit {
  double slope = 0.0;
  double residual = 0.0;
  bool ok = false;
};

Fit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  Fit f;
  if (x.size() < 2) return f;
  double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) return f;
  f.slope = sxy / sxx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (my + f.slope * (x[i] - mx));
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  f.ok = true;
  return f;
}

}  // namespace

GrowthSeries GrowthSeries::from_counts(std::vector<std::uint64_t> counts, std::string source) {
  GrowthSeries s;
  s.counts = std::move(counts);
  for (std::size_t n = 0; n + 1 < s.counts.size(); ++n) {
    if (s.counts[n + 1] < s.counts[n]) throw PreconditionFailed("ball counts must be nondecreasing");
    s.annulus_counts.push_back(s.counts[n + 1] - s.counts[n]);
  }
  s.source = std::move(source);
  return s;
}

GrowthSeries growth_series(const OrbitStore& store, const std::vector<std::uint32_t>& subset,
                           int depth) {
  std::vector<std::uint64_t> counts(std::max(depth, 0) + 1, 0);
  for (auto i : subset) {
    double d = store.displacement[i];
    if (d > depth) continue;
    int n = static_cast<int>(std::ceil(d));
    counts[std::max(n, 0)]++;
  }
  for (std::size_t n = 1; n < counts.size(); ++n) counts[n] += counts[n - 1];
  return GrowthSeries::from_counts(std::move(counts),
                                   store.label + " dedup=" + to_string(store.dedup.mode));
}

GrowthSeries growth_series(const OrbitStore& store, std::optional<int> depth) {
  int d;
  if (depth) {
    d = *depth;
  } else {
    double cr = store.complete_radius;
    double top = store.empty() ? 0.0
                               : *std::max_element(store.displacement.begin(), store.displacement.end());
    d = static_cast<int>(std::floor(std::min(cr, top)));
  }
  std::vector<std::uint32_t> all(store.size());
  for (std::uint32_t i = 0; i < store.size(); ++i) all[i] = i;
  return growth_series(store, all, d);
}

ExponentEstimate fit_exponent(const GrowthSeries& series, int n1) {
  const int depth = series.depth();
  if (depth < 4) throw PreconditionFailed("critical_exponent needs depth >= 4");
  if (std::all_of(series.counts.begin(), series.counts.end(), [](auto c) { return c == 0; }))
    throw PreconditionFailed("critical_exponent: all counts are zero");
  ExponentEstimate e;
  e.per_n.assign(depth + 1, std::numeric_limits<double>::quiet_NaN());
  for (int n = 1; n <= depth; ++n)
    if (series.counts[n] > 0) e.per_n[n] = std::log(static_cast<double>(series.counts[n])) / n;
  n1 = std::clamp(n1, 1, depth - 1);
  std::vector<double> xs, ys, ax, ay;
  for (int n = n1; n <= depth; ++n) {
    if (series.counts[n] > 0) {
      xs.push_back(n);
      ys.push_back(std::log(static_cast<double>(series.counts[n])));
    }
    if (n < depth && series.annulus_counts[n] > 0) {
      ax.push_back(n);
      ay.push_back(std::log(static_cast<double>(series.annulus_counts[n])));
    }
  }
  e.n1 = n1;
  e.n2 = depth;
  Fit f = least_squares(xs, ys);
  if (!f.ok) throw PreconditionFailed("critical_exponent: fewer than two nonzero counts in window");
  e.value = f.slope;
  e.residual = f.residual;
  Fit a = least_squares(ax, ay);
  e.annulus_value = a.ok ? a.slope : e.value;
  e.annulus_residual = a.residual;
  return e;
}

ExponentEstimate critical_exponent(const GrowthSeries& series, double window_fraction) {
  int n1 = std::max(1, static_cast<int>(std::floor(series.depth() * (1.0 - window_fraction))));
  return fit_exponent(series, n1);
}

std::string to_string(NetRegime r) {
  switch (r) {
    case NetRegime::Orbit: return "orbit";
    case NetRegime::Saturated: return "saturated";
    case NetRegime::Transient: return "transient";
  }
  return "?";
}

std::vector<double> default_eps_grid() {
  std::vector<double> g;
  for (int i = 0; i < 8; ++i) g.push_back(0.05 * std::pow(32.0, i / 7.0));
  return g;
}

EntropyEstimate entropy_estimate(const OrbitStore& store, const std::vector<double>& eps_grid,
                                 const EntropyOptions& opts) {
  if (eps_grid.empty()) throw PreconditionFailed("entropy_estimate needs a nonempty eps grid");
  GrowthSeries full = growth_series(store);
  const int depth = full.depth();
  const int n_default =
      std::max(1, static_cast<int>(std::floor(depth * (1.0 - opts.window_fraction))));
  std::vector<std::uint32_t> inside;
  for (std::uint32_t i = 0; i < store.size(); ++i)
    if (store.displacement[i] <= depth) inside.push_back(i);
  OrbitStore ball = store.subset(inside);
  EntropyEstimate out;
  const EntropyPoint* best = nullptr;
  const EntropyPoint* best_any = nullptr;
  out.curve.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    if (!(eps > 0.0)) throw PreconditionFailed("eps values must be positive");
    auto net = greedy_separated_net(ball, eps);
    GrowthSeries s = growth_series(ball, net, depth);
    auto ratio = [&](int n) {
      return full.counts[n] ? double(s.counts[n]) / double(full.counts[n]) : 1.0;
    };
    EntropyPoint p;
    p.eps = eps;
    p.net_size = net.size();
    int n_sat = depth + 1;
    while (n_sat > 1 && ratio(n_sat - 1) <= opts.saturation) --n_sat;
    if (ratio(depth) >= opts.orbit_ratio) {
      p.regime = NetRegime::Orbit;
      p.estimate = fit_exponent(s, n_default);
    } else if (std::max(n_sat, n_default) + opts.min_points - 1 <= depth) {
      p.regime = NetRegime::Saturated;
      p.estimate = fit_exponent(s, std::max(n_sat, n_default));
    } else {
      p.regime = NetRegime::Transient;
      p.estimate = fit_exponent(s, n_default);
    }
    out.curve.push_back(std::move(p));
  }
  for (const auto& p : out.curve) {
    if (!best_any || p.estimate.value > best_any->estimate.value) best_any = &p;
    if (p.regime != NetRegime::Transient && (!best || p.estimate.value > best->estimate.value))
      best = &p;
  }
  out.settled = best != nullptr;
  if (!best) best = best_any;
  out.best = best->estimate;
  out.best_eps = best->eps;
  return out;
}

double poincare_partial_sum(const OrbitStore& store, double s) {
  double sum = 0.0;
  for (double d : store.displacement) sum += std::exp(-s * d);
  return sum;
}

LimitDiagnostic limit_diagnostic(const GrowthSeries& series, int first) {
  const int depth = series.depth();
  if (depth < 8) throw PreconditionFailed("limit_diagnostic needs depth >= 8");
  LimitDiagnostic diag;
  for (int start = std::max(first, 1); start + 3 <= depth; start += 4) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int n = start; n < start + 4; ++n) {
      double c = static_cast<double>(series.counts[n]);
      double v = c > 0 ? std::log(c) / n : 0.0;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    diag.window_start.push_back(start);
    diag.oscillation.push_back(hi - lo);
  }
  diag.decreasing = diag.oscillation.size() >= 2;
  for (std::size_t i = 1; i < diag.oscillation.size(); ++i)
    if (!(diag.oscillation[i] < diag.oscillation[i - 1] || diag.oscillation[i] == 0.0))
      diag.decreasing = false;
  return diag;
}

void write_series_csv(const GrowthSeries& series, const ExponentEstimate& est, std::ostream& os) {
  os.precision(12);
  os << "n,N,per_n\n";
  for (int n = 0; n <= series.depth(); ++n) {
    os << n << ',' << series.counts[n] << ',';
    if (n >= 1 && n < static_cast<int>(est.per_n.size()) && !std::isnan(est.per_n[n]))
      os << est.per_n[n];
    os << '\n';
  }
}

namespace {

nlohmann::json to_json(const ExponentEstimate& e) {
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t n = 1; n < e.per_n.size(); ++n)
    per.push_back(std::isnan(e.per_n[n]) ? nlohmann::json(nullptr) : nlohmann::json(e.per_n[n]));
  return {{"value", e.value},
          {"window", {e.n1, e.n2}},
          {"residual", e.residual},
          {"annulus_value", e.annulus_value},
          {"per_n", per}};
}

}  // namespace

std::string exponent_json(const ExponentEstimate& est) { return to_json(est).dump(); }

std::string entropy_json(const EntropyEstimate& est) {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : est.curve)
    curve.push_back({{"eps", p.eps}, {"net_size", p.net_size}, {"regime", to_string(p.regime)},
                     {"value", p.estimate.value}, {"window", {p.estimate.n1, p.estimate.n2}},
                     {"residual", p.estimate.residual}});
  return nlohmann::json{{"value", est.best.value}, {"eps", est.best_eps},
                        {"window", {est.best.n1, est.best.n2}}, {"residual", est.best.residual},
                        {"settled", est.settled},
                        {"curve", curve}}
      .dump();
}

}  // namespace gromolab
