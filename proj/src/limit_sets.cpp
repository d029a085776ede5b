#include "gromolab/limit_sets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include "gromolab/growth.hpp"
#include "json.hpp"

namespace gromolab {

std::string to_string(SampleMode m) {
  return m == SampleMode::IFSFixedPoint ? "ifs" : "orbit";
}

namespace {

struct AffineMap {
  cplx beta, t;
  cplx operator()(cplx x) const { return x / beta + t; }
};

AffineMap affine_of(const Isometry& g) {
  if (g.affine_tag()) return {g.affine_tag()->beta, g.affine_tag()->t};
  double scale = std::abs(g.a()) + std::abs(g.d());
  if (std::abs(g.c()) > 1e-14 * scale)
    throw PreconditionFailed("IFS sampling needs affine generators (c = 0)");
  return {g.d() / g.a(), g.b() / g.d()};
}

std::vector<AffineMap> contracting_maps(const std::vector<Isometry>& gens) {
  if (gens.empty()) throw PreconditionFailed("no generators");
  std::vector<AffineMap> maps;
  for (const auto& g : gens) {
    auto f = affine_of(g);
    if (!(std::abs(f.beta) > 1.0))
      throw PreconditionFailed("generator is not contracting on the boundary (|beta| <= 1)");
    maps.push_back(f);
  }
  return maps;
}

bool on_real_line(const std::vector<cplx>& pts) {
  return std::all_of(pts.begin(), pts.end(), [](cplx p) { return p.imag() == 0.0; });
}

std::vector<cplx> finite_values(const BoundarySample& s) {
  std::vector<cplx> v;
  v.reserve(s.points.size());
  for (const auto& p : s.points)
    if (!p.at_infinity) v.push_back(p.value);
  return v;
}

// Nearest-neighbor queries against a fixed set: sorted array on a line, grid hash otherwise.
class NearestIndex {
 public:
  explicit NearestIndex(std::vector<cplx> pts) : pts_(std::move(pts)) {
    line_ = on_real_line(pts_);
    if (line_) {
      for (auto p : pts_) xs_.push_back(p.real());
      std::sort(xs_.begin(), xs_.end());
      return;
    }
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (auto p : pts_) {
      x0 = std::min(x0, p.real()), x1 = std::max(x1, p.real());
      y0 = std::min(y0, p.imag()), y1 = std::max(y1, p.imag());
    }
    double diam = std::max({x1 - x0, y1 - y0, 1e-300});
    cell_ = diam / std::max(1.0, std::sqrt(static_cast<double>(pts_.size())));
    for (std::uint32_t i = 0; i < pts_.size(); ++i) grid_[key(cell_of(pts_[i]))].push_back(i);
    max_ring_ = static_cast<long>(diam / cell_) + 2;
  }

  // Distance from q to the nearest point other than index `skip`.
  double nearest(cplx q, std::optional<std::uint32_t> skip = std::nullopt) const {
    if (line_) return nearest_line(q, skip);
    auto [cx, cy] = cell_of(q);
    double best = std::numeric_limits<double>::infinity();
    for (long ring = 0; ring <= max_ring_; ++ring) {
      if (best <= (ring - 1) * cell_) break;
      for (long dx = -ring; dx <= ring; ++dx)
        for (long dy = -ring; dy <= ring; ++dy) {
          if (std::max(std::labs(dx), std::labs(dy)) != ring) continue;
          auto it = grid_.find(key({cx + dx, cy + dy}));
          if (it == grid_.end()) continue;
          for (auto i : it->second) {
            if (skip && *skip == i) continue;
            best = std::min(best, std::abs(pts_[i] - q));
          }
        }
    }
    return best;
  }

  const std::vector<cplx>& points() const { return pts_; }

 private:
  std::pair<long, long> cell_of(cplx p) const {
    return {static_cast<long>(std::floor(p.real() / cell_)),
            static_cast<long>(std::floor(p.imag() / cell_))};
  }
  static std::uint64_t key(std::pair<long, long> c) {
    return (static_cast<std::uint64_t>(c.first) * 0x9E3779B97F4A7C15ull) ^
           static_cast<std::uint64_t>(c.second);
  }
  double nearest_line(cplx q, std::optional<std::uint32_t> skip) const {
    double best = std::numeric_limits<double>::infinity();
    auto it = std::lower_bound(xs_.begin(), xs_.end(), q.real());
    bool skipped = !skip.has_value();
    // A self query skips one copy of its own value.
    auto consider = [&](std::vector<double>::const_iterator j) {
      double d = std::abs(cplx(*j, 0.0) - q);
      if (!skipped && d == 0.0) {
        skipped = true;
        return;
      }
      best = std::min(best, d);
    };
    for (auto j = it; j != xs_.end() && j - it < 3; ++j) consider(j);
    for (auto j = it; j != xs_.begin() && it - j < 3;) consider(--j);
    return best;
  }

  std::vector<cplx> pts_;
  bool line_ = false;
  std::vector<double> xs_;
  double cell_ = 1.0;
  long max_ring_ = 0;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid_;
};

std::vector<cplx> distinct(std::vector<cplx> v) {
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

double diameter_box(const std::vector<cplx>& v) {
  if (v.empty()) return 0.0;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (auto p : v) {
    x0 = std::min(x0, p.real()), x1 = std::max(x1, p.real());
    y0 = std::min(y0, p.imag()), y1 = std::max(y1, p.imag());
  }
  return std::hypot(x1 - x0, y1 - y0);
}

std::uint64_t box_count(const std::vector<cplx>& v, double eps) {
  std::vector<std::pair<std::int64_t, std::int64_t>> keys;
  keys.reserve(v.size());
  for (auto p : v)
    keys.emplace_back(static_cast<std::int64_t>(std::floor(p.real() / eps)),
                      static_cast<std::int64_t>(std::floor(p.imag() / eps)));
  std::sort(keys.begin(), keys.end());
  return static_cast<std::uint64_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

}  // namespace

BoundarySample sample_limit_set(const std::vector<Isometry>& gens, int depth, SampleMode mode,
                                const Point& base, std::size_t budget) {
  if (gens.empty()) throw PreconditionFailed("no generators");
  if (depth < 0) throw PreconditionFailed("depth must be >= 0");
  double total = std::pow(static_cast<double>(gens.size()), depth);
  if (total > static_cast<double>(budget))
    throw BudgetExceeded("limit set sample would hold " + std::to_string(total) + " points");
  validate(base);

  BoundarySample out;
  out.mode = mode;
  out.depth = depth;
  out.kind = gens.front().kind();
  std::vector<Word> words{Word{}};
  const auto k = static_cast<std::uint16_t>(gens.size());

  auto grow_words = [&](std::vector<Word>& next_words, const std::vector<Word>& cur) {
    next_words.clear();
    next_words.reserve(cur.size() * k);
    for (std::uint16_t g = 0; g < k; ++g)
      for (const auto& w : cur) {
        Word nw;
        nw.letters.reserve(w.letters.size() + 1);
        nw.letters.push_back(g);
        nw.letters.insert(nw.letters.end(), w.letters.begin(), w.letters.end());
        next_words.push_back(std::move(nw));
      }
  };

  if (mode == SampleMode::IFSFixedPoint) {
    auto maps = contracting_maps(gens);
    const auto& f0 = maps.front();
    std::vector<cplx> cur{f0.t * f0.beta / (f0.beta - 1.0)};
    std::vector<Word> next_words;
    for (int level = 0; level < depth; ++level) {
      std::vector<cplx> next;
      next.reserve(cur.size() * k);
      for (const auto& f : maps)
        for (auto x : cur) next.push_back(f(x));
      grow_words(next_words, words);
      cur.swap(next);
      words.swap(next_words);
    }
    for (auto x : cur) out.points.push_back(BoundaryPoint::finite(x));
  } else {
    std::vector<Point> cur{base};
    std::vector<Word> next_words;
    for (int level = 0; level < depth; ++level) {
      std::vector<Point> next;
      next.reserve(cur.size() * k);
      for (const auto& g : gens)
        for (const auto& p : cur) next.push_back(g.apply(p));
      grow_words(next_words, words);
      cur.swap(next);
      words.swap(next_words);
    }
    for (const auto& p : cur) out.points.push_back(BoundaryPoint::finite(p.z));
  }
  out.words = std::move(words);
  return out;
}

BoundarySample sample_from_store(const OrbitStore& store, double min_displacement) {
  BoundarySample out;
  out.kind = store.kind;
  out.mode = SampleMode::OrbitProjection;
  out.depth = store.max_length;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (store.displacement[i] < min_displacement) continue;
    out.points.push_back(BoundaryPoint::finite(store.points[i].z));
    out.words.push_back(store.word(i));
  }
  return out;
}

std::pair<double, double> limit_set_hull(const std::vector<Isometry>& gens) {
  auto maps = contracting_maps(gens);
  for (const auto& f : maps)
    if (f.beta.imag() != 0.0 || f.t.imag() != 0.0)
      throw PreconditionFailed("hull needs a real affine system");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& f : maps) {
    double x = (f.t * f.beta / (f.beta - 1.0)).real();
    lo = std::min(lo, x), hi = std::max(hi, x);
  }
  // The fixed points lie in the attractor; grow their hull until it is invariant.
  for (int it = 0; it < 2000; ++it) {
    double nlo = lo, nhi = hi;
    for (const auto& f : maps)
      for (double x : {lo, hi}) {
        double y = f(cplx(x, 0.0)).real();
        nlo = std::min(nlo, y), nhi = std::max(nhi, y);
      }
    if (nlo == lo && nhi == hi) break;
    lo = nlo, hi = nhi;
  }
  return {lo, hi};
}

double median_nearest_neighbor(const std::vector<cplx>& pts) {
  auto v = distinct(pts);
  if (v.size() < 2) return 0.0;
  NearestIndex idx(v);
  std::vector<double> nn(v.size());
  for (std::uint32_t i = 0; i < v.size(); ++i) nn[i] = idx.nearest(v[i], i);
  std::nth_element(nn.begin(), nn.begin() + nn.size() / 2, nn.end());
  return nn[nn.size() / 2];
}

BoxCountCurve box_counting_dim(const BoundarySample& sample,
                               std::optional<std::vector<double>> eps_grid) {
  auto all = finite_values(sample);
  if (all.size() < 100)
    throw PreconditionFailed("box counting needs at least 100 finite sample points, got " +
                             std::to_string(all.size()));
  auto v = distinct(all);
  BoxCountCurve curve;
  if (v.size() == 1) {
    curve.eps = {1.0};
    curve.counts = {1};
    return curve;
  }
  curve.resolution = 4.0 * median_nearest_neighbor(v);
  const double diam = diameter_box(v);

  std::vector<double> eps;
  if (eps_grid) {
    eps = *eps_grid;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    for (double e : eps)
      if (!(e >= curve.resolution) || !(e > 0.0))
      {
        char msg[200];
        std::snprintf(msg, sizeof msg,
                      "eps %.3g is below the sample resolution %.3g (4 x median nearest-neighbor "
                      "distance); raise eps or sample deeper",
                      e, curve.resolution);
        throw PreconditionFailed(msg);
      }
  } else {
    double hi = diam / 4.0;
    double lo = std::max(curve.resolution, diam * 1e-7);
    if (!(lo < hi)) lo = hi / 16.0;
    const int steps = 16;
    for (int i = 0; i < steps; ++i) eps.push_back(hi * std::pow(lo / hi, i / double(steps - 1)));
  }
  if (eps.size() < 2) throw PreconditionFailed("box counting needs at least two scales");

  for (double e : eps) curve.counts.push_back(box_count(v, e));
  curve.eps = eps;

  std::size_t n = eps.size();
  std::size_t i0 = 0, i1 = n - 1;
  if (n >= 8) i0 = 2, i1 = n - 2;
  std::vector<double> xs, ys;
  for (std::size_t i = i0; i <= i1; ++i) {
    xs.push_back(-std::log(eps[i]));
    ys.push_back(std::log(static_cast<double>(curve.counts[i])));
  }
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  curve.fitted_dim = sxx > 0.0 ? sxy / sxx : 0.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double r = ys[i] - (my + curve.fitted_dim * (xs[i] - mx));
    ss += r * r;
  }
  curve.residual = std::sqrt(ss / xs.size());
  curve.fit_window = {i0, i1};
  return curve;
}

bool BoundaryRegion::contains(const BoundaryPoint& xi) const {
  switch (kind) {
    case Kind::Empty: return false;
    case Kind::Whole: return true;
    case Kind::Form: break;
  }
  if (xi.at_infinity) return A <= 0.0;
  double q = A * std::norm(xi.value) + 2.0 * (std::conj(B) * xi.value).real() + C;
  double scale = std::abs(A) * std::norm(xi.value) + 2.0 * std::abs(B) * std::abs(xi.value) +
                 std::abs(C);
  return q <= 1e-12 * scale;
}

double BoundaryRegion::radius() const {
  double disc = std::norm(B) - A * C;
  return std::sqrt(std::max(disc, 0.0)) / std::abs(A);
}

BoundaryRegion shadow(const Point& x, double r, const Point& base) {
  validate(x);
  validate(base);
  // (o|xi)_x <= r  <=>  B_xi(x, o) <= 2r - d(x, o), a Hermitian condition on xi.
  double c = 2.0 * r - distance(x, base);
  double K = std::exp(c) * x.h / base.h;
  BoundaryRegion reg;
  reg.A = 1.0 - K;
  reg.B = -(x.z - K * base.z);
  reg.C = std::norm(x.z) + x.h * x.h - K * (std::norm(base.z) + base.h * base.h);
  double disc = std::norm(reg.B) - reg.A * reg.C;
  double scale = std::norm(reg.B) + std::abs(reg.A * reg.C) + 1e-300;
  if (disc <= 1e-14 * scale) {
    // No real circle: the form has one sign everywhere.
    bool negative = reg.A < 0.0 || (reg.A == 0.0 && reg.C <= 0.0) ||
                    (std::abs(reg.A) <= 1e-14 && std::abs(reg.C) <= 1e-14);
    reg.kind = negative ? BoundaryRegion::Kind::Whole : BoundaryRegion::Kind::Empty;
  }
  return reg;
}

double DiscreteMeasure::mass_beyond(double d) const {
  double m = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (displacement[i] >= d) m += weights[i];
  return m;
}

DiscreteMeasure patterson_measure(const OrbitStore& store, double s,
                                  std::optional<double> critical_estimate) {
  if (store.empty()) throw PreconditionFailed("empty orbit store");
  double est = critical_estimate ? *critical_estimate
                                 : critical_exponent(growth_series(store)).value;
  if (!(s > est + 0.02))
    throw PreconditionFailed("s = " + std::to_string(s) + " must exceed the critical estimate " +
                             std::to_string(est) + " by more than 0.02");
  DiscreteMeasure mu;
  mu.base = store.base;
  mu.s = s;
  mu.truncation = store.max_length;
  mu.atoms = store.points;
  mu.displacement = store.displacement;
  double dmin = *std::min_element(store.displacement.begin(), store.displacement.end());
  mu.weights.resize(store.size());
  double total = 0.0;
  for (std::size_t i = 0; i < store.size(); ++i) {
    mu.weights[i] = std::exp(-s * (store.displacement[i] - dmin));
    total += mu.weights[i];
  }
  for (auto& w : mu.weights) w /= total;
  return mu;
}

FrostmanReport frostman_check(const DiscreteMeasure& mu, double delta, std::size_t ball_samples,
                              double r_max, double decades, int radius_steps,
                              std::uint64_t seed) {
  if (mu.atoms.empty()) throw PreconditionFailed("empty measure");
  if (ball_samples == 0 || radius_steps < 2 || !(r_max > 0.0) || !(decades > 0.0))
    throw PreconditionFailed("frostman_check needs samples, >= 2 radii and a positive range");
  FrostmanReport rep;
  for (int i = 0; i < radius_steps; ++i)
    rep.radii.push_back(r_max * std::pow(10.0, -decades * i / (radius_steps - 1)));
  rep.C_by_radius.assign(radius_steps, 0.0);

  // Centers drawn by mass, never the base itself.
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < mu.atoms.size(); ++i)
    if (distance(mu.atoms[i], mu.base) > 1e-9) candidates.push_back(i);
  if (candidates.empty()) throw PreconditionFailed("every atom sits at the basepoint");
  std::vector<double> w;
  for (auto i : candidates) w.push_back(mu.weights[i]);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::vector<std::size_t> centers;
  for (std::size_t k = 0; k < ball_samples; ++k) centers.push_back(candidates[pick(rng)]);
  std::sort(centers.begin(), centers.end());
  centers.erase(std::unique(centers.begin(), centers.end()), centers.end());

  std::vector<double> prod(mu.atoms.size());
  for (auto c : centers) {
    BoundaryPoint xi = from_visual_direction(visual_direction(mu.atoms[c], mu.base), mu.base);
    for (std::size_t j = 0; j < mu.atoms.size(); ++j)
      prod[j] = gromov_product(AnyPoint{xi}, AnyPoint{mu.atoms[j]}, mu.base);
    for (int k = 0; k < radius_steps; ++k) {
      double cut = -std::log(rep.radii[k]);
      double mass = 0.0;
      for (std::size_t j = 0; j < mu.atoms.size(); ++j)
        if (prod[j] > cut) mass += mu.weights[j];
      double ratio = mass / std::pow(rep.radii[k], delta);
      if (ratio > rep.C_by_radius[k]) rep.C_by_radius[k] = ratio;
      if (ratio > rep.C_max) {
        rep.C_max = ratio;
        rep.worst_center = xi;
        rep.worst_radius = rep.radii[k];
      }
    }
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double c : rep.C_by_radius)
    if (c > 0.0) lo = std::min(lo, c), hi = std::max(hi, c);
  rep.variation = hi > 0.0 ? hi / lo : 0.0;
  double first = rep.C_by_radius.front(), last = rep.C_by_radius.back();
  rep.divergent = first > 0.0 && last >= 3.0 * first;
  return rep;
}

double self_similarity_defect(const BoundarySample& sample, const std::vector<Isometry>& gens) {
  auto pts = finite_values(sample);
  if (pts.empty()) throw PreconditionFailed("empty sample");
  if (gens.empty()) throw PreconditionFailed("no generators");
  std::vector<cplx> images;
  images.reserve(pts.size() * gens.size());
  for (const auto& g : gens) {
    std::optional<AffineMap> f;
    if (g.affine_tag()) f = AffineMap{g.affine_tag()->beta, g.affine_tag()->t};
    for (auto p : pts) {
      if (f) {
        images.push_back((*f)(p));
        continue;
      }
      auto q = g.apply(BoundaryPoint::finite(p));
      if (q.at_infinity) throw PreconditionFailed("a generator maps a sample point to infinity");
      images.push_back(q.value);
    }
  }
  NearestIndex to_sample(distinct(pts)), to_images(distinct(images));
  double h = 0.0;
  for (auto q : images) h = std::max(h, to_sample.nearest(q));
  for (auto p : pts) h = std::max(h, to_images.nearest(p));
  return h;
}

namespace {

void check_viewport(int width, int height, const Viewport& vp) {
  if (width <= 0 || height <= 0) throw PreconditionFailed("image size must be positive");
  if (!(vp.x1 > vp.x0) || !(vp.y1 > vp.y0)) throw PreconditionFailed("viewport is empty");
}

Image shade(std::vector<std::uint64_t> counts, int width, int height, const Viewport& vp,
            std::size_t plotted) {
  Image img;
  img.width = width, img.height = height, img.viewport = vp, img.plotted = plotted;
  img.pixels.assign(counts.size(), 0);
  std::uint64_t mx = *std::max_element(counts.begin(), counts.end());
  if (mx == 0) return img;
  double norm = std::log1p(static_cast<double>(mx));
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i])
      img.pixels[i] = static_cast<std::uint8_t>(
          std::lround(55.0 + 200.0 * std::log1p(static_cast<double>(counts[i])) / norm));
  return img;
}

}  // namespace

Image render(const BoundarySample& sample, int width, int height, const Viewport& vp) {
  check_viewport(width, height, vp);
  auto pts = finite_values(sample);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(width) * height, 0);
  std::size_t plotted = 0;
  const bool band = on_real_line(pts);
  for (auto p : pts) {
    double fx = (p.real() - vp.x0) / (vp.x1 - vp.x0);
    if (fx < 0.0 || fx >= 1.0) continue;
    int ix = std::min(width - 1, static_cast<int>(fx * width));
    if (band) {
      for (int iy = 0; iy < height; ++iy) ++counts[static_cast<std::size_t>(iy) * width + ix];
    } else {
      double fy = (vp.y1 - p.imag()) / (vp.y1 - vp.y0);
      if (fy < 0.0 || fy >= 1.0) continue;
      int iy = std::min(height - 1, static_cast<int>(fy * height));
      ++counts[static_cast<std::size_t>(iy) * width + ix];
    }
    ++plotted;
  }
  return shade(std::move(counts), width, height, vp, plotted);
}

Image render(const OrbitStore& store, int width, int height, const Viewport& vp) {
  check_viewport(width, height, vp);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(width) * height, 0);
  std::size_t plotted = 0;
  for (const auto& p : store.points) {
    double fx = (p.z.real() - vp.x0) / (vp.x1 - vp.x0);
    double fy = (vp.y1 - p.h) / (vp.y1 - vp.y0);
    if (fx < 0.0 || fx >= 1.0 || fy < 0.0 || fy >= 1.0) continue;
    int ix = std::min(width - 1, static_cast<int>(fx * width));
    int iy = std::min(height - 1, static_cast<int>(fy * height));
    ++counts[static_cast<std::size_t>(iy) * width + ix];
    ++plotted;
  }
  return shade(std::move(counts), width, height, vp, plotted);
}

void write_pgm(const Image& img, std::ostream& os) {
  os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()),
           static_cast<std::streamsize>(img.pixels.size()));
}

void write_pgm(const Image& img, const std::string& path, const std::string& source) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  write_pgm(img, os);
  nlohmann::json meta = {
      {"schema", "gromolab/1"},
      {"kind", "render"},
      {"source", source},
      {"width", img.width},
      {"height", img.height},
      {"viewport", {{"x0", img.viewport.x0}, {"x1", img.viewport.x1},
                    {"y0", img.viewport.y0}, {"y1", img.viewport.y1}}},
      {"plotted", img.plotted},
  };
  std::ofstream js(path + ".json");
  if (!js) throw Error("cannot write " + path + ".json");
  js << meta.dump(2) << '\n';
}

}  // namespace gromolab
