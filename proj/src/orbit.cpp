#include "gromolab/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace gromolab {

namespace {

// Distance-monotone quantity: cosh d = 1 + q / 2.
double metric_ratio(const Point& p, const Point& q) {
  double dz = std::norm(p.z - q.z);
  double dh = p.h - q.h;
  return (dz + dh * dh) / (p.h * q.h);
}

double ratio_to_distance(double q) { return 2.0 * std::asinh(std::sqrt(q) / 2.0); }

double distance_to_ratio(double d) {
  double s = 2.0 * std::sinh(d / 2.0);
  return s * s;
}

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ParseError("truncated GORB1 stream");
  return v;
}

}  // namespace

std::string format_word(const Word& w) {
  std::string s;
  for (std::size_t i = 0; i < w.letters.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(w.letters[i]);
  }
  return s;
}

Word parse_word(const std::string& s) {
  Word w;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, '.')) {
    if (item.empty()) continue;
    w.letters.push_back(static_cast<std::uint16_t>(std::stoul(item)));
  }
  return w;
}

std::string to_string(DedupMode mode) {
  switch (mode) {
    case DedupMode::None: return "none";
    case DedupMode::Float: return "float";
    case DedupMode::Exact: return "exact";
  }
  return "?";
}

unsigned worker_count() {
  const char* env = std::getenv("GROMOLAB_THREADS");
  if (!env) return 1;
  int n = std::atoi(env);
  return n >= 1 ? static_cast<unsigned>(n) : 1u;
}

// ---------------------------------------------------------------- word trie

std::uint32_t WordTrie::add(std::uint32_t parent_node, std::uint16_t l) {
  if (parent.size() >= 0xfffffff0u) throw BudgetExceeded("word trie overflow");
  parent.push_back(parent_node);
  letter.push_back(l);
  return static_cast<std::uint32_t>(parent.size() - 1);
}

Word WordTrie::word(std::uint32_t n) const {
  Word w;
  while (n != kRoot) {
    w.letters.push_back(letter[n]);
    n = parent[n];
  }
  std::reverse(w.letters.begin(), w.letters.end());
  return w;
}

// ---------------------------------------------------------- proximity index

ProximityIndex::ProximityIndex(double radius) {
  double r = std::max(radius, 1e-3);
  level_step_ = std::clamp(r, 0.05, 0.7);
  width_ = std::max(level_step_, std::expm1(r) * std::exp(r) / 2.0);
}

std::size_t ProximityIndex::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = static_cast<std::uint64_t>(k.level) * 0x9E3779B97F4A7C15ull;
  h ^= static_cast<std::uint64_t>(k.ix) + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
  h ^= static_cast<std::uint64_t>(k.iy) + 0x94D049BB133111EBull + (h << 6) + (h >> 2);
  return static_cast<std::size_t>(h);
}

ProximityIndex::Key ProximityIndex::key_of(const Point& p) const {
  auto level = static_cast<std::int32_t>(std::floor(std::log(p.h) / level_step_));
  double w = width_ * std::exp(level * level_step_);
  return {level, static_cast<std::int64_t>(std::floor(p.z.real() / w)),
          static_cast<std::int64_t>(std::floor(p.z.imag() / w))};
}

void ProximityIndex::insert(std::uint32_t id, const Point& p) {
  auto slot = static_cast<std::uint32_t>(points_.size());
  points_.push_back(p);
  ids_.push_back(id);
  cells_[key_of(p)].push_back(slot);
  if (p.z.imag() != 0.0) planar_ = false;
  ++count_;
}

void ProximityIndex::visit_within(const Point& p, double r,
                                  const std::function<bool(std::uint32_t, double)>& f) const {
  if (count_ == 0) return;
  double qmax = distance_to_ratio(r) * (1.0 + 1e-12);
  auto check = [&](std::uint32_t slot) {
    double q = metric_ratio(p, points_[slot]);
    if (q <= qmax) {
      double d = ratio_to_distance(q);
      if (d <= r) return f(ids_[slot], d);
    }
    return true;
  };
  double lh = std::log(p.h);
  auto k0 = static_cast<std::int64_t>(std::floor((lh - r) / level_step_)) - 1;
  auto k1 = static_cast<std::int64_t>(std::floor((lh + r) / level_step_)) + 1;
  double reach = p.h * std::expm1(r) * (1.0 + 1e-9) + 1e-300;
  bool planar = p.z.imag() == 0.0 && planar_;
  // Estimate the number of cells to visit; scan linearly when that is cheaper.
  double estimate = 0.0;
  for (std::int64_t k = k0; k <= k1; ++k) {
    double w = width_ * std::exp(k * level_step_);
    double n = 2.0 * reach / w + 2.0;
    estimate += planar ? n : n * n;
    if (estimate > 4.0 * static_cast<double>(count_)) break;
  }
  if (estimate > 4.0 * static_cast<double>(count_)) {
    for (std::uint32_t slot = 0; slot < points_.size(); ++slot)
      if (!check(slot)) return;
    return;
  }
  for (std::int64_t k = k0; k <= k1; ++k) {
    double w = width_ * std::exp(k * level_step_);
    auto x0 = static_cast<std::int64_t>(std::floor((p.z.real() - reach) / w));
    auto x1 = static_cast<std::int64_t>(std::floor((p.z.real() + reach) / w));
    auto y0 = static_cast<std::int64_t>(std::floor((p.z.imag() - reach) / w));
    auto y1 = static_cast<std::int64_t>(std::floor((p.z.imag() + reach) / w));
    for (auto ix = x0; ix <= x1; ++ix) {
      for (auto iy = y0; iy <= y1; ++iy) {
        auto it = cells_.find(Key{static_cast<std::int32_t>(k), ix, iy});
        if (it == cells_.end()) continue;
        for (auto slot : it->second)
          if (!check(slot)) return;
      }
    }
  }
}

std::vector<std::uint32_t> ProximityIndex::within(const Point& p, double r) const {
  std::vector<std::uint32_t> out;
  visit_within(p, r, [&](std::uint32_t id, double) {
    out.push_back(id);
    return true;
  });
  std::sort(out.begin(), out.end());
  return out;
}

bool ProximityIndex::any_within(const Point& p, double r) const {
  bool found = false;
  visit_within(p, r, [&](std::uint32_t, double) {
    found = true;
    return false;
  });
  return found;
}

// -------------------------------------------------------------------- store

Isometry OrbitStore::isometry(std::size_t i) const {
  const auto& m = matrices[i];
  Isometry g = Isometry::from_unimodular(kind, m);
  if (affine && m[2] == 0.0) g.set_affine_tag(AffineTag{m[3] / m[0], m[1] / m[3]});
  return g;
}

OrbitRecord OrbitStore::record(std::size_t i) const {
  return {word(i), points[i], displacement[i], isometry(i)};
}

void OrbitStore::push(std::uint32_t trie_node, std::uint16_t len, const Point& p, double disp,
                      const std::array<cplx, 4>& m) {
  node.push_back(trie_node);
  length.push_back(len);
  points.push_back(p);
  displacement.push_back(disp);
  matrices.push_back(m);
  index_.reset();
}

std::vector<std::uint32_t> OrbitStore::annulus(int n) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < size(); ++i)
    if (displacement[i] >= n && displacement[i] < n + 1) out.push_back(i);
  return out;
}

std::map<int, std::vector<std::uint32_t>> OrbitStore::annuli() const {
  std::map<int, std::vector<std::uint32_t>> out;
  for (std::uint32_t i = 0; i < size(); ++i)
    out[static_cast<int>(std::floor(displacement[i]))].push_back(i);
  return out;
}

const ProximityIndex& OrbitStore::index() const {
  if (!index_) {
    auto idx = std::make_shared<ProximityIndex>(0.5);
    for (std::uint32_t i = 0; i < size(); ++i) idx->insert(i, points[i]);
    index_ = idx;
  }
  return *index_;
}

std::vector<std::uint32_t> OrbitStore::within(const Point& p, double r) const {
  return index().within(p, r);
}

OrbitStore OrbitStore::subset(const std::vector<std::uint32_t>& indices) const {
  OrbitStore s;
  s.kind = kind;
  s.base = base;
  s.dedup = dedup;
  s.generator_count = generator_count;
  s.label = label;
  s.complete_radius = complete_radius;
  s.max_length = max_length;
  s.affine = affine;
  s.trie = trie;
  s.exact = exact;
  for (auto i : indices) s.push(node[i], length[i], points[i], displacement[i], matrices[i]);
  return s;
}

// -------------------------------------------------------------- enumeration

namespace {

constexpr std::array<double, 8> kProjection{0.21, 0.17, 0.11, 0.07, 0.13, 0.05, 0.15, 0.11};

double project(const std::array<cplx, 4>& m) {
  double p = 0.0;
  for (int i = 0; i < 4; ++i)
    p += kProjection[2 * i] * m[i].real() + kProjection[2 * i + 1] * m[i].imag();
  return p;
}

double entry_gap(const std::array<cplx, 4>& x, const std::array<cplx, 4>& y) {
  double g = 0.0;
  for (int i = 0; i < 4; ++i) g = std::max(g, std::abs(x[i] - y[i]));
  return g;
}

struct Visited {
  std::array<cplx, 4> m;
  std::int64_t record = -1;
};

class FloatDedup {
 public:
  explicit FloatDedup(double tol) : tol_(tol), width_(10.0 * tol) {}

  // Returns the visited id of a match within tol, and reports near matches.
  std::optional<std::size_t> find(const std::array<cplx, 4>& m, const std::vector<Visited>& visited,
                                  std::optional<std::size_t>* near) const {
    auto b = bucket(m);
    std::optional<std::size_t> best;
    for (auto k = b - 1; k <= b + 1; ++k) {
      auto it = buckets_.find(k);
      if (it == buckets_.end()) continue;
      for (auto id : it->second) {
        double g = entry_gap(m, visited[id].m);
        if (g <= tol_) return id;
        if (near && g <= 10.0 * tol_ && !best) best = id;
      }
    }
    if (near) *near = best;
    return std::nullopt;
  }

  void add(const std::array<cplx, 4>& m, std::size_t id) { buckets_[bucket(m)].push_back(id); }

 private:
  std::int64_t bucket(const std::array<cplx, 4>& m) const {
    return static_cast<std::int64_t>(std::floor(project(m) / width_));
  }
  double tol_;
  double width_;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> buckets_;
};

struct Frontier {
  std::uint32_t node;
  std::uint16_t len;
  std::array<cplx, 4> m;
  std::size_t visited;
  BetaRingElement exact_t;
  double disp = 0.0;
};

}  // namespace

OrbitStore enumerate_orbit(const std::vector<Isometry>& gens, const Point& base,
                           const OrbitLimit& limit, const DedupSpec& dedup,
                           std::shared_ptr<const ExactAffineSystem> exact) {
  if (gens.empty()) throw PreconditionFailed("enumerate_orbit needs at least one generator");
  if (!limit.max_word_length && !limit.max_displacement)
    throw PreconditionFailed("enumerate_orbit needs a finite limit");
  if (gens.size() > 0xffff) throw PreconditionFailed("too many generators");
  validate(base);
  const ModelKind kind = gens.front().kind();
  for (const auto& g : gens)
    if (g.kind() != kind) throw ModelMismatch("generators from different models");
  if (dedup.mode == DedupMode::Exact) {
    if (!exact) throw PreconditionFailed("exact dedup requires an exact affine system");
    if (exact->digits.digits.size() != gens.size())
      throw PreconditionFailed("exact affine system does not match the generator count");
  }

  OrbitStore store;
  store.kind = kind;
  store.base = base;
  store.dedup = dedup;
  store.generator_count = gens.size();
  store.exact = exact;
  store.affine = std::all_of(gens.begin(), gens.end(),
                             [](const Isometry& g) { return g.affine_tag() && g.c() == 0.0; });

  const int max_len = limit.max_word_length.value_or(limit.word_cap);
  const double max_d = limit.max_displacement.value_or(std::numeric_limits<double>::infinity());
  const double expand_d = max_d + limit.prune_slack;

  std::vector<Visited> visited;
  FloatDedup float_dedup(dedup.tol);
  std::unordered_map<std::string, std::size_t> exact_seen;
  auto exact_key = [&](int len, const BetaRingElement& t) {
    return std::to_string(len) + "|" + ring_key(t);
  };

  Isometry id = Isometry::identity(kind);
  visited.push_back({id.m(), -1});
  if (dedup.mode == DedupMode::Float) float_dedup.add(id.m(), 0);

  // Generators sorted by displacement, for the growth-defect prune.
  std::vector<double> gen_disp(gens.size());
  std::vector<std::size_t> by_disp(gens.size());
  for (std::size_t i = 0; i < gens.size(); ++i) {
    gen_disp[i] = distance(base, gens[i].apply(base));
    by_disp[i] = i;
  }
  std::stable_sort(by_disp.begin(), by_disp.end(),
                   [&](std::size_t x, std::size_t y) { return gen_disp[x] < gen_disp[y]; });
  std::vector<double> sorted_disp(gens.size());
  for (std::size_t i = 0; i < gens.size(); ++i) sorted_disp[i] = gen_disp[by_disp[i]];
  std::vector<std::size_t> all_gens(gens.size());
  for (std::size_t i = 0; i < gens.size(); ++i) all_gens[i] = i;
  std::vector<std::size_t> allowed;

  std::vector<Frontier> frontier;
  frontier.push_back({WordTrie::kRoot, 0, id.m(), 0, {}, 0.0});
  double deepest_min = std::numeric_limits<double>::infinity();
  bool deepest_seen = false;

  while (!frontier.empty()) {
    std::vector<Frontier> next;
    for (const auto& f : frontier) {
      const std::vector<std::size_t>* order = &all_gens;
      if (limit.growth_defect && f.len > 0) {
        double room = expand_d - f.disp + *limit.growth_defect;
        auto cut = std::upper_bound(sorted_disp.begin(), sorted_disp.end(), room) - sorted_disp.begin();
        allowed.assign(by_disp.begin(), by_disp.begin() + cut);
        std::sort(allowed.begin(), allowed.end());
        order = &allowed;
      }
      for (std::size_t gi : *order) {
        const auto& p = f.m;
        const auto& q = gens[gi].m();
        Isometry g = Isometry::from_unimodular(
            kind, {p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3],
                   p[2] * q[0] + p[3] * q[2], p[2] * q[1] + p[3] * q[3]});
        auto len = static_cast<std::uint16_t>(f.len + 1);
        Point pt = g.apply(base);
        double disp = distance(base, pt);
        auto new_word = [&]() {
          Word w = f.node == WordTrie::kRoot ? Word{} : store.trie->word(f.node);
          w.letters.push_back(static_cast<std::uint16_t>(gi));
          return w;
        };

        BetaRingElement t;
        std::optional<std::size_t> dup;
        std::optional<std::size_t> near;
        if (dedup.mode == DedupMode::Float) {
          dup = float_dedup.find(g.m(), visited, &near);
        } else if (dedup.mode == DedupMode::Exact) {
          const auto& beta = exact->beta;
          t = f.len == 0 ? exact->digits.digits[gi]
                         : ring_add(ring_mul_beta(beta, f.exact_t), exact->digits.digits[gi]);
          auto it = exact_seen.find(exact_key(len, t));
          if (it != exact_seen.end()) dup = it->second;
        }
        if (dup) {
          auto rec = visited[*dup].record;
          if (rec >= 0) store.aliases[static_cast<std::uint32_t>(rec)].push_back(new_word());
          continue;
        }
        if (len == max_len && limit.max_word_length) {
          deepest_seen = true;
          deepest_min = std::min(deepest_min, disp);
        }

        bool keep = len <= max_len && disp <= max_d;
        bool expand = len < max_len && disp <= expand_d;
        if (!keep && !expand) continue;
        if (expand && len >= limit.word_cap)
          throw BudgetExceeded("word cap " + std::to_string(limit.word_cap) +
                               " reached before the displacement limit");

        std::uint32_t node = store.trie->add(f.node, static_cast<std::uint16_t>(gi));
        std::size_t vid = visited.size();
        visited.push_back({g.m(), -1});
        if (dedup.mode == DedupMode::Float) float_dedup.add(g.m(), vid);
        if (dedup.mode == DedupMode::Exact) exact_seen.emplace(exact_key(len, t), vid);

        if (keep) {
          if (store.size() >= limit.record_cap)
            throw BudgetExceeded("orbit record cap " + std::to_string(limit.record_cap) +
                                 " exceeded");
          visited[vid].record = static_cast<std::int64_t>(store.size());
          if (near && visited[*near].record >= 0)
            store.near_aliases[static_cast<std::uint32_t>(store.size())].push_back(
                store.trie->word(node));
          store.push(node, len, pt, disp, g.m());
        }
        if (expand) next.push_back({node, len, g.m(), vid, std::move(t), disp});
      }
    }
    frontier = std::move(next);
  }

  store.max_length = 0;
  for (auto l : store.length) store.max_length = std::max<int>(store.max_length, l);
  double complete = limit.max_displacement ? max_d : std::numeric_limits<double>::infinity();
  if (deepest_seen) complete = std::min(complete, deepest_min);
  store.complete_radius = complete;
  return store;
}

std::size_t ball_count(const OrbitStore& store, double R) {
  if (store.empty()) throw PreconditionFailed("ball_count on an empty store");
  return static_cast<std::size_t>(
      std::count_if(store.displacement.begin(), store.displacement.end(),
                    [R](double d) { return d <= R; }));
}

std::vector<std::uint32_t> greedy_separated_net(const OrbitStore& store, double r) {
  if (!(r > 0.0)) throw PreconditionFailed("greedy_separated_net needs r > 0");
  ProximityIndex idx(r);
  std::vector<std::uint32_t> net;
  for (std::uint32_t i = 0; i < store.size(); ++i) {
    if (idx.any_within(store.points[i], r)) continue;
    idx.insert(i, store.points[i]);
    net.push_back(i);
  }
  return net;
}

SeparationReport separation_cover_check(const std::vector<Point>& S, const std::vector<Point>& Y,
                                        double eps) {
  SeparationReport rep;
  const double qeps = distance_to_ratio(eps);
  unsigned workers = std::max(1u, std::min<unsigned>(worker_count(), 64));

  struct Partial {
    double min_q = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> pair{0, 0};
    double worst_q = -1.0;
    std::size_t worst_y = 0;
  };
  std::vector<Partial> parts(workers);
  auto run = [&](unsigned w) {
    Partial& out = parts[w];
    for (std::size_t i = w; i < S.size(); i += workers) {
      for (std::size_t j = i + 1; j < S.size(); ++j) {
        double q = metric_ratio(S[i], S[j]);
        if (q < out.min_q) {
          out.min_q = q;
          out.pair = {i, j};
        }
      }
    }
    for (std::size_t k = w; k < Y.size(); k += workers) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& s : S) best = std::min(best, metric_ratio(Y[k], s));
      if (best > out.worst_q) {
        out.worst_q = best;
        out.worst_y = k;
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(run, w);
    for (auto& t : threads) t.join();
  }
  Partial total;
  for (const auto& p : parts) {
    if (p.min_q < total.min_q) {
      total.min_q = p.min_q;
      total.pair = p.pair;
    }
    if (p.worst_q > total.worst_q) {
      total.worst_q = p.worst_q;
      total.worst_y = p.worst_y;
    }
  }
  if (S.size() >= 2) {
    rep.worst_pair = total.pair;
    rep.min_separation = ratio_to_distance(total.min_q);
    rep.is_separated = total.min_q > qeps && rep.min_separation > eps;
  } else {
    rep.min_separation = std::numeric_limits<double>::infinity();
  }
  if (!Y.empty()) {
    rep.worst_gap = S.empty() ? std::numeric_limits<double>::infinity()
                              : ratio_to_distance(total.worst_q);
    rep.worst_uncovered = total.worst_y;
    rep.is_cover = !S.empty() && rep.worst_gap <= eps;
  }
  return rep;
}

double quasi_geodesic_defect(const std::vector<Point>& path) {
  const std::size_t n = path.size();
  if (n < 3) return 0.0;
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = distance(path[i], path[j]);
  double worst = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b)
      for (std::size_t c = b; c < n; ++c) {
        double ab = d[a * n + b], bc = d[b * n + c], ac = d[a * n + c];
        if (std::max(ab, bc) > ac) continue;
        worst = std::max(worst, ab + bc - ac);
      }
  return worst;
}

CollisionReport collision_groups(const OrbitStore& store, std::optional<DedupSpec> compare) {
  CollisionReport rep;
  if (store.dedup.mode != DedupMode::None) {
    for (const auto& [rec, words] : store.aliases) {
      std::vector<Word> g{store.word(rec)};
      g.insert(g.end(), words.begin(), words.end());
      rep.groups.push_back(std::move(g));
    }
    for (const auto& [rec, words] : store.near_aliases) rep.warnings.push_back(words);
    return rep;
  }
  DedupSpec cmp = compare.value_or(DedupSpec{DedupMode::Float, 1e-9});
  if (cmp.mode == DedupMode::Exact) {
    if (!store.exact) throw PreconditionFailed("exact comparison needs an exact affine system");
    std::map<std::string, std::vector<std::uint32_t>> groups;
    const auto& beta = store.exact->beta;
    for (std::uint32_t i = 0; i < store.size(); ++i) {
      Word w = store.word(i);
      BetaRingElement t = ring_constant(beta, 0);
      for (auto l : w.letters) t = ring_add(ring_mul_beta(beta, t), store.exact->digits.digits.at(l));
      groups[std::to_string(w.length()) + "|" + ring_key(t)].push_back(i);
    }
    for (const auto& [key, ids] : groups) {
      if (ids.size() < 2) continue;
      std::vector<Word> g;
      for (auto i : ids) g.push_back(store.word(i));
      rep.groups.push_back(std::move(g));
    }
  } else {
    std::vector<Visited> visited;
    FloatDedup dd(cmp.tol);
    std::vector<std::vector<std::uint32_t>> members;
    std::map<std::size_t, std::vector<std::uint32_t>> near;
    for (std::uint32_t i = 0; i < store.size(); ++i) {
      std::optional<std::size_t> nr;
      auto hit = dd.find(store.matrices[i], visited, &nr);
      if (hit) {
        members[*hit].push_back(i);
        continue;
      }
      if (nr) near[*nr].push_back(i);
      visited.push_back({store.matrices[i], i});
      members.push_back({i});
      dd.add(store.matrices[i], visited.size() - 1);
    }
    for (const auto& ids : members) {
      if (ids.size() < 2) continue;
      std::vector<Word> g;
      for (auto i : ids) g.push_back(store.word(i));
      rep.groups.push_back(std::move(g));
    }
    for (const auto& [rep_id, ids] : near) {
      std::vector<Word> g{store.word(members[rep_id].front())};
      for (auto i : ids) g.push_back(store.word(i));
      rep.warnings.push_back(std::move(g));
    }
  }
  std::sort(rep.groups.begin(), rep.groups.end());
  return rep;
}

// ------------------------------------------------------------ serialization

void write_gorb(const OrbitStore& store, std::ostream& os) {
  if (store.generator_count > 256) throw PreconditionFailed("GORB1 stores at most 256 generators");
  os.write("GORB1", 5);
  put<std::uint8_t>(os, store.kind == ModelKind::H2 ? 2 : 3);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(store.generator_count));
  put<std::uint64_t>(os, store.size());
  put<double>(os, store.base.z.real());
  put<double>(os, store.base.z.imag());
  put<double>(os, store.base.h);
  std::vector<Word> words;
  words.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) words.push_back(store.word(i));
  for (const auto& w : words) put<std::uint16_t>(os, static_cast<std::uint16_t>(w.length()));
  for (const auto& w : words)
    for (auto l : w.letters) put<std::uint8_t>(os, static_cast<std::uint8_t>(l));
  for (const auto& p : store.points) put<double>(os, p.z.real());
  for (const auto& p : store.points) put<double>(os, p.z.imag());
  for (const auto& p : store.points) put<double>(os, p.h);
  for (double d : store.displacement) put<double>(os, d);
}

void write_gorb(const OrbitStore& store, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path);
  write_gorb(store, os);
}

OrbitTable read_gorb(std::istream& is) {
  char magic[5];
  is.read(magic, 5);
  if (!is || std::memcmp(magic, "GORB1", 5) != 0) throw ParseError("not a GORB1 stream");
  OrbitTable t;
  t.kind = get<std::uint8_t>(is) == 2 ? ModelKind::H2 : ModelKind::H3;
  get<std::uint32_t>(is);
  auto n = get<std::uint64_t>(is);
  double bx = get<double>(is), by = get<double>(is), bh = get<double>(is);
  t.base = {cplx(bx, by), bh};
  std::vector<std::uint16_t> lens(n);
  for (auto& l : lens) l = get<std::uint16_t>(is);
  t.words.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < lens[i]; ++k) t.words[i].letters.push_back(get<std::uint8_t>(is));
  std::vector<double> x(n), y(n), h(n);
  for (auto& v : x) v = get<double>(is);
  for (auto& v : y) v = get<double>(is);
  for (auto& v : h) v = get<double>(is);
  t.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) t.points[i] = {cplx(x[i], y[i]), h[i]};
  t.displacement.resize(n);
  for (auto& v : t.displacement) v = get<double>(is);
  return t;
}

OrbitTable read_gorb(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return read_gorb(is);
}

void write_orbit_csv(const OrbitStore& store, std::ostream& os) {
  os.precision(17);
  os << "index,word,x,y,h,displacement\n";
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& p = store.points[i];
    os << i << ',' << format_word(store.word(i)) << ',' << p.z.real() << ',' << p.z.imag() << ','
       << p.h << ',' << store.displacement[i] << '\n';
  }
}

}  // namespace gromolab
