#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gromolab/algebraic.hpp"
#include "gromolab/models.hpp"

namespace gromolab {

struct Word {
  std::vector<std::uint16_t> letters;
  std::size_t length() const { return letters.size(); }
  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;
};

std::string format_word(const Word& w);
Word parse_word(const std::string& s);

enum class DedupMode { None, Float, Exact };
std::string to_string(DedupMode mode);

struct DedupSpec {
  DedupMode mode = DedupMode::None;
  double tol = 1e-9;
};

// At least one of the two bounds must be set. With both, a word is kept when it
// satisfies both. Words beyond max_displacement but within the slack are expanded
// without being stored.
struct OrbitLimit {
  std::optional<int> max_word_length;
  std::optional<double> max_displacement;
  double prune_slack = 0.0;
  // When set, d(o, wg o) >= d(o, w o) + d(o, g o) - growth_defect is assumed for every
  // word w and generator g, and generators that cannot stay within the limit are skipped.
  std::optional<double> growth_defect;
  std::size_t record_cap = 20'000'000;
  int word_cap = 200;
};

struct OrbitRecord {
  Word word;
  Point point;
  double displacement = 0.0;
  Isometry isometry;
};

// Prefix tree of enumerated words; shared by a store and all its subsets.
struct WordTrie {
  static constexpr std::uint32_t kRoot = 0xffffffffu;
  std::vector<std::uint32_t> parent;
  std::vector<std::uint16_t> letter;
  std::uint32_t add(std::uint32_t parent_node, std::uint16_t l);
  Word word(std::uint32_t node) const;
};

// Grid hash over (log-height level, horizontal cells). Queries filter by a
// superset box and confirm with the exact metric.
class ProximityIndex {
 public:
  // Tuned for queries of radius near `radius`; other radii remain correct.
  explicit ProximityIndex(double radius = 0.5);

  void insert(std::uint32_t id, const Point& p);
  std::size_t size() const { return count_; }

  // Calls f(id, distance) for every inserted point within r of p; stops when f returns false.
  void visit_within(const Point& p, double r,
                    const std::function<bool(std::uint32_t, double)>& f) const;
  std::vector<std::uint32_t> within(const Point& p, double r) const;
  bool any_within(const Point& p, double r) const;

 private:
  struct Key {
    std::int32_t level;
    std::int64_t ix, iy;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  Key key_of(const Point& p) const;

  double level_step_;
  double width_;
  std::size_t count_ = 0;
  bool planar_ = true;
  std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> cells_;
  std::vector<Point> points_;
  std::vector<std::uint32_t> ids_;
};

class OrbitStore {
 public:
  ModelKind kind = ModelKind::H2;
  Point base{};
  DedupSpec dedup{};
  std::size_t generator_count = 0;
  std::string label;
  // Every orbit element with displacement <= complete_radius is present.
  double complete_radius = 0.0;
  int max_length = 0;
  bool affine = false;

  std::shared_ptr<WordTrie> trie = std::make_shared<WordTrie>();
  std::vector<std::uint32_t> node;
  std::vector<std::uint16_t> length;
  std::vector<Point> points;
  std::vector<double> displacement;
  std::vector<std::array<cplx, 4>> matrices;
  // Words that collapsed onto a record during dedup.
  std::map<std::uint32_t, std::vector<Word>> aliases;
  std::map<std::uint32_t, std::vector<Word>> near_aliases;  // float mode, within 10x tol
  std::shared_ptr<const ExactAffineSystem> exact;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  Word word(std::size_t i) const { return trie->word(node[i]); }
  Isometry isometry(std::size_t i) const;
  OrbitRecord record(std::size_t i) const;

  void push(std::uint32_t trie_node, std::uint16_t len, const Point& p, double disp,
            const std::array<cplx, 4>& m);
  // Records with displacement in [n, n+1).
  std::vector<std::uint32_t> annulus(int n) const;
  std::map<int, std::vector<std::uint32_t>> annuli() const;
  std::vector<std::uint32_t> within(const Point& p, double r) const;

  OrbitStore subset(const std::vector<std::uint32_t>& indices) const;
  const ProximityIndex& index() const;

 private:
  mutable std::shared_ptr<ProximityIndex> index_;
};

OrbitStore enumerate_orbit(const std::vector<Isometry>& gens, const Point& base,
                           const OrbitLimit& limit, const DedupSpec& dedup = {},
                           std::shared_ptr<const ExactAffineSystem> exact = nullptr);

std::size_t ball_count(const OrbitStore& store, double R);

std::vector<std::uint32_t> greedy_separated_net(const OrbitStore& store, double r);

struct SeparationReport {
  bool is_separated = true;
  bool is_cover = true;
  std::optional<std::pair<std::size_t, std::size_t>> worst_pair;  // closest pair in S
  double min_separation = 0.0;                                    // its distance
  std::optional<std::size_t> worst_uncovered;                     // index into Y
  double worst_gap = 0.0;  // max over Y of the distance to S
};

// Exhaustive pairwise check.
SeparationReport separation_cover_check(const std::vector<Point>& S, const std::vector<Point>& Y,
                                        double eps);

double quasi_geodesic_defect(const std::vector<Point>& path);

struct CollisionReport {
  std::vector<std::vector<Word>> groups;
  std::vector<std::vector<Word>> warnings;  // float near-collisions
};

// Groups words with equal isometry. Deduplicated stores report the recorded aliases;
// stores without dedup are grouped with `compare` (float 1e-9 by default).
CollisionReport collision_groups(const OrbitStore& store,
                                 std::optional<DedupSpec> compare = std::nullopt);

void write_gorb(const OrbitStore& store, std::ostream& os);
void write_gorb(const OrbitStore& store, const std::string& path);

struct OrbitTable {
  ModelKind kind = ModelKind::H2;
  Point base{};
  std::vector<Word> words;
  std::vector<Point> points;
  std::vector<double> displacement;
};

OrbitTable read_gorb(std::istream& is);
OrbitTable read_gorb(const std::string& path);
void write_orbit_csv(const OrbitStore& store, std::ostream& os);

// Worker count from GROMOLAB_THREADS (default 1).
unsigned worker_count();

}  // namespace gromolab
