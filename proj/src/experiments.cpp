#include "gromolab/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "gromolab/growth.hpp"

namespace gromolab {

namespace {

ContractingNet net_from(const OrbitStore& store, const std::vector<std::uint32_t>& pool,
                        double radius, double delta, const Point& base) {
  ContractingNet net;
  net.source_size = pool.size();
  auto sub = store.subset(pool);
  for (auto i : greedy_separated_net(sub, radius)) {
    net.elements.push_back(sub.isometry(i));
    net.words.push_back(sub.word(i));
  }
  if (net.elements.empty()) return net;
  net.cert = contraction_certificate(net.elements, delta, base);
  if (net.cert) net.cert->words = net.words;
  return net;
}

}  // namespace

ContractingNet contracting_net(const ExperimentConfig& cfg) {
  auto gens = build_generators(cfg);
  OrbitLimit lim;
  lim.max_word_length = cfg.depth.value_or(20);
  lim.record_cap = cfg.record_cap;
  auto store = enumerate_orbit(gens, cfg.base, lim, {DedupMode::None, 1e-9});
  const double dlo = cfg.param("net_min_displacement");
  std::vector<std::uint32_t> pool;
  for (std::uint32_t i = 0; i < store.size(); ++i)
    if (store.displacement[i] >= dlo) pool.push_back(i);
  return net_from(store, pool, cfg.param("net_radius"), resolve_delta(cfg), cfg.base);
}

ContractingNet contracting_part_net(const ExperimentConfig& cfg) {
  auto gens = build_generators(cfg);
  auto store = enumerate_orbit(gens, cfg.base, orbit_limit(cfg), cfg.dedup);
  const double angle = cfg.param("attract_angle");
  Cap attract{{1, 0, 0}, angle}, repel{{-1, 0, 0}, angle};
  auto pool = contracting_part(store, cfg.param("min_displacement"), attract, repel);
  return net_from(store, pool, cfg.param("net_radius"), resolve_delta(cfg), cfg.base);
}

ExtractionRun run_extractions(const ExperimentConfig& cfg, const std::vector<int>& ns) {
  ExtractionRun run;
  run.net = contracting_net(cfg);
  if (!run.net.cert) return run;
  int n_max = *std::max_element(ns.begin(), ns.end());
  double reach = std::max(cfg.param("semigroup_displacement", 0.0), n_max + 1.0);
  run.semigroup = contracting_semigroup_store(*run.net.cert, reach);
  for (int n : ns) {
    try {
      run.extractions.push_back(extract_schottky_from_annulus(run.semigroup, *run.net.cert, n));
      run.errors.emplace_back();
    } catch (const Error& e) {
      Extraction failed;
      failed.n = n;
      run.extractions.push_back(failed);
      run.errors.emplace_back(e.what());
    }
  }
  return run;
}

GroupRun run_schottky_group(const ExperimentConfig& cfg) {
  GroupRun run;
  run.net = contracting_part_net(cfg);
  if (!run.net.cert) throw PreconditionFailed("no contraction certificate for the group net");
  const auto& cert = *run.net.cert;
  const int n = static_cast<int>(cfg.param("n"));
  auto store = contracting_semigroup_store(cert, n + 1.0);
  ExtractionOptions opts;
  opts.separate_inverses = true;
  run.extraction = extract_schottky_from_annulus(store, cert, n, opts);
  // The shortest element of A.
  std::size_t best = 0;
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cert.elements.size(); ++i) {
    double d = distance(cfg.base, cert.elements[i].apply(cfg.base));
    if (d < dmin) dmin = d, best = i;
  }
  run.gamma0 = cert.elements[best];
  run.gamma0_displacement = dmin;
  run.group = schottky_group_from_semigroup(run.extraction.generators, run.gamma0, cert.plus,
                                            cert.minus, cert.delta, cfg.base);
  run.free_bound = std::log(static_cast<double>(run.extraction.generators.size())) /
                   (2.0 * (n + 1) + dmin);
  return run;
}

double KenyonSchottky::margin() const {
  if (!cert) return 0.0;
  return std::min(cert->min_gap, cert->min_inset);
}

KenyonSchottky kenyon_schottky(double t, double hull_margin, double delta,
                               const std::optional<std::vector<Word>>& words) {
  KenyonSchottky ks;
  ks.t = t;
  const std::vector<double> digits{0.0, t, 1.0};
  std::vector<Isometry> letters;
  for (double d : digits) letters.push_back(affine_to_isometry(3.0, d));
  auto [lo, hi] = limit_set_hull(letters);
  const double eta = hull_margin * (hi - lo);
  lo -= eta, hi += eta;
  ks.plus = HalfSpace::disk(cplx(0.5 * (lo + hi), 0.0), 0.5 * (hi - lo));

  auto word_map = [&](const Word& w) {
    // x -> a_{w0} + (a_{w1} + x/3)/3
    double shift = 0.0, scale = 1.0;
    for (auto l : w.letters) shift += scale * digits[l], scale /= 3.0;
    return std::pair<double, double>{scale, shift};
  };
  if (words) {
    ks.words = *words;
  } else {
    std::vector<std::pair<double, double>> taken;
    for (std::uint16_t a = 0; a < 3; ++a)
      for (std::uint16_t b = 0; b < 3; ++b) {
        Word w{{a, b}};
        auto [scale, shift] = word_map(w);
        double l = lo * scale + shift, r = hi * scale + shift;
        bool clear = std::all_of(taken.begin(), taken.end(), [&](const auto& iv) {
          return r < iv.first || l > iv.second;
        });
        if (!clear) continue;
        taken.emplace_back(l, r);
        ks.words.push_back(w);
      }
  }
  for (const auto& w : ks.words) {
    auto [scale, shift] = word_map(w);
    ks.generators.push_back(affine_to_isometry(1.0 / scale, shift));
  }
  SchottkyCertificate cert;
  ks.check = check_schottky(ks.generators, ks.plus, delta, Point{}, {}, &cert);
  if (ks.check.ok) {
    cert.words = ks.words;
    ks.cert = cert;
  }
  return ks;
}

Persistence kenyon_persistence(double t, double h, double hull_margin, double delta) {
  Persistence p;
  p.center = kenyon_schottky(t, hull_margin, delta);
  const double m0 = p.center.margin();
  p.persists = p.center.cert.has_value();
  for (double tt : {t - h, t + h}) {
    auto ks = kenyon_schottky(tt, hull_margin, delta, p.center.words);
    PersistenceRow row;
    row.t = tt;
    row.ok = ks.cert.has_value();
    row.margin = ks.margin();
    row.shrink = m0 > 0.0 ? 1.0 - row.margin / m0 : 1.0;
    p.persists = p.persists && row.ok && row.shrink < 0.5;
    p.rows.push_back(row);
  }
  return p;
}

FrostmanRun run_frostman(const ExperimentConfig& cfg) {
  FrostmanRun run;
  auto gens = build_generators(cfg);
  const double delta = resolve_delta(cfg);
  auto plus = HalfSpace::disk(cplx(cfg.param("plus_center"), 0.0), cfg.param("plus_radius"));
  SchottkyCertificate cert;
  run.check = check_schottky(gens, plus, delta, Point{}, {}, &cert);
  if (run.check.ok) run.cert = cert;

  run.base = {cplx(cfg.param("patterson_base_x"), 0.0), cfg.param("patterson_base_h")};
  run.base_in_domain = plus.contains(run.base);
  for (const auto& g : gens)
    if (plus.image(g).contains(run.base)) run.base_in_domain = false;

  OrbitLimit lim;
  lim.max_word_length = static_cast<int>(cfg.param("patterson_depth"));
  run.store = enumerate_orbit(gens, run.base, lim, {DedupMode::None, 1e-9});
  run.critical = critical_exponent(growth_series(run.store)).value;
  run.measure = patterson_measure(run.store, cfg.param("s"), run.critical);
  double dmax = *std::max_element(run.store.displacement.begin(), run.store.displacement.end());
  run.mass_deep = run.measure.mass_beyond(dmax / 2.0);
  run.report = frostman_check(run.measure, cfg.param("frostman_delta"),
                              static_cast<std::size_t>(cfg.param("ball_samples", 200)), 0.3, 2.0,
                              9, cfg.seed);
  return run;
}

}  // namespace gromolab
