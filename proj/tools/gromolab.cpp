#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gromolab/algebraic.hpp"
#include "gromolab/config.hpp"
#include "gromolab/experiments.hpp"
#include "gromolab/growth.hpp"
#include "gromolab/limit_sets.hpp"
#include "gromolab/schottky.hpp"
#include "json.hpp"

using namespace gromolab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kError = 1, kNoCertificate = 2, kUsage = 3, kBadConfig = 4, kBudget = 5 };

struct Invocation {
  std::string config_path, preset_name, eps_grid, delta, out;
  std::optional<int> depth;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;  // key=value
};

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json point_json(const Point& p) { return json::array({p.z.real(), p.z.imag(), p.h}); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

ExperimentConfig resolve(const Invocation& inv) {
  ExperimentConfig cfg;
  if (!inv.config_path.empty()) cfg = load_config(inv.config_path);
  std::string preset_name = inv.preset_name;
  for (const auto& kv : inv.overrides)
    if (kv.rfind("preset=", 0) == 0) preset_name = kv.substr(7);
  if (!preset_name.empty()) cfg = preset(preset_name);
  for (const auto& kv : inv.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
    if (key == "preset") continue;
    if (key == "depth" || key == "n") {
      cfg.depth = std::stoi(val);
      if (key == "n") cfg.params["n"] = std::stoi(val);
    } else if (key == "beta") {
      cfg.beta = val;
      cfg.generators.clear();
    } else if (key == "digits") {
      cfg.digits = split_list(val);
      cfg.generators.clear();
    } else if (key == "model") {
      cfg.model = model_kind_from_string(val);
    } else if (key == "seed") {
      cfg.seed = std::stoull(val);
    } else if (key == "out") {
      cfg.out = val;
    } else if (key == "delta") {
      if (val == "auto" || val == "estimate") cfg.delta.reset(); else cfg.delta = std::stod(val);
    } else if (key == "eps-grid" || key == "eps_grid") {
      cfg.eps_grid = parse_number_list(val);
    } else if (key == "max_displacement") {
      cfg.max_displacement = std::stod(val);
    } else {
      cfg.params[key] = parse_digit(val).real();
    }
  }
  if (inv.depth) cfg.depth = *inv.depth;
  if (inv.seed) cfg.seed = *inv.seed;
  if (!inv.out.empty()) cfg.out = inv.out;
  if (!inv.eps_grid.empty()) cfg.eps_grid = parse_number_list(inv.eps_grid);
  if (!inv.delta.empty()) {
    if (inv.delta == "auto" || inv.delta == "estimate") cfg.delta.reset();
    else cfg.delta = std::stod(inv.delta);
  }
  return cfg;
}

json header(const std::string& command, const ExperimentConfig& cfg) {
  return {{"schema", "gromolab/1"}, {"command", command},   {"preset", cfg.preset},
          {"model", to_string(cfg.model)}, {"seed", cfg.seed}, {"delta_hyp", resolve_delta(cfg)}};
}

void write_summary(const ExperimentConfig& cfg, const std::string& command, const json& j) {
  fs::create_directories(cfg.out);
  std::ofstream os(fs::path(cfg.out) / (command + ".json"));
  os << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
}

std::ofstream open_out(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out);
  std::ofstream os(fs::path(cfg.out) / name);
  if (!os) throw Error("cannot write " + (fs::path(cfg.out) / name).string());
  return os;
}

OrbitStore build_store(const ExperimentConfig& cfg, json& j) {
  auto gens = build_generators(cfg);
  auto dedup = cfg.dedup;
  auto exact = exact_system(cfg);
  if (dedup.mode == DedupMode::Exact && !exact) dedup.mode = DedupMode::Float;
  j["dedup"] = to_string(dedup.mode);
  return enumerate_orbit(gens, cfg.base, orbit_limit(cfg), dedup,
                         dedup.mode == DedupMode::Exact ? exact : nullptr);
}

int cmd_estimate(const ExperimentConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  json j = header("estimate", cfg);
  auto store = build_store(cfg, j);
  auto series = growth_series(store);
  auto est = critical_exponent(series);
  auto grid = cfg.eps_grid.empty() ? default_eps_grid() : cfg.eps_grid;
  auto ent = entropy_estimate(store, grid);
  j["store_size"] = store.size();
  j["complete_radius"] = store.complete_radius;
  j["series_depth"] = series.depth();
  j["delta"] = est.value;
  j["delta_window"] = {est.n1, est.n2};
  j["delta_residual"] = est.residual;
  j["entropy"] = ent.best.value;
  j["entropy_eps"] = ent.best_eps;
  j["entropy_settled"] = ent.settled;
  if (series.depth() >= 8) {
    auto diag = limit_diagnostic(series);
    j["limit_oscillation"] = diag.oscillation;
    j["limit_decreasing"] = diag.decreasing;
  }
  {
    auto os = open_out(cfg, "series.csv");
    write_series_csv(series, est, os);
    auto es = open_out(cfg, "entropy.csv");
    es << "eps,net_size,regime,estimate,n1,n2\n";
    for (const auto& p : ent.curve)
      es << p.eps << ',' << p.net_size << ',' << to_string(p.regime) << ',' << p.estimate.value
         << ',' << p.estimate.n1 << ',' << p.estimate.n2 << '\n';
  }
  write_summary(cfg, "estimate", j);
  std::cerr << "estimate: " << elapsed_since(t0) << " s\n";  // kept out of the JSON for reproducibility
  return kOk;
}

json contraction_json(const ContractionCertificate& c) {
  return {{"elements", c.elements.size()}, {"M", c.M},           {"d_min", c.d_min},
          {"margin", c.margin},            {"enclosed", c.enclosed}, {"domain_gap", c.domain_gap},
          {"product_bound", domain_product_bound(c)},
          {"extraction_threshold", finite_or_null(extraction_threshold(c))}};
}

int cmd_certify(const ExperimentConfig& cfg) {
  json j = header("certify", cfg);
  const double delta = resolve_delta(cfg);
  auto gens = build_generators(cfg);
  bool found = false;

  // Each generator alone: as a one-element contracting set, and by the direct check.
  json singles = json::array();
  for (std::size_t i = 0; i < gens.size(); ++i) {
    auto check = contracting_isometry_check(gens[i], delta, cfg.base);
    std::optional<ContractionCertificate> single;
    try {
      single = contraction_certificate({gens[i]}, delta, cfg.base);
    } catch (const PreconditionFailed&) {
    }
    singles.push_back({{"generator", i},
                       {"singleton_certificate", single.has_value()},
                       {"contracting_check", check.certified},
                       {"product", check.product},
                       {"threshold", check.threshold}});
  }
  j["generators"] = singles;
  auto elem = find_contracting_element(gens, delta, static_cast<int>(cfg.param("search_depth", 4)),
                                       cfg.base);
  if (elem) {
    j["contracting_element"] = {{"word", format_word(elem->word)},
                                {"product", elem->check.product},
                                {"threshold", elem->check.threshold},
                                {"from_product", elem->from_product}};
    found = true;
  } else {
    j["contracting_element"] = nullptr;
  }

  if (cfg.params.count("hull_margin")) {
    auto ks = kenyon_schottky(cfg.param("t"), cfg.param("hull_margin"), delta);
    std::vector<std::string> words;
    for (const auto& w : ks.words) words.push_back(format_word(w));
    j["schottky"] = {{"t", ks.t}, {"words", words}, {"ok", ks.check.ok},
                     {"failure", ks.check.failure}, {"margin", ks.margin()}};
    if (ks.cert) {
      auto os = open_out(cfg, "schottky.cert");
      write_certificate(*ks.cert, os);
    }
    found = ks.check.ok;
  } else if (cfg.params.count("plus_center")) {
    auto plus = HalfSpace::disk(cplx(cfg.param("plus_center"), 0.0), cfg.param("plus_radius"));
    SchottkyCertificate cert;
    auto check = check_schottky(gens, plus, delta, cfg.base, {}, &cert);
    j["schottky"] = {{"ok", check.ok}, {"failure", check.failure}};
    if (check.ok) {
      j["schottky"]["max_disjunction"] = cert.max_disjunction;
      j["schottky"]["min_gap"] = cert.min_gap;
      j["schottky"]["min_inset"] = cert.min_inset;
      j["schottky"]["lower_bound"] = schottky_lower_bound(gens, cfg.base);
      auto os = open_out(cfg, "schottky.cert");
      write_certificate(cert, os);
    }
    found = check.ok;
  } else if (cfg.params.count("net_min_displacement") || cfg.params.count("attract_angle")) {
    auto net = cfg.params.count("attract_angle") ? contracting_part_net(cfg) : contracting_net(cfg);
    j["net_size"] = net.elements.size();
    j["contraction"] = net.cert ? contraction_json(*net.cert) : json(nullptr);
    if (net.cert) {
      auto d = contraction_diagnostics(*net.cert, 1000, 200, 20, cfg.seed);
      j["diagnostics"] = {{"worst_triangle_margin", d.worst_triangle_margin},
                          {"worst_image_margin", d.worst_image_margin},
                          {"worst_qg_defect", d.worst_qg_defect},
                          {"ok", d.ok}};
    }
    found = net.cert.has_value();
  }
  j["found"] = found;
  write_summary(cfg, "certify", j);
  return found ? kOk : kNoCertificate;
}

json extraction_json(const Extraction& ex, const std::string& error) {
  json e = {{"n", ex.n}, {"ok", ex.check.ok && ex.certificate.has_value()}};
  if (!error.empty()) {
    e["error"] = error;
    return e;
  }
  e.update({{"C", ex.C}, {"r", ex.r}, {"annulus", ex.annulus_size}, {"size", ex.generators.size()},
            {"lower_bound", ex.lower_bound}, {"failure", ex.check.failure},
            {"reverified", ex.reverified.ok}});
  return e;
}

int cmd_extract(const ExperimentConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  json j = header("extract-schottky", cfg);
  bool all_ok = true;
  auto save = [&](const Extraction& ex) {
    if (!ex.certificate) return false;
    std::string name = "schottky_n" + std::to_string(ex.n) + ".cert";
    {
      auto os = open_out(cfg, name);
      write_certificate(*ex.certificate, os);
    }
    std::ifstream is(fs::path(cfg.out) / name);
    return verify_certificate(read_certificate(is)).ok;
  };
  if (cfg.params.count("attract_angle")) {
    auto run = run_schottky_group(cfg);
    j["contraction"] = contraction_json(*run.net.cert);
    j["extraction"] = extraction_json(run.extraction, "");
    j["extraction"]["verified_from_disk"] = save(run.extraction);
    j["group"] = {{"ok", run.group.ok},
                  {"failure", run.group.failure},
                  {"size", run.group.generators.size()},
                  {"gamma0_displacement", run.gamma0_displacement},
                  {"free_bound", run.free_bound},
                  {"lower_bound", run.group.lower_bound}};
    all_ok = run.extraction.certificate.has_value() && run.group.ok;
  } else {
    std::vector<int> ns;
    if (cfg.params.count("n")) {
      ns.push_back(static_cast<int>(cfg.param("n")));
    } else {
      for (int n = static_cast<int>(cfg.param("n_min")); n <= cfg.param("n_max");
           n += static_cast<int>(cfg.param("n_step", 1)))
        ns.push_back(n);
    }
    auto run = run_extractions(cfg, ns);
    j["net_size"] = run.net.elements.size();
    if (!run.net.cert) {
      j["contraction"] = nullptr;
      write_summary(cfg, "extract-schottky", j);
      return kNoCertificate;
    }
    j["contraction"] = contraction_json(*run.net.cert);
    j["semigroup_size"] = run.semigroup.size();
    json rows = json::array();
    auto csv = open_out(cfg, "extraction.csv");
    csv << "n,size,lower_bound,ok\n";
    for (std::size_t i = 0; i < run.extractions.size(); ++i) {
      const auto& ex = run.extractions[i];
      auto row = extraction_json(ex, run.errors[i]);
      if (run.errors[i].empty()) row["verified_from_disk"] = save(ex);
      all_ok = all_ok && ex.certificate.has_value();
      csv << ex.n << ',' << ex.generators.size() << ',' << ex.lower_bound << ','
          << ex.certificate.has_value() << '\n';
      rows.push_back(row);
    }
    j["extractions"] = rows;
  }
  write_summary(cfg, "extract-schottky", j);
  std::cerr << "extract-schottky: " << elapsed_since(t0) << " s\n";
  return all_ok ? kOk : kNoCertificate;
}

BoundarySample sample_for(const ExperimentConfig& cfg, const std::vector<Isometry>& gens) {
  const int depth = cfg.depth.value_or(12);
  try {
    return sample_limit_set(gens, depth, SampleMode::IFSFixedPoint, cfg.base);
  } catch (const PreconditionFailed&) {
    return sample_limit_set(gens, depth, SampleMode::OrbitProjection, cfg.base);
  }
}

int cmd_dim(const ExperimentConfig& cfg) {
  json j = header("dim", cfg);
  auto gens = build_generators(cfg);
  auto sample = sample_for(cfg, gens);
  auto curve = box_counting_dim(
      sample, cfg.eps_grid.empty() ? std::nullopt : std::optional<std::vector<double>>(cfg.eps_grid));
  j["mode"] = to_string(sample.mode);
  j["points"] = sample.size();
  j["fitted_dim"] = curve.fitted_dim;
  j["residual"] = curve.residual;
  j["resolution"] = curve.resolution;
  j["fit_window"] = {curve.fit_window.first, curve.fit_window.second};
  if (sample.mode == SampleMode::IFSFixedPoint) {
    j["self_similarity_defect"] = self_similarity_defect(sample, gens);
    try {
      auto [lo, hi] = limit_set_hull(gens);
      j["hull"] = {lo, hi};
    } catch (const PreconditionFailed&) {
    }
  }
  auto os = open_out(cfg, "boxcount.csv");
  os << "eps,count\n";
  for (std::size_t i = 0; i < curve.eps.size(); ++i) os << curve.eps[i] << ',' << curve.counts[i] << '\n';
  write_summary(cfg, "dim", j);
  return kOk;
}

int cmd_render(const ExperimentConfig& cfg) {
  json j = header("render", cfg);
  auto gens = build_generators(cfg);
  auto sample = sample_for(cfg, gens);
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& p : sample.points) {
    if (p.at_infinity) continue;
    x0 = std::min(x0, p.value.real()), x1 = std::max(x1, p.value.real());
    y0 = std::min(y0, p.value.imag()), y1 = std::max(y1, p.value.imag());
  }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  double pad = 0.05 * std::max({x1 - x0, y1 - y0, 1e-9});
  Viewport vp{cfg.param("x0", x0 - pad), cfg.param("x1", x1 + pad), cfg.param("y0", y0 - pad),
              cfg.param("y1", y1 + pad)};
  int w = static_cast<int>(cfg.param("width", 800)), h = static_cast<int>(cfg.param("height", 200));
  auto img = render(sample, w, h, vp);
  fs::create_directories(cfg.out);
  auto path = (fs::path(cfg.out) / "render.pgm").string();
  write_pgm(img, path, cfg.preset.empty() ? "config" : cfg.preset);
  j["image"] = path;
  j["plotted"] = img.plotted;
  j["viewport"] = {vp.x0, vp.x1, vp.y0, vp.y1};
  write_summary(cfg, "render", j);
  return kOk;
}

int cmd_beta(const ExperimentConfig& cfg) {
  json j = header("beta-analyze", cfg);
  if (cfg.beta.empty() || cfg.digits.empty()) throw ParseError("beta-analyze needs beta and digits");
  auto spec = parse_beta(cfg.beta);
  const int n = cfg.depth.value_or(12);
  std::vector<cplx> digit_values;
  for (const auto& d : cfg.digits) digit_values.push_back(parse_digit(d));
  j["beta"] = cfg.beta;
  j["beta_value"] = {spec.value().real(), spec.value().imag()};
  j["digits"] = cfg.digits;
  GrowthDelta gd;
  auto exact = exact_system(cfg);
  if (exact) {
    j["class"] = to_string(classify_beta(exact->beta));
    j["exact"] = true;
    int on_circle = 0;
    for (const auto& r : exact->beta.roots) on_circle += std::abs(std::abs(r) - 1.0) <= 1e-10;
    j["unit_circle_conjugates"] = on_circle;
    gd = growth_delta(exact->beta, exact->digits.digits, n);
  } else {
    j["class"] = nullptr;
    j["exact"] = false;
    gd = growth_delta_numeric(spec.value(), digit_values, n);
  }
  j["translation_bound"] = translation_bound(spec.value(), digit_values);
  // reported next to the conjugate count, without asserting they agree
  auto overlap = overlap_count(spec.value(), digit_values, cfg.param("overlap_radius", 1.0));
  j["overlap_max_multiplicity"] = overlap.max_multiplicity;
  j["overlap_fitted_exponent"] = overlap.fitted_exponent;
  json table = json::array();
  auto csv = open_out(cfg, "growth_delta.csv");
  csv << "n,count,per_n,ratio\n";
  for (const auto& r : gd.table) {
    table.push_back({{"n", r.n}, {"count", r.count}, {"per_n", r.per_n}, {"ratio", r.ratio}});
    csv << r.n << ',' << r.count << ',' << r.per_n << ',' << r.ratio << '\n';
  }
  j["table"] = table;
  j["growth_delta"] = gd.estimate;
  write_summary(cfg, "beta-analyze", j);
  return kOk;
}

int cmd_kenyon(const ExperimentConfig& cfg) {
  json j = header("kenyon-sweep", cfg);
  const double delta = resolve_delta(cfg);
  const int steps = static_cast<int>(cfg.param("t_steps", 9));
  const double t_min = cfg.param("t_min", 0.1), t_max = cfg.param("t_max", 0.9);
  const double h = cfg.param("h", 1e-3), margin = cfg.param("hull_margin", 0.05);
  const int n = cfg.depth.value_or(12);
  json rows = json::array();
  auto csv = open_out(cfg, "kenyon_sweep.csv");
  csv << "t,growth_delta,box_dim,schottky,persists,worst_shrink\n";
  bool all_found = true;
  for (int i = 0; i < steps; ++i) {
    double t = steps == 1 ? t_min : t_min + (t_max - t_min) * i / (steps - 1);
    auto gd = growth_delta_numeric(3.0, {0.0, t, 1.0}, n);
    std::vector<Isometry> gens;
    for (double d : {0.0, t, 1.0}) gens.push_back(affine_to_isometry(3.0, d));
    auto curve = box_counting_dim(sample_limit_set(gens, n, SampleMode::IFSFixedPoint));
    auto p = kenyon_persistence(t, h, margin, delta);
    double shrink = 0.0;
    for (const auto& r : p.rows) shrink = std::max(shrink, r.shrink);
    all_found = all_found && p.center.cert.has_value();
    rows.push_back({{"t", t},
                    {"growth_delta", gd.estimate},
                    {"box_dim", curve.fitted_dim},
                    {"schottky", p.center.cert.has_value()},
                    {"schottky_size", p.center.words.size()},
                    {"margin", p.center.margin()},
                    {"persists", p.persists},
                    {"worst_shrink", shrink}});
    csv << t << ',' << gd.estimate << ',' << curve.fitted_dim << ',' << p.center.cert.has_value()
        << ',' << p.persists << ',' << shrink << '\n';
  }
  j["rows"] = rows;
  write_summary(cfg, "kenyon-sweep", j);
  return all_found ? kOk : kNoCertificate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orbit growth, contraction and Schottky certificates for hyperbolic isometry semigroups"};
  app.require_subcommand(1);
  Invocation inv;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"estimate", "critical exponent and entropy estimates"},
      {"certify", "contraction and Schottky certificates"},
      {"extract-schottky", "annulus extraction and lower bounds"},
      {"dim", "box-counting dimension of the limit set"},
      {"render", "limit set image (PGM)"},
      {"beta-analyze", "classification, distinct counts and growth of a beta system"},
      {"kenyon-sweep", "t-grid sweep of the three-map base-3 family"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", inv.config_path, "JSON config file");
    sub->add_option("--preset", inv.preset_name, "named experiment");
    sub->add_option("--depth", inv.depth, "word length / sample depth");
    sub->add_option("--seed", inv.seed, "random seed");
    sub->add_option("--out", inv.out, "output directory");
    sub->add_option("--eps-grid", inv.eps_grid, "comma separated scales");
    sub->add_option("--delta", inv.delta, "hyperbolicity constant or auto");
    sub->add_option("overrides", inv.overrides, "key=value settings");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    auto cfg = resolve(inv);
    if (command == "estimate") return cmd_estimate(cfg);
    if (command == "certify") return cmd_certify(cfg);
    if (command == "extract-schottky") return cmd_extract(cfg);
    if (command == "dim") return cmd_dim(cfg);
    if (command == "render") return cmd_render(cfg);
    if (command == "beta-analyze") return cmd_beta(cfg);
    if (command == "kenyon-sweep") return cmd_kenyon(cfg);
    std::cerr << "unknown command " << command << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
}
