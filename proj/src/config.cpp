#include "gromolab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gromolab {

using nlohmann::json;

double ExperimentConfig::param(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

double ExperimentConfig::param(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw ParseError("config is missing parameter '" + key + "'");
  return it->second;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ParseError("empty item in list '" + text + "'");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ParseError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw ParseError("not a number: '" + s + "'");
    out.push_back(v);
  }
  return out;
}

cplx parse_digit(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos) return parse_beta(text).numeric;
  try {
    std::size_t u1 = 0, u2 = 0;
    std::string num = text.substr(0, slash), den = text.substr(slash + 1);
    double p = std::stod(num, &u1), q = std::stod(den, &u2);
    if (u1 != num.size() || u2 != den.size() || q == 0.0) throw ParseError("");
    return {p / q, 0.0};
  } catch (const std::exception&) {
    throw ParseError("malformed digit '" + text + "'");
  }
}

namespace {

json complex_json(cplx v) {
  if (v.imag() == 0.0) return v.real();
  return json::array({v.real(), v.imag()});
}

cplx complex_from(const json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ParseError(what + " must be a number or [re, im]");
}

std::string string_or_number(const json& j, const std::string& what) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
    return buf;
  }
  throw ParseError(what + " must be a string or a number");
}

DedupMode dedup_from(const std::string& s) {
  if (s == "none") return DedupMode::None;
  if (s == "float") return DedupMode::Float;
  if (s == "exact") return DedupMode::Exact;
  throw ParseError("unknown dedup mode '" + s + "'");
}

template <class F>
void with_key(const json& obj, const char* key, F&& f) {
  auto it = obj.find(key);
  if (it != obj.end() && !it->is_null()) f(*it);
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  static const std::vector<std::string> known = {
      "schema", "preset", "model", "base", "generators", "beta", "digits", "depth",
      "max_displacement", "word_cap", "record_cap", "dedup", "eps_grid", "delta", "seed",
      "out", "params"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ParseError("unknown config key '" + it.key() + "'");

  ExperimentConfig c;
  if (j.contains("preset") && j["preset"].is_string() && !j["preset"].get<std::string>().empty())
    c = preset(j["preset"].get<std::string>());
  try {
    with_key(j, "schema", [&](const json& v) {
      if (v.get<std::string>() != "gromolab/1")
        throw ParseError("unsupported schema '" + v.get<std::string>() + "'");
    });
    with_key(j, "model", [&](const json& v) { c.model = model_kind_from_string(v.get<std::string>()); });
    with_key(j, "base", [&](const json& v) {
      if (!v.is_array() || v.size() != 3) throw ParseError("base must be [re, im, h]");
      c.base = {{v[0].get<double>(), v[1].get<double>()}, v[2].get<double>()};
      validate(c.base);
    });
    with_key(j, "generators", [&](const json& v) {
      if (!v.is_array()) throw ParseError("generators must be an array");
      c.generators.clear();
      for (const auto& g : v) {
        GeneratorSpec spec;
        if (g.contains("matrix")) {
          const auto& m = g["matrix"];
          if (!m.is_array() || m.size() != 4) throw ParseError("matrix must list a, b, c, d");
          std::array<cplx, 4> e;
          for (int k = 0; k < 4; ++k) e[k] = complex_from(m[k], "matrix entry");
          spec.matrix = e;
        } else if (g.contains("beta") && g.contains("t")) {
          spec.beta = string_or_number(g["beta"], "beta");
          spec.t = string_or_number(g["t"], "t");
        } else {
          throw ParseError("generator needs 'matrix' or 'beta' and 't'");
        }
        c.generators.push_back(spec);
      }
    });
    with_key(j, "beta", [&](const json& v) { c.beta = string_or_number(v, "beta"); });
    with_key(j, "digits", [&](const json& v) {
      c.digits.clear();
      if (v.is_string()) {
        c.digits = split_list(v.get<std::string>());
        return;
      }
      for (const auto& d : v) c.digits.push_back(string_or_number(d, "digit"));
    });
    with_key(j, "depth", [&](const json& v) { c.depth = v.get<int>(); });
    with_key(j, "max_displacement", [&](const json& v) { c.max_displacement = v.get<double>(); });
    with_key(j, "word_cap", [&](const json& v) { c.word_cap = v.get<int>(); });
    with_key(j, "record_cap", [&](const json& v) { c.record_cap = v.get<std::size_t>(); });
    with_key(j, "dedup", [&](const json& v) {
      if (v.is_string()) {
        c.dedup.mode = dedup_from(v.get<std::string>());
        return;
      }
      with_key(v, "mode", [&](const json& m) { c.dedup.mode = dedup_from(m.get<std::string>()); });
      with_key(v, "tol", [&](const json& t) { c.dedup.tol = t.get<double>(); });
    });
    with_key(j, "eps_grid", [&](const json& v) { c.eps_grid = v.get<std::vector<double>>(); });
    with_key(j, "delta", [&](const json& v) {
      if (v.is_string() && (v.get<std::string>() == "estimate" || v.get<std::string>() == "auto"))
        c.delta.reset();
      else
        c.delta = v.get<double>();
    });
    with_key(j, "seed", [&](const json& v) { c.seed = v.get<std::uint64_t>(); });
    with_key(j, "out", [&](const json& v) { c.out = v.get<std::string>(); });
    with_key(j, "params", [&](const json& v) {
      for (auto it = v.begin(); it != v.end(); ++it) c.params[it.key()] = it.value().get<double>();
    });
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed config: ") + e.what());
  } catch (const InvalidPoint& e) {
    throw ParseError(std::string("malformed config: ") + e.what());
  }
  if (j.contains("preset")) c.preset = j["preset"].get<std::string>();
  if (c.depth && *c.depth < 0) throw ParseError("depth must be >= 0");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot read config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& c) {
  json j;
  j["schema"] = "gromolab/1";
  j["preset"] = c.preset;
  j["model"] = to_string(c.model);
  j["base"] = json::array({c.base.z.real(), c.base.z.imag(), c.base.h});
  json gens = json::array();
  for (const auto& g : c.generators) {
    if (g.matrix) {
      json m = json::array();
      for (auto e : *g.matrix) m.push_back(complex_json(e));
      gens.push_back({{"matrix", m}});
    } else {
      gens.push_back({{"beta", g.beta}, {"t", g.t}});
    }
  }
  j["generators"] = gens;
  j["beta"] = c.beta;
  j["digits"] = c.digits;
  j["depth"] = c.depth ? json(*c.depth) : json(nullptr);
  j["max_displacement"] = c.max_displacement ? json(*c.max_displacement) : json(nullptr);
  j["word_cap"] = c.word_cap;
  j["record_cap"] = c.record_cap;
  j["dedup"] = {{"mode", to_string(c.dedup.mode)}, {"tol", c.dedup.tol}};
  j["eps_grid"] = c.eps_grid;
  j["delta"] = c.delta ? json(*c.delta) : json("estimate");
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["params"] = c.params;
  return j.dump(2);
}

namespace {

GeneratorSpec matrix_spec(cplx a, cplx b, cplx c, cplx d) {
  GeneratorSpec g;
  g.matrix = std::array<cplx, 4>{a, b, c, d};
  return g;
}

GeneratorSpec affine_spec(const std::string& beta, const std::string& t) {
  GeneratorSpec g;
  g.beta = beta;
  g.t = t;
  return g;
}

ExperimentConfig digit_preset(const std::string& name, const std::string& beta,
                              std::vector<std::string> digits, int depth) {
  ExperimentConfig c;
  c.preset = name;
  c.beta = beta;
  c.digits = std::move(digits);
  c.depth = depth;
  c.dedup = {DedupMode::Exact, 1e-9};
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"exee", "exee-contracting", "contre-ex", "parabolic", "kenyon", "kenyon-sweep",
          "salem", "beta4", "beta2", "golden", "schottky-group"};
}

ExperimentConfig preset(const std::string& name) {
  // The second generator of the exee pair has matrix (sqrt(2/pi), 1; 0, sqrt(pi/2)),
  // i.e. x -> x/beta + t with t sqrt(beta) = 1.
  const std::string half_pi = "1.5707963267948966";
  const std::string exee_t = "0.79788456080286541";
  if (name == "exee" || name == "exee-contracting") {
    ExperimentConfig c;
    c.preset = name;
    c.generators = {affine_spec(half_pi, "0"), affine_spec(half_pi, exee_t)};
    c.depth = 20;
    if (name == "exee-contracting") {
      c.base = {{1.1, 0.0}, 1.0};
      c.params = {{"net_min_displacement", 5.5}, {"net_radius", 2.5},
                  {"semigroup_displacement", 15.0}, {"n_min", 6}, {"n_max", 14}, {"n_step", 2}};
    }
    return c;
  }
  if (name == "contre-ex" || name == "parabolic") {
    ExperimentConfig c;
    c.preset = name;
    if (name == "contre-ex")
      c.generators = {matrix_spec(1, 1, 0, 1), matrix_spec(2, 0, 0, 0.5)};
    else
      c.generators = {matrix_spec(1, 1, 0, 1), matrix_spec(1, -1, 0, 1)};
    c.max_displacement = 12.0;
    c.word_cap = 1000;
    c.dedup = {DedupMode::Float, 1e-9};
    return c;
  }
  if (name == "kenyon" || name == "kenyon-sweep") {
    auto c = digit_preset(name, "3", {"0", "2/3", "1"}, 12);
    c.params = {{"t", 2.0 / 3.0}, {"t_min", 0.1}, {"t_max", 0.9}, {"t_steps", 9},
                {"h", 1e-3},      {"hull_margin", 0.05}};
    return c;
  }
  if (name == "salem") return digit_preset(name, "poly:[1,-1,-1,-1,1];root:0", {"0", "1"}, 14);
  if (name == "beta4") {
    auto c = digit_preset(name, "4", {"0", "1"}, 12);
    c.params = {{"plus_center", 1.0},     {"plus_radius", 1.1}, {"patterson_base_x", 2.0 / 3.0},
                {"patterson_base_h", 0.5}, {"patterson_depth", 16}, {"s", 0.55},
                {"frostman_delta", 0.5},   {"ball_samples", 200}};
    return c;
  }
  if (name == "beta2") return digit_preset(name, "2", {"0", "1"}, 14);
  if (name == "golden") return digit_preset(name, "poly:[-1,-1,1];root:0", {"0", "1"}, 14);
  if (name == "schottky-group") {
    ExperimentConfig c;
    c.preset = name;
    c.generators = {matrix_spec(1, 2, 0, 1), matrix_spec(1, 0, 2, 1), matrix_spec(1, -2, 0, 1),
                    matrix_spec(1, 0, -2, 1)};
    c.max_displacement = 11.5;
    c.word_cap = 400;
    c.dedup = {DedupMode::Float, 1e-9};
    c.params = {{"attract_angle", 0.6}, {"min_displacement", 4.6}, {"net_radius", 1.0}, {"n", 10}};
    return c;
  }
  throw ParseError("unknown preset '" + name + "'");
}

std::vector<Isometry> build_generators(const ExperimentConfig& cfg) {
  std::vector<Isometry> out;
  for (const auto& g : cfg.generators) {
    if (g.matrix) {
      const auto& m = *g.matrix;
      out.push_back(Isometry::from_matrix(cfg.model, m[0], m[1], m[2], m[3]));
    } else {
      out.push_back(affine_to_isometry(parse_beta(g.beta).value(), parse_digit(g.t), cfg.model));
    }
  }
  if (out.empty() && !cfg.beta.empty()) {
    cplx beta = parse_beta(cfg.beta).value();
    for (const auto& d : cfg.digits) out.push_back(affine_to_isometry(beta, parse_digit(d), cfg.model));
  }
  if (out.empty()) throw ParseError("config defines no generators");
  return out;
}

std::shared_ptr<const ExactAffineSystem> exact_system(const ExperimentConfig& cfg) {
  std::string beta = cfg.beta;
  std::vector<std::string> digits = cfg.digits;
  if (beta.empty()) {
    for (const auto& g : cfg.generators) {
      if (g.matrix) return nullptr;
      if (!beta.empty() && g.beta != beta) return nullptr;
      beta = g.beta;
      digits.push_back(g.t);
    }
  }
  if (beta.empty() || digits.empty()) return nullptr;
  try {
    auto spec = parse_beta(beta);
    AlgebraicInteger alg;
    if (spec.exact) {
      alg = spec.algebraic;
    } else {
      double v = spec.numeric.real();
      if (spec.numeric.imag() != 0.0 || v != std::round(v) || std::abs(v) < 2.0) return nullptr;
      alg = AlgebraicInteger::integer(static_cast<std::int64_t>(v));
    }
    return std::make_shared<const ExactAffineSystem>(ExactAffineSystem{alg, make_digits(alg, digits)});
  } catch (const Error&) {
    return nullptr;
  }
}

OrbitLimit orbit_limit(const ExperimentConfig& cfg) {
  OrbitLimit lim;
  lim.max_word_length = cfg.depth;
  lim.max_displacement = cfg.max_displacement;
  lim.word_cap = cfg.word_cap;
  lim.record_cap = cfg.record_cap;
  if (!lim.max_word_length && !lim.max_displacement)
    throw ParseError("config needs depth or max_displacement");
  return lim;
}

double resolve_delta(const ExperimentConfig& cfg) {
  return cfg.delta ? *cfg.delta : default_delta(cfg.model);
}

}  // namespace gromolab
