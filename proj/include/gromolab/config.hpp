#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gromolab/algebraic.hpp"
#include "gromolab/models.hpp"
#include "gromolab/orbit.hpp"

namespace gromolab {

struct GeneratorSpec {
  // Either a matrix or an affine map x -> x/beta + t given as strings ("2/3", "1.5", a beta spec).
  std::optional<std::array<cplx, 4>> matrix;
  std::string beta;
  std::string t;
  friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

struct ExperimentConfig {
  std::string preset;
  ModelKind model = ModelKind::H2;
  Point base{};
  std::vector<GeneratorSpec> generators;
  // Alternative to explicit generators: one affine map per digit.
  std::string beta;
  std::vector<std::string> digits;
  std::optional<int> depth;
  std::optional<double> max_displacement;
  int word_cap = 200;
  std::size_t record_cap = 20'000'000;
  DedupSpec dedup{};
  std::vector<double> eps_grid;  // empty: library default
  std::optional<double> delta;   // empty: sampled estimate for the model
  std::uint64_t seed = 1;
  std::string out = "out";
  std::map<std::string, double> params;

  double param(const std::string& key, double fallback) const;
  double param(const std::string& key) const;  // throws ParseError when missing
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string emit_config(const ExperimentConfig& cfg);

std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

// "2/3", "-1", "0.25", "1+2i".
cplx parse_digit(const std::string& text);
std::vector<double> parse_number_list(const std::string& text);
std::vector<std::string> split_list(const std::string& text);

std::vector<Isometry> build_generators(const ExperimentConfig& cfg);
// Exact ring system when beta is an algebraic integer (or an integer literal) and all digits
// are rational; null otherwise.
std::shared_ptr<const ExactAffineSystem> exact_system(const ExperimentConfig& cfg);
OrbitLimit orbit_limit(const ExperimentConfig& cfg);
double resolve_delta(const ExperimentConfig& cfg);

}  // namespace gromolab
