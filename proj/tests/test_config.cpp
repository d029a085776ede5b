#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "gromolab/config.hpp"
#include "json.hpp"

using namespace gromolab;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const fs::path& out) {
  std::string cmd = std::string(GROMOLAB_CLI) + " " + args + " --out " + out.string() + " > " +
                    (out / "stdout.txt").string() + " 2> " + (out / "stderr.txt").string();
  fs::create_directories(out);
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("gromolab_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("presets") {
  auto names = preset_names();
  for (const char* n : {"exee", "contre-ex", "kenyon-sweep", "salem", "schottky-group", "beta4"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  for (const auto& n : names) {
    auto cfg = preset(n);
    CHECK(cfg.preset == n);
    CHECK_FALSE(build_generators(cfg).empty());
  }
  CHECK_THROWS_AS(preset("nope"), ParseError);

  auto exee = build_generators(preset("exee"));
  REQUIRE(exee.size() == 2);
  REQUIRE(exee[1].affine_tag());
  CHECK(std::abs(exee[1].affine_tag()->beta - cplx(M_PI / 2)) < 1e-15);

  auto ce = build_generators(preset("contre-ex"));
  CHECK(ce[0].entry_distance(Isometry::from_matrix(ModelKind::H2, 1, 1, 0, 1)) < 1e-15);
  CHECK(ce[1].entry_distance(Isometry::from_matrix(ModelKind::H2, 2, 0, 0, 0.5)) < 1e-15);
}

TEST_CASE("parsing and round trip") {
  auto cfg = parse_config(R"({"preset": "exee", "depth": 7, "delta": "auto", "seed": 9,
                              "params": {"x": 1.5}})");
  CHECK(cfg.depth == 7);
  CHECK_FALSE(cfg.delta);
  CHECK(cfg.seed == 9);
  CHECK(cfg.param("x") == 1.5);
  CHECK(cfg.param("y", 2.0) == 2.0);
  CHECK_THROWS_AS(cfg.param("y"), ParseError);
  CHECK(resolve_delta(cfg) == default_delta(ModelKind::H2));
  CHECK(build_generators(cfg).size() == 2);

  auto text = emit_config(cfg);
  CHECK(emit_config(parse_config(text)) == text);
  for (const auto& n : preset_names()) {
    auto t = emit_config(preset(n));
    CHECK(emit_config(parse_config(t)) == t);
  }

  CHECK_THROWS_AS(parse_config(R"({"depht": 3})"), ParseError);
  CHECK_THROWS_AS(parse_config("{not json"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({"dedup": {"mode": "fuzzy"}})"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({"model": "H5"})"), ParseError);

  auto m = parse_config(R"({"model": "H3", "delta": 0.9,
      "generators": [{"matrix": [[1,0],[1,0],[0,0],[1,0]]}, {"beta": "4", "t": "1/2"}]})");
  CHECK(m.model == ModelKind::H3);
  CHECK(resolve_delta(m) == 0.9);
  auto gens = build_generators(m);
  REQUIRE(gens.size() == 2);
  CHECK(gens[1].apply(BoundaryPoint::finite(0.0)).value.real() == doctest::Approx(0.5));
}

TEST_CASE("digits and lists") {
  CHECK(parse_digit("2/3").real() == doctest::Approx(2.0 / 3.0));
  CHECK(parse_digit("-1") == cplx(-1.0));
  CHECK(parse_digit("0.25") == cplx(0.25));
  CHECK(parse_digit("1+2i") == cplx(1, 2));
  CHECK_THROWS(parse_digit("1/0"));
  CHECK(parse_number_list("0.1, 0.2,0.4") == std::vector<double>{0.1, 0.2, 0.4});
  CHECK(split_list("0,2/3,1") == std::vector<std::string>{"0", "2/3", "1"});
}

TEST_CASE("exact systems") {
  CHECK(exact_system(preset("kenyon")));
  CHECK(exact_system(preset("golden")));
  CHECK_FALSE(exact_system(preset("exee")));
  auto cfg = preset("beta4");
  cfg.digits = {"0", "1/3"};
  CHECK(exact_system(cfg));
  cfg.digits = {"0", "0.3333"};
  CHECK_FALSE(exact_system(cfg));  // only integers and fractions count as exact
  cfg.digits = {"0", "1+1i"};
  CHECK_FALSE(exact_system(cfg));
}

TEST_CASE("command line") {
  TempDir tmp;

  SUBCASE("usage errors") {
    CHECK(run_cli("frobnicate", tmp.path / "u") == 3);
    CHECK(run_cli("estimate --preset nope", tmp.path / "p") == 4);
    auto bad = tmp.path / "bad.json";
    std::ofstream(bad) << R"({"preset": "exee", "depht": 3})";
    CHECK(run_cli("estimate --config " + bad.string(), tmp.path / "c") == 4);
    CHECK(slurp(tmp.path / "c" / "stderr.txt").find("depht") != std::string::npos);
  }

  SUBCASE("budget overflow") {
    CHECK(run_cli("estimate --preset exee --depth 30 record_cap=1000", tmp.path / "b") == 5);
  }

  SUBCASE("beta-analyze golden") {
    auto out = tmp.path / "g";
    REQUIRE(run_cli("beta-analyze \"beta=poly:[-1,-1,1];root:0\" digits=0,1 n=12", out) == 0);
    auto j = load_json(out / "beta-analyze.json");
    CHECK(j["schema"] == "gromolab/1");
    CHECK(j["class"] == "Pisot");
    CHECK(j["table"].size() == 12);
    CHECK(j["growth_delta"].get<double>() == doctest::Approx(1.0).epsilon(0.02));
  }

  SUBCASE("dim beta4") {
    auto out = tmp.path / "d";
    REQUIRE(run_cli("dim --preset beta4", out) == 0);
    auto j = load_json(out / "dim.json");
    CHECK(j["fitted_dim"].get<double>() == doctest::Approx(0.5).epsilon(0.1));
    CHECK(fs::exists(out / "boxcount.csv"));
  }

  SUBCASE("certify reports missing certificates") {
    CHECK(run_cli("certify --preset parabolic", tmp.path / "n") == 2);
    CHECK(run_cli("certify --preset beta4", tmp.path / "y") == 0);
  }

  SUBCASE("render writes a PGM with sidecar") {
    auto out = tmp.path / "r";
    REQUIRE(run_cli("render --preset golden", out) == 0);
    CHECK(slurp(out / "render.pgm").rfind("P5", 0) == 0);
    CHECK(load_json(out / "render.pgm.json").contains("viewport"));
  }

  SUBCASE("runs reproduce for a fixed seed") {
    auto a = tmp.path / "a", b = tmp.path / "b2";
    REQUIRE(run_cli("estimate --preset exee --depth 12 --seed 4", a) == 0);
    REQUIRE(run_cli("estimate --preset exee --depth 12 --seed 4", b) == 0);
    CHECK(slurp(a / "series.csv") == slurp(b / "series.csv"));
    CHECK(slurp(a / "entropy.csv") == slurp(b / "entropy.csv"));
    auto ja = load_json(a / "estimate.json"), jb = load_json(b / "estimate.json");
    ja.erase("out"), jb.erase("out");  // the only field that differs between the two runs
    CHECK(ja.dump() == jb.dump());
  }
}
