#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "kanlab/cli.hpp"

using namespace kanlab;
using namespace kanlab::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("kanlab_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "kanlab");
  std::ostringstream o, e;
  int code = run(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

void write_file(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("canonical JSON: sorted keys and 17 significant digits") {
  Json j = {{"b", 0.1}, {"a", {1, 2}}, {"c", {{"z", true}, {"y", "s"}}}};
  CHECK(canonical_dump(j) == R"({"a":[1,2],"b":0.10000000000000001,"c":{"y":"s","z":true}})");
  CHECK(canonical_dump(Json(std::nan(""))) == "null");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("config resolution and errors") {
  auto cfg = parse_config("{}");
  CHECK(cfg.resolved == [] {
    Json d = default_config();
    d.erase("workers");
    return d;
  }());
  CHECK(cfg.hash() == parse_config(R"({"workers": 5})").hash());
  CHECK(cfg.hash() != parse_config(R"({"seed": 5})").hash());

  CHECK_THROWS_WITH_AS(parse_config(R"({"basin": {"widht": 3}})"), "unknown field 'basin.widht'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"basin": {"width": 1.5}})"), "field 'basin.width': expected an integer",
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"basin": {"width": 0}})"), "field 'basin.width': must be positive",
                       ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"system": "kan2000"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"system": {"epsilon": 0.1, "xi_poly": [0, 1, -1]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"measure": {"equilibrium": {}}})"), ConfigError);
  try {
    parse_config("{\n  \"seed\": 1,\n  \"basin\": {,}\n}");
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("system block reproduces the builtin bit for bit") {
  auto block = parse_config(R"({"system": {"base": {"degree": 3}, "epsilon": 0.03125,
                                "C_cos": [0, 1], "xi_poly": [0, 1, -1]}})");
  auto a = block.system();
  auto b = skew::KanSystem::kan1994();
  for (int i = 0; i < 200; ++i) {
    skew::Point x{(i + 0.37) / 200.0, (i % 17) / 16.0};
    auto pa = a.step(x), pb = b.step(x);
    CHECK(pa.theta == pb.theta);
    CHECK(pa.t == pb.t);
  }
}

TEST_CASE("equilibrium measure block") {
  auto cfg = parse_config(R"({"measure": {"equilibrium": {"potential": {"cos": [0, 0.2]}}}})");
  auto nu = cfg.measure(1024);
  CHECK(nu.size() == 1024);
  double sum = 0;
  for (double w : nu.weights()) sum += w;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(parse_config("{}").measure(64).weight(3) == doctest::Approx(1.0 / 64));
}

TEST_CASE("PGM encoding") {
  auto bytes = pgm_bytes(3, 1, {0, 1, 2});
  CHECK(bytes == std::string("P5\n3 1\n255\n") + std::string{'\0', '\xff', '\x80'});
}

TEST_CASE("artifacts are removed unless committed") {
  TempDir dir("artifacts");
  {
    ArtifactSet files(dir.path);
    files.write("a.txt", "x");
  }
  CHECK(fs::is_empty(dir.path));
  {
    ArtifactSet files(dir.path);
    files.write("a.txt", "x");
    files.commit();
  }
  CHECK(slurp(dir.path / "a.txt") == "x");
}

TEST_CASE("verify exit codes") {
  TempDir dir("verify");
  std::string out, err;
  CHECK(run_cli({"verify", "--out", dir.path.string()}, &out) == 0);
  auto rep = Json::parse(slurp(dir.path / "verify.json"));
  CHECK(rep["k2"]["max_abs_dt"].get<double>() == 1.03125);
  CHECK(rep["k3"]["p"].get<double>() == 0.5);
  CHECK(rep["k3"]["q"].get<double>() == 0.0);
  CHECK(rep["config"]["system"] == "kan1994");
  CHECK(rep["seed"] == 0);

  write_file(dir.path / "flat.json", R"({"system": {"base": {"degree": 3}, "epsilon": 0,
                                          "C_cos": [0, 1], "xi_poly": [0, 1, -1]}})");
  CHECK(run_cli({"verify", "--config", (dir.path / "flat.json").string(), "--out", dir.path.string()}) == 1);
  write_file(dir.path / "bad.json", "{\"seed\": ");
  CHECK(run_cli({"verify", "--config", (dir.path / "bad.json").string()}, &out, &err) == 2);
  CHECK(err.find("malformed JSON") != std::string::npos);
  CHECK(run_cli({"nonsense"}) == 2);
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"verify", "--workers", "many"}) == 2);
}

TEST_CASE("module commands refuse a failing system unless forced, and clean up on errors") {
  TempDir dir("force");
  write_file(dir.path / "flat.json", R"({"system": {"base": {"degree": 3}, "epsilon": 0,
      "C_cos": [0, 1], "xi_poly": [0, 1, -1]}, "sigma": {"samples": 8, "n_max": 2000},
      "orbits": {"n_max": 2}})");
  auto out = dir.path / "out";
  auto cfg = (dir.path / "flat.json").string();
  CHECK(run_cli({"orbits", "--config", cfg, "--out", out.string()}) == 1);
  CHECK(!fs::exists(out));
  // Forced: every sigma sample is undecided, so the central estimate aborts.
  CHECK(run_cli({"orbits", "--config", cfg, "--out", out.string(), "--force"}) == 1);
  CHECK(fs::is_empty(out));
}

TEST_CASE("equilibrium command reports log 3") {
  TempDir dir("eq");
  CHECK(run_cli({"equilibrium", "--out", dir.path.string()}) == 0);
  auto rep = Json::parse(slurp(dir.path / "equilibrium.json"));
  CHECK(std::fabs(rep["pressure"].get<double>() - std::log(3.0)) < 1e-9);
  CHECK(rep["weights"].size() == 4096);
  auto man = Json::parse(slurp(dir.path / "manifest.json"));
  CHECK(man["command"] == "equilibrium");
  CHECK(man["config_hash"] == rep["config_hash"]);
}

TEST_CASE("artifacts do not depend on the worker count") {
  TempDir dir("det");
  write_file(dir.path / "c.json", R"({"seed": 11, "basin": {"width": 64, "height": 32, "n_max": 20000,
      "coarse_columns": 2, "coarse_rows": 2, "coverage_samples": 64, "coverage_n": [300, 1000, 20000]},
      "system": {"base": {"degree": 3}, "epsilon": 0.25, "C_cos": [0, 1], "xi_poly": [0, 1, -1]}})");
  auto cfg = (dir.path / "c.json").string();
  REQUIRE(run_cli({"basin", "--config", cfg, "--out", (dir.path / "a").string(), "--workers", "1"}) == 0);
  REQUIRE(run_cli({"basin", "--config", cfg, "--out", (dir.path / "b").string(), "--workers", "4"}) == 0);
  for (auto name : {"basin.pgm", "basin.json", "coverage.csv"}) {
    CHECK(slurp(dir.path / "a" / name) == slurp(dir.path / "b" / name));
  }
  REQUIRE(run_cli({"basin", "--config", cfg, "--out", (dir.path / "c").string(), "--seed", "12"}) == 0);
  CHECK(slurp(dir.path / "a" / "coverage.csv") != slurp(dir.path / "c" / "coverage.csv"));
  CHECK(slurp(dir.path / "a" / "basin.pgm") == slurp(dir.path / "c" / "basin.pgm"));
}
