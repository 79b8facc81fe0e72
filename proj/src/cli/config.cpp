#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kanlab/cli.hpp"
#include "kanlab/ruelle.hpp"

namespace kanlab::cli {

namespace {

Json potential(std::vector<double> cos, std::vector<double> sin = {}) {
  return Json{{"cos", std::move(cos)}, {"sin", std::move(sin)}};
}

Json build_defaults() {
  Json d;
  d["system"] = "kan1994";
  d["measure"] = "lebesgue";
  d["seed"] = 0;
  d["workers"] = 0;
  d["verify"] = {{"k1_grid", 4096},        {"k2_theta_grid", 1024}, {"k2_t_grid", 256},
                 {"k3_cells", 4096},       {"expanding_grid", 16384}, {"exponent_grid", 16384}};
  d["basin"] = {{"width", 512},          {"height", 512},       {"n_max", 5000},
                {"delta", 1e-6},         {"window", 50},        {"coarse_columns", 32},
                {"coarse_rows", 16},     {"coverage_samples", 0},
                {"coverage_n", {1000, 2000, 5000}}};
  d["sigma"] = {{"samples", 4096}, {"n_max", 1 << 20}, {"delta", 1e-6},        {"window", 50},
                {"tol", 1e-4},     {"probes", 32},     {"extension", 4},       {"symmetry_bound", 2e-4}};
  d["orbits"] = {{"n_min", 1}, {"n_max", 12}, {"cap", 4096}, {"sigma_n_max", 8},
                 {"match_tol", 1e-3}, {"trend_from", 4}, {"trend_to", 12}};
  d["entropy"] = {{"epsilons", {0.05}},      {"n_min", 4},          {"n_max", 10},
                  {"fibers", 16},            {"fiber_epsilon", 0.05}, {"fiber_n_max", 40},
                  {"pressure_n", 8},         {"pressure_epsilon", 0.05},
                  {"pressure_potential", potential({0.0, 0.2})}};
  d["equilibrium"] = {{"grid", 4096},
                      {"potential", potential({})},
                      {"resolution_check", true},
                      {"distortion_n", 8},
                      {"distortion_samples", 2000},
                      {"periodic_n", 12},
                      {"periodic_cap", 64}};
  std::vector<double> eps;
  for (int k = 0; k <= 5; ++k) eps.push_back(std::ldexp(1.0 / 32.0, -k));
  d["scan"] = {{"epsilons", eps}, {"grid", 16384}};
  return d;
}

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError("field '" + path + "': " + what);
}

bool is_number_array(const Json& j, bool integers) {
  if (!j.is_array()) return false;
  for (const auto& e : j) {
    if (integers ? !e.is_number_integer() : !e.is_number()) return false;
  }
  return true;
}

// Overlay `user` on `base` following the shape of `shape`.
void overlay(Json& base, const Json& user, const Json& shape, const std::string& path) {
  require(user.is_object(), path.empty() ? "<root>" : path, "expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    std::string field = path.empty() ? it.key() : path + "." + it.key();
    if (!shape.contains(it.key())) throw ConfigError("unknown field '" + field + "'");
    const Json& s = shape.at(it.key());
    const Json& v = it.value();
    if (path.empty() && (it.key() == "system" || it.key() == "measure")) {
      base[it.key()] = v;  // checked separately
      continue;
    }
    if (s.is_object()) {
      overlay(base[it.key()], v, s, field);
    } else if (s.is_boolean()) {
      require(v.is_boolean(), field, "expected true or false");
      base[it.key()] = v;
    } else if (s.is_number_integer()) {
      require(v.is_number_integer(), field, "expected an integer");
      require(v.is_number_unsigned() || v.get<std::int64_t>() >= 0, field, "must be non-negative");
      base[it.key()] = v;
    } else if (s.is_number()) {
      require(v.is_number(), field, "expected a number");
      base[it.key()] = v.get<double>();
    } else if (s.is_array()) {
      bool ints = !s.empty() && s.front().is_number_integer();
      require(is_number_array(v, ints), field, ints ? "expected an array of integers" : "expected an array of numbers");
      base[it.key()] = v;
    } else {
      require(v.type() == s.type(), field, "unexpected type");
      base[it.key()] = v;
    }
  }
}

std::vector<double> numbers(const Json& j, const std::string& field) {
  require(is_number_array(j, false), field, "expected an array of numbers");
  return j.get<std::vector<double>>();
}

void check_system(const Json& j) {
  if (j.is_string()) {
    require(j.get<std::string>() == "kan1994", "system", "unknown builtin '" + j.get<std::string>() + "'");
    return;
  }
  require(j.is_object(), "system", "expected \"kan1994\" or a system block");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k != "base" && k != "epsilon" && k != "C_cos" && k != "C_sin" && k != "xi_poly") {
      throw ConfigError("unknown field 'system." + k + "'");
    }
  }
  require(j.contains("base") && j["base"].is_object(), "system.base", "required object");
  const Json& b = j["base"];
  for (auto it = b.begin(); it != b.end(); ++it) {
    const auto& k = it.key();
    if (k != "degree" && k != "fourier_cos" && k != "fourier_sin" && k != "amplitude") {
      throw ConfigError("unknown field 'system.base." + k + "'");
    }
  }
  require(b.contains("degree") && b["degree"].is_number_integer(), "system.base.degree", "required integer");
  int k = b["degree"].get<int>();
  require(std::abs(k) >= 2, "system.base.degree", "|degree| must be at least 2");
  if (b.contains("fourier_cos")) numbers(b["fourier_cos"], "system.base.fourier_cos");
  if (b.contains("fourier_sin")) numbers(b["fourier_sin"], "system.base.fourier_sin");
  if (b.contains("amplitude")) require(b["amplitude"].is_number(), "system.base.amplitude", "expected a number");
  require(j.contains("epsilon") && j["epsilon"].is_number(), "system.epsilon", "required number");
  require(j.contains("xi_poly"), "system.xi_poly", "required array");
  numbers(j["xi_poly"], "system.xi_poly");
  if (j.contains("C_cos")) numbers(j["C_cos"], "system.C_cos");
  if (j.contains("C_sin")) numbers(j["C_sin"], "system.C_sin");
}

Json normalized_system(const Json& j) {
  if (j.is_string()) return j;
  Json out = j;
  Json& b = out["base"];
  if (!b.contains("fourier_cos")) b["fourier_cos"] = Json::array();
  if (!b.contains("fourier_sin")) b["fourier_sin"] = Json::array();
  if (!b.contains("amplitude")) b["amplitude"] = 0.0;
  if (!out.contains("C_cos")) out["C_cos"] = Json::array();
  if (!out.contains("C_sin")) out["C_sin"] = Json::array();
  return out;
}

void check_measure(const Json& j) {
  if (j.is_string()) {
    require(j.get<std::string>() == "lebesgue", "measure", "expected \"lebesgue\" or an equilibrium block");
    return;
  }
  require(j.is_object() && j.size() == 1 && j.contains("equilibrium"), "measure",
          "expected \"lebesgue\" or {\"equilibrium\": {\"potential\": ...}}");
  const Json& e = j["equilibrium"];
  require(e.is_object() && e.contains("potential") && e.size() == 1, "measure.equilibrium",
          "expected {\"potential\": {\"cos\": [...], \"sin\": [...]}}");
  trig_from_json(e["potential"]);
}

void check_ranges(const Json& c) {
  auto positive = [&](const char* block, const char* key) {
    require(c[block][key].get<double>() > 0, std::string(block) + "." + key, "must be positive");
  };
  for (auto* k : {"k1_grid", "k2_theta_grid", "k2_t_grid", "k3_cells", "expanding_grid", "exponent_grid"})
    positive("verify", k);
  for (auto* k : {"width", "height", "n_max", "delta", "window", "coarse_columns", "coarse_rows"})
    positive("basin", k);
  for (auto* k : {"samples", "n_max", "delta", "window", "tol", "probes", "symmetry_bound"}) positive("sigma", k);
  for (auto* k : {"n_min", "n_max", "cap", "sigma_n_max", "match_tol"}) positive("orbits", k);
  for (auto* k : {"n_max", "fibers", "fiber_epsilon", "fiber_n_max", "pressure_n", "pressure_epsilon"})
    positive("entropy", k);
  for (auto* k : {"grid", "distortion_n", "distortion_samples", "periodic_n", "periodic_cap"})
    positive("equilibrium", k);
  positive("scan", "grid");
  require(!c["entropy"]["epsilons"].empty(), "entropy.epsilons", "must not be empty");
  require(c["scan"]["epsilons"].size() >= 2, "scan.epsilons", "needs at least two values");
  trig_from_json(c["equilibrium"]["potential"]);
  trig_from_json(c["entropy"]["pressure_potential"]);
}

}  // namespace

const Json& default_config() {
  static const Json d = build_defaults();
  return d;
}

TrigPoly trig_from_json(const Json& j) {
  require(j.is_object(), "potential", "expected {\"cos\": [...], \"sin\": [...]}");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "cos" && it.key() != "sin") throw ConfigError("unknown field 'potential." + it.key() + "'");
  }
  std::vector<double> c = j.contains("cos") ? numbers(j["cos"], "potential.cos") : std::vector<double>{};
  std::vector<double> s = j.contains("sin") ? numbers(j["sin"], "potential.sin") : std::vector<double>{};
  return TrigPoly(std::move(c), std::move(s));
}

skew::KanSystem system_from_json(const Json& j) {
  check_system(j);
  if (j.is_string()) return skew::KanSystem::kan1994();
  Json n = normalized_system(j);
  const Json& b = n["base"];
  torus::ExpandingCircleMap base(b["degree"].get<int>(),
                                 TrigPoly(b["fourier_cos"].get<std::vector<double>>(),
                                          b["fourier_sin"].get<std::vector<double>>()),
                                 b["amplitude"].get<double>());
  auto fiber = skew::FiberFamily::product(
      n["epsilon"].get<double>(),
      TrigPoly(n["C_cos"].get<std::vector<double>>(), n["C_sin"].get<std::vector<double>>()),
      Polynomial(n["xi_poly"].get<std::vector<double>>()));
  return skew::KanSystem(std::move(base), std::move(fiber), "custom");
}

RunConfig parse_config(const std::string& text) {
  Json user;
  try {
    user = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  Json resolved = default_config();
  overlay(resolved, user, default_config(), "");
  check_system(resolved["system"]);
  resolved["system"] = normalized_system(resolved["system"]);
  check_measure(resolved["measure"]);
  check_ranges(resolved);

  RunConfig cfg;
  cfg.seed = resolved["seed"].get<std::uint64_t>();
  cfg.workers = resolved["workers"].get<unsigned>();
  resolved.erase("workers");
  cfg.resolved = std::move(resolved);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

skew::KanSystem RunConfig::system() const { return system_from_json(resolved.at("system")); }

GridMeasure RunConfig::measure(std::size_t grid) const {
  const Json& m = resolved.at("measure");
  if (m.is_string()) return GridMeasure::lebesgue(grid);
  auto state = ruelle::solve_equilibrium(system().base(), trig_from_json(m["equilibrium"]["potential"]), grid);
  return state.measure;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical_dump(resolved)); }

std::string format_double(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void dump_string(std::string& out, const std::string& s) {
  out += Json(s).dump();
}

void dump(std::string& out, const Json& j) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted keys
        if (!first) out += ',';
        first = false;
        dump_string(out, it.key());
        out += ':';
        dump(out, it.value());
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        dump(out, j[i]);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      double x = j.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string canonical_dump(const Json& j) {
  std::string out;
  dump(out, j);
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace kanlab::cli
