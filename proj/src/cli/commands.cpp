#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <random>

#include "CLI11.hpp"
#include "kanlab/basins.hpp"
#include "kanlab/central.hpp"
#include "kanlab/cli.hpp"
#include "kanlab/entropy.hpp"
#include "kanlab/exponents.hpp"
#include "kanlab/kernels.hpp"
#include "kanlab/parallel.hpp"
#include "kanlab/ruelle.hpp"
#include "kanlab/torus_dynamics.hpp"

namespace kanlab::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, x);
  return buf;
}

std::size_t as_size(const Json& j) { return j.get<std::size_t>(); }

Json envelope(const std::string& command, const RunConfig& cfg) {
  return Json{{"command", command},
              {"config", cfg.resolved},
              {"config_hash", hex64(cfg.hash())},
              {"seed", cfg.seed}};
}

Json nullable(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

struct Outcome {
  int code = 0;
  std::string summary;
};

using Command = std::function<Outcome(const RunConfig&, ArtifactSet&)>;

// ---- verify ---------------------------------------------------------------

struct VerifyResult {
  Json report;
  bool passed = false;
};

VerifyResult verify_checks(const RunConfig& cfg) {
  const Json& v = cfg.block("verify");
  auto sys = cfg.system();
  auto expanding = torus::verify_expanding(sys.base(), as_size(v["expanding_grid"]));
  auto k1 = skew::verify_K1(sys, as_size(v["k1_grid"]));
  auto k2 = skew::verify_K2(sys, as_size(v["k2_theta_grid"]), as_size(v["k2_t_grid"]));
  auto k3 = skew::verify_K3(sys, as_size(v["k3_cells"]));
  auto ex = exponents::check_negative_exponents(sys, cfg.measure(as_size(v["exponent_grid"])));

  Json fibers = Json::array();
  for (const auto& f : k3.fibers) {
    fibers.push_back({{"theta", f.theta},
                      {"at0", skew::to_string(f.at0)},
                      {"at1", skew::to_string(f.at1)},
                      {"slope0", f.slope0},
                      {"slope1", f.slope1},
                      {"interior", f.interior},
                      {"degenerate", f.degenerate}});
  }
  VerifyResult r;
  r.passed = expanding.passed && k1.passed && k2.passed && k3.passed && ex.passed;
  r.report = envelope("verify", cfg);
  r.report["expanding"] = {{"min_derivative", expanding.min_derivative},
                           {"max_derivative", expanding.max_derivative},
                           {"argmin", expanding.argmin},
                           {"passed", expanding.passed}};
  r.report["k1"] = {{"grid", v["k1_grid"]}, {"max_deviation", k1.max_deviation},
                    {"worst_theta", k1.worst_theta}, {"passed", k1.passed}};
  r.report["k2"] = {{"max_abs_dt", k2.max_abs_dt}, {"threshold", k2.threshold}, {"passed", k2.passed}};
  r.report["k3"] = {{"p", nullable(k3.p)}, {"q", nullable(k3.q)}, {"fibers", fibers},
                    {"message", k3.message}, {"passed", k3.passed}};
  r.report["exponents"] = {{"lambda0", ex.lambda0},
                           {"lambda1", ex.lambda1},
                           {"measure_id", ex.measure_id},
                           {"method", exponents::to_string(ex.method)},
                           {"size", ex.size},
                           {"std_error", ex.std_error},
                           {"resolution0", ex.resolution0},
                           {"resolution1", ex.resolution1},
                           {"passed", ex.passed}};
  r.report["passed"] = r.passed;
  return r;
}

Outcome cmd_verify(const RunConfig& cfg, ArtifactSet& files) {
  auto r = verify_checks(cfg);
  files.write_json("verify.json", r.report);
  std::string s = std::string("K1 ") + (r.report["k1"]["passed"].get<bool>() ? "ok" : "FAIL") + ", K2 " +
                  (r.report["k2"]["passed"].get<bool>() ? "ok" : "FAIL") + ", K3 " +
                  (r.report["k3"]["passed"].get<bool>() ? "ok" : "FAIL") + ", exponents " +
                  (r.report["exponents"]["passed"].get<bool>() ? "ok" : "FAIL");
  return {r.passed ? 0 : 1, s};
}

// ---- basin ----------------------------------------------------------------

basins::ClassifyParams classify_params(const Json& b) {
  return {b["n_max"].get<std::int64_t>(), b["delta"].get<double>(), b["window"].get<std::int32_t>()};
}

Outcome cmd_basin(const RunConfig& cfg, ArtifactSet& files) {
  const Json& b = cfg.block("basin");
  auto sys = cfg.system();
  auto params = classify_params(b);
  std::size_t W = as_size(b["width"]), H = as_size(b["height"]);
  auto r = basins::raster(sys, W, H, params, cfg.workers);

  Json rep = envelope("basin", cfg);
  rep["width"] = W;
  rep["height"] = H;
  rep["params"] = {{"n_max", params.n_max}, {"delta", params.delta}, {"window", params.window}};
  rep["fractions"] = {{"basin0", r.fractions.basin0},
                      {"basin1", r.fractions.basin1},
                      {"undecided", r.fractions.undecided}};
  rep["encoding"] = {{"basin0", 0}, {"basin1", 255}, {"undecided", 128}};
  if (W % 2 == 0) {
    auto s = basins::symmetry_agreement(r);
    rep["symmetry"] = {{"decided", s.decided}, {"agreeing", s.agreeing}, {"agreement", s.agreement}};
  } else {
    rep["symmetry"] = nullptr;
  }
  std::size_t cols = as_size(b["coarse_columns"]), rows = as_size(b["coarse_rows"]);
  if (W >= 16 * cols && H >= 16 * rows) {
    auto im = basins::intermingled_test(r, cols, rows);
    rep["intermingled"] = {{"columns", cols},
                           {"rows", rows},
                           {"cells", im.cells.size()},
                           {"failures", im.failures},
                           {"passed", im.passed}};
  } else {
    rep["intermingled"] = nullptr;
  }

  files.write("basin.pgm", pgm_bytes(W, H, r.labels));
  std::size_t samples = as_size(b["coverage_samples"]);
  if (samples > 0) {
    auto ns = b["coverage_n"].get<std::vector<std::int64_t>>();
    auto curve = basins::coverage_curve(sys, samples, ns, params, cfg.seed, cfg.workers);
    std::string csv = "N,fraction\n";
    Json pts = Json::array();
    for (const auto& p : curve) {
      csv += std::to_string(p.n) + "," + format_double(p.undecided) + "\n";
      pts.push_back({{"n", p.n}, {"undecided", p.undecided}});
    }
    files.write("coverage.csv", csv);
    rep["coverage"] = {{"samples", samples}, {"points", pts}};
  }
  files.write_json("basin.json", rep);
  char buf[160];
  std::snprintf(buf, sizeof buf, "basin %zux%zu: B0 %.4f B1 %.4f undecided %.4f", W, H, r.fractions.basin0,
                r.fractions.basin1, r.fractions.undecided);
  return {0, buf};
}

// ---- sigma / orbits -------------------------------------------------------

central::SigmaParams sigma_params(const Json& s) {
  central::SigmaParams p;
  p.classify = {s["n_max"].get<std::int64_t>(), s["delta"].get<double>(), s["window"].get<std::int32_t>()};
  p.tol = s["tol"].get<double>();
  p.probes = s["probes"].get<int>();
  p.extension = s["extension"].get<int>();
  return p;
}

struct SigmaOutputs {
  central::SeparatingGraph graph;
  Json summary;
};

SigmaOutputs write_sigma(const RunConfig& cfg, const skew::KanSystem& sys, ArtifactSet& files,
                         const std::string& command) {
  const Json& s = cfg.block("sigma");
  auto params = sigma_params(s);
  auto g = central::separating_graph(sys, as_size(s["samples"]), params, cfg.workers);
  double bound = s["symmetry_bound"].get<double>();
  auto sym = central::sigma_symmetry(g, bound);

  std::string csv = "theta,sigma,method\n";
  double sum = 0.0;
  std::size_t decided = 0, extended = 0, non_monotone = 0;
  for (const auto& x : g.samples) {
    csv += format_double(x.theta) + ",";
    if (x.decided) {
      csv += format_double(x.sigma) + "," + central::to_string(x.method) + "\n";
      sum += x.sigma;
      ++decided;
    } else {
      csv += "nan,undecided\n";
    }
    extended += x.extended;
    non_monotone += x.non_monotone;
  }
  files.write("sigma.csv", csv);

  Json rep = envelope(command, cfg);
  rep["samples"] = g.samples.size();
  rep["decided"] = decided;
  rep["mean_sigma"] = decided ? sum / static_cast<double>(decided) : 0.0;
  rep["total_variation"] = central::total_variation(g);
  rep["extended"] = extended;
  rep["non_monotone"] = non_monotone;
  rep["symmetry"] = {{"pairs", sym.pairs},
                     {"within", sym.within},
                     {"bound", bound},
                     {"max_defect", sym.max_defect},
                     {"fraction", sym.pairs ? static_cast<double>(sym.within) / static_cast<double>(sym.pairs) : 0.0}};
  files.write_json("sigma.json", rep);
  return {std::move(g), std::move(rep)};
}

Outcome cmd_sigma(const RunConfig& cfg, ArtifactSet& files) {
  auto sys = cfg.system();
  auto out = write_sigma(cfg, sys, files, "sigma");
  char buf[160];
  std::snprintf(buf, sizeof buf, "sigma: %zu/%zu decided, mean %.6f, symmetric pairs %zu/%zu",
                out.summary["decided"].get<std::size_t>(), out.graph.samples.size(),
                out.summary["mean_sigma"].get<double>(), out.summary["symmetry"]["within"].get<std::size_t>(),
                out.summary["symmetry"]["pairs"].get<std::size_t>());
  return {0, buf};
}

Outcome cmd_orbits(const RunConfig& cfg, ArtifactSet& files) {
  const Json& o = cfg.block("orbits");
  auto sys = cfg.system();
  auto sig = write_sigma(cfg, sys, files, "orbits");
  auto sparams = sigma_params(cfg.block("sigma"));
  int n_min = o["n_min"].get<int>(), n_max = o["n_max"].get<int>();
  int sigma_n_max = o["sigma_n_max"].get<int>();
  double match_tol = o["match_tol"].get<double>();

  std::vector<central::OrbitReport> reports;
  for (int n = n_min; n <= n_max; ++n) {
    reports.push_back(central::interior_periodic_orbits(sys, n, as_size(o["cap"]), sparams, cfg.workers));
  }

  // sigma at the base point of every accepted orbit with n <= sigma_n_max.
  struct Job {
    std::size_t report, orbit;
  };
  std::vector<Job> jobs;
  for (std::size_t r = 0; r < reports.size(); ++r) {
    if (reports[r].n > sigma_n_max) continue;
    for (std::size_t k = 0; k < reports[r].orbits.size(); ++k) jobs.push_back({r, k});
  }
  std::vector<central::SigmaSample> at_base(jobs.size());
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
    const auto& orb = reports[jobs[i].report].orbits[jobs[i].orbit];
    BaseSeed seed = orb.base.exact ? BaseSeed{*orb.base.exact} : BaseSeed{orb.base.angle};
    try {
      at_base[i] = central::sigma_bisect(sys, seed, sparams);
    } catch (const PreconditionError&) {
      at_base[i] = central::SigmaSample{};
    }
  });
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> job_of;
  for (std::size_t i = 0; i < jobs.size(); ++i) job_of[{jobs[i].report, jobs[i].orbit}] = i;

  auto obs = central::standard_observables();
  auto est = central::central_measure_estimate(cfg.measure(sig.graph.samples.size()), sig.graph, obs);
  auto table = central::periodic_measure_convergence(reports, est, o["trend_from"].get<int>(),
                                                     o["trend_to"].get<int>());

  Json per_n = Json::array();
  std::size_t checked = 0, matched = 0, accepted = 0, below_one = 0;
  for (std::size_t r = 0; r < reports.size(); ++r) {
    const auto& rep = reports[r];
    Json list = Json::array();
    for (std::size_t k = 0; k < rep.orbits.size(); ++k) {
      const auto& orb = rep.orbits[k];
      ++accepted;
      if (std::fabs(orb.multiplier) < 1.0) ++below_one;
      Json e = {{"theta", orb.base.angle},
                {"t", orb.t},
                {"multiplier", orb.multiplier},
                {"exponent", orb.exponent},
                {"boundary0", orb.boundary0},
                {"boundary1", orb.boundary1},
                {"residual", orb.residual},
                {"orbit_t", orb.orbit_t}};
      if (orb.base.exact) e["theta_exact"] = {orb.base.exact->num, orb.base.exact->den};
      auto it = job_of.find({r, k});
      if (it != job_of.end()) {
        const auto& s = at_base[it->second];
        ++checked;
        bool ok = s.decided && std::fabs(s.sigma - orb.t) <= match_tol;
        matched += ok;
        e["sigma_at_base"] = s.decided ? Json(s.sigma) : Json(nullptr);
        e["sigma_match"] = ok;
      }
      list.push_back(std::move(e));
    }
    per_n.push_back({{"n", rep.n},
                     {"considered", rep.considered},
                     {"skipped_boundary", rep.skipped_boundary},
                     {"no_repelling", rep.no_repelling},
                     {"residual_failures", rep.residual_failures},
                     {"orbits", std::move(list)}});
  }

  std::string csv = "n,orbits,mean_gap,max_gap,mean_exponent,min_exponent,coverage\n";
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    csv += std::to_string(row.n) + "," + std::to_string(row.orbits) + "," + format_double(row.mean_gap) + "," +
           format_double(row.max_gap) + "," + format_double(row.mean_exponent) + "," +
           format_double(row.min_exponent) + "," + format_double(row.coverage) + "\n";
    rows.push_back({{"n", row.n},
                    {"orbits", row.orbits},
                    {"mean_gap", row.mean_gap},
                    {"max_gap", row.max_gap},
                    {"mean_exponent", row.mean_exponent},
                    {"min_exponent", row.min_exponent},
                    {"coverage", row.coverage}});
  }
  files.write("convergence.csv", csv);

  Json integrals = Json::array();
  for (std::size_t i = 0; i < obs.size(); ++i)
    integrals.push_back({{"observable", obs[i].name()}, {"integral", est.integrals[i]}});

  Json rep = envelope("orbits", cfg);
  rep["periods"] = std::move(per_n);
  rep["accepted"] = accepted;
  rep["multiplier_below_one"] = below_one;
  rep["sigma_match"] = {{"n_max", sigma_n_max},
                        {"tolerance", match_tol},
                        {"checked", checked},
                        {"matched", matched},
                        {"fraction", checked ? static_cast<double>(matched) / static_cast<double>(checked) : 0.0}};
  rep["central_measure"] = {{"excluded_mass", est.excluded_mass}, {"integrals", std::move(integrals)}};
  rep["convergence"] = {{"rows", std::move(rows)},
                        {"gap_slope", table.gap_slope},
                        {"gaps_non_increasing", table.gaps_non_increasing},
                        {"exponents_non_negative", table.exponents_non_negative},
                        {"positive_from", table.positive_from ? Json(*table.positive_from) : Json(nullptr)}};
  files.write_json("orbits.json", rep);

  char buf[200];
  std::snprintf(buf, sizeof buf, "orbits: %zu accepted, sigma matches %zu/%zu, gap slope %.3e", accepted, matched,
                checked, table.gap_slope);
  return {0, buf};
}

// ---- entropy --------------------------------------------------------------

std::string count_csv(const entropy::EntropyEstimate& e) {
  std::string csv = "epsilon,n,count\n";
  for (const auto& r : e.rows) csv += format_double(r.epsilon) + "," + std::to_string(r.n) + "," + std::to_string(r.count) + "\n";
  return csv;
}

Json slopes_json(const entropy::EntropyEstimate& e) {
  Json out = Json::array();
  for (const auto& s : e.slopes) {
    out.push_back({{"epsilon", s.epsilon},
                   {"slope", s.slope},
                   {"intercept", s.intercept},
                   {"relative_error", std::fabs(s.slope - e.target) / e.target}});
  }
  return out;
}

Outcome cmd_entropy(const RunConfig& cfg, ArtifactSet& files) {
  const Json& en = cfg.block("entropy");
  auto sys = cfg.system();
  auto eps = en["epsilons"].get<std::vector<double>>();
  int n_min = en["n_min"].get<int>(), n_max = en["n_max"].get<int>();
  auto base = entropy::entropy_estimate(sys, entropy::Region::circle(), eps, n_min, n_max);
  auto full = entropy::entropy_estimate(sys, entropy::Region::cylinder(), eps, n_min, n_max);

  std::vector<double> thetas;
  for (std::size_t i = 0; i < as_size(en["fibers"]); ++i) {
    auto rng = item_rng(cfg.seed, i);
    thetas.push_back(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  }
  std::vector<int> ns;
  for (int n = 1; n <= en["fiber_n_max"].get<int>(); ++n) ns.push_back(n);
  double feps = en["fiber_epsilon"].get<double>();
  auto fib = entropy::fiber_entropy_check(sys, thetas, ns, feps);

  auto phi = trig_from_json(en["pressure_potential"]);
  auto pres = entropy::pressure_estimate(sys, phi, en["pressure_n"].get<int>(), en["pressure_epsilon"].get<double>());
  auto eq = ruelle::solve_equilibrium(sys.base(), phi, 4096);

  files.write("entropy.csv", count_csv(full));
  files.write("entropy_base.csv", count_csv(base));
  std::string fcsv = "theta,n,count\n";
  Json frows = Json::array();
  for (const auto& row : fib.rows) {
    for (std::size_t i = 0; i < row.n.size(); ++i)
      fcsv += format_double(row.theta) + "," + std::to_string(row.n[i]) + "," + std::to_string(row.counts[i]) + "\n";
    frows.push_back({{"theta", row.theta}, {"rate", row.rate}, {"bound_ok", row.bound_ok}});
  }
  files.write("fibers.csv", fcsv);

  Json rep = envelope("entropy", cfg);
  rep["target"] = full.target;
  rep["base"] = {{"slopes", slopes_json(base)}, {"trend", base.trend}};
  rep["full"] = {{"slopes", slopes_json(full)}, {"trend", full.trend}};
  rep["fibers"] = {{"epsilon", feps},
                   {"n_max", ns.back()},
                   {"rows", frows},
                   {"max_rate", fib.max_rate},
                   {"passed", fib.passed}};
  rep["pressure"] = {{"n", pres.n},
                     {"epsilon", pres.epsilon},
                     {"raw", pres.raw},
                     {"increment", pres.increment},
                     {"transfer_operator", eq.pressure},
                     {"gap", std::fabs(pres.increment - eq.pressure)}};
  files.write_json("entropy.json", rep);
  char buf[200];
  std::snprintf(buf, sizeof buf, "entropy: base slope %.4f, full slope %.4f (target %.4f), fibers %s",
                base.slopes.front().slope, full.slopes.front().slope, full.target, fib.passed ? "ok" : "FAIL");
  return {0, buf};
}

// ---- equilibrium ----------------------------------------------------------

Outcome cmd_equilibrium(const RunConfig& cfg, ArtifactSet& files) {
  const Json& e = cfg.block("equilibrium");
  auto sys = cfg.system();
  auto phi = trig_from_json(e["potential"]);
  std::size_t G = as_size(e["grid"]);
  auto state = ruelle::solve_equilibrium(sys.base(), phi, G);

  Json rep = envelope("equilibrium", cfg);
  rep["grid"] = G;
  rep["pressure"] = state.pressure;
  rep["eigenvalue"] = state.eigenvalue;
  rep["iterations"] = state.iterations;
  rep["residual"] = state.residual;
  rep["holder_quotient"] = state.holder_quotient;
  rep["weights"] = state.measure.weights();
  rep["jacobian"] = state.jacobian;
  if (e["resolution_check"].get<bool>()) {
    auto fine = ruelle::solve_equilibrium(sys.base(), phi, 2 * G);
    rep["resolution"] = {{"grid", 2 * G},
                         {"pressure", fine.pressure},
                         {"change", std::fabs(fine.pressure - state.pressure)}};
  }
  auto dist = ruelle::bounded_distortion_report(state, e["distortion_n"].get<int>(),
                                                e["distortion_samples"].get<int>(), cfg.seed);
  rep["distortion"] = {{"max_ratio", dist.max_ratio}, {"bound", dist.bound}, {"passed", dist.passed}};
  int pn = e["periodic_n"].get<int>();
  auto per = torus::periodic_points(sys.base(), pn, as_size(e["periodic_cap"]));
  double rate = std::log(static_cast<double>(per.fixed_point_count)) / pn;
  rep["periodic_growth"] = {{"n", pn},
                            {"fixed_points", per.fixed_point_count},
                            {"orbits", per.orbit_count},
                            {"rate", rate},
                            {"target", std::log(std::abs(static_cast<double>(sys.base().degree())))}};
  files.write_json("equilibrium.json", rep);
  char buf[160];
  std::snprintf(buf, sizeof buf, "equilibrium G=%zu: pressure %.12f", G, state.pressure);
  return {0, buf};
}

// ---- scan -----------------------------------------------------------------

Json fit_json(const exponents::PowerFit& f) {
  return {{"gamma", f.gamma}, {"beta", f.beta}, {"beta_target", f.beta_target}, {"passed", f.passed}};
}

Outcome cmd_scan(const RunConfig& cfg, ArtifactSet& files) {
  const Json& s = cfg.block("scan");
  auto sys = cfg.system();
  auto eps = s["epsilons"].get<std::vector<double>>();
  auto scan = exponents::epsilon_expansion_scan(sys, cfg.measure(as_size(s["grid"])), eps);
  std::string csv = "epsilon,lambda0,lambda1\n";
  Json rows = Json::array();
  for (const auto& r : scan.rows) {
    csv += format_double(r.epsilon) + "," + format_double(r.lambda0) + "," + format_double(r.lambda1) + "\n";
    rows.push_back({{"epsilon", r.epsilon}, {"lambda0", r.lambda0}, {"lambda1", r.lambda1}});
  }
  files.write("scan.csv", csv);
  Json rep = envelope("scan", cfg);
  rep["rows"] = std::move(rows);
  rep["coupling_mean"] = scan.coupling_mean;
  rep["coupling_mean_zero"] = scan.coupling_mean_zero;
  rep["fit0"] = fit_json(scan.fit0);
  rep["fit1"] = fit_json(scan.fit1);
  rep["passed"] = scan.passed;
  files.write_json("scan.json", rep);
  char buf[160];
  std::snprintf(buf, sizeof buf, "scan: gamma %.4f beta %.4f (target %.4f)", scan.fit0.gamma, scan.fit0.beta,
                scan.fit0.beta_target);
  return {0, buf};
}

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> table{
      {"verify", cmd_verify},           {"basin", cmd_basin},   {"sigma", cmd_sigma},
      {"orbits", cmd_orbits},           {"entropy", cmd_entropy}, {"equilibrium", cmd_equilibrium},
      {"scan", cmd_scan}};
  return table;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical laboratory for Kan-like skew products"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  bool force = false;
  app.add_option("--config", config_path, "JSON run configuration (defaults when omitted)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");
  app.add_flag("--force", force, "Skip the axiom checks before module commands");
  for (const auto& [name, fn] : commands()) app.add_subcommand(name);

  std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  }
  std::string name = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    cfg = config_path.empty() ? parse_config("{}") : load_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  }
  if (seed) {
    cfg.seed = *seed;
    cfg.resolved["seed"] = *seed;
  }
  if (workers) cfg.workers = *workers;
  cfg.out = out_dir;

  auto started = std::chrono::steady_clock::now();
  try {
    if (name != "verify" && !force) {
      auto v = verify_checks(cfg);
      if (!v.passed) {
        err << name << ": axiom checks failed (run verify for the report, or pass --force)\n";
        return 1;
      }
    }
    ArtifactSet files(cfg.out);
    Outcome result = commands().at(name)(cfg, files);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    Json manifest = {{"command", name},
                     {"config_hash", hex64(cfg.hash())},
                     {"seed", cfg.seed},
                     {"version", kVersion},
                     {"isa", std::string(kernels::to_string(kernels::active_isa()))},
                     {"workers", resolve_workers(cfg.workers)},
                     {"wall_seconds", wall},
                     {"files", files.names()},
                     {"exit_code", result.code}};
    files.write_json("manifest.json", manifest);
    files.commit();
    out << result.summary << "\n";
    return result.code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << name << " failed: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace kanlab::cli
