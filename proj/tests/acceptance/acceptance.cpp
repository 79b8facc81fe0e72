// Acceptance run: every criterion is evaluated from the artifacts of a CLI
// run with 8 workers; the same commands are then repeated with 1 worker and
// the artifacts compared byte for byte.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kanlab/basins.hpp"
#include "kanlab/cli.hpp"
#include "kanlab/kernels.hpp"

using kanlab::cli::Json;
namespace fs = std::filesystem;

namespace {

struct Job {
  std::string name;     // output subdirectory
  std::string command;
  Json config;
  double seconds = 0.0;
  int code = -1;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json load(const fs::path& p) { return Json::parse(slurp(p)); }

double run_job(Job& job, const fs::path& root, unsigned workers) {
  fs::path dir = root / job.name;
  fs::remove_all(dir);
  fs::create_directories(root);
  fs::path cfg = root / (job.name + ".config.json");
  std::ofstream(cfg) << kanlab::cli::canonical_dump(job.config);
  std::vector<std::string> args{"kanlab",  job.command,    "--config", cfg.string(), "--out",
                                dir.string(), "--workers", std::to_string(workers)};
  std::ostringstream out, err;
  auto t0 = std::chrono::steady_clock::now();
  job.code = kanlab::cli::run(args, out, err);
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "  [" << job.name << ", " << workers << " workers] " << out.str();
  if (!err.str().empty()) std::cout << "  stderr: " << err.str();
  return s;
}

struct Line {
  int id;
  bool pass;
  std::string detail;
  double seconds;
  double budget;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void report(std::vector<Line>& lines, int id, bool pass, std::string detail, double seconds, double budget) {
  bool in_time = seconds <= budget;
  if (!in_time) detail += "; over the time budget";
  lines.push_back({id, pass && in_time, detail, seconds, budget});
}

}  // namespace

int main(int argc, char** argv) {
  fs::path root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "kanlab_acceptance";
  std::cout << "acceptance: artifacts under " << root.string() << ", kernels "
            << kanlab::kernels::to_string(kanlab::kernels::active_isa()) << "\n";

  const double log3 = std::log(3.0);
  Json kan = {{"seed", 20240601}};
  std::map<std::string, Job> jobs;
  auto add = [&](std::string name, std::string command, Json extra) {
    Json c = kan;
    c.update(extra, true);
    jobs[name] = Job{name, command, c};
  };
  add("verify", "verify", {{"verify", {{"k1_grid", 4096}, {"exponent_grid", 16384}}}});
  add("equilibrium0", "equilibrium", {{"equilibrium", {{"grid", 4096}, {"periodic_n", 12}}}});
  add("equilibrium1", "equilibrium",
      {{"equilibrium", {{"grid", 4096}, {"potential", {{"cos", {0.0, 0.2}}, {"sin", {0.0, 0.1}}}}}}});
  add("basin", "basin",
      {{"basin", {{"width", 1024}, {"height", 1024}, {"n_max", 5000}, {"coarse_columns", 32}, {"coarse_rows", 16}}}});
  add("orbits", "orbits",
      {{"sigma", {{"samples", 4096}}},
       {"orbits", {{"n_min", 1}, {"n_max", 12}, {"sigma_n_max", 8}, {"match_tol", 1e-3}}}});
  {
    std::vector<double> eps;
    for (int k = 0; k <= 5; ++k) eps.push_back(std::ldexp(1.0 / 32.0, -k));
    add("scan", "scan", {{"scan", {{"epsilons", eps}, {"grid", 16384}}}});
  }
  add("entropy", "entropy",
      {{"entropy", {{"epsilons", {0.05}}, {"n_min", 4}, {"n_max", 10}, {"fibers", 16}, {"fiber_n_max", 40},
                    {"fiber_epsilon", 0.05}}}});

  fs::path run_a = root / "workers8", run_b = root / "workers1";
  for (auto& [name, job] : jobs) job.seconds = run_job(job, run_a, 8);

  std::vector<Line> lines;
  auto dir = [&](const std::string& name) { return run_a / name; };

  // 1. Axiom gate.
  {
    auto& j = jobs["verify"];
    auto v = load(dir("verify") / "verify.json");
    double a = 1.0 / 32.0;
    double oracle = std::log((1.0 + std::sqrt(1.0 - a * a)) / 2.0);
    double l0 = v["exponents"]["lambda0"], l1 = v["exponents"]["lambda1"];
    bool k1 = v["k1"]["max_deviation"].get<double>() == 0.0 && v["k1"]["grid"] == 4096;
    bool k2 = v["k2"]["max_abs_dt"].get<double>() == 1.03125 && v["k2"]["threshold"].get<double>() == 1.5 &&
              v["k2"]["passed"].get<bool>();
    bool pattern = false;
    for (const auto& f : v["k3"]["fibers"]) {
      if (f["theta"] == 0.5 && f["at0"] == "sink" && f["at1"] == "source") pattern = true;
    }
    bool qpat = false;
    for (const auto& f : v["k3"]["fibers"]) {
      if (f["theta"] == 0.0 && f["at0"] == "source" && f["at1"] == "sink") qpat = true;
    }
    bool k3 = v["k3"]["p"] == 0.5 && v["k3"]["q"] == 0.0 && pattern && qpat && v["k3"]["passed"].get<bool>();
    bool ex = std::fabs(l0 - oracle) < 1e-7 && std::fabs(l1 - oracle) < 1e-7 &&
              std::fabs(l0 + 2.4425e-4) <= 1e-7 && std::fabs(l1 + 2.4425e-4) <= 1e-7 &&
              v["exponents"]["size"] == 16384;
    std::string d = std::string("K1 ") + (k1 ? "exact" : "FAIL") + ", K2 max " +
                    fmt("%.5f", v["k2"]["max_abs_dt"].get<double>()) + ", K3 " + (k3 ? "p=0.5 q=0" : "FAIL") +
                    ", lambda0 " + fmt("%.6e", l0) + " lambda1 " + fmt("%.6e", l1) + " oracle " + fmt("%.6e", oracle);
    report(lines, 1, j.code == 0 && k1 && k2 && k3 && ex, d, j.seconds, 5);
  }

  // 2. Transfer operator.
  {
    auto e0 = load(dir("equilibrium0") / "equilibrium.json");
    auto e1 = load(dir("equilibrium1") / "equilibrium.json");
    double G = e0["grid"].get<double>();
    double dp = std::fabs(e0["pressure"].get<double>() - log3);
    double dw = 0.0, dj = 0.0;
    for (const auto& w : e0["weights"]) dw = std::max(dw, std::fabs(w.get<double>() * G - 1.0));
    for (const auto& x : e0["jacobian"]) dj = std::max(dj, std::fabs(x.get<double>() - 3.0));
    double dres = e1["resolution"]["change"].get<double>();
    bool pass = dp < 1e-9 && dw < 1e-9 && dj < 1e-9 && dres < 1e-6 && e0["grid"] == 4096;
    std::string d = "|P-log3| " + fmt("%.2e", dp) + ", max|G w-1| " + fmt("%.2e", dw) + ", max|J-3| " +
                    fmt("%.2e", dj) + ", |P(2G)-P(G)| (phi!=0) " + fmt("%.2e", dres);
    report(lines, 2, pass, d, jobs["equilibrium0"].seconds + jobs["equilibrium1"].seconds, 30);
  }

  // 3. Periodic growth.
  {
    auto e0 = load(dir("equilibrium0") / "equilibrium.json");
    const auto& g = e0["periodic_growth"];
    double exact = std::pow(3.0, 12) - 1.0;
    double rate = g["rate"].get<double>();
    bool pass = g["n"] == 12 && g["fixed_points"].get<double>() == exact &&
                std::fabs(rate - log3) / log3 < 0.02;
    report(lines, 3, pass,
           "#Fix(E^12) " + std::to_string(g["fixed_points"].get<std::uint64_t>()) + " (3^12-1), rate " +
               fmt("%.7f", rate),
           jobs["equilibrium0"].seconds, 5);
  }

  // 4. Intermingled raster.
  {
    auto b = load(dir("basin") / "basin.json");
    double u = b["fractions"]["undecided"], f0 = b["fractions"]["basin0"], f1 = b["fractions"]["basin1"];
    double agree = b["symmetry"]["agreement"];
    bool im = b["intermingled"]["passed"].get<bool>();
    bool pass = u < 0.01 && std::fabs(f0 - 0.5) <= 0.02 && std::fabs(f1 - 0.5) <= 0.02 && agree >= 0.99 && im &&
                b["params"]["n_max"] == 5000 && b["width"] == 1024 && b["height"] == 1024;
    std::string d = "undecided " + fmt("%.4f", u) + ", B0 " + fmt("%.4f", f0) + ", B1 " + fmt("%.4f", f1) +
                    ", symmetry " + fmt("%.4f", agree) + ", coarse cells " + (im ? "ok" : "FAIL") + " (" +
                    std::to_string(b["intermingled"]["failures"].get<int>()) + " failing)";
    report(lines, 4, pass, d, jobs["basin"].seconds, 600);

    // Not gating: the same checks once the classifier has time to decide.
    auto t0 = std::chrono::steady_clock::now();
    auto r = kanlab::basins::raster(kanlab::skew::KanSystem::kan1994(), 512, 256, {200000, 1e-6, 50}, 8);
    auto sym = kanlab::basins::symmetry_agreement(r);
    auto inter = kanlab::basins::intermingled_test(r, 32, 16);
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("  diagnostic (not gating) 512x256 at N_max=200000: undecided %.4f, B0 %.4f, B1 %.4f, "
                "symmetry %.4f, coarse cells %s (%zu of %zu without both labels), %.1fs\n",
                r.fractions.undecided, r.fractions.basin0, r.fractions.basin1, sym.agreement,
                inter.passed ? "ok" : "FAIL", inter.failures, inter.cells.size(), s);
  }

  // 5. Separating map.
  auto orbits = load(dir("orbits") / "orbits.json");
  auto sigma = load(dir("orbits") / "sigma.json");
  {
    double frac = sigma["symmetry"]["fraction"], mean = sigma["mean_sigma"];
    double match = orbits["sigma_match"]["fraction"];
    bool pass = sigma["samples"] == 4096 && sigma["symmetry"]["bound"] == 2e-4 && frac >= 0.99 &&
                std::fabs(mean - 0.5) <= 0.01 && match >= 0.95 && orbits["sigma_match"]["n_max"] == 8 &&
                orbits["sigma_match"]["checked"].get<int>() > 0;
    std::string d = std::to_string(sigma["decided"].get<int>()) + "/4096 decided, symmetric pairs " +
                    fmt("%.4f", frac) + ", mean sigma " + fmt("%.6f", mean) + ", periodic matches " +
                    std::to_string(orbits["sigma_match"]["matched"].get<int>()) + "/" +
                    std::to_string(orbits["sigma_match"]["checked"].get<int>());
    report(lines, 5, pass, d, jobs["orbits"].seconds, 600);
  }

  // 6. Interior MME evidence.
  {
    const auto& conv = orbits["convergence"];
    bool positive = true;
    std::string means;
    for (const auto& row : conv["rows"]) {
      if (row["n"].get<int>() >= 6 && !(row["mean_exponent"].get<double>() > 0)) positive = false;
    }
    bool all_repelling = orbits["multiplier_below_one"] == 0 && conv["exponents_non_negative"].get<bool>();
    bool gaps = conv["gaps_non_increasing"].get<bool>();
    bool pass = all_repelling && positive && gaps && orbits["accepted"].get<int>() > 0;
    std::string d = std::to_string(orbits["accepted"].get<int>()) + " accepted orbits, multipliers >= 1: " +
                    (all_repelling ? "yes" : "NO") + ", mean exponent > 0 for n>=6: " + (positive ? "yes" : "NO") +
                    ", gap slope n=4..12 " + fmt("%.3e", conv["gap_slope"].get<double>());
    report(lines, 6, pass, d, jobs["orbits"].seconds, 900);
  }

  // 7. epsilon expansion.
  {
    auto s = load(dir("scan") / "scan.json");
    bool pass = s["rows"].size() >= 2;
    std::string d;
    for (const char* f : {"fit0", "fit1"}) {
      double gamma = s[f]["gamma"], beta = s[f]["beta"];
      pass = pass && gamma >= 1.9 && gamma <= 2.1 && beta >= 0.2375 && beta <= 0.2625;
      d += std::string(f) + " gamma " + fmt("%.4f", gamma) + " beta " + fmt("%.5f", beta) + ", ";
    }
    const auto& first = s["rows"][0];
    double bound = std::pow(1.0 / 32.0, 3);
    double e0 = std::fabs(first["lambda0"].get<double>() + 1.0 / 4096);
    double e1 = std::fabs(first["lambda1"].get<double>() + 1.0 / 4096);
    pass = pass && first["epsilon"] == 1.0 / 32.0 && e0 < bound && e1 < bound;
    d += "|lambda(1/32)+1/4096| " + fmt("%.2e", std::max(e0, e1)) + " < " + fmt("%.2e", bound);
    report(lines, 7, pass, d, jobs["scan"].seconds, 60);
  }

  // 8. Entropy and pressure.
  {
    auto e = load(dir("entropy") / "entropy.json");
    double sb = e["base"]["slopes"][0]["slope"], sf = e["full"]["slopes"][0]["slope"];
    bool pass = e["base"]["slopes"][0]["epsilon"] == 0.05 && std::fabs(sb - log3) / log3 < 0.15 &&
                std::fabs(sf - log3) / log3 < 0.15;
    // Recount the fiber bound from the CSV.
    std::istringstream csv(slurp(dir("entropy") / "fibers.csv"));
    std::string row;
    std::getline(csv, row);
    std::size_t rows = 0, over = 0;
    std::map<std::string, int> fibers;
    int n_max = 0;
    while (std::getline(csv, row)) {
      auto c1 = row.find(','), c2 = row.rfind(',');
      int n = std::stoi(row.substr(c1 + 1, c2 - c1 - 1));
      double count = std::stod(row.substr(c2 + 1));
      ++fibers[row.substr(0, c1)];
      n_max = std::max(n_max, n);
      ++rows;
      if (count > n * (1.0 / 0.05 + 1.0)) ++over;
    }
    pass = pass && fibers.size() == 16 && n_max == 40 && over == 0 && e["fibers"]["passed"].get<bool>();
    std::string d = "slope base " + fmt("%.4f", sb) + ", full " + fmt("%.4f", sf) + " (log 3 = 1.0986), fiber rows " +
                    std::to_string(rows) + " over bound " + std::to_string(over) + ", max fiber rate " +
                    fmt("%.4f", e["fibers"]["max_rate"].get<double>());
    report(lines, 8, pass, d, jobs["entropy"].seconds, 600);
  }

  // 9. Determinism across worker counts.
  {
    double total = 0.0;
    for (auto& [name, job] : jobs) {
      Job again = job;
      total += run_job(again, run_b, 1);
    }
    std::size_t files = 0, differ = 0;
    std::string which;
    for (const auto& [name, job] : jobs) {
      for (const auto& entry : fs::directory_iterator(run_a / name)) {
        std::string f = entry.path().filename().string();
        if (f == "manifest.json") continue;
        ++files;
        if (slurp(entry.path()) != slurp(run_b / name / f)) {
          ++differ;
          which += " " + name + "/" + f;
        }
      }
    }
    report(lines, 9, differ == 0 && files > 0,
           std::to_string(files) + " artifacts compared (8 vs 1 workers), " + std::to_string(differ) + " differ" + which,
           total, 1e9);
  }

  bool all = true;
  std::cout << "\n";
  for (const auto& l : lines) {
    all = all && l.pass;
    std::printf("criterion %d: %s  %s  [%.1fs]\n", l.id, l.pass ? "PASS" : "FAIL", l.detail.c_str(), l.seconds);
  }
  return all ? 0 : 1;
}
