// Runs the twelve acceptance criteria at their stated sizes and tolerances and
// prints one pass/fail line per criterion. Exit status 0 iff all pass.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "weldbench/report.hpp"
#include "weldbench/suites.hpp"

namespace fs = std::filesystem;
using namespace weldbench;
using report::ValidationRecord;

namespace {

struct Criterion {
  int number;
  std::string title;
  double runtime_limit_s;  // 0: none stated
  std::function<std::vector<ValidationRecord>(suites::Runner&)> run;
  std::function<bool(const ValidationRecord&)> counts = [](const ValidationRecord&) { return true; };
};

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string summary(const std::vector<ValidationRecord>& recs) {
  std::size_t passed = 0;
  for (const auto& r : recs) passed += r.pass ? 1 : 0;
  return std::to_string(passed) + "/" + std::to_string(recs.size()) + " records";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weldbench acceptance criteria"};
  std::string cli_path, work_dir = "acceptance_work";
  std::uint64_t seed = 7;
  unsigned workers = 0;
  std::vector<int> only;
  app.add_option("--cli", cli_path, "path to the weldbench executable")->required();
  app.add_option("--work-dir", work_dir, "scratch directory for outputs");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--workers", workers, "worker threads (0: all cores)");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  suites::SuiteConfig cfg;
  cfg.seed = seed;
  cfg.workers = workers;
  cfg.sizes = suites::Sizes::acceptance();
  const auto& sz = cfg.sizes;

  auto prefix = [](std::vector<std::string> ps) {
    return [ps](const ValidationRecord& r) {
      for (const auto& p : ps) {
        if (starts_with(r.id, p)) return true;
      }
      return false;
    };
  };
  auto specfun = [](suites::Runner& run) {
    suites::specfun_suite(run);
    return run.take();
  };
  auto exact = [](suites::Runner& run) {
    suites::exact_suite(run);
    return run.take();
  };

  std::vector<Criterion> criteria = {
      {1, "double-gamma shift equations, 3 b x 40 points, rel < 1e-9", 10.0, specfun,
       prefix({"specfun.shift.b.", "specfun.shift.inverse_b."})},
      {2, "double-gamma normalization for 20 b, < 1e-11", 5.0, specfun, prefix({"specfun.normalization"})},
      {3, "moment formula consistency: lambda=0, root swap, both roots, 200 tuples", 30.0, exact,
       prefix({"exact.moment.lambda_zero", "exact.moment.root_swap", "exact.moment.both_roots"})},
      {4, "reflection product and R(Q) = 1, 100 tuples, < 1e-8", 0.0, exact, prefix({"exact.reflection."})},
      {5, "three-point reflection residual, 100 tuples, < 1e-8", 0.0, exact, prefix({"exact.hbar.reflection"})},
      {6, "disk length constants by quadrature, rel < 1e-8", 0.0, exact, prefix({"exact.disk."})},
      {7, "cross-formula, shift, composition and duality identities", 0.0, exact,
       prefix({"exact.cross.", "exact.shift_relations", "exact.composition", "exact.duality"})},
      {8, "Monte Carlo moments at 8 tuples, N=1e5: |mc - exact| < 3 se, se/exact < 2%", 0.0,
       [&](suites::Runner& run) {
         suites::loewner_headline(run, sz.sle_n);
         return run.take();
       },
       [](const ValidationRecord& r) { return r.id.find(".lambda") != std::string::npos; }},
      {9, "tail slope on y in (10, 1000) within 15% of -lambda0, N=1e5", 0.0,
       [&](suites::Runner& run) {
         suites::loewner_tail(run, sz.tail_n);
         return run.take();
       }},
      {10, "conditioned-process equivalence KS p > 0.01 and tail integral 1/(2a^2)", 0.0,
       [&](suites::Runner& run) {
         suites::fieldsim_quadrature(run);
         suites::fieldsim_equivalence(run, sz.ks_n);
         return run.take();
       },
       prefix({"fieldsim.equivalence.", "fieldsim.tail_time_integral"})},
      {11, "chaos moments vs reflection and three-point constants within 10%, n=4000, 8192 cells", 1200.0,
       [&](suites::Runner& run) {
         suites::fieldsim_gmc(run, sz.gmc_n, sz.strip_cells, sz.interval_cells);
         return run.take();
       }},
  };

  std::vector<std::string> lines;
  std::vector<ValidationRecord> all;
  bool ok = true;
  auto selected = [&](int k) { return only.empty() || std::find(only.begin(), only.end(), k) != only.end(); };
  auto emit = [&](int k, bool pass, const std::string& title, const std::string& detail, double sec) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s  %2d  %-84s %s (%.1fs)", pass ? "PASS" : "FAIL", k, title.c_str(),
                  detail.c_str(), sec);
    std::printf("%s\n", buf);
    std::fflush(stdout);
    lines.push_back(buf);
    ok = ok && pass;
  };

  for (const auto& c : criteria) {
    if (!selected(c.number)) continue;
    suites::Runner run(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<ValidationRecord> recs;
    for (auto& r : c.run(run)) {
      if (c.counts(r)) recs.push_back(std::move(r));
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = !recs.empty();
    for (const auto& r : recs) pass = pass && r.pass;
    std::string detail = summary(recs);
    if (c.runtime_limit_s > 0.0 && sec > c.runtime_limit_s) {
      pass = false;
      detail += ", runtime above " + suites::tag(c.runtime_limit_s) + "s";
    }
    emit(c.number, pass, c.title, detail, sec);
    for (const auto& r : recs) {
      if (!r.pass) std::printf("      failed %s: observed %s expected %s %s\n", r.id.c_str(), report::fmt(r.observed).c_str(),
                               report::fmt(r.expected).c_str(), r.note.c_str());
    }
    all.insert(all.end(), recs.begin(), recs.end());
  }

  if (selected(12)) {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path a = fs::path(work_dir) / "determinism_a", b = fs::path(work_dir) / "determinism_b";
    fs::remove_all(a);
    fs::remove_all(b);
    auto invoke = [&](const fs::path& out) {
      return run_command("\"" + cli_path + "\" --seed " + std::to_string(seed) + " --out \"" + out.string() +
                         "\" validate all > /dev/null 2>&1");
    };
    const int ca = invoke(a), cb = invoke(b);
    bool pass = true;
    std::string detail = "exit codes " + std::to_string(ca) + "," + std::to_string(cb);
    for (const char* name : {"all.csv", "all.json"}) {
      const bool same = fs::exists(a / name) && fs::exists(b / name) && slurp(a / name) == slurp(b / name);
      pass = pass && same;
      detail += std::string(", ") + name + (same ? " identical" : " differ");
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit(12, pass, "validate all --seed " + std::to_string(seed) + " twice gives byte-identical CSV/JSON", detail, sec);
  }

  fs::create_directories(work_dir);
  report::write_text((fs::path(work_dir) / "acceptance_records.csv").string(), report::records_csv(all));
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  report::write_text((fs::path(work_dir) / "acceptance_summary.txt").string(), text);
  std::printf("%s\n", ok ? "all acceptance criteria pass" : "some acceptance criteria fail");
  return ok ? 0 : 1;
}
