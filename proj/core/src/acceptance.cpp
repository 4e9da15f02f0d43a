#include "neuronlab/acceptance.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "neuronlab/errors.hpp"
#include "neuronlab/experiments.hpp"

namespace neuronlab {
namespace {

namespace fs = std::filesystem;

std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << x;
  return os.str();
}

int count_passed(const std::vector<TheoremReport>& reports, const std::string& id) {
  int n = 0;
  for (const auto& r : reports) {
    if (r.theorem_id == id && r.passed) ++n;
  }
  return n;
}

int count_with_id(const std::vector<TheoremReport>& reports, const std::string& id) {
  int n = 0;
  for (const auto& r : reports) {
    if (r.theorem_id == id) ++n;
  }
  return n;
}

const TheoremReport* find_report(const std::vector<TheoremReport>& reports,
                                 const std::string& id) {
  for (const auto& r : reports) {
    if (r.theorem_id == id) return &r;
  }
  return nullptr;
}

ExperimentResult run_named(const std::string& name, std::uint64_t seed) {
  ExperimentSpec spec = find_experiment(name);
  spec.seed = seed;
  return execute_experiment(spec);
}

void c1_failure(CriterionResult& c, const AcceptanceOptions& o) {
  const ExperimentResult res = run_named("thm31_failure", o.seed);
  const TheoremReport& r = res.reports.front();
  c.passed = res.passed();
  c.detail = "flagged fraction " + fmt(r.observed) + " >= " +
             fmt(r.predicted - r.tolerance) + "; " + r.note;
  c.reports = res.reports;
}

void c2_closed_form(CriterionResult& c, const AcceptanceOptions& o) {
  const int d = 5;
  const int cases = 50;
  const std::int64_t n = 1000000;
  const InputDistribution dist = InputDistribution::standard_gaussian(d);
  int agree = 0;
  for (int k = 0; k < cases; ++k) {
    Rng rng(derive_seed(o.seed, k));
    const Vector v = random_unit_vector(d, rng);
    const double norm = std::uniform_real_distribution<double>(0.2, 2.0)(rng);
    const Vector w = norm * random_unit_vector(d, rng);
    const Problem p(dist, make_relu(), v);
    const GradEstimate mc =
        population_gradient_mc(p, w, n, derive_seed(o.seed, 1000 + k));
    const Vector closed = gradient_closed_form_gaussian_relu(w, v);
    bool ok = true;
    for (int i = 0; i < d; ++i) {
      if (std::abs(closed[i] - mc.mean[i]) > 4.0 * mc.std_err[i]) ok = false;
    }
    if (ok) ++agree;
  }
  c.passed = agree >= 48;
  c.detail = std::to_string(agree) + "/50 points agree within 4 SE (need 48)";
}

void c3_correlation(CriterionResult& c, const AcceptanceOptions& o) {
  const ExperimentResult res = run_named("thm42_correlation", o.seed);
  const int ok = count_passed(res.reports, "correlation");
  const int total = count_with_id(res.reports, "correlation");
  const TheoremReport* ray = find_report(res.reports, "stationary_ray");
  c.passed = ok == 100 && total == 100 && ray != nullptr && ray->passed;
  c.detail = std::to_string(ok) + "/" + std::to_string(total) +
             " correlation checks; stationary ray " +
             (ray != nullptr && ray->passed ? "clear" : "NOT clear");
  c.reports = res.reports;
}

void c4_pie_slice(CriterionResult& c, const AcceptanceOptions& o) {
  const ExperimentResult res = run_named("lemB1_pie_slice", o.seed);
  const int ok = count_passed(res.reports, "pie_slice");
  const TheoremReport* refine = find_report(res.reports, "pie_slice_refinement");
  c.passed = res.passed() && ok == 12;
  c.detail = std::to_string(ok) + "/12 grid points above the bound; refinement change " +
             fmt(refine != nullptr ? refine->observed : -1.0);
  c.reports = res.reports;
}

void c5_init(CriterionResult& c, const AcceptanceOptions& o) {
  const ExperimentResult res = run_named("lem51_init_prob", o.seed);
  c.passed = res.passed() && res.reports.size() == 3;
  for (const auto& r : res.reports) {
    c.detail += "d=" + std::to_string(r.dims.front()) + ": " + fmt(r.observed) +
                " vs " + fmt(r.predicted) + "; ";
  }
  c.reports = res.reports;
}

void c6_gd_rate(CriterionResult& c, const AcceptanceOptions& o) {
  const ExperimentResult res = run_named("thm53_gd_rate", o.seed);
  c.passed = res.passed();
  c.detail = std::to_string(count_passed(res.reports, "gd_rate")) + " envelope, " +
             std::to_string(count_passed(res.reports, "gd_monotone")) +
             " monotone of " + std::to_string(count_with_id(res.reports, "gd_rate")) +
             " runs";
  c.reports = res.reports;
}

void c7_sgd(CriterionResult& c, const AcceptanceOptions& o) {
  const ExperimentResult res = run_named("thm53_sgd", o.seed);
  const TheoremReport& r = res.reports.front();
  c.passed = res.passed();
  c.detail = r.note;
  if (const TheoremReport* diag = find_report(res.reports, "sgd_practical_step")) {
    c.detail += "; diagnostic (" + diag->note + "): " + fmt(diag->observed);
  }
  c.reports = res.reports;
}

void c8_flow(CriterionResult& c, const AcceptanceOptions& o) {
  const ExperimentResult angle = run_named("lem61_angle", o.seed);
  const ExperimentResult rate = run_named("thm63_flow_rate", o.seed);
  const int a = count_passed(angle.reports, "angle_monotone");
  const int r = count_passed(rate.reports, "flow_rate_spherical");
  c.passed = angle.passed() && rate.passed() && a == 50 && r == 50;
  c.detail = std::to_string(a) + "/50 angle monotone, " + std::to_string(r) +
             "/50 under the envelope, " +
             std::to_string(count_passed(rate.reports, "flow_rate_safe_zone")) + "/" +
             std::to_string(count_with_id(rate.reports, "flow_rate_safe_zone")) +
             " safe-zone envelopes";
  c.reports = angle.reports;
  c.reports.insert(c.reports.end(), rate.reports.begin(), rate.reports.end());
}

void c9_fig1(CriterionResult& c, const AcceptanceOptions& o) {
  ExperimentSpec spec = builtin_fig1();
  spec.seed = o.seed;
  const ExperimentResult res = execute_experiment(spec);
  c.passed = res.passed();
  std::string dists;
  for (const auto& r : res.reports) {
    if (r.theorem_id == "fig1_converged") dists += fmt(r.observed, 3) + " ";
  }
  const TheoremReport* rise = find_report(res.reports, "fig1_angle_rise");
  const TheoremReport* cover = find_report(res.reports, "fig1_angle_coverage");
  c.detail = "final distances " + dists + "; angle rise " +
             fmt(rise != nullptr ? rise->observed : -1.0) + "; max coverage gap " +
             fmt(cover != nullptr ? cover->observed : -1.0);
  c.reports = res.reports;
}

void c10_strict(CriterionResult& c, const AcceptanceOptions& o) {
  const ExperimentResult res = run_named("thm33_strict_rate", o.seed);
  const int id = count_passed(res.reports, "strict_monotone_rate:identity");
  const int leaky = count_passed(res.reports, "strict_monotone_rate:leaky_relu:0.5");
  c.passed = res.passed() && id == 20 && leaky == 20;
  c.detail = "identity " + std::to_string(id) + "/20, leaky_relu(0.5) " +
             std::to_string(leaky) + "/20";
  c.reports = res.reports;
}

void c11_variance(CriterionResult& c, const AcceptanceOptions& o) {
  const ExperimentResult res = run_named("sec32_variance", o.seed);
  c.passed = res.passed();
  for (const auto& r : res.reports) {
    c.detail += r.theorem_id + "=" + fmt(r.observed) + " ";
  }
  c.reports = res.reports;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    out[fs::relative(entry.path(), root).string()] =
        std::string(std::istreambuf_iterator<char>(in), {});
  }
  return out;
}

void c12_determinism(CriterionResult& c, const AcceptanceOptions& o) {
  const fs::path base = fs::absolute(o.scratch_dir) / "determinism";
  fs::remove_all(base);
  const fs::path roots[2] = {base / "a", base / "b"};
  std::string codes;
  bool crashed = false;
  for (const auto& root : roots) {
    fs::create_directories(root);
    if (!o.cli_path.empty()) {
      const std::string cmd = "NEURONLAB_OUT='" + root.string() + "' '" + o.cli_path +
                              "' run fig1 --seed 7 > '" + (root / "stdout.log").string() +
                              "' 2>&1";
      const int status = std::system(cmd.c_str());
      const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      // 0 and 1 both leave a complete tree.
      crashed = crashed || code < 0 || code > 1;
      codes += (codes.empty() ? "" : ",") + std::to_string(code);
      fs::rename(root / "stdout.log", base / (root.filename().string() + ".log"));
    } else {
      ExperimentSpec spec = builtin_fig1();
      spec.seed = 7;
      run_experiment(spec, root.string());
    }
  }
  const auto a = read_tree(roots[0]);
  const auto b = read_tree(roots[1]);
  std::size_t bytes = 0;
  for (const auto& [k, v] : a) bytes += v.size();
  c.passed = !crashed && !a.empty() && a == b;
  c.detail = std::to_string(a.size()) + " files, " + std::to_string(bytes) + " bytes; " +
             (a == b ? "trees identical" : "trees differ") +
             (o.cli_path.empty() ? " (in-process)" : " (via CLI, exit codes " + codes + ")");
}

struct Criterion {
  const char* title;
  double budget;
  void (*run)(CriterionResult&, const AcceptanceOptions&);
};

const std::map<int, Criterion>& table() {
  static const std::map<int, Criterion> t = {
      {1, {"adversarial failure rate", 300, c1_failure}},
      {2, {"closed-form gradient vs Monte Carlo", 120, c2_closed_form}},
      {3, {"correlation lower bound", 300, c3_correlation}},
      {4, {"pie-slice integral bound", 60, c4_pie_slice}},
      {5, {"initialization probability", 60, c5_init}},
      {6, {"GD rate in the safe zone", 60, c6_gd_rate}},
      {7, {"SGD rate with prescribed constants", 1800, c7_sgd}},
      {8, {"flow angle monotonicity and rate", 300, c8_flow}},
      {9, {"shifted-Gaussian angle experiment", 600, c9_fig1}},
      {10, {"strictly monotone linear rate", 120, c10_strict}},
      {11, {"periodic gradient variance collapse", 600, c11_variance}},
      {12, {"determinism gate", 0, c12_determinism}},
  };
  return t;
}

}  // namespace

std::vector<int> criterion_ids() {
  std::vector<int> ids;
  for (const auto& [id, c] : table()) ids.push_back(id);
  return ids;
}

CriterionResult run_criterion(int id, const AcceptanceOptions& opts) {
  const auto it = table().find(id);
  if (it == table().end()) throw ConfigError("no criterion " + std::to_string(id));
  CriterionResult c;
  c.id = id;
  c.title = it->second.title;
  c.budget_seconds = it->second.budget;
  const auto start = std::chrono::steady_clock::now();
  try {
    it->second.run(c, opts);
  } catch (const std::exception& e) {
    c.passed = false;
    c.detail = std::string("error: ") + e.what();
  }
  c.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (c.budget_seconds > 0.0 && c.seconds > c.budget_seconds) {
    c.passed = false;
    c.detail += "; over the runtime budget";
  }
  return c;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.title << ": "
     << r.detail << " (" << fmt(r.seconds, 3) << " s";
  if (r.budget_seconds > 0.0) os << " / " << r.budget_seconds << " s";
  os << ")";
  return os.str();
}

}  // namespace neuronlab
