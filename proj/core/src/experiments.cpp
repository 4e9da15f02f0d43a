#include "neuronlab/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "neuronlab/distributions.hpp"
#include "neuronlab/errors.hpp"

#ifndef NEURONLAB_VERSION
#define NEURONLAB_VERSION "0.0.0"
#endif

namespace neuronlab {
namespace {

namespace fs = std::filesystem;
constexpr double kPi = std::numbers::pi;

std::string fmt(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

std::string fmt17(double x) {
  char buf[64];
  auto [end, ec] =
      std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, end);
}

Vector parse_vector(std::string_view text, std::string_view what) {
  if (text.size() < 2 || text.front() != '(' || text.back() != ')') {
    throw ConfigError("expected a vector like (1,0) for '" + std::string(what) +
                      "', got '" + std::string(text) + "'");
  }
  const auto items = split_list(text.substr(1, text.size() - 2));
  Vector v(static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) v[i] = parse_double(items[i], what);
  return v;
}

std::map<std::string, std::string> parse_args(std::string_view key,
                                              std::string_view args) {
  std::map<std::string, std::string> out;
  for (const auto& part : split_list(args)) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("bad key '" + std::string(key) + "': expected name=value");
    }
    out[part.substr(0, eq)] = part.substr(eq + 1);
  }
  return out;
}

std::vector<std::string> split_bar(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto bar = text.find('|', start);
    out.push_back(text.substr(start, bar - start));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return out;
}

// Unit vector orthogonal to v (v unit).
Vector orthogonal_unit(const Vector& v, Rng& rng) {
  while (true) {
    Vector u = random_unit_vector(static_cast<int>(v.size()), rng);
    u -= u.dot(v) * v;
    const double n = u.norm();
    if (n > 1e-6) return u / n;
  }
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Runs fn(k) for k in [0, n) on up to `workers` threads. Each index writes
// only its own slot, so results do not depend on scheduling.
void for_each_trial(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::vector<std::thread> threads;
  for (int t = 0; t < workers; ++t) {
    threads.emplace_back([&, t] {
      for (int k = t; k < n; k += workers) fn(k);
    });
  }
  for (auto& th : threads) th.join();
}

TheoremReport make_report(std::string id, double predicted, double observed,
                          double tolerance, bool passed, std::uint64_t seed,
                          std::int64_t n, int dim) {
  TheoremReport r;
  r.theorem_id = std::move(id);
  r.predicted = predicted;
  r.observed = observed;
  r.tolerance = tolerance;
  r.passed = passed;
  r.seed = seed;
  r.n = n;
  r.dims = {dim};
  return r;
}

std::string stem(int k) { return "trajectory_" + std::to_string(k); }

// ---------------------------------------------------------------------------

ExperimentResult run_thm31(const ExperimentSpec& s) {
  const int d = static_cast<int>(s.get_int("dim"));
  const std::string method_key = s.get("method");
  Method method = Method::kGd;
  if (method_key == "sgd") {
    method = Method::kSgd;
  } else if (method_key == "flow") {
    method = Method::kGradientFlow;
  } else if (method_key != "gd") {
    throw ConfigError("unknown method '" + method_key + "': expected gd, sgd or flow");
  }
  const AdversarialOutcome out = check_adversarial_failure(
      d, parse_initializer(s.get("init")), method, s.trials,
      s.get_double("horizon"), s.get_double("eta"), s.seed);
  ExperimentResult res;
  res.reports.push_back(out.report);
  return res;
}

ExperimentResult run_thm33(const ExperimentSpec& s) {
  const int d = static_cast<int>(s.get_int("dim"));
  const InputDistribution dist = parse_distribution(s.get("dist"), d);
  const auto bound_sq = dist.support_bound_sq();
  if (!bound_sq) throw ConfigError("thm33_strict_rate needs a bounded distribution");
  const double c1 = *bound_sq;
  const double lambda = min_second_moment_eigenvalue(
      dist, s.get_int("eig_samples"), derive_seed(s.seed, 1u << 30));
  const double fraction = s.get_double("eta_fraction");

  ExperimentResult res;
  const auto acts = s.get_list("acts");
  for (std::size_t a = 0; a < acts.size(); ++a) {
    const Activation act = parse_activation(acts[a]);
    const double gamma = act.global_derivative_lower_bound();
    const double c2 = act.derivative_upper_bound();
    const double eta = fraction * lambda * gamma * gamma / (c1 * c1 * std::pow(c2, 4));
    OptimizerConfig cfg;
    cfg.method = Method::kGd;
    cfg.step_size = eta;
    cfg.iterations = s.get_int("iterations");
    cfg.gradient_mode = GradientMode::monte_carlo(s.get_int("mc_samples"));
    for (int k = 0; k < s.trials; ++k) {
      const std::uint64_t seed = derive_seed(s.seed, a * 100000 + k);
      Rng rng(seed);
      const Vector v = random_unit_vector(d, rng);
      const Vector w0 =
          v + uniform(rng, 0.2, 1.5) * random_unit_vector(d, rng);
      const Problem p(dist, act, v);
      const Trajectory traj = run_gd(p, w0, cfg, derive_seed(seed, 1));
      TheoremReport r =
          check_strict_monotone_rate(p, gamma, lambda, c1, c2, eta, traj);
      r.theorem_id += ":" + act.key();
      r.seed = seed;
      res.reports.push_back(r);
    }
  }
  return res;
}

ExperimentResult run_thm42(const ExperimentSpec& s) {
  const int d = static_cast<int>(s.get_int("dim"));
  const InputDistribution dist = InputDistribution::standard_gaussian(d);
  const Activation act = parse_activation(s.get("act"));
  const SpreadCertificate cert = gaussian_certificate(d, act, s.get_double("alpha"));
  const double theta_max = s.get_double("theta_max");
  const std::int64_t n = s.get_int("mc_samples");

  ExperimentResult res;
  for (int k = 0; k < s.trials; ++k) {
    const std::uint64_t seed = derive_seed(s.seed, k);
    Rng rng(seed);
    const Vector v = random_unit_vector(d, rng);
    const Vector u = orthogonal_unit(v, rng);
    const double theta = uniform(rng, 0.0, theta_max);
    const double r = uniform(rng, 0.05, 2.0);
    const Vector w = r * (std::cos(theta) * v + std::sin(theta) * u);
    res.reports.push_back(
        check_correlation(Problem(dist, act, v), cert, w, n, derive_seed(seed, 1)));
  }
  const Problem ray(dist, act, Vector::Unit(d, 0));
  res.reports.push_back(check_stationary_ray(ray, s.get_doubles("ray_a"),
                                             s.get_int("ray_samples"),
                                             derive_seed(s.seed, 1u << 30)));
  return res;
}

ExperimentResult run_lemb1(const ExperimentSpec& s) {
  const auto alphas = s.get_doubles("alphas");
  const auto fracs = s.get_doubles("delta_over_pi");
  const int directions = static_cast<int>(s.get_int("directions"));
  ExperimentResult res;
  double worst_change = 0.0;
  for (double alpha : alphas) {
    for (double f : fracs) {
      const double delta = f * kPi;
      TheoremReport r = check_pie_slice_bound(alpha, delta, directions);
      r.note = "alpha=" + fmt(alpha) + " delta=" + fmt(delta);
      res.reports.push_back(r);
      for (int k = 0; k < directions; ++k) {
        const double psi = 2.0 * kPi * k / directions;
        const Eigen::Vector2d u(std::cos(psi), std::sin(psi));
        const double base = pie_slice_integral(alpha, delta, u, 128, 512);
        const double fine = pie_slice_integral(alpha, delta, u, 256, 1024);
        worst_change = std::max(worst_change, std::abs(fine - base) / std::abs(fine));
      }
    }
  }
  res.reports.push_back(make_report("pie_slice_refinement", 0.0, worst_change,
                                    1e-6, worst_change < 1e-6, 0, directions, 2));
  return res;
}

ExperimentResult run_lem51(const ExperimentSpec& s) {
  ExperimentResult res;
  const auto dims = s.get_doubles("dims");
  for (std::size_t j = 0; j < dims.size(); ++j) {
    const int d = static_cast<int>(dims[j]);
    const double tau = 1.0 / (d * std::sqrt(2.0));
    res.reports.push_back(
        check_init_probability(d, tau, s.get_int("samples"), derive_seed(s.seed, j)));
  }
  return res;
}

ExperimentResult run_thm53_gd(const ExperimentSpec& s) {
  const int d = static_cast<int>(s.get_int("dim"));
  const Activation act = make_relu();
  const SpreadCertificate cert = gaussian_certificate(d, act);
  const RateConstants k = rate_constants(cert);
  const double dist0 = std::sqrt(s.get_double("dist0_sq"));
  OptimizerConfig cfg;
  cfg.method = Method::kGd;
  cfg.step_size = k.eta_max_gd;
  cfg.iterations = s.get_int("iterations");
  cfg.gradient_mode = GradientMode::closed_form();

  ExperimentResult res;
  const InputDistribution dist = InputDistribution::standard_gaussian(d);
  for (int t = 0; t < s.trials; ++t) {
    const std::uint64_t seed = derive_seed(s.seed, t);
    Rng rng(seed);
    const Vector v = random_unit_vector(d, rng);
    const Vector w0 = v + dist0 * random_unit_vector(d, rng);
    const Problem p(dist, act, v);
    const Trajectory traj = run_gd(p, w0, cfg);
    const double d0 = traj.front().dist_sq;
    const double rate = 1.0 - k.eta_max_gd * k.lambda_gd / 2.0;
    double excess = -1.0;
    double rise = -1.0;
    for (std::size_t i = 0; i < traj.entries.size(); ++i) {
      const auto& e = traj.entries[i];
      excess = std::max(excess, e.dist_sq - d0 * std::pow(rate, e.time));
      if (i > 0) rise = std::max(rise, e.dist_sq - traj.entries[i - 1].dist_sq);
    }
    TheoremReport env = make_report("gd_rate", d0 * std::pow(rate, traj.back().time),
                                    traj.back().dist_sq, 1e-12, excess <= 1e-12,
                                    seed, cfg.iterations, d);
    env.note = "eta=" + fmt(k.eta_max_gd) + " lambda=" + fmt(k.lambda_gd) +
               " worst excess " + fmt(excess);
    res.reports.push_back(env);
    res.reports.push_back(make_report("gd_monotone", 0.0, rise, 0.0, rise <= 0.0,
                                      seed, cfg.iterations, d));
    res.trajectories.emplace_back(stem(t), traj);
  }
  return res;
}

ExperimentResult run_thm53_sgd(const ExperimentSpec& s) {
  const int d = static_cast<int>(s.get_int("dim"));
  const Activation act = make_relu();
  const SpreadCertificate cert = gaussian_certificate(d, act);
  const SgdTargets targets{s.get_double("eps1"), s.get_double("eps2"),
                           s.get_double("delta_fail")};
  const RateConstants k = rate_constants(cert, targets);
  const double budget = s.get_double("max_iterations");
  const InputDistribution dist = InputDistribution::standard_gaussian(d);

  auto run_trials = [&](double eta, std::int64_t iterations, std::uint64_t base,
                        int workers) {
    OptimizerConfig cfg;
    cfg.method = Method::kSgd;
    cfg.step_size = eta;
    cfg.iterations = iterations;
    cfg.record_stride = iterations;
    std::vector<int> hit(s.trials, 0);
    for_each_trial(s.trials, workers, [&](int t) {
      const std::uint64_t seed = derive_seed(base, t);
      Rng rng(seed);
      const Vector v = random_unit_vector(d, rng);
      const Vector w0 =
          v + std::sqrt(1.0 - targets.eps1) * random_unit_vector(d, rng);
      const Trajectory traj =
          run_sgd(Problem(dist, act, v), w0, cfg, derive_seed(seed, 1));
      hit[t] = traj.back().dist_sq <= targets.eps2 ? 1 : 0;
    });
    int total = 0;
    for (int h : hit) total += h;
    return static_cast<double>(total) / s.trials;
  };

  ExperimentResult res;
  const double claimed = 1.0 - k.failure_prob;
  const std::string constants =
      "eta=" + fmt(k.eta_max_sgd) + " T=" + fmt(std::ceil(k.t_sgd)) +
      " m=" + fmt(k.m_epoch) + " c3=" + fmt(k.c3) + " lambda=" + fmt(k.lambda_flow) +
      " claimed failure probability " + fmt(k.failure_prob);
  const int workers = static_cast<int>(s.get_int("workers"));
  TheoremReport primary;
  primary.theorem_id = "sgd_rate";
  primary.predicted = claimed;
  primary.seed = s.seed;
  primary.dims = {d};
  if (k.degenerate || !(k.t_sgd <= budget)) {
    primary.observed = std::nan("");
    primary.passed = false;
    primary.n = 0;
    primary.note = "infeasible horizon: " + constants +
                   " exceeds the iteration budget " + fmt(budget);
  } else {
    const std::int64_t horizon = static_cast<std::int64_t>(std::ceil(k.t_sgd));
    primary.observed = run_trials(k.eta_max_sgd, horizon, s.seed, workers);
    const double se = std::sqrt(std::max(0.0, claimed * (1.0 - claimed)) / s.trials);
    primary.tolerance = 4.0 * se;
    primary.passed = primary.observed >= claimed - primary.tolerance;
    primary.n = s.trials;
    primary.note = constants;
  }
  res.reports.push_back(primary);

  const std::int64_t diag_iters = s.get_int("diag_iterations");
  if (diag_iters > 0) {
    TheoremReport diag;
    diag.theorem_id = "sgd_practical_step";
    diag.informational = true;
    diag.predicted = 1.0;
    diag.observed = run_trials(s.get_double("diag_eta"), diag_iters,
                               derive_seed(s.seed, 1u << 30), workers);
    diag.passed = diag.observed >= 1.0;
    diag.seed = s.seed;
    diag.n = s.trials;
    diag.dims = {d};
    diag.note = "eta=" + s.get("diag_eta") + " T=" + std::to_string(diag_iters) +
                "; fraction of runs with |w_T - v|^2 <= eps2";
    res.reports.push_back(diag);
  }
  return res;
}

struct FlowBatch {
  std::vector<Trajectory> runs;
  std::vector<bool> ok;
  std::vector<std::string> errors;
};

FlowBatch flow_batch(const ExperimentSpec& s) {
  const int d = static_cast<int>(s.get_int("dim"));
  const InputDistribution dist = InputDistribution::standard_gaussian(d);
  const Activation act = make_relu();
  const Vector v = Vector::Unit(d, 0);
  const Problem p(dist, act, v);
  OptimizerConfig cfg;
  cfg.method = Method::kGradientFlow;
  cfg.t_max = s.get_double("t_max");
  cfg.flow_tolerance = s.get_double("tol");
  cfg.record_stride = s.get_int("record_stride");
  cfg.gradient_mode = GradientMode::closed_form();
  const double theta_max = s.get_double("theta_max");

  FlowBatch batch;
  batch.runs.resize(s.trials);
  batch.ok.assign(s.trials, true);
  std::vector<std::string> errors(s.trials);
  for_each_trial(s.trials, static_cast<int>(s.get_int("workers")), [&](int k) {
    Rng rng(derive_seed(s.seed, k));
    const Vector u = orthogonal_unit(v, rng);
    const double theta = uniform(rng, 0.0, theta_max);
    const double r = uniform(rng, 0.05, 2.0);
    const Vector w0 = r * (std::cos(theta) * v + std::sin(theta) * u);
    try {
      batch.runs[k] = run_gradient_flow(p, w0, cfg);
    } catch (const IntegrationFailure& e) {
      batch.runs[k] = e.partial();
      batch.ok[k] = false;
      errors[k] = "trial " + std::to_string(k) + ": " + e.what();
    }
  });
  for (auto& e : errors) {
    if (!e.empty()) batch.errors.push_back(e);
  }
  return batch;
}

ExperimentResult run_lem61(const ExperimentSpec& s) {
  FlowBatch batch = flow_batch(s);
  const double slack = 1e-6 + s.get_double("tol");
  ExperimentResult res;
  res.trial_errors = batch.errors;
  for (int k = 0; k < s.trials; ++k) {
    TheoremReport r = check_angle_monotone(batch.runs[k], slack);
    r.seed = derive_seed(s.seed, k);
    r.dims = {static_cast<int>(s.get_int("dim"))};
    res.reports.push_back(r);
    res.trajectories.emplace_back(stem(k), std::move(batch.runs[k]));
  }
  return res;
}

ExperimentResult run_thm63(const ExperimentSpec& s) {
  FlowBatch batch = flow_batch(s);
  const double tol = s.get_double("tol");
  const double alpha = s.get_double("alpha");
  const double beta = spread_params_for_gaussian(alpha).beta;
  const double lambda = spherical_flow_rate(alpha, beta, s.get_double("eps"));
  const double lambda_safe = std::pow(alpha, 4) * beta / 210.0;
  ExperimentResult res;
  res.trial_errors = batch.errors;
  for (int k = 0; k < s.trials; ++k) {
    const Trajectory& traj = batch.runs[k];
    TheoremReport r = check_flow_rate(traj, lambda, 1e-6 + tol, "flow_rate_spherical");
    r.seed = derive_seed(s.seed, k);
    res.reports.push_back(r);
    if (traj.front().dist_sq < 1.0) {
      TheoremReport z = check_flow_rate(traj, lambda_safe, 1e-6 + tol,
                                        "flow_rate_safe_zone");
      z.seed = r.seed;
      res.reports.push_back(z);
    }
    res.trajectories.emplace_back(stem(k), std::move(batch.runs[k]));
  }
  return res;
}

ExperimentResult run_lem62(const ExperimentSpec& s) {
  const int d = static_cast<int>(s.get_int("dim"));
  const Activation act = make_relu();
  const Vector v = Vector::Unit(d, 0);
  const Vector u = Vector::Unit(d, 1);
  const auto thetas = s.get_doubles("thetas");
  const double scale = s.get_double("norm_fraction");
  ExperimentResult res;
  const auto dists = split_bar(s.get("dists"));
  for (std::size_t j = 0; j < dists.size(); ++j) {
    const Problem p(parse_distribution(dists[j], d), act, v);
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      const double th = thetas[i];
      const double norm = scale * norm_safe_threshold(th);
      if (!(norm > 0.0)) continue;
      const Vector w = norm * (std::cos(th) * v + std::sin(th) * u);
      TheoremReport r = check_norm_safe_region(
          p, w, s.get_int("mc_samples"), derive_seed(s.seed, j * 1000 + i));
      r.note = dists[j] + " theta=" + fmt(th);
      res.reports.push_back(r);

      // Same angle at a fraction of the exact sign-change norm.
      const double exact = scale * norm_growth_boundary(th);
      if (!(exact > 0.0)) continue;
      const Vector we = exact * (std::cos(th) * v + std::sin(th) * u);
      const std::int64_t n = s.get_int("mc_samples");
      const std::uint64_t seed = derive_seed(s.seed, j * 1000 + i + 500);
      const ScalarEstimate e = gradient_projection_mc(p, we, -we, n, seed);
      TheoremReport c;
      c.theorem_id = "norm_growth_boundary";
      c.predicted = 0.0;
      c.observed = e.mean;
      c.tolerance = 4.0 * e.std_err;
      c.passed = e.mean + c.tolerance >= 0.0;
      c.seed = seed;
      c.n = n;
      c.dims = {d};
      c.informational = true;
      c.note = dists[j] + " theta=" + fmt(th) + " |w|=" + fmt(exact);
      res.reports.push_back(c);
    }
  }
  for (double a : s.get_doubles("gap_angles")) {
    const double th = kPi - a;
    const double norm = scale * a * a * a / std::pow(kPi, 4);
    const Vector w = norm * (std::cos(th) * v + std::sin(th) * u);
    TheoremReport r = check_gaussian_norm_growth(w, v);
    r.note = "gap angle " + fmt(a);
    res.reports.push_back(r);
  }
  return res;
}

ExperimentResult run_sec32(const ExperimentSpec& s) {
  std::vector<int> dims;
  for (double d : s.get_doubles("dims")) dims.push_back(static_cast<int>(d));
  const int targets = static_cast<int>(s.get_int("targets"));
  const std::int64_t n = s.get_int("mc_samples");
  const Activation act = parse_activation(s.get("act"));
  const Activation control = parse_activation(s.get("control"));
  const auto main = gradient_variance_experiment(act, dims, targets, n, s.seed);
  const auto ctrl = gradient_variance_experiment(control, dims, targets, n, s.seed);

  ExperimentResult res;
  std::ostringstream csv;
  csv << "activation,dim,variance,variance_debiased\n";
  for (const auto* set : {&main, &ctrl}) {
    const std::string& key = set == &main ? act.key() : control.key();
    for (const auto& r : *set) {
      csv << key << ',' << r.dim << ',' << fmt17(r.variance) << ','
          << fmt17(r.variance_debiased) << '\n';
    }
  }
  res.files.emplace_back("variance.csv", csv.str());

  double worst_step = 0.0;
  for (std::size_t i = 1; i < main.size(); ++i) {
    worst_step = std::max(worst_step, main[i].variance / main[i - 1].variance);
  }
  const int dmax = dims.back();
  res.reports.push_back(make_report("variance_decreasing", 1.0, worst_step, 0.0,
                                    worst_step < 1.0, s.seed, n, dmax));
  const double ratio = main.back().variance / main.front().variance;
  const double max_ratio = s.get_double("max_ratio");
  res.reports.push_back(make_report("variance_collapse", max_ratio, ratio, 0.0,
                                    ratio <= max_ratio, s.seed, n, dmax));
  const double control_ratio = ctrl.back().variance / ctrl.front().variance;
  const double min_control = s.get_double("min_control_ratio");
  res.reports.push_back(make_report("variance_control", min_control, control_ratio,
                                    0.0, control_ratio >= min_control, s.seed, n,
                                    dmax));
  TheoremReport debiased = make_report(
      "variance_collapse_debiased", max_ratio,
      main.back().variance_debiased / main.front().variance_debiased, 0.0, true,
      s.seed, n, dmax);
  debiased.informational = true;
  res.reports.push_back(debiased);
  return res;
}

ExperimentResult run_fig1(const ExperimentSpec& s) {
  const int d = 2;
  const Problem p(parse_distribution(s.get("dist"), d),
                  parse_activation(s.get("act")),
                  parse_vector(s.get("target"), "target"));
  std::vector<Vector> inits;
  for (const auto& item : s.get_list("inits")) inits.push_back(parse_vector(item, "inits"));
  OptimizerConfig cfg;
  cfg.method = Method::kGd;
  cfg.step_size = s.get_double("eta");
  cfg.iterations = s.get_int("iterations");
  cfg.record_stride = s.get_int("record_stride");
  cfg.gradient_mode = GradientMode::monte_carlo(s.get_int("mc_samples"));

  const int runs = static_cast<int>(inits.size());
  std::vector<Trajectory> trajs(runs);
  for_each_trial(runs, static_cast<int>(s.get_int("workers")), [&](int k) {
    trajs[k] = run_gd(p, inits[k], cfg, derive_seed(s.seed, k));
  });

  ExperimentResult res;
  const double final_tol = s.get_double("final_distance");
  double best_rise = -kPi;
  int bad_angles = 0;
  std::vector<double> angles;
  for (int k = 0; k < runs; ++k) {
    const Trajectory& t = trajs[k];
    const double dist = std::sqrt(t.back().dist_sq);
    res.reports.push_back(make_report("fig1_converged", final_tol, dist, 0.0,
                                      dist <= final_tol, derive_seed(s.seed, k),
                                      cfg.gradient_mode.mc_samples, d));
    double top = -kPi;
    for (const auto& e : t.entries) {
      if (!e.angle || !(*e.angle > 0.0 && *e.angle <= kPi)) {
        ++bad_angles;
        continue;
      }
      top = std::max(top, *e.angle);
      angles.push_back(*e.angle);
    }
    if (t.front().angle) best_rise = std::max(best_rise, top - *t.front().angle);
    TheoremReport control = check_angle_monotone(t, 1e-6);
    control.theorem_id = "angle_monotone_control";
    control.informational = true;
    control.note = "expected to fail: shifted inputs are not spherically symmetric";
    res.reports.push_back(control);
  }
  const double min_rise = s.get_double("min_rise");
  res.reports.push_back(make_report("fig1_angle_rise", min_rise, best_rise, 0.0,
                                    best_rise >= min_rise, s.seed, runs, d));

  const double lo = s.get_double("cover_lo");
  const double hi = s.get_double("cover_hi");
  std::vector<double> inside;
  for (double a : angles) {
    if (a >= lo && a <= hi) inside.push_back(a);
  }
  std::sort(inside.begin(), inside.end());
  double gap = hi - lo;
  if (!inside.empty()) {
    gap = std::max(inside.front() - lo, hi - inside.back());
    for (std::size_t i = 1; i < inside.size(); ++i) {
      gap = std::max(gap, inside[i] - inside[i - 1]);
    }
  }
  const double max_gap = s.get_double("max_gap");
  res.reports.push_back(make_report("fig1_angle_coverage", max_gap, gap, 0.0,
                                    gap <= max_gap, s.seed, runs, d));
  res.reports.push_back(make_report("fig1_angle_range", 0.0, bad_angles, 0.0,
                                    bad_angles == 0, s.seed, runs, d));

  // Loss surface on a grid, all points sharing one input sample.
  const int grid = static_cast<int>(s.get_int("grid"));
  const double g_lo = s.get_double("grid_lo");
  const double g_hi = s.get_double("grid_hi");
  const std::int64_t gn = s.get_int("grid_samples");
  Rng rng(derive_seed(s.seed, 1u << 30));
  std::vector<Eigen::Vector2d> xs(gn);
  std::vector<double> labels(gn);
  for (auto& x : xs) {
    const Vector draw = p.dist.sample(rng);
    x = Eigen::Vector2d(draw[0], draw[1]);
  }
  for (std::int64_t i = 0; i < gn; ++i) {
    labels[i] = p.act.value(xs[i][0] * p.target[0] + xs[i][1] * p.target[1]);
  }
  std::ostringstream csv;
  csv << "w0,w1,loss\n";
  for (int i = 0; i < grid; ++i) {
    const double w0 = g_lo + (g_hi - g_lo) * i / (grid - 1);
    for (int j = 0; j < grid; ++j) {
      const double w1 = g_lo + (g_hi - g_lo) * j / (grid - 1);
      double acc = 0.0;
      for (std::int64_t k = 0; k < gn; ++k) {
        const double diff = p.act.value(w0 * xs[k][0] + w1 * xs[k][1]) - labels[k];
        acc += 0.5 * diff * diff;
      }
      csv << fmt17(w0) << ',' << fmt17(w1) << ',' << fmt17(acc / gn) << '\n';
    }
  }
  res.files.emplace_back("loss_grid.csv", csv.str());

  for (int k = 0; k < runs; ++k) res.trajectories.emplace_back(stem(k), std::move(trajs[k]));
  return res;
}

using Runner = ExperimentResult (*)(const ExperimentSpec&);

struct Entry {
  ExperimentSpec spec;
  Runner run;
};

ExperimentSpec make_spec(std::string name, std::string description, int trials,
                         std::map<std::string, std::string> params) {
  ExperimentSpec s;
  s.name = std::move(name);
  s.description = std::move(description);
  s.trials = trials;
  s.params = std::move(params);
  return s;
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e;
    e.push_back({make_spec("thm31_failure",
                           "adversarial inputs stall GD from product initializations",
                           1000,
                           {{"dim", "20"},
                            {"init", "normal:mean=0,sd=0.22360679774997896"},
                            {"method", "gd"},
                            {"eta", "0.1"},
                            {"horizon", "10000"}}),
                 run_thm31});
    e.push_back({make_spec("thm33_strict_rate",
                           "linear rate for strictly monotone activations", 20,
                           {{"dim", "3"},
                            {"dist", "ball:r=1"},
                            {"acts", "identity,leaky_relu:0.5"},
                            {"eig_samples", "1000000"},
                            {"mc_samples", "20000"},
                            {"iterations", "200"},
                            {"eta_fraction", "0.5"}}),
                 run_thm33});
    e.push_back({make_spec("thm42_correlation",
                           "gradient correlates with w - v under spread inputs", 100,
                           {{"dim", "5"},
                            {"act", "relu"},
                            {"alpha", "1"},
                            {"theta_max", "2.356194490192345"},
                            {"mc_samples", "1000000"},
                            {"ray_a", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0,"
                                      "1.1,1.2,1.3,1.4,1.5,1.6,1.7,1.8,1.9,2.0"},
                            {"ray_samples", "100000"}}),
                 run_thm42});
    e.push_back({make_spec("lemB1_pie_slice", "pie-slice integral lower bound", 1,
                           {{"alphas", "0.5,1,2"},
                            {"delta_over_pi", "0.125,0.25,0.5,1"},
                            {"directions", "360"}}),
                 run_lemb1});
    e.push_back({make_spec("lem51_init_prob",
                           "small Gaussian initialization lands in the safe zone", 1,
                           {{"dims", "5,10,20"}, {"samples", "100000"}}),
                 run_lem51});
    e.push_back({make_spec("thm53_gd_rate", "GD rate from the safe zone", 5,
                           {{"dim", "5"}, {"dist0_sq", "0.81"}, {"iterations", "1000"}}),
                 run_thm53_gd});
    e.push_back({make_spec("thm53_sgd", "SGD rate with the prescribed constants", 50,
                           {{"dim", "5"},
                            {"eps1", "0.2"},
                            {"eps2", "0.05"},
                            {"delta_fail", "0.1"},
                            {"max_iterations", "1e9"},
                            {"diag_eta", "0.01"},
                            {"diag_iterations", "5000"},
                            {"workers", "1"}}),
                 run_thm53_sgd});
    const std::map<std::string, std::string> flow = {
        {"dim", "3"},         {"t_max", "20"},
        {"tol", "1e-8"},      {"record_stride", "1"},
        {"theta_max", "2.356194490192345"},
        {"workers", "1"}};
    e.push_back({make_spec("lem61_angle",
                           "angle to the target is non-increasing along the flow", 50,
                           flow),
                 run_lem61});
    e.push_back({make_spec("lem62_norm_region", "norm cannot shrink near the origin", 1,
                           {{"dim", "5"},
                            {"dists", "gaussian:mean=0,var=1|ball:r=1"},
                            {"thetas", "0,0.5,1,1.5,2,2.5,3"},
                            {"norm_fraction", "0.9"},
                            {"mc_samples", "1000000"},
                            {"gap_angles", "0.3,0.6,1,1.5,2,2.5,3"}}),
                 run_lem62});
    auto rate = flow;
    rate["alpha"] = "1";
    rate["eps"] = "0.7853981633974483";
    e.push_back({make_spec("thm63_flow_rate",
                           "flow converges at an exponential rate", 50, rate),
                 run_thm63});
    e.push_back({make_spec("sec32_variance",
                           "gradient barely depends on the target for periodic act", 1,
                           {{"act", "periodic:2"},
                            {"control", "relu"},
                            {"dims", "5,10,20"},
                            {"targets", "200"},
                            {"mc_samples", "100000"},
                            {"max_ratio", "0.1"},
                            {"min_control_ratio", "0.5"}}),
                 run_sec32});
    e.push_back({builtin_fig1(), run_fig1});
    return e;
  }();
  return entries;
}

Runner find_runner(const std::string& name) {
  for (const auto& e : registry()) {
    if (e.spec.name == name) return e.run;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << contents;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

bool ExperimentResult::passed() const {
  for (const auto& r : reports) {
    if (!r.informational && !r.passed) return false;
  }
  return trial_errors.empty();
}

bool RunManifest::passed() const {
  for (const auto& r : reports) {
    if (!r.informational && !r.passed) return false;
  }
  return trial_errors.empty();
}

std::string RunManifest::to_text() const {
  std::ostringstream os;
  os << "name: " << spec.name << '\n';
  os << "version: " << version << '\n';
  os << "seed: " << spec.seed << '\n';
  os << "trials: " << spec.trials << '\n';
  for (const auto& [k, v] : spec.params) os << "param " << k << ": " << v << '\n';
  for (const auto& f : files) os << "file: " << f << '\n';
  for (const auto& r : reports) {
    os << (r.informational ? "info: " : "report: ") << r.to_line() << '\n';
    if (!r.note.empty()) os << "  note: " << r.note << '\n';
  }
  for (const auto& e : trial_errors) os << "trial_error: " << e << '\n';
  os << "passed: " << (passed() ? "true" : "false") << '\n';
  return os.str();
}

std::string artifact_version() { return NEURONLAB_VERSION; }

ExperimentSpec builtin_fig1() {
  return make_spec("fig1", "GD on shifted Gaussian inputs; the angle is not monotone", 1,
                   {{"dist", "gaussian:mean=(0,1),var=1"},
                    {"act", "relu"},
                    {"target", "(1,0)"},
                    {"inits", "(-1,1),(-1,0.5),(-1,0)"},
                    {"eta", "0.001"},
                    {"iterations", "30000"},
                    {"mc_samples", "100000"},
                    {"record_stride", "1"},
                    {"final_distance", "0.01"},
                    {"min_rise", "0.05"},
                    {"cover_lo", "0.3"},
                    {"cover_hi", "2.8"},
                    {"max_gap", "0.2"},
                    {"grid", "200"},
                    {"grid_lo", "-1.5"},
                    {"grid_hi", "1.5"},
                    {"grid_samples", "10000"},
                    {"emit_plots", "1"},
                    {"workers", "1"}});
}

std::vector<ExperimentSpec> builtin_registry() {
  std::vector<ExperimentSpec> out;
  for (const auto& e : registry()) out.push_back(e.spec);
  return out;
}

ExperimentSpec find_experiment(std::string_view name) {
  for (const auto& e : registry()) {
    if (e.spec.name == name) return e.spec;
  }
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

ExperimentResult execute_experiment(const ExperimentSpec& spec) {
  spec.validate();
  return find_runner(spec.name)(spec);
}

std::string default_output_root() {
  const char* env = std::getenv("NEURONLAB_OUT");
  return env != nullptr && *env != '\0' ? std::string(env) : std::string("out");
}

RunManifest run_experiment(const ExperimentSpec& spec,
                           const std::string& output_root) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult res = execute_experiment(spec);

  RunManifest m;
  m.spec = spec;
  m.version = artifact_version();
  const fs::path dir = fs::path(output_root) / spec.name / std::to_string(spec.seed);
  fs::create_directories(dir);
  m.directory = dir.string();

  for (const auto& [name, traj] : res.trajectories) {
    std::ostringstream os;
    traj.write_csv(os);
    write_file(dir / (name + ".csv"), os.str());
    m.files.push_back(name + ".csv");
  }
  for (const auto& [name, contents] : res.files) {
    write_file(dir / name, contents);
    m.files.push_back(name);
  }
  m.reports = res.reports;
  m.trial_errors = res.trial_errors;

  std::ostringstream report;
  report << "# theorem_id, predicted, observed, tolerance, passed, seed, n\n";
  for (const auto& r : m.reports) report << r.to_line() << '\n';
  write_file(dir / "report.txt", report.str());
  m.files.push_back("report.txt");

  const auto plots = spec.params.find("emit_plots");
  if (plots != spec.params.end() && plots->second == "1") emit_plot_data(m);

  const fs::path tmp = dir / "manifest.txt.tmp";
  write_file(tmp, m.to_text());
  fs::rename(tmp, dir / "manifest.txt");

  m.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

std::vector<std::string> emit_plot_data(RunManifest& manifest) {
  const fs::path dir(manifest.directory);
  std::vector<std::string> written;
  const std::vector<std::string> sources = manifest.files;
  for (const auto& f : sources) {
    const std::string prefix = "trajectory_";
    if (f.rfind(prefix, 0) != 0 || f.size() < 4 ||
        f.substr(f.size() - 4) != ".csv") {
      continue;
    }
    const std::string id = f.substr(prefix.size(), f.size() - prefix.size() - 4);
    std::ifstream in(dir / f);
    if (!in) throw Error("cannot read '" + (dir / f).string() + "'");
    std::string line;
    std::getline(in, line);  // header
    std::ostringstream angle;
    std::ostringstream path;
    angle << "iter,angle_rad\n";
    path << "iter,w0,w1\n";
    while (std::getline(in, line)) {
      std::vector<std::string> cols;
      std::size_t start = 0;
      while (true) {
        const auto comma = line.find(',', start);
        cols.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (cols.size() < 6) continue;
      angle << cols[0] << ',' << cols[3] << '\n';
      path << cols[0] << ',' << cols[5] << ',' << (cols.size() > 6 ? cols[6] : "0")
           << '\n';
    }
    const std::string a = "angle_" + id + ".csv";
    const std::string p = "path_" + id + ".csv";
    write_file(dir / a, angle.str());
    write_file(dir / p, path.str());
    written.push_back(a);
    written.push_back(p);
  }
  manifest.files.insert(manifest.files.end(), written.begin(), written.end());
  return written;
}

Initializer parse_initializer(std::string_view key) {
  const auto colon = key.find(':');
  const std::string head(key.substr(0, colon));
  const std::string_view rest =
      colon == std::string_view::npos ? std::string_view{} : key.substr(colon + 1);
  if (head == "zero" && rest.empty()) return Initializer::zero();
  if (head == "fixed") return Initializer::fixed(parse_vector(rest, key));
  const auto args = parse_args(key, rest);
  auto num = [&](const std::string& name) {
    const auto it = args.find(name);
    if (it == args.end()) {
      throw ConfigError("initializer key '" + std::string(key) + "' needs " + name);
    }
    return parse_double(it->second, key);
  };
  if (head == "gaussian") return Initializer::gaussian_isotropic(num("tau"));
  if (head == "normal") {
    return Initializer::product({Sampler1D::normal(num("mean"), num("sd"))});
  }
  if (head == "uniform") {
    return Initializer::product({Sampler1D::uniform(num("lo"), num("hi"))});
  }
  if (head == "sphere") return Initializer::sphere(num("r"));
  throw ConfigError("unknown initializer key '" + std::string(key) + "'");
}

}  // namespace neuronlab
