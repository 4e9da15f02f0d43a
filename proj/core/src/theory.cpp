#include "neuronlab/theory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "neuronlab/distributions.hpp"
#include "neuronlab/errors.hpp"
#include "neuronlab/quadrature.hpp"

namespace neuronlab {
namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

std::string fmt(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

}  // namespace

void SpreadCertificate::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("certificate needs alpha > 0");
  if (!(beta > 0.0)) throw ConfigError("certificate needs beta > 0");
  if (!(gamma >= 0.0)) throw ConfigError("certificate needs gamma >= 0");
  if (!(c1 > 0.0)) throw ConfigError("certificate needs c1 > 0");
  if (!(c2 > 0.0)) throw ConfigError("certificate needs c2 > 0");
}

SpreadCertificate gaussian_certificate(int dim, const Activation& act,
                                       double alpha) {
  SpreadCertificate cert;
  cert.alpha = alpha;
  cert.beta = spread_params_for_gaussian(alpha).beta;
  cert.gamma = act.monotone_lower_bound(alpha);
  cert.c1 = std::sqrt(static_cast<double>(dim) * (dim + 2));
  cert.c2 = act.derivative_upper_bound();
  return cert;
}

std::string TheoremReport::to_line() const {
  std::string line = theorem_id + ", " + fmt(predicted) + ", " + fmt(observed) +
                     ", " + fmt(tolerance) + ", " + (passed ? "true" : "false") +
                     ", " + std::to_string(seed) + ", " + std::to_string(n);
  return line;
}

double correlation_bound(const SpreadCertificate& cert, double delta_angle,
                         double dist_sq) {
  if (!(delta_angle > 0.0 && delta_angle <= kPi)) {
    throw PreconditionError("angle gap delta must lie in (0, pi], got " +
                            fmt(delta_angle));
  }
  if (dist_sq < 0.0) throw PreconditionError("squared distance must be >= 0");
  const double s = std::sin(delta_angle / 4.0);
  return std::pow(cert.alpha, 4) * cert.beta * cert.gamma * cert.gamma /
         (8.0 * kSqrt2) * s * s * s * dist_sq;
}

TheoremReport check_correlation(const Problem& p, const SpreadCertificate& cert,
                                const Vector& w, std::int64_t n,
                                std::uint64_t seed) {
  if (w.norm() > 2.0 + 1e-12) {
    throw PreconditionError("correlation bound needs |w| <= 2");
  }
  const auto theta = angle_between(w, p.target);
  if (!theta) throw PreconditionError("correlation bound needs w != 0");
  const Vector diff = w - p.target;
  if (diff.squaredNorm() == 0.0) {
    throw PreconditionError("correlation bound needs w != v");
  }
  const double delta = kPi - *theta;
  if (!(delta > 0.0)) throw PreconditionError("w is antiparallel to v");

  const ScalarEstimate est = gradient_projection_mc(p, w, diff, n, seed);
  TheoremReport r;
  r.theorem_id = "correlation";
  r.predicted = correlation_bound(cert, delta, diff.squaredNorm());
  r.observed = est.mean;
  r.tolerance = 4.0 * est.std_err;
  r.passed = r.observed + r.tolerance >= r.predicted;
  r.seed = seed;
  r.n = n;
  r.dims = {p.dim()};
  return r;
}

double pie_slice_integral(double alpha, double delta, const Eigen::Vector2d& u,
                          int radial_nodes, int angular_nodes) {
  if (!(alpha > 0.0)) throw ConfigError("pie slice needs alpha > 0");
  if (!(delta > 0.0 && delta <= kPi)) {
    throw ConfigError("pie slice width must lie in (0, pi]");
  }
  const QuadratureRule radial = gauss_legendre(radial_nodes, 0.0, alpha);
  const QuadratureRule angular =
      gauss_legendre(angular_nodes, -delta / 2.0, delta / 2.0);
  // The integrand (u.y)^2 r factors into r^3 * (u.(cos, sin))^2.
  double rpart = 0.0;
  for (int i = 0; i < radial_nodes; ++i) {
    const double r = radial.nodes[i];
    rpart += radial.weights[i] * r * r * r;
  }
  double apart = 0.0;
  for (int j = 0; j < angular_nodes; ++j) {
    const double phi = angular.nodes[j];
    const double proj = u[0] * std::cos(phi) + u[1] * std::sin(phi);
    apart += angular.weights[j] * proj * proj;
  }
  return rpart * apart;
}

double pie_slice_bound(double alpha, double delta) {
  const double s = std::sin(delta / 4.0);
  return std::pow(alpha, 4) * s * s * s / (8.0 * kSqrt2);
}

TheoremReport check_pie_slice_bound(double alpha, double delta,
                                    int n_directions) {
  if (n_directions < 1) throw ConfigError("need at least one direction");
  double lowest = std::numeric_limits<double>::infinity();
  auto visit = [&](const Eigen::Vector2d& u) {
    lowest = std::min(lowest, pie_slice_integral(alpha, delta, u));
  };
  for (int k = 0; k < n_directions; ++k) {
    const double psi = 2.0 * kPi * k / n_directions;
    visit(Eigen::Vector2d(std::cos(psi), std::sin(psi)));
  }
  visit(Eigen::Vector2d(1.0, 0.0));
  visit(Eigen::Vector2d(0.0, 1.0));

  TheoremReport r;
  r.theorem_id = "pie_slice";
  r.predicted = pie_slice_bound(alpha, delta);
  r.observed = lowest;
  r.passed = r.observed >= r.predicted;
  r.n = n_directions;
  r.dims = {2};
  return r;
}

RateConstants rate_constants(const SpreadCertificate& cert,
                             const SgdTargets& targets) {
  cert.validate();
  for (double x : {targets.eps1, targets.eps2, targets.delta_fail}) {
    if (!(x > 0.0 && x < 1.0)) {
      throw ConfigError("eps1, eps2 and delta_fail must lie in (0, 1)");
    }
  }
  RateConstants k;
  const double c1 = cert.c1;
  const double c2 = cert.c2;
  k.lambda_flow = std::pow(cert.alpha, 4) * cert.beta * cert.gamma * cert.gamma /
                  210.0;
  k.lambda_gd = std::min(1.0, k.lambda_flow);
  k.c = c1 * c1 * std::pow(c2, 4);
  if (k.lambda_flow == 0.0) {
    k.degenerate = true;
    k.t_sgd = std::numeric_limits<double>::infinity();
    return k;
  }
  k.eta_max_gd = k.lambda_gd / (2.0 * k.c);

  const double lam = k.lambda_flow;
  const double a = lam / (20.0 * c1 * c2 * c2);
  const double b = lam / (18.0 * c1 * c2 * c2);
  // 2^-a - 2^-b without cancellation.
  k.c3 = std::exp2(-b) * std::expm1((b - a) * std::numbers::ln2);

  const double e1 = targets.eps1;
  const double e2 = targets.eps2;
  k.eta_max_sgd = lam * e1 * e1 * e2 * e2 * k.c3 * k.c3 /
                  (60.0 * std::pow(c1, 3) * std::pow(c2, 6) *
                   std::log(2.0 / targets.delta_fail));
  k.m_epoch = 1.0 / (9.0 * k.eta_max_sgd * c1 * c2 * c2);
  k.t_sgd = 2.0 * std::log(1.0 / e2) / (lam * k.eta_max_sgd);
  k.failure_prob =
      std::ceil(20.0 * c1 * c2 * c2 * std::log(1.0 / e2) / lam) *
      targets.delta_fail;
  return k;
}

TheoremReport check_strict_monotone_rate(const Problem& p, double gamma,
                                         double lambda_min_eig, double c1,
                                         double c2, double eta,
                                         const Trajectory& traj) {
  if (!(gamma > 0.0)) {
    throw PreconditionError("strict-monotone rate needs inf act' = gamma > 0");
  }
  if (p.act.global_derivative_lower_bound() < gamma) {
    throw PreconditionError("activation " + p.act.key() +
                            " does not satisfy inf act' >= " + fmt(gamma));
  }
  const double limit = lambda_min_eig * gamma * gamma /
                       (c1 * c1 * std::pow(c2, 4));
  if (!(eta > 0.0 && eta < limit)) {
    throw PreconditionError("step size " + fmt(eta) + " not below " + fmt(limit));
  }
  if (traj.entries.empty()) throw PreconditionError("empty trajectory");

  const double rate = 1.0 - lambda_min_eig * gamma * gamma * eta;
  const double d0 = traj.front().dist_sq;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& e : traj.entries) {
    worst = std::max(worst, e.dist_sq - d0 * std::pow(rate, e.time));
  }
  TheoremReport r;
  r.theorem_id = "strict_monotone_rate";
  r.predicted = d0 * std::pow(rate, traj.back().time);
  r.observed = traj.back().dist_sq;
  r.tolerance = 1e-6;
  r.passed = worst <= r.tolerance;
  r.n = static_cast<std::int64_t>(traj.entries.size());
  r.dims = {p.dim()};
  r.note = "prefactor |w0-v|^2 (printed unsquared); worst excess " + fmt(worst);
  return r;
}

double min_second_moment_eigenvalue(const InputDistribution& dist,
                                    std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("need at least one sample");
  Rng rng(seed);
  const int d = dist.dim();
  Matrix acc = Matrix::Zero(d, d);
  Vector x(d);
  for (std::int64_t s = 0; s < n; ++s) {
    dist.sample(rng, std::span<double>(x.data(), d));
    acc.selfadjointView<Eigen::Lower>().rankUpdate(x);
  }
  Matrix m = acc.selfadjointView<Eigen::Lower>();
  m /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

AdversarialOutcome check_adversarial_failure(int dim, const Initializer& init,
                                             Method method, int trials,
                                             double horizon, double step_size,
                                             std::uint64_t seed) {
  if (dim < 4 || dim % 4 != 0) {
    throw PreconditionError("adversarial construction needs d >= 4 divisible by 4");
  }
  if (trials < 1) throw ConfigError("trials must be >= 1");
  const std::vector<double> probs = positive_probabilities(init, dim);
  const AdversarialDataset data = adversarial_instance(dim, probs);
  const bool flow = method == Method::kGradientFlow;
  const Problem prob(data.distribution(), make_relu(flow ? 1.0 : 0.0),
                     data.target);

  OptimizerConfig cfg;
  cfg.method = method;
  cfg.step_size = step_size;
  cfg.gradient_mode = GradientMode::exact_discrete();
  if (flow) {
    cfg.t_max = horizon;
    cfg.record_stride = 1000000;
  } else {
    cfg.iterations = static_cast<std::int64_t>(horizon);
    cfg.record_stride = cfg.iterations;
  }

  const double threshold = 1.0 / (8.0 * dim);
  AdversarialOutcome out;
  out.trials = trials;
  int enough_stuck = 0;
  for (int k = 0; k < trials; ++k) {
    const Vector w0 = initialize(init, dim, derive_seed(seed, 2 * k));
    std::vector<int> stuck;
    for (int i = 0; i < dim; ++i) {
      const double z = data.signs[i] * w0[i];
      if (flow ? z < 0.0 : z <= 0.0) stuck.push_back(i);
    }
    if (4 * static_cast<int>(stuck.size()) >= dim) ++enough_stuck;

    Trajectory traj;
    switch (method) {
      case Method::kGd:
        traj = run_gd(prob, w0, cfg);
        break;
      case Method::kSgd:
        traj = run_sgd(prob, w0, cfg, derive_seed(seed, 2 * k + 1));
        break;
      case Method::kGradientFlow:
        traj = run_gradient_flow(prob, w0, cfg);
        break;
    }
    if (traj.min_loss >= threshold - 1e-6) ++out.flagged;
    for (const auto& e : traj.entries) {
      for (int i : stuck) {
        if (e.w[i] != w0[i]) ++out.stuck_mismatches;
      }
    }
  }
  out.triggered = enough_stuck > 0;

  const double predicted = 1.0 - std::exp(-dim / 4.0);
  const double se = std::sqrt(predicted * (1.0 - predicted) / trials);
  TheoremReport& r = out.report;
  r.theorem_id = "adversarial_failure";
  r.predicted = predicted;
  r.observed = static_cast<double>(out.flagged) / trials;
  r.tolerance = 4.0 * se;
  r.passed = r.observed >= predicted - r.tolerance && out.stuck_mismatches == 0;
  r.seed = seed;
  r.n = trials;
  r.dims = {dim};
  r.note = "stuck mismatches " + std::to_string(out.stuck_mismatches) +
           "; runs with >= d/4 stuck " + std::to_string(enough_stuck);
  if (!out.triggered) r.note += "; not triggered";
  return out;
}

TheoremReport check_angle_monotone(const Trajectory& traj, double slack) {
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.entries.size(); ++i) {
    if (!traj.entries[i].angle) {
      throw PreconditionError("trajectory passes through w = 0");
    }
    if (i > 0) {
      worst = std::max(worst, *traj.entries[i].angle - *traj.entries[i - 1].angle);
    }
  }
  TheoremReport r;
  r.theorem_id = "angle_monotone";
  r.predicted = 0.0;
  r.observed = worst;
  r.tolerance = slack;
  r.passed = worst <= slack;
  r.n = static_cast<std::int64_t>(traj.entries.size());
  return r;
}

double norm_growth_boundary(double theta) {
  return (std::sin(theta) + (kPi - theta) * std::cos(theta)) / kPi;
}

double norm_safe_threshold(double theta) {
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  return std::max((s + c) / 2.0, s * (1.0 + c) / 2.0);
}

TheoremReport check_norm_safe_region(const Problem& p, const Vector& w,
                                     std::int64_t n, std::uint64_t seed) {
  if (!p.dist.is_spherically_symmetric() ||
      p.act.kind() != ActivationKind::kRelu) {
    throw PreconditionError("norm safe region needs spherical inputs and ReLU");
  }
  const auto theta = angle_between(w, p.target);
  if (!theta) throw PreconditionError("norm safe region needs w != 0");
  const double threshold = norm_safe_threshold(*theta);
  if (w.norm() > threshold) {
    throw PreconditionError("|w| = " + fmt(w.norm()) + " exceeds threshold " +
                            fmt(threshold));
  }
  const ScalarEstimate est = gradient_projection_mc(p, w, w, n, seed);
  TheoremReport r;
  r.theorem_id = "norm_safe_region";
  r.predicted = 0.0;
  r.observed = -est.mean;
  r.tolerance = 4.0 * est.std_err;
  r.passed = r.observed >= -r.tolerance;
  r.seed = seed;
  r.n = n;
  r.dims = {p.dim()};
  return r;
}

TheoremReport check_gaussian_norm_growth(const Vector& w, const Vector& v) {
  const auto theta = angle_between(w, v);
  if (!theta) throw PreconditionError("norm growth check needs w != 0");
  const double a = kPi - *theta;
  const double limit = v.norm() * a * a * a / std::pow(kPi, 4);
  if (w.norm() > limit) {
    throw PreconditionError("|w| = " + fmt(w.norm()) + " exceeds " + fmt(limit));
  }
  TheoremReport r;
  r.theorem_id = "gaussian_norm_growth";
  r.predicted = 0.0;
  r.observed = -w.dot(gradient_closed_form_gaussian_relu(w, v));
  r.tolerance = 1e-12 * w.squaredNorm();
  r.passed = r.observed >= -r.tolerance;
  r.dims = {static_cast<int>(w.size())};
  return r;
}

double spherical_flow_rate(double alpha, double beta, double eps) {
  const double s = std::sin(eps / 8.0);
  return std::pow(alpha, 4) * beta / (8.0 * kSqrt2) * s * s * s;
}

TheoremReport check_flow_rate(const Trajectory& traj, double lambda,
                              double tolerance, const std::string& theorem_id) {
  if (traj.entries.empty()) throw PreconditionError("empty trajectory");
  const double d0 = traj.front().dist_sq;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& e : traj.entries) {
    worst = std::max(worst, e.dist_sq - d0 * std::exp(-lambda * e.time));
  }
  TheoremReport r;
  r.theorem_id = theorem_id;
  r.predicted = d0 * std::exp(-lambda * traj.back().time);
  r.observed = traj.back().dist_sq;
  r.tolerance = tolerance;
  r.passed = worst <= tolerance;
  r.n = static_cast<std::int64_t>(traj.entries.size());
  r.dims = {static_cast<int>(traj.front().w.size())};
  r.note = "prefactor |w(0)-v|^2; worst excess " + fmt(worst);
  return r;
}

TheoremReport check_stationary_ray(const Problem& p,
                                   const std::vector<double>& a_values,
                                   std::int64_t n, std::uint64_t seed) {
  if (a_values.empty()) throw ConfigError("need at least one ray point");
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < a_values.size(); ++k) {
    if (!(a_values[k] > 0.0)) throw PreconditionError("ray points need a > 0");
    const Vector w = -a_values[k] * p.target;
    const ScalarEstimate est =
        gradient_projection_mc(p, w, p.target, n, derive_seed(seed, k));
    worst = std::max(worst, est.mean + 4.0 * est.std_err);
  }
  TheoremReport r;
  r.theorem_id = "stationary_ray";
  r.predicted = 0.0;
  r.observed = worst;
  r.passed = worst < 0.0;
  r.seed = seed;
  r.n = n;
  r.dims = {p.dim()};
  return r;
}

double init_probability_bound(double tau, int dim) {
  return 0.5 - tau * dim / 4.0 - std::pow(1.2, -dim);
}

TheoremReport check_init_probability(int dim, double tau, std::int64_t n,
                                     std::uint64_t seed) {
  if (dim < 1 || n < 1 || !(tau > 0.0)) {
    throw ConfigError("init probability check needs dim, n >= 1 and tau > 0");
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, tau);
  const double radius_sq = 1.0 - 2.0 * tau * tau * dim;
  std::int64_t hits = 0;
  for (std::int64_t s = 0; s < n; ++s) {
    double dist_sq = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double diff = normal(rng) - (i == 0 ? 1.0 : 0.0);
      dist_sq += diff * diff;
    }
    if (dist_sq <= radius_sq) ++hits;
  }
  const double frac = static_cast<double>(hits) / n;
  TheoremReport r;
  r.theorem_id = "init_probability";
  r.predicted = init_probability_bound(tau, dim);
  r.observed = frac;
  r.tolerance = 4.0 * std::sqrt(frac * (1.0 - frac) / n);
  r.passed = r.observed >= r.predicted - r.tolerance;
  r.seed = seed;
  r.n = n;
  r.dims = {dim};
  return r;
}

std::vector<VarianceResult> gradient_variance_experiment(
    const Activation& act, const std::vector<int>& dims, int n_targets,
    std::int64_t n_mc, std::uint64_t seed) {
  if (n_targets < 1) throw ConfigError("need at least one target");
  std::vector<VarianceResult> out;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    const int d = dims[j];
    const std::uint64_t dim_seed = derive_seed(seed, j);
    Rng target_rng(dim_seed);
    const InputDistribution dist = InputDistribution::standard_gaussian(d);
    const Vector w = Vector::Unit(d, 0);
    std::vector<Vector> grads;
    double noise = 0.0;
    for (int k = 0; k < n_targets; ++k) {
      const Problem p(dist, act, random_unit_vector(d, target_rng));
      const GradEstimate g =
          population_gradient_mc(p, w, n_mc, derive_seed(dim_seed, k + 1));
      noise += g.std_err.squaredNorm();
      grads.push_back(g.mean);
    }
    VarianceResult res;
    res.dim = d;
    if (n_targets > 1) {
      Vector mean = Vector::Zero(d);
      for (const auto& g : grads) mean += g;
      mean /= n_targets;
      double total = 0.0;
      for (const auto& g : grads) total += (g - mean).squaredNorm();
      res.variance = total / (n_targets - 1);
      res.variance_debiased = res.variance - noise / n_targets;
    }
    out.push_back(res);
  }
  return out;
}

}  // namespace neuronlab
