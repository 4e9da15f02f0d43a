#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neuronlab/activations.hpp"
#include "neuronlab/geometry.hpp"
#include "neuronlab/objective.hpp"
#include "neuronlab/optimize.hpp"

namespace neuronlab {

// Spread and boundedness constants: every 2D marginal density >= beta on the
// radius-alpha disk, act' >= gamma on (0, 2 alpha), |x|^2 <= c1, act' <= c2.
struct SpreadCertificate {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 0.0;
  double c1 = 1.0;
  double c2 = 1.0;

  void validate() const;
};

// Standard Gaussian in dimension d with the given activation. Gaussian
// inputs are unbounded, so c1 is replaced by sqrt(E|x|^4) = sqrt(d(d+2)).
SpreadCertificate gaussian_certificate(int dim, const Activation& act,
                                       double alpha = 1.0);

struct TheoremReport {
  std::string theorem_id;
  double predicted = 0.0;
  double observed = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::uint64_t seed = 0;
  std::int64_t n = 0;
  std::vector<int> dims;
  std::string note;
  // Diagnostic output that does not count toward a verdict.
  bool informational = false;

  // theorem_id, predicted, observed, tolerance, passed, seed, n
  std::string to_line() const;
};

// (alpha^4 beta gamma^2 / (8 sqrt 2)) sin^3(delta/4) dist_sq.
double correlation_bound(const SpreadCertificate& cert, double delta_angle,
                         double dist_sq);

// Monte Carlo <grad F(w), w - v> against correlation_bound with
// delta = pi - theta(w, v). Passes iff observed + 4 SE >= predicted.
TheoremReport check_correlation(const Problem& p, const SpreadCertificate& cert,
                                const Vector& w, std::int64_t n,
                                std::uint64_t seed);

// Integral of (u.y)^2 over the sector {|y| <= alpha, |arg y| <= delta/2} by
// tensor Gauss-Legendre in polar coordinates.
double pie_slice_integral(double alpha, double delta, const Eigen::Vector2d& u,
                          int radial_nodes = 128, int angular_nodes = 512);

// alpha^4 sin^3(delta/4) / (8 sqrt 2).
double pie_slice_bound(double alpha, double delta);

// Minimum of pie_slice_integral over n_directions equally spaced u plus
// e1 and e2, against pie_slice_bound.
TheoremReport check_pie_slice_bound(double alpha, double delta,
                                    int n_directions);

struct SgdTargets {
  double eps1 = 0.2;
  double eps2 = 0.05;
  double delta_fail = 0.1;
};

struct RateConstants {
  double lambda_flow = 0.0;  // alpha^4 beta gamma^2 / 210
  double lambda_gd = 0.0;    // min{1, lambda_flow}
  double c = 0.0;            // c1^2 c2^4
  double eta_max_gd = 0.0;   // lambda / (2c)
  double c3 = 0.0;
  double eta_max_sgd = 0.0;
  double m_epoch = 0.0;      // 1 / (9 eta c1 c2^2) at eta_max_sgd
  double t_sgd = 0.0;        // 2 log(1/eps2) / (lambda eta) at eta_max_sgd
  double failure_prob = 0.0; // claimed SGD failure probability
  bool degenerate = false;   // lambda = 0
};

RateConstants rate_constants(const SpreadCertificate& cert,
                             const SgdTargets& targets = {});

// |w_t - v|^2 <= |w_0 - v|^2 (1 - lambda gamma^2 eta)^t at every record of a
// GD trajectory with step eta. The squared prefactor is used; see note.
TheoremReport check_strict_monotone_rate(const Problem& p, double gamma,
                                         double lambda_min_eig, double c1,
                                         double c2, double eta,
                                         const Trajectory& traj);

// Smallest eigenvalue of the empirical second moment E[x x^T].
double min_second_moment_eigenvalue(const InputDistribution& dist,
                                    std::int64_t n, std::uint64_t seed);

struct AdversarialOutcome {
  TheoremReport report;
  int trials = 0;
  int flagged = 0;           // runs with min_t F(w_t) >= 1/(8d)
  int stuck_mismatches = 0;  // stuck coordinates that moved, over all runs
  bool triggered = true;     // false if no run had a stuck coordinate
};

// Builds the adversarial instance from the initializer's sign
// probabilities and runs `trials` independent GD, SGD or flow runs.
// GD and SGD use relu with derivative 0 at the kink (strict indicator);
// flow uses derivative 1 (the >= indicator).
AdversarialOutcome check_adversarial_failure(int dim, const Initializer& init,
                                             Method method, int trials,
                                             double horizon, double step_size,
                                             std::uint64_t seed);

// theta non-increasing across consecutive records, up to slack.
TheoremReport check_angle_monotone(const Trajectory& traj, double slack);

// max{(sin t + cos t)/2, sin t (1 + cos t)/2}.
double norm_safe_threshold(double theta);

// (sin t + (pi - t) cos t) / pi: the exact norm at which d|w|^2/dt changes
// sign for spherically symmetric inputs with ReLU. Below norm_safe_threshold
// for mid-range angles, e.g. 1/pi at t = pi/2.
double norm_growth_boundary(double theta);

// For |w| below norm_safe_threshold, Monte Carlo -<w, grad F(w)> >= -4 SE.
TheoremReport check_norm_safe_region(const Problem& p, const Vector& w,
                                     std::int64_t n, std::uint64_t seed);

// Gaussian closed form: with theta = pi - a and |w| <= |v| a^3 / pi^4,
// -<w, grad F(w)> >= 0 exactly.
TheoremReport check_gaussian_norm_growth(const Vector& w, const Vector& v);

// (alpha^4 beta / (8 sqrt 2)) sin^3(eps/8).
double spherical_flow_rate(double alpha, double beta, double eps);

// |w(t) - v|^2 <= |w(0) - v|^2 exp(-lambda t) + tolerance at every record.
TheoremReport check_flow_rate(const Trajectory& traj, double lambda,
                              double tolerance, const std::string& theorem_id);

// On the ray w = -a v, Monte Carlo <grad F(w), v> + 4 SE < 0 for every a.
TheoremReport check_stationary_ray(const Problem& p,
                                   const std::vector<double>& a_values,
                                   std::int64_t n, std::uint64_t seed);

// 1/2 - tau d / 4 - 1.2^{-d}.
double init_probability_bound(double tau, int dim);

// Fraction of n draws w ~ N(0, tau^2 I) with |w - v|^2 <= 1 - 2 tau^2 d,
// v = e1, against init_probability_bound - 4 SE.
TheoremReport check_init_probability(int dim, double tau, std::int64_t n,
                                     std::uint64_t seed);

struct VarianceResult {
  int dim = 0;
  double variance = 0.0;           // trace of the across-target covariance
  double variance_debiased = 0.0;  // minus the mean Monte Carlo noise
};

// For each d: n_targets uniform unit targets v, grad F(e1) by Monte Carlo
// with n_mc standard Gaussian inputs per target, and the trace of the
// sample covariance of those gradients across targets.
std::vector<VarianceResult> gradient_variance_experiment(
    const Activation& act, const std::vector<int>& dims, int n_targets,
    std::int64_t n_mc, std::uint64_t seed);

}  // namespace neuronlab
