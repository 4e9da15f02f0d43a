#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "neuronlab/errors.hpp"
#include "neuronlab/objective.hpp"
#include "neuronlab/quadrature.hpp"

using namespace neuronlab;

namespace {

constexpr double kPi = std::numbers::pi;

Problem gaussian_relu(int d, const Vector& v) {
  return Problem(InputDistribution::standard_gaussian(d), make_relu(), v);
}

Vector vec(std::initializer_list<double> xs) {
  Vector out(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

// E[max(0,z)^2]/2 for z ~ N(0,1) on a truncated Gauss-Legendre grid.
double half_relu_second_moment() {
  const auto rule = gauss_legendre(200, 0.0, 12.0);
  double s = 0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double z = rule.nodes[i];
    s += rule.weights[i] * z * z * std::exp(-0.5 * z * z);
  }
  return 0.5 * s / std::sqrt(2 * kPi);
}

}  // namespace

TEST(Objective, LossAtOptimumIsExactlyZero) {
  const Vector v = Vector::Unit(5, 1);
  const auto est = population_loss_mc(gaussian_relu(5, v), v, 10000, 1);
  EXPECT_EQ(est.mean, 0.0);
  EXPECT_EQ(est.std_err, 0.0);
}

TEST(Objective, LossAtOriginAgainstQuadrature) {
  const double oracle = half_relu_second_moment();
  EXPECT_NEAR(oracle, 0.25, 1e-12);
  const Vector v = Vector::Unit(5, 0);
  const auto est = population_loss_mc(gaussian_relu(5, v), Vector::Zero(5), 1000000, 2);
  EXPECT_NEAR(est.mean, oracle, 4 * est.std_err);
  EXPECT_NEAR(loss_closed_form_gaussian_relu(Vector::Zero(5), v), 0.25, 1e-15);
}

TEST(Objective, AdversarialExactLoss) {
  // All coordinates stuck: F = (1/2d) sum_i relu(v.x_i)^2 = 1/(2d).
  for (int d : {4, 8}) {
    const auto a = adversarial_instance(d, std::vector<double>(d, 0.5));
    const Problem p(a.distribution(), make_relu(0), a.target);
    EXPECT_DOUBLE_EQ(population_loss_exact_discrete(p, Vector::Zero(d)), 1.0 / (2 * d));
    EXPECT_DOUBLE_EQ(population_loss_exact_discrete(p, -a.target), 1.0 / (2 * d));
    EXPECT_EQ(population_loss_exact_discrete(p, a.target), 0.0);
  }
  // One stuck coordinate among four.
  const auto a = adversarial_instance(4, std::vector<double>(4, 0.5));
  const Problem p(a.distribution(), make_relu(0), a.target);
  Vector w = a.target;
  w[2] = 0.3;  // x_2 = -e_2, so w.x_2 < 0
  EXPECT_GE(population_loss_exact_discrete(p, w), 1.0 / 32 - 1e-15);
}

TEST(Objective, ExactDiscreteRejectsContinuous) {
  const Vector v = Vector::Unit(3, 0);
  EXPECT_THROW(population_loss_exact_discrete(gaussian_relu(3, v), v), UnsupportedError);
}

TEST(Objective, GradientAtOptimumAndLinearCase) {
  const int d = 4;
  const Vector v = Vector::Unit(d, 0);
  const auto at_v = population_gradient_mc(gaussian_relu(d, v), v, 100000, 3);
  EXPECT_EQ(at_v.mean.cwiseAbs().maxCoeff(), 0.0);

  const Problem lin(InputDistribution::standard_gaussian(d), make_identity(), v);
  const Vector w = vec({0.3, -0.2, 0.5, 1.0});
  const auto g = population_gradient_mc(lin, w, 1000000, 4);
  for (int i = 0; i < d; ++i) EXPECT_NEAR(g.mean[i], w[i] - v[i], 4 * g.std_err[i]);
}

TEST(Objective, ClosedFormGradientKnownValues) {
  const Vector v = vec({1, 0});
  const Vector g = gradient_closed_form_gaussian_relu(vec({0, 1}), v);
  EXPECT_NEAR(g[0], -0.25, 1e-15);
  EXPECT_NEAR(g[1], 0.5 - 1 / (2 * kPi), 1e-15);
  EXPECT_LE(gradient_closed_form_gaussian_relu(v, v).norm(), 1e-15);
  EXPECT_LE((gradient_closed_form_gaussian_relu(-v, v) + 0.5 * v).norm(), 1e-15);
  EXPECT_THROW(gradient_closed_form_gaussian_relu(Vector::Zero(2), v), PreconditionError);
}

TEST(Objective, ClosedFormGradientMatchesMonteCarlo) {
  const Vector v = vec({1, 0});
  const Vector w = vec({0, 1});
  const auto mc = population_gradient_mc(gaussian_relu(2, v), w, 10000000, 5);
  const Vector cf = gradient_closed_form_gaussian_relu(w, v);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(mc.mean[i], cf[i], 4 * mc.std_err[i]);
}

TEST(Objective, ClosedFormLossDifferentiates) {
  Rng rng(6);
  const int d = 4;
  const Vector v = random_unit_vector(d, rng);
  const auto f = [&](const Vector& w) { return loss_closed_form_gaussian_relu(w, v); };
  int checked = 0;
  while (checked < 20) {
    const Vector w = random_unit_vector(d, rng) * (0.2 + 1.5 * (checked / 20.0));
    const double th = *angle_between(w, v);
    if (th < 0.1 || th > kPi - 0.1) continue;
    const Vector fd = finite_difference_gradient(f, w, 1e-5);
    EXPECT_LE((fd - gradient_closed_form_gaussian_relu(w, v)).cwiseAbs().maxCoeff(), 1e-6);
    ++checked;
  }
  EXPECT_NEAR(loss_closed_form_gaussian_relu(v, v), 0.0, 1e-15);
}

TEST(Objective, FiniteDifferenceOracles) {
  const Vector w = vec({0.4, -1.3, 2.0});
  const auto sq = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  EXPECT_LE((finite_difference_gradient(sq, w, 1e-5) - w).cwiseAbs().maxCoeff(), 1e-8);
  const auto c = [](const Vector&) { return 3.0; };
  EXPECT_EQ(finite_difference_gradient(c, w, 1e-5).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Objective, StochasticGradient) {
  const Vector v = vec({1, 0});
  const Problem p = gaussian_relu(2, v);
  // w.x < 0: relu' = 0 kills the sample regardless of v.x.
  EXPECT_EQ(stochastic_gradient(p, vec({1, 1}), vec({-1, -0.5})).norm(), 0.0);
  const Vector w = vec({0.5, 0.5});
  const Vector x = vec({1, 2});
  const Vector expect = (1.5 - 1.0) * 1.0 * x;
  EXPECT_LE((stochastic_gradient(p, w, x) - expect).norm(), 1e-15);
}

TEST(Objective, StochasticAverageEqualsPopulationEstimate) {
  const int d = 3;
  Rng rng(8);
  const Vector v = random_unit_vector(d, rng);
  const Vector w = random_unit_vector(d, rng) * 0.6;
  const Problem p = gaussian_relu(d, v);
  const int n = 5000;
  const std::uint64_t seed = 12;
  Rng stream(seed);
  Vector acc = Vector::Zero(d);
  for (int i = 0; i < n; ++i) acc += stochastic_gradient(p, w, p.dist.sample(stream));
  const auto est = population_gradient_mc(p, w, n, seed);
  EXPECT_LE((acc / n - est.mean).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Objective, SampleGradientBoundedOnBall) {
  const int d = 3;
  Rng rng(10);
  const Vector v = random_unit_vector(d, rng);
  const Problem p(InputDistribution::uniform_ball(d, 1), make_leaky_relu(0.5), v);
  const double c1 = 1, c2 = 1;
  for (int i = 0; i < 2000; ++i) {
    const Vector w = random_unit_vector(d, rng) * 1.5;
    const Vector x = p.dist.sample(rng);
    EXPECT_LE(stochastic_gradient(p, w, x).squaredNorm(),
              c1 * c1 * std::pow(c2, 4) * (w - v).squaredNorm() + 1e-12);
  }
}

TEST(Objective, ChunkedMonteCarloIsReproducible) {
  const int d = 3;
  const Vector v = Vector::Unit(d, 0);
  const Vector w = vec({0.1, 0.4, -0.2});
  const Problem p = gaussian_relu(d, v);
  const auto a = population_gradient_mc(p, w, 20000, 33, {4});
  const auto b = population_gradient_mc(p, w, 20000, 33, {4});
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_err, b.std_err);
}

TEST(Objective, UnitTargetRequired) {
  EXPECT_THROW(make_unit_target_problem(InputDistribution::standard_gaussian(2),
                                        make_relu(), vec({2, 0})),
               ConfigError);
}
