#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "neuronlab/distributions.hpp"
#include "neuronlab/errors.hpp"

using namespace neuronlab;

namespace {

Vector sample_mean(const InputDistribution& d, int n, std::uint64_t seed) {
  Rng rng(seed);
  Vector acc = Vector::Zero(d.dim());
  for (int i = 0; i < n; ++i) acc += d.sample(rng);
  return acc / n;
}

// Standard 2D Gaussian density at radius r.
double gaussian2_density(double r) {
  return std::exp(-0.5 * r * r) / (2 * std::numbers::pi);
}

}  // namespace

TEST(Distributions, GaussianMeans) {
  const int n = 1000000;
  const Vector m0 = sample_mean(InputDistribution::standard_gaussian(2), n, 1);
  EXPECT_LE(m0.cwiseAbs().maxCoeff(), 4.0 / std::sqrt(n));

  Vector mu(2);
  mu << 0, 1;
  const Vector m1 = sample_mean(InputDistribution::gaussian(2, mu, 1.0), n, 2);
  EXPECT_LE((m1 - mu).cwiseAbs().maxCoeff(), 4.0 / std::sqrt(n));
}

TEST(Distributions, SphereAndBall) {
  Rng rng(5);
  const auto s = InputDistribution::uniform_sphere(5, 1);
  for (int i = 0; i < 10000; ++i) EXPECT_NEAR(s.sample(rng).norm(), 1.0, 1e-12);

  const auto b = InputDistribution::uniform_ball(2, 1);
  const int n = 200000;
  int inside = 0;
  for (int i = 0; i < n; ++i) inside += b.sample(rng).norm() <= 0.5;
  const double frac = static_cast<double>(inside) / n;
  EXPECT_NEAR(frac, 0.25, 4 * std::sqrt(0.25 * 0.75 / n));

  EXPECT_EQ(*InputDistribution::uniform_ball(3, 2).support_bound_sq(), 4.0);
  EXPECT_FALSE(InputDistribution::standard_gaussian(3).support_bound_sq());
}

TEST(Distributions, SpreadParamsAgainstGridMinimum) {
  for (double alpha : {1.0, 2.0}) {
    double grid_min = 1e9;
    for (int i = 0; i <= 400; ++i) {
      grid_min = std::min(grid_min, gaussian2_density(alpha * i / 400.0));
    }
    EXPECT_NEAR(spread_params_for_gaussian(alpha).beta, grid_min, 1e-12);
  }
  EXPECT_NEAR(spread_params_for_gaussian(1).beta, 0.09653, 5e-6);
  EXPECT_NEAR(spread_params_for_gaussian(2).beta, 0.02153, 1e-5);
  EXPECT_NEAR(spread_params_for_gaussian(1e-8).beta, 1 / (2 * std::numbers::pi), 1e-9);
}

TEST(Distributions, AdversarialSigns) {
  const std::vector<double> half(4, 0.5);
  const auto a = adversarial_instance(4, half);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(a.signs[i], -1);
    EXPECT_DOUBLE_EQ(a.target[i], -0.5);
  }
  EXPECT_NEAR(a.target.norm(), 1.0, 1e-15);

  const std::vector<double> p = {0.1, 0.9};
  const auto b = adversarial_instance(2, p);
  EXPECT_EQ(b.signs[0], 1);
  EXPECT_EQ(b.signs[1], -1);
  EXPECT_EQ(b.distribution().discrete_support()->atoms.size(), 2u);
}

TEST(Distributions, GaussianMarginalIsStandard2D) {
  const int d = 6;
  const int n = 1000000;
  Rng rng(9);
  const auto dist = InputDistribution::standard_gaussian(d);
  const Vector w = random_unit_vector(d, rng) * 0.7;
  const Vector v = random_unit_vector(d, rng);
  const auto ys = marginal_2d(dist, w, v, n, rng);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& y : ys) {
    mean += y;
    cov += y * y.transpose();
  }
  mean /= n;
  cov /= n;
  const double se = 1.0 / std::sqrt(n);
  EXPECT_LE(mean.cwiseAbs().maxCoeff(), 4 * se);
  // Var(y_i^2) = 2, Var(y_1 y_2) = 1.
  EXPECT_NEAR(cov(0, 0), 1.0, 4 * std::sqrt(2.0) * se);
  EXPECT_NEAR(cov(1, 1), 1.0, 4 * std::sqrt(2.0) * se);
  EXPECT_NEAR(cov(0, 1), 0.0, 4 * se);
}

TEST(Distributions, SphereMarginalContracts) {
  Rng rng(4);
  const auto dist = InputDistribution::uniform_sphere(3, 1);
  const Vector w = Vector::Unit(3, 0);
  const Vector v = Vector::Unit(3, 1);
  for (const auto& y : marginal_2d(dist, w, v, 10000, rng)) {
    EXPECT_LE(y.norm(), 1.0 + 1e-12);
  }
}

TEST(Distributions, MarginalHistogramDensityOnDisk) {
  const int n = 1000000;
  Rng rng(21);
  const auto dist = InputDistribution::standard_gaussian(4);
  const auto ys = marginal_2d(dist, Vector::Unit(4, 0), Vector::Unit(4, 2), n, rng);
  const int bins = 10;
  const double h = 2.0 / bins;
  std::vector<int> count(bins * bins, 0);
  for (const auto& y : ys) {
    const int i = static_cast<int>(std::floor((y[0] + 1) / h));
    const int j = static_cast<int>(std::floor((y[1] + 1) / h));
    if (i < 0 || j < 0 || i >= bins || j >= bins) continue;
    ++count[i * bins + j];
  }
  const double beta = spread_params_for_gaussian(1).beta;
  for (int i = 0; i < bins; ++i) {
    for (int j = 0; j < bins; ++j) {
      // Only bins entirely inside the unit disk.
      const double x = std::max(std::abs(-1 + i * h), std::abs(-1 + (i + 1) * h));
      const double y = std::max(std::abs(-1 + j * h), std::abs(-1 + (j + 1) * h));
      if (x * x + y * y > 1) continue;
      EXPECT_GE(count[i * bins + j] / (n * h * h), 0.9 * beta);
    }
  }
}

TEST(Distributions, ParseDistribution) {
  const auto g = parse_distribution("gaussian:mean=(0,1),var=1", 2);
  EXPECT_FALSE(g.is_standard_gaussian());
  EXPECT_TRUE(parse_distribution("gaussian:mean=0,var=1", 3).is_standard_gaussian());
  EXPECT_TRUE(parse_distribution("ball:r=1", 3).is_spherically_symmetric());
  EXPECT_THROW(parse_distribution("gauss", 3), ConfigError);
  EXPECT_THROW(parse_distribution("ball:r=-1", 3), ConfigError);
}
