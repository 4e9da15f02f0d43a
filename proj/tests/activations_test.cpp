#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "neuronlab/activations.hpp"
#include "neuronlab/errors.hpp"

using namespace neuronlab;

TEST(Activations, ReluValueAndKinkConvention) {
  EXPECT_EQ(make_relu(1).value(-2), 0.0);
  EXPECT_EQ(make_relu(1).value(3), 3.0);
  EXPECT_EQ(make_relu(1).derivative(0), 1.0);
  EXPECT_EQ(make_relu(0.5).derivative(0), 0.5);
  EXPECT_EQ(make_relu(0).derivative(0), 0.0);
  EXPECT_EQ(make_relu(1).derivative(-1e-300), 0.0);
}

TEST(Activations, SmoothOnes) {
  EXPECT_EQ(make_identity().derivative(3.7), 1.0);
  EXPECT_NEAR(make_softplus().value(0), std::log(2.0), 1e-15);
  EXPECT_NEAR(make_sigmoid().derivative(0), 0.25, 1e-15);
  EXPECT_NEAR(make_leaky_relu(0.5).value(-2), -1.0, 1e-15);
  EXPECT_EQ(make_leaky_relu(0.5).derivative(-2), 0.5);
}

TEST(Activations, SoftplusStableForLargeArguments) {
  const Activation sp = make_softplus();
  EXPECT_NEAR(sp.value(800), 800.0, 1e-9);
  EXPECT_GE(sp.value(-800), 0.0);
  EXPECT_TRUE(std::isfinite(sp.derivative(-800)));
}

TEST(Activations, PeriodicTriangleWave) {
  const Activation p = make_periodic(2);
  EXPECT_NEAR(p.value(0), p.value(2), 1e-15);
  EXPECT_NEAR(p.value(0.5), 0.5, 1e-15);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng);
    const double b = u(rng);
    EXPECT_LE(std::abs(p.value(a) - p.value(b)), std::abs(a - b) + 1e-12);
  }
}

TEST(Activations, DerivativeMatchesCentralDifferenceAwayFromKinks) {
  for (const char* key : {"relu", "leaky_relu:0.3", "softplus", "sigmoid",
                          "identity", "abs", "periodic:2"}) {
    const Activation a = parse_activation(key);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-4, 4);
    for (int i = 0; i < 200; ++i) {
      const double z = u(rng);
      if (a.near_kink(z, 1e-4)) continue;
      const double h = 1e-6;
      const double fd = (a.value(z + h) - a.value(z - h)) / (2 * h);
      EXPECT_NEAR(a.derivative(z), fd, 1e-6) << key << " at " << z;
    }
  }
}

TEST(Activations, Bounds) {
  EXPECT_EQ(make_relu().derivative_upper_bound(), 1.0);
  EXPECT_EQ(make_relu().monotone_lower_bound(1.0), 1.0);
  EXPECT_EQ(make_leaky_relu(0.5).global_derivative_lower_bound(), 0.5);
  EXPECT_NEAR(make_sigmoid().derivative_upper_bound(), 0.25, 1e-15);
  EXPECT_FALSE(make_absolute().is_monotone());
  EXPECT_TRUE(make_softplus().is_monotone());
}

TEST(Activations, ParseErrorsNameTheKey) {
  try {
    parse_activation("rleu");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rleu"), std::string::npos);
  }
  EXPECT_THROW(parse_activation("periodic:-1"), ConfigError);
  EXPECT_EQ(parse_activation("relu@0.5").derivative(0), 0.5);
}
