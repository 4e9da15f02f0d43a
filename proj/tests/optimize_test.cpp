#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "neuronlab/errors.hpp"
#include "neuronlab/optimize.hpp"
#include "neuronlab/theory.hpp"

using namespace neuronlab;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector out(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

OptimizerConfig gd(double eta, std::int64_t iters, GradientMode mode) {
  OptimizerConfig c;
  c.method = Method::kGd;
  c.step_size = eta;
  c.iterations = iters;
  c.gradient_mode = mode;
  return c;
}

}  // namespace

TEST(Optimize, LinearGdHalvesDistance) {
  const int d = 3;
  const Vector v = Vector::Unit(d, 0);
  // A finite support with identity second moment makes the gradient exactly w - v.
  std::vector<Vector> atoms;
  for (int i = 0; i < d; ++i) {
    atoms.push_back(Vector::Unit(d, i) * std::sqrt(d));
  }
  const Problem p(InputDistribution::discrete(atoms, std::vector<double>(d, 1.0 / d)),
                  make_identity(), v);
  const auto traj = run_gd(p, vec({0.2, -1, 0.7}), gd(0.5, 20, GradientMode::exact_discrete()));
  for (std::size_t t = 1; t < traj.entries.size(); ++t) {
    EXPECT_NEAR(traj.entries[t].dist_sq, traj.entries[t - 1].dist_sq / 4,
                1e-14 * traj.entries[0].dist_sq);
  }
}

TEST(Optimize, LinearGdMonteCarloHalvesDistance) {
  const int d = 3;
  const Vector v = Vector::Unit(d, 1);
  const Problem p(InputDistribution::standard_gaussian(d), make_identity(), v);
  const auto traj = run_gd(p, vec({1, 1, 1}), gd(0.5, 5, GradientMode::monte_carlo(1000000)), 3);
  for (std::size_t t = 1; t < traj.entries.size(); ++t) {
    const double ratio = std::sqrt(traj.entries[t].dist_sq / traj.entries[t - 1].dist_sq);
    EXPECT_NEAR(ratio, 0.5, 0.02);
  }
}

TEST(Optimize, StuckCoordinateNeverMoves) {
  const int d = 6;
  const auto a = adversarial_instance(d, std::vector<double>(d, 0.5));
  const Problem p(a.distribution(), make_relu(0), a.target);
  Vector w0 = a.target;
  w0[1] = 0.37;  // x_1 = -e_1 so w.x_1 < 0
  w0[4] = 0.0;   // w.x_4 = 0, also stuck under the strict convention
  const auto traj = run_gd(p, w0, gd(0.1, 500, GradientMode::exact_discrete()));
  for (const auto& e : traj.entries) {
    EXPECT_EQ(e.w[1], w0[1]);
    EXPECT_EQ(e.w[4], w0[4]);
    EXPECT_GE(e.loss, 2.0 / (2.0 * d * d) - 1e-15);
  }

  OptimizerConfig s = gd(0.1, 500, GradientMode::exact_discrete());
  s.method = Method::kSgd;
  const auto st = run_sgd(p, w0, s, 7);
  EXPECT_EQ(st.back().w[1], w0[1]);
  EXPECT_EQ(st.back().w[4], w0[4]);
}

TEST(Optimize, FlowStuckCoordinateUnderInclusiveConvention) {
  const int d = 4;
  const auto a = adversarial_instance(d, std::vector<double>(d, 0.5));
  const Problem p(a.distribution(), make_relu(1), a.target);
  Vector w0 = a.target;
  w0[2] = 0.25;
  OptimizerConfig c;
  c.method = Method::kGradientFlow;
  c.t_max = 30;
  c.gradient_mode = GradientMode::exact_discrete();
  const auto traj = run_gradient_flow(p, w0, c);
  for (const auto& e : traj.entries) EXPECT_EQ(e.w[2], w0[2]);
}

TEST(Optimize, GdEnvelopeInSafeZone) {
  const int d = 5;
  Rng rng(13);
  const Vector v = random_unit_vector(d, rng);
  const Problem p(InputDistribution::standard_gaussian(d), make_relu(), v);
  const auto cert = gaussian_certificate(d, p.act);
  const auto rc = rate_constants(cert);
  const Vector w0 = v + random_unit_vector(d, rng) * 0.9;
  const auto traj = run_gd(p, w0, gd(rc.eta_max_gd, 1000, GradientMode::closed_form()));
  const double base = 1 - rc.eta_max_gd * rc.lambda_gd / 2;
  for (const auto& e : traj.entries) {
    EXPECT_LE(e.dist_sq, 0.81 * std::pow(base, e.time) * (1 + 1e-12));
  }
}

TEST(Optimize, SgdStepWithNegativePreactivationKeepsW) {
  const Vector v = vec({1, 0});
  // Single atom with w.x < 0.
  const Problem p(InputDistribution::discrete({vec({-1, 0})}, {1.0}), make_relu(0), v);
  OptimizerConfig c = gd(0.3, 1, GradientMode::exact_discrete());
  c.method = Method::kSgd;
  const Vector w0 = vec({0.5, 0.2});
  EXPECT_EQ(run_sgd(p, w0, c, 1).back().w, w0);
}

TEST(Optimize, FlowMatchesLinearOde) {
  const int d = 3;
  const Vector v = Vector::Unit(d, 2);
  std::vector<Vector> atoms;
  for (int i = 0; i < d; ++i) {
    atoms.push_back(Vector::Unit(d, i) * std::sqrt(d));
    atoms.push_back(-Vector::Unit(d, i) * std::sqrt(d));
  }
  const Problem p(InputDistribution::discrete(atoms, std::vector<double>(2 * d, 0.5 / d)),
                  make_identity(), v);
  OptimizerConfig c;
  c.method = Method::kGradientFlow;
  c.t_max = 5;
  c.gradient_mode = GradientMode::exact_discrete();
  const Vector w0 = vec({0.4, -0.3, -1});
  const auto traj = run_gradient_flow(p, w0, c);
  EXPECT_DOUBLE_EQ(traj.back().time, 5.0);
  for (const auto& e : traj.entries) {
    const Vector exact = v + (w0 - v) * std::exp(-e.time);
    EXPECT_LE((e.w - exact).cwiseAbs().maxCoeff(), 1e-5);
  }
  const auto rep = check_flow_rate(traj, 2.0, 1e-6, "linear");
  EXPECT_TRUE(rep.passed);
}

TEST(Optimize, ConfigValidation) {
  const Vector v = Vector::Unit(2, 0);
  const Problem g(InputDistribution::standard_gaussian(2), make_relu(), v);
  OptimizerConfig flow;
  flow.method = Method::kGradientFlow;
  flow.gradient_mode = GradientMode::monte_carlo(100);
  EXPECT_THROW(flow.validate(g), ConfigError);
  OptimizerConfig bad = gd(-1, 10, GradientMode::closed_form());
  EXPECT_THROW(bad.validate(g), ConfigError);
  const Problem ball(InputDistribution::uniform_ball(2, 1), make_relu(), v);
  EXPECT_THROW(gd(0.1, 10, GradientMode::closed_form()).validate(ball), ConfigError);
  EXPECT_THROW(gd(0.1, 10, GradientMode::exact_discrete()).validate(g), ConfigError);
}

TEST(Optimize, RecordStrideKeepsLastStep) {
  const Vector v = Vector::Unit(2, 0);
  const Problem p(InputDistribution::standard_gaussian(2), make_relu(), v);
  OptimizerConfig c = gd(0.1, 25, GradientMode::closed_form());
  c.record_stride = 10;
  const auto traj = run_gd(p, vec({0.2, 0.3}), c);
  ASSERT_EQ(traj.entries.size(), 4u);
  EXPECT_EQ(traj.entries[3].time, 25.0);
}

TEST(Optimize, TrajectoryCsv) {
  const Vector v = Vector::Unit(2, 0);
  const Problem p(InputDistribution::standard_gaussian(2), make_relu(), v);
  const auto traj = run_gd(p, Vector::Zero(2), gd(0.1, 2, GradientMode::closed_form()));
  std::ostringstream os;
  traj.write_csv(os);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "time,loss,dist_sq,angle,norm,w_0,w_1");
  EXPECT_NE(s.find("undef"), std::string::npos);
}

TEST(Optimize, Initializers) {
  EXPECT_EQ(initialize(Initializer::fixed(vec({-1, 1})), 2, 0), vec({-1, 1}));
  EXPECT_EQ(initialize(Initializer::zero(), 3, 0), Vector::Zero(3));
  EXPECT_NEAR(initialize(Initializer::sphere(2), 4, 5).norm(), 2.0, 1e-12);
  EXPECT_EQ(initialize(Initializer::gaussian_isotropic(0.1), 4, 9),
            initialize(Initializer::gaussian_isotropic(0.1), 4, 9));
  const auto probs = positive_probabilities(
      Initializer::product({Sampler1D::normal(0, 1)}), 3);
  ASSERT_EQ(probs.size(), 3u);
  EXPECT_DOUBLE_EQ(probs[0], 0.5);
  EXPECT_DOUBLE_EQ(Sampler1D::uniform(-1, 3).prob_positive(), 0.75);
  EXPECT_THROW(positive_probabilities(Initializer::sphere(1), 3), PreconditionError);
}

TEST(Optimize, IsotropicInitVariance) {
  const int d = 10;
  const double tau = 0.07;
  const int n = 20000;
  double sum_sq = 0;
  for (int k = 0; k < n; ++k) {
    sum_sq += initialize(Initializer::gaussian_isotropic(tau), d, derive_seed(5, k)).squaredNorm();
  }
  // E|w|^2 = tau^2 d, Var = 2 tau^4 d.
  const double se = std::sqrt(2.0 * d) * tau * tau / std::sqrt(n);
  EXPECT_NEAR(sum_sq / n, tau * tau * d, 4 * se);
}
