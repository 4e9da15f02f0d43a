#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <variant>
#include <vector>

#include "neuronlab/errors.hpp"
#include "neuronlab/geometry.hpp"
#include "neuronlab/objective.hpp"

namespace neuronlab {

enum class Method { kGd, kSgd, kGradientFlow };

struct GradientMode {
  enum class Kind { kMonteCarlo, kClosedForm, kExactDiscrete };

  static GradientMode monte_carlo(std::int64_t n = 100000) {
    return {Kind::kMonteCarlo, n};
  }
  static GradientMode closed_form() { return {Kind::kClosedForm, 0}; }
  static GradientMode exact_discrete() { return {Kind::kExactDiscrete, 0}; }

  Kind kind = Kind::kClosedForm;
  std::int64_t mc_samples = 0;
};

struct OptimizerConfig {
  Method method = Method::kGd;
  double step_size = 1e-3;
  std::int64_t iterations = 1000;  // GD and SGD
  double t_max = 10.0;             // gradient flow
  double flow_tolerance = 1e-8;
  std::int64_t record_stride = 1;
  GradientMode gradient_mode;
  // Sample budget for the population loss recorded by SGD when no exact
  // formula exists. Only recorded entries pay for it.
  std::int64_t loss_samples = 10000;

  // Throws ConfigError on bad values or on a gradient mode that cannot
  // serve this problem (closed form off Gaussian-ReLU, exact_discrete off a
  // finite support, Monte Carlo gradients under gradient flow).
  void validate(const Problem& p) const;
};

struct TrajectoryEntry {
  double time = 0.0;
  Vector w;
  double loss = 0.0;
  double dist_sq = 0.0;
  std::optional<double> angle;  // nullopt when w = 0
  double norm = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryEntry> entries;

  // Smallest loss seen at any step, recorded or not. For Monte Carlo
  // gradient descent it is the per-step batch estimate.
  double min_loss = 0.0;

  const TrajectoryEntry& front() const { return entries.front(); }
  const TrajectoryEntry& back() const { return entries.back(); }

  // Header time,loss,dist_sq,angle,norm,w_0,...; 17 significant digits.
  void write_csv(std::ostream& out) const;
};

// Thrown when the flow integrator's step size underflows.
class IntegrationFailure : public Error {
 public:
  IntegrationFailure(const std::string& what, Trajectory partial)
      : Error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

// w_{t+1} = w_t - eta * grad F(w_t). Monte Carlo mode uses batch seed
// derive_seed(seed, t) at step t.
Trajectory run_gd(const Problem& p, const Vector& init,
                  const OptimizerConfig& cfg, std::uint64_t seed = 0);

// One fresh input per step: w_{t+1} = w_t - eta * g(w_t, x_t).
Trajectory run_sgd(const Problem& p, const Vector& init,
                   const OptimizerConfig& cfg, std::uint64_t seed);

// dw/dt = -grad F(w) by an adaptive Dormand-Prince 5(4) pair. Records every
// record_stride accepted steps and at t_max.
Trajectory run_gradient_flow(const Problem& p, const Vector& init,
                             const OptimizerConfig& cfg);

// Exact gradient of the configured kind (closed form or finite sum).
Vector exact_gradient(const Problem& p, const Vector& w, GradientMode mode);
double exact_loss(const Problem& p, const Vector& w, GradientMode mode);

// One-dimensional coordinate law for product initializers.
struct Sampler1D {
  enum class Kind { kNormal, kUniform, kPoint };

  static Sampler1D normal(double mean, double sd) {
    return {Kind::kNormal, mean, sd};
  }
  static Sampler1D uniform(double lo, double hi) {
    return {Kind::kUniform, lo, hi};
  }
  static Sampler1D point(double x) { return {Kind::kPoint, x, 0.0}; }

  double sample(Rng& rng) const;
  double prob_positive() const;  // P(w_i > 0)

  Kind kind = Kind::kNormal;
  double a = 0.0;
  double b = 1.0;
};

class Initializer {
 public:
  struct GaussianIsotropic {
    double tau = 1.0;
  };
  // One sampler per coordinate, or a single sampler used for all of them.
  struct Product {
    std::vector<Sampler1D> coords;
  };
  struct Fixed {
    Vector w;
  };
  struct Zero {};
  // Uniform on the sphere of the given radius. Not a product law.
  struct Sphere {
    double radius = 1.0;
  };
  using Kind = std::variant<GaussianIsotropic, Product, Fixed, Zero, Sphere>;

  static Initializer gaussian_isotropic(double tau);
  static Initializer product(std::vector<Sampler1D> coords);
  static Initializer fixed(Vector w);
  static Initializer zero();
  static Initializer sphere(double radius);

  const Kind& kind() const { return kind_; }
  bool is_product() const;

 private:
  explicit Initializer(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

Vector initialize(const Initializer& init, int dim, std::uint64_t seed);

// p_i = P(w_i > 0) per coordinate. PreconditionError for non-product laws.
std::vector<double> positive_probabilities(const Initializer& init, int dim);

}  // namespace neuronlab
