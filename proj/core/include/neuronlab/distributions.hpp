#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "neuronlab/geometry.hpp"

namespace neuronlab {

// Certifies that every 2D marginal density is at least beta on the disk of
// radius alpha.
struct SpreadParams {
  double alpha = 0.0;
  double beta = 0.0;
};

// Finitely supported distribution: atoms with probabilities.
struct DiscreteSupport {
  std::vector<Vector> atoms;
  std::vector<double> weights;
};

// Input distribution over R^d. Immutable; sampling is a pure function of the
// caller-owned rng state.
class InputDistribution {
 public:
  struct Gaussian {
    Vector mean;
    double variance = 1.0;
  };
  struct UniformBall {
    double radius = 1.0;
  };
  struct UniformSphere {
    double radius = 1.0;
  };
  using Kind = std::variant<Gaussian, UniformBall, UniformSphere,
                            DiscreteSupport>;

  static InputDistribution gaussian(int dim, Vector mean, double variance);
  static InputDistribution standard_gaussian(int dim);
  static InputDistribution uniform_ball(int dim, double radius);
  static InputDistribution uniform_sphere(int dim, double radius);
  static InputDistribution discrete(std::vector<Vector> atoms,
                                    std::vector<double> weights);

  int dim() const { return dim_; }

  // Writes one draw into out (out.size() == dim()).
  void sample(Rng& rng, std::span<double> out) const;
  Vector sample(Rng& rng) const;
  // out.size() / dim() draws, row after row. Same stream as repeated sample().
  void sample_block(Rng& rng, std::span<double> out) const;

  bool is_spherically_symmetric() const;
  bool is_standard_gaussian() const;
  std::optional<double> support_bound_sq() const;
  std::optional<SpreadParams> spread_params() const { return spread_; }

  // nullptr unless the distribution is finitely supported.
  const DiscreteSupport* discrete_support() const;

  const Kind& kind() const { return kind_; }
  std::string describe() const;

 private:
  InputDistribution(int dim, Kind kind);

  int dim_;
  Kind kind_;
  std::optional<SpreadParams> spread_;
};

// Exact infimum of the standard 2D normal density over the radius-alpha
// disk: exp(-alpha^2/2) / (2 pi).
SpreadParams spread_params_for_gaussian(double alpha);

// Points x_i = b_i e_i, signs b_i and target v_i = b_i / sqrt(d) of the
// construction on which gradient methods stall for product initializers.
struct AdversarialDataset {
  std::vector<Vector> points;
  std::vector<int> signs;
  Vector target;

  // Uniform distribution over points (support_bound_sq = 1).
  InputDistribution distribution() const;
};

// b_i = +1 if p_i < 1/2 else -1, where p_i = P(w_i > 0) under the
// initializer.
AdversarialDataset adversarial_instance(int dim,
                                        std::span<const double> init_sign_probs);

// Draws n inputs and returns their coordinates in an orthonormal basis of
// span{w, v} (first basis vector along w).
std::vector<Eigen::Vector2d> marginal_2d(const InputDistribution& dist,
                                         const Vector& w, const Vector& v,
                                         int n, Rng& rng);

// Parses "gaussian:mean=0,var=1", "gaussian:mean=(0,1),var=1", "ball:r=1",
// "sphere:r=1". The adversarial instance is built by the experiment that
// asks for it, not here. Throws ConfigError naming the key.
InputDistribution parse_distribution(std::string_view key, int dim);

}  // namespace neuronlab
