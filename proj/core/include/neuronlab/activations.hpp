#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace neuronlab {

enum class ActivationKind {
  kRelu,
  kLeakyRelu,
  kSoftplus,
  kSigmoid,
  kIdentity,
  kAbsolute,
  kPeriodic,
};

// A scalar activation together with the derivative convention used at its
// kinks and the constants the convergence bounds are stated in terms of.
//
// Immutable after construction; safe to share between threads.
class Activation {
 public:
  double value(double z) const;

  // Derivative away from kinks; at a kink, the declared convention value.
  double derivative(double z) const;

  ActivationKind kind() const { return kind_; }

  // Config key that reproduces this activation through parse_activation().
  const std::string& key() const { return key_; }

  // Non-differentiable points. For the periodic activation these are the
  // representatives in one period [0, period); use near_kink() to test a
  // point against all of them.
  const std::vector<double>& kink_points() const { return kinks_; }

  // Derivative value chosen at each kink (parallel to kink_points()).
  const std::vector<double>& kink_convention() const { return kink_values_; }

  // Left and right derivatives at the given kink index.
  double left_derivative_at_kink(std::size_t i) const;
  double right_derivative_at_kink(std::size_t i) const;

  bool near_kink(double z, double tol) const;

  // c2: sup_z sigma'(z).
  double derivative_upper_bound() const;

  // sup_z |sigma'(z)|; the Lipschitz constant of value().
  double lipschitz_constant() const;

  // gamma: inf of sigma' over the open interval (0, 2*alpha).
  double monotone_lower_bound(double alpha) const;

  // inf_z sigma'(z) over the whole line; positive only for strictly
  // monotone activations.
  double global_derivative_lower_bound() const;

  bool is_monotone() const;

  double parameter() const { return param_; }

 private:
  friend Activation make_relu(double);
  friend Activation make_leaky_relu(double);
  friend Activation make_softplus();
  friend Activation make_sigmoid();
  friend Activation make_identity();
  friend Activation make_absolute();
  friend Activation make_periodic(double);

  Activation(ActivationKind kind, double param, std::string key);

  ActivationKind kind_;
  double param_;  // kink value for ReLU, slope for leaky ReLU, period
  std::string key_;
  std::vector<double> kinks_;
  std::vector<double> kink_values_;
};

// max{0, z}; the derivative at 0 is kink_value, which must lie in [0, 1].
Activation make_relu(double kink_value = 1.0);

// max{slope*z, z} with slope in (0, 1); derivative 1 at the kink.
Activation make_leaky_relu(double slope);

Activation make_softplus();
Activation make_sigmoid();
Activation make_identity();

// |z| with derivative 0 at the kink. Not monotone.
Activation make_absolute();

// 1-Lipschitz triangle wave: rises with slope 1 on [0, period/2], falls on
// [period/2, period], value 0 at multiples of the period.
Activation make_periodic(double period);

// Parses "relu", "relu@0.5", "leaky_relu:0.01", "softplus", "sigmoid",
// "identity", "abs", "periodic:2.0". Throws ConfigError naming the key.
Activation parse_activation(std::string_view key);

}  // namespace neuronlab
