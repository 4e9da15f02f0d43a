#pragma once

#include <cstdint>
#include <functional>

#include "neuronlab/activations.hpp"
#include "neuronlab/distributions.hpp"
#include "neuronlab/geometry.hpp"

namespace neuronlab {

// Teacher-student instance: inputs x ~ dist, labels act(target . x).
struct Problem {
  Problem(InputDistribution dist, Activation act, Vector target);

  InputDistribution dist;
  Activation act;
  Vector target;

  int dim() const { return dist.dim(); }
};

// Builds a problem with a unit-norm target; throws if |target| != 1.
Problem make_unit_target_problem(InputDistribution dist, Activation act,
                                 Vector target);

struct ScalarEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::int64_t n_samples = 0;
};

struct GradEstimate {
  Vector mean;
  Vector std_err;  // per-coordinate sample std / sqrt(n)
  std::int64_t n_samples = 0;
};

// Monte Carlo sample budgets are split across `workers` contiguous chunks,
// chunk k drawing from derive_seed(seed, k). Results depend only on
// (seed, n, workers), never on thread scheduling.
struct McOptions {
  int workers = 1;
};

// F(w) = E[ 1/2 (act(w.x) - act(v.x))^2 ] by sampling.
ScalarEstimate population_loss_mc(const Problem& p, const Vector& w,
                                  std::int64_t n, std::uint64_t seed,
                                  McOptions opts = {});

// Exact finite sum for finitely supported inputs; throws UnsupportedError
// otherwise.
double population_loss_exact_discrete(const Problem& p, const Vector& w);

GradEstimate population_gradient_mc(const Problem& p, const Vector& w,
                                    std::int64_t n, std::uint64_t seed,
                                    McOptions opts = {});

Vector population_gradient_exact_discrete(const Problem& p, const Vector& w);

// Estimate of <grad F(w), u> with a standard error computed from the
// per-sample scalars g(x).u, so correlation between coordinates is
// accounted for.
ScalarEstimate gradient_projection_mc(const Problem& p, const Vector& w,
                                      const Vector& u, std::int64_t n,
                                      std::uint64_t seed, McOptions opts = {});

// g = (act(w.x) - act(v.x)) * act'(w.x) * x.
Vector stochastic_gradient(const Problem& p, const Vector& w, const Vector& x);

// Standard Gaussian inputs with ReLU:
//   grad F(w) = w/2 - (|v| sin(theta) w_bar + (pi - theta) v) / (2 pi).
// Throws PreconditionError at w = 0 where the angle is undefined.
Vector gradient_closed_form_gaussian_relu(const Vector& w, const Vector& v);

// F(w) = (|w|^2 + |v|^2)/4 - (|w||v| sin(theta) + (pi - theta) w.v)/(2 pi),
// extended continuously to F(0) = |v|^2 / 4.
double loss_closed_form_gaussian_relu(const Vector& w, const Vector& v);

// True when the closed forms above describe this problem.
bool has_gaussian_relu_closed_form(const Problem& p);

// Central differences per coordinate with step h.
Vector finite_difference_gradient(const std::function<double(const Vector&)>& f,
                                  const Vector& w, double h);

}  // namespace neuronlab
