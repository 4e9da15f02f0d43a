#include "neuronlab/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <thread>
#include <vector>

#include "neuronlab/errors.hpp"

namespace neuronlab {
namespace {

// Running sums for a batch of d-dimensional samples.
struct Moments {
  explicit Moments(int dim) : sum(dim, 0.0), sum_sq(dim, 0.0) {}

  void merge(const Moments& o) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] += o.sum[i];
      sum_sq[i] += o.sum_sq[i];
    }
    count += o.count;
  }

  std::vector<double> sum;
  std::vector<double> sum_sq;
  std::int64_t count = 0;
};

// Splits n samples over `workers` chunks; chunk k uses derive_seed(seed, k).
// The kernel fills a Moments for its chunk; chunks are merged in order.
template <class Kernel>
Moments run_chunked(std::int64_t n, std::uint64_t seed, int workers, int dim,
                    Kernel kernel) {
  if (n < 1) throw ConfigError("Monte Carlo sample count must be >= 1");
  if (workers < 1) workers = 1;
  std::vector<Moments> parts(workers, Moments(dim));
  auto run_one = [&](int k) {
    const std::int64_t lo = n * k / workers;
    const std::int64_t hi = n * (k + 1) / workers;
    Rng rng(workers == 1 ? seed : derive_seed(seed, k));
    kernel(rng, hi - lo, parts[k]);
  };
  if (workers == 1) {
    run_one(0);
  } else {
    std::vector<std::thread> threads;
    for (int k = 0; k < workers; ++k) threads.emplace_back(run_one, k);
    for (auto& t : threads) t.join();
  }
  Moments total(dim);
  for (const auto& p : parts) total.merge(p);
  return total;
}

double std_err_of(double sum, double sum_sq, std::int64_t n) {
  if (n < 2) return 0.0;
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - mean * sum) / (n - 1));
  return std::sqrt(var / n);
}

// Draws count inputs in blocks and calls fn(x) on each.
template <class Fn>
void for_each_draw(const InputDistribution& dist, Rng& rng, std::int64_t count,
                   Fn fn) {
  constexpr std::int64_t kBlock = 512;
  const int d = dist.dim();
  std::vector<double> buf(static_cast<std::size_t>(kBlock * d));
  for (std::int64_t done = 0; done < count; done += kBlock) {
    const std::int64_t m = std::min(kBlock, count - done);
    const std::span<double> block(buf.data(), static_cast<std::size_t>(m * d));
    dist.sample_block(rng, block);
    for (std::int64_t s = 0; s < m; ++s) {
      fn(block.subspan(static_cast<std::size_t>(s * d), d));
    }
  }
}

double dot(std::span<const double> a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_dim(const Problem& p, const Vector& w) {
  if (w.size() != p.dim()) {
    throw ConfigError("parameter vector has length " + std::to_string(w.size()) +
                      " but problem dim is " + std::to_string(p.dim()));
  }
}

}  // namespace

Problem::Problem(InputDistribution dist_in, Activation act_in, Vector target_in)
    : dist(std::move(dist_in)), act(std::move(act_in)), target(std::move(target_in)) {
  if (target.size() != dist.dim()) {
    throw ConfigError("target has length " + std::to_string(target.size()) +
                      " but distribution dim is " + std::to_string(dist.dim()));
  }
}

Problem make_unit_target_problem(InputDistribution dist, Activation act,
                                 Vector target) {
  if (std::abs(target.norm() - 1.0) > 1e-12) {
    throw ConfigError("target must be unit norm");
  }
  return Problem(std::move(dist), std::move(act), std::move(target));
}

ScalarEstimate population_loss_mc(const Problem& p, const Vector& w,
                                  std::int64_t n, std::uint64_t seed,
                                  McOptions opts) {
  check_dim(p, w);
  Moments m = run_chunked(n, seed, opts.workers, 1,
                          [&](Rng& rng, std::int64_t count, Moments& out) {
                            for_each_draw(p.dist, rng, count, [&](std::span<const double> x) {
                              const double diff = p.act.value(dot(x, w)) -
                                                  p.act.value(dot(x, p.target));
                              const double l = 0.5 * diff * diff;
                              out.sum[0] += l;
                              out.sum_sq[0] += l * l;
                            });
                            out.count += count;
                          });
  return {m.sum[0] / m.count, std_err_of(m.sum[0], m.sum_sq[0], m.count),
          m.count};
}

double population_loss_exact_discrete(const Problem& p, const Vector& w) {
  check_dim(p, w);
  const DiscreteSupport* s = p.dist.discrete_support();
  if (s == nullptr) {
    throw UnsupportedError("exact loss needs a finitely supported distribution, got " +
                           p.dist.describe());
  }
  double total = 0.0;
  for (std::size_t i = 0; i < s->atoms.size(); ++i) {
    const double diff = p.act.value(s->atoms[i].dot(w)) -
                        p.act.value(s->atoms[i].dot(p.target));
    total += s->weights[i] * 0.5 * diff * diff;
  }
  return total;
}

GradEstimate population_gradient_mc(const Problem& p, const Vector& w,
                                    std::int64_t n, std::uint64_t seed,
                                    McOptions opts) {
  check_dim(p, w);
  const int d = p.dim();
  Moments m = run_chunked(
      n, seed, opts.workers, d, [&](Rng& rng, std::int64_t count, Moments& out) {
        double* sum = out.sum.data();
        double* sum_sq = out.sum_sq.data();
        for_each_draw(p.dist, rng, count, [&](std::span<const double> x) {
          const double a = dot(x, w);
          const double r = (p.act.value(a) - p.act.value(dot(x, p.target))) *
                           p.act.derivative(a);
          for (int i = 0; i < d; ++i) {
            const double g = r * x[i];
            sum[i] += g;
            sum_sq[i] += g * g;
          }
        });
        out.count += count;
      });
  GradEstimate est{Vector(d), Vector(d), m.count};
  for (int i = 0; i < d; ++i) {
    est.mean[i] = m.sum[i] / m.count;
    est.std_err[i] = std_err_of(m.sum[i], m.sum_sq[i], m.count);
  }
  return est;
}

Vector population_gradient_exact_discrete(const Problem& p, const Vector& w) {
  check_dim(p, w);
  const DiscreteSupport* s = p.dist.discrete_support();
  if (s == nullptr) {
    throw UnsupportedError("exact gradient needs a finitely supported distribution, got " +
                           p.dist.describe());
  }
  Vector g = Vector::Zero(p.dim());
  for (std::size_t i = 0; i < s->atoms.size(); ++i) {
    const Vector& x = s->atoms[i];
    const double a = x.dot(w);
    const double r = (p.act.value(a) - p.act.value(x.dot(p.target))) *
                     p.act.derivative(a);
    // Skipping zero coefficients keeps untouched coordinates bitwise exact.
    if (r != 0.0) g += (s->weights[i] * r) * x;
  }
  return g;
}

ScalarEstimate gradient_projection_mc(const Problem& p, const Vector& w,
                                      const Vector& u, std::int64_t n,
                                      std::uint64_t seed, McOptions opts) {
  check_dim(p, w);
  check_dim(p, u);
  Moments m = run_chunked(n, seed, opts.workers, 1,
                          [&](Rng& rng, std::int64_t count, Moments& out) {
                            for_each_draw(p.dist, rng, count, [&](std::span<const double> x) {
                              const double a = dot(x, w);
                              const double r = (p.act.value(a) -
                                                p.act.value(dot(x, p.target))) *
                                               p.act.derivative(a);
                              const double g = r * dot(x, u);
                              out.sum[0] += g;
                              out.sum_sq[0] += g * g;
                            });
                            out.count += count;
                          });
  return {m.sum[0] / m.count, std_err_of(m.sum[0], m.sum_sq[0], m.count),
          m.count};
}

Vector stochastic_gradient(const Problem& p, const Vector& w, const Vector& x) {
  check_dim(p, w);
  check_dim(p, x);
  const double a = x.dot(w);
  const double r =
      (p.act.value(a) - p.act.value(x.dot(p.target))) * p.act.derivative(a);
  return r * x;
}

Vector gradient_closed_form_gaussian_relu(const Vector& w, const Vector& v) {
  const double nw = w.norm();
  if (nw == 0.0) {
    throw PreconditionError("closed-form gradient is undefined at w = 0");
  }
  const double theta = *angle_between(w, v);
  return 0.5 * w - (v.norm() * std::sin(theta) * (w / nw) +
                    (std::numbers::pi - theta) * v) /
                       (2.0 * std::numbers::pi);
}

double loss_closed_form_gaussian_relu(const Vector& w, const Vector& v) {
  const double nw = w.norm();
  const double nv = v.norm();
  if (nw == 0.0 || nv == 0.0) return 0.25 * (nw * nw + nv * nv);
  const double theta = *angle_between(w, v);
  return 0.25 * (nw * nw + nv * nv) -
         (nw * nv * std::sin(theta) + (std::numbers::pi - theta) * w.dot(v)) /
             (2.0 * std::numbers::pi);
}

bool has_gaussian_relu_closed_form(const Problem& p) {
  return p.dist.is_standard_gaussian() && p.act.kind() == ActivationKind::kRelu;
}

Vector finite_difference_gradient(const std::function<double(const Vector&)>& f,
                                  const Vector& w, double h) {
  if (!(h > 0.0)) throw ConfigError("finite-difference step must be > 0");
  Vector g(w.size());
  Vector probe = w;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    probe[i] = w[i] + h;
    const double up = f(probe);
    probe[i] = w[i] - h;
    const double down = f(probe);
    probe[i] = w[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace neuronlab
