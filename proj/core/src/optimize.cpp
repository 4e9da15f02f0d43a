#include "neuronlab/optimize.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <span>
#include <string>

namespace neuronlab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void put_double(std::ostream& out, double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x,
                                 std::chars_format::general, 17);
  out.write(buf, end - buf);
}

TrajectoryEntry make_entry(const Problem& p, double time, const Vector& w,
                           double loss) {
  TrajectoryEntry e;
  e.time = time;
  e.w = w;
  e.loss = loss;
  e.dist_sq = (w - p.target).squaredNorm();
  e.angle = angle_between(w, p.target);
  e.norm = w.norm();
  return e;
}

// Loss and gradient from one batch of n inputs drawn with `seed`.
double batch_loss_and_gradient(const Problem& p, const Vector& w,
                               std::int64_t n, std::uint64_t seed,
                               Vector& grad) {
  const int d = p.dim();
  constexpr std::int64_t kBlock = 512;
  Rng rng(seed);
  std::vector<double> buf(static_cast<std::size_t>(kBlock * d));
  std::vector<double> g(d, 0.0);
  double loss = 0.0;
  for (std::int64_t done = 0; done < n; done += kBlock) {
    const std::int64_t m = std::min(kBlock, n - done);
    p.dist.sample_block(rng, std::span<double>(buf.data(), static_cast<std::size_t>(m * d)));
    for (std::int64_t s = 0; s < m; ++s) {
      const double* x = buf.data() + s * d;
      double a = 0.0;
      double b = 0.0;
      for (int i = 0; i < d; ++i) {
        a += x[i] * w[i];
        b += x[i] * p.target[i];
      }
      const double diff = p.act.value(a) - p.act.value(b);
      loss += 0.5 * diff * diff;
      const double r = diff * p.act.derivative(a);
      for (int i = 0; i < d; ++i) g[i] += r * x[i];
    }
  }
  grad.resize(d);
  for (int i = 0; i < d; ++i) grad[i] = g[i] / static_cast<double>(n);
  return loss / static_cast<double>(n);
}

bool has_cheap_loss(const Problem& p) {
  return has_gaussian_relu_closed_form(p) || p.dist.discrete_support() != nullptr;
}

double cheap_loss(const Problem& p, const Vector& w) {
  if (has_gaussian_relu_closed_form(p)) {
    return loss_closed_form_gaussian_relu(w, p.target);
  }
  return population_loss_exact_discrete(p, w);
}

bool should_record(std::int64_t t, std::int64_t stride, std::int64_t last) {
  return t % stride == 0 || t == last;
}

}  // namespace

void OptimizerConfig::validate(const Problem& p) const {
  if (method != Method::kGradientFlow && !(step_size > 0.0)) {
    throw ConfigError("step size must be > 0");
  }
  if (method != Method::kGradientFlow && iterations < 1) {
    throw ConfigError("iteration horizon must be >= 1");
  }
  if (method == Method::kGradientFlow) {
    if (!(t_max > 0.0)) throw ConfigError("flow horizon t_max must be > 0");
    if (!(flow_tolerance > 0.0)) throw ConfigError("flow tolerance must be > 0");
  }
  if (record_stride < 1) throw ConfigError("record stride must be >= 1");
  if (method == Method::kSgd) return;
  switch (gradient_mode.kind) {
    case GradientMode::Kind::kMonteCarlo:
      if (method == Method::kGradientFlow) {
        throw ConfigError(
            "gradient flow needs an exact gradient field; monte_carlo mode is "
            "not allowed");
      }
      if (gradient_mode.mc_samples < 1) {
        throw ConfigError("monte_carlo gradient needs at least one sample");
      }
      break;
    case GradientMode::Kind::kClosedForm:
      if (!has_gaussian_relu_closed_form(p)) {
        throw ConfigError("closed_form gradient needs standard Gaussian inputs "
                          "and ReLU, got " + p.dist.describe() + " with " +
                          p.act.key());
      }
      break;
    case GradientMode::Kind::kExactDiscrete:
      if (p.dist.discrete_support() == nullptr) {
        throw ConfigError("exact_discrete gradient needs a finite support, got " +
                          p.dist.describe());
      }
      break;
  }
}

void Trajectory::write_csv(std::ostream& out) const {
  const Eigen::Index d = entries.empty() ? 0 : entries.front().w.size();
  out << "time,loss,dist_sq,angle,norm";
  for (Eigen::Index i = 0; i < d; ++i) out << ",w_" << i;
  out << '\n';
  for (const auto& e : entries) {
    put_double(out, e.time);
    out << ',';
    put_double(out, e.loss);
    out << ',';
    put_double(out, e.dist_sq);
    out << ',';
    if (e.angle) {
      put_double(out, *e.angle);
    } else {
      out << "undef";
    }
    out << ',';
    put_double(out, e.norm);
    for (Eigen::Index i = 0; i < d; ++i) {
      out << ',';
      put_double(out, e.w[i]);
    }
    out << '\n';
  }
}

Vector exact_gradient(const Problem& p, const Vector& w, GradientMode mode) {
  switch (mode.kind) {
    case GradientMode::Kind::kClosedForm:
      // At the origin: E[(0 - relu(v.x)) * relu'(0) * x] = -relu'(0) v / 2.
      if (w.isZero(0.0)) {
        return -p.act.parameter() * p.target / 2.0;
      }
      return gradient_closed_form_gaussian_relu(w, p.target);
    case GradientMode::Kind::kExactDiscrete:
      return population_gradient_exact_discrete(p, w);
    case GradientMode::Kind::kMonteCarlo:
      break;
  }
  throw UnsupportedError("monte_carlo mode has no exact gradient");
}

double exact_loss(const Problem& p, const Vector& w, GradientMode mode) {
  switch (mode.kind) {
    case GradientMode::Kind::kClosedForm:
      return loss_closed_form_gaussian_relu(w, p.target);
    case GradientMode::Kind::kExactDiscrete:
      return population_loss_exact_discrete(p, w);
    case GradientMode::Kind::kMonteCarlo:
      break;
  }
  throw UnsupportedError("monte_carlo mode has no exact loss");
}

Trajectory run_gd(const Problem& p, const Vector& init,
                  const OptimizerConfig& cfg, std::uint64_t seed) {
  if (cfg.method != Method::kGd) throw ConfigError("run_gd needs method GD");
  cfg.validate(p);
  if (init.size() != p.dim()) throw ConfigError("initial point has wrong length");

  const bool mc = cfg.gradient_mode.kind == GradientMode::Kind::kMonteCarlo;
  Trajectory traj;
  Vector w = init;
  Vector grad(p.dim());
  traj.min_loss = std::numeric_limits<double>::infinity();
  for (std::int64_t t = 0;; ++t) {
    double loss = 0.0;
    const bool last = t == cfg.iterations;
    if (mc) {
      loss = batch_loss_and_gradient(p, w, cfg.gradient_mode.mc_samples,
                                     derive_seed(seed, t), grad);
    } else {
      loss = exact_loss(p, w, cfg.gradient_mode);
      if (!last) grad = exact_gradient(p, w, cfg.gradient_mode);
    }
    traj.min_loss = std::min(traj.min_loss, loss);
    if (should_record(t, cfg.record_stride, cfg.iterations)) {
      traj.entries.push_back(make_entry(p, static_cast<double>(t), w, loss));
    }
    if (last) break;
    w -= cfg.step_size * grad;
  }
  return traj;
}

Trajectory run_sgd(const Problem& p, const Vector& init,
                   const OptimizerConfig& cfg, std::uint64_t seed) {
  if (cfg.method != Method::kSgd) throw ConfigError("run_sgd needs method SGD");
  cfg.validate(p);
  if (init.size() != p.dim()) throw ConfigError("initial point has wrong length");

  const bool cheap = has_cheap_loss(p);
  const std::uint64_t loss_seed = splitmix64(seed ^ 0x6c6f7373ULL);
  Trajectory traj;
  traj.min_loss = std::numeric_limits<double>::infinity();
  Rng rng(seed);
  const int d = p.dim();
  Vector w = init;
  Vector x(d);
  for (std::int64_t t = 0;; ++t) {
    const bool record = should_record(t, cfg.record_stride, cfg.iterations);
    if (cheap) {
      const double loss = cheap_loss(p, w);
      traj.min_loss = std::min(traj.min_loss, loss);
      if (record) traj.entries.push_back(make_entry(p, double(t), w, loss));
    } else if (record) {
      const double loss =
          population_loss_mc(p, w, cfg.loss_samples, derive_seed(loss_seed, t))
              .mean;
      traj.min_loss = std::min(traj.min_loss, loss);
      traj.entries.push_back(make_entry(p, double(t), w, loss));
    }
    if (t == cfg.iterations) break;
    p.dist.sample(rng, std::span<double>(x.data(), d));
    const double a = x.dot(w);
    const double r =
        (p.act.value(a) - p.act.value(x.dot(p.target))) * p.act.derivative(a);
    if (r != 0.0) w -= (cfg.step_size * r) * x;
  }
  return traj;
}

Trajectory run_gradient_flow(const Problem& p, const Vector& init,
                             const OptimizerConfig& cfg) {
  if (cfg.method != Method::kGradientFlow) {
    throw ConfigError("run_gradient_flow needs method GradientFlow");
  }
  cfg.validate(p);
  if (init.size() != p.dim()) throw ConfigError("initial point has wrong length");

  // Dormand-Prince 5(4) tableau.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2, (void)c3, (void)c4, (void)c5;  // autonomous system

  auto field = [&](const Vector& w) -> Vector {
    return -exact_gradient(p, w, cfg.gradient_mode);
  };
  auto loss_at = [&](const Vector& w) {
    return exact_loss(p, w, cfg.gradient_mode);
  };

  const double tol = cfg.flow_tolerance;
  Trajectory traj;
  Vector w = init;
  double t = 0.0;
  double loss = loss_at(w);
  traj.min_loss = loss;
  traj.entries.push_back(make_entry(p, t, w, loss));

  Vector k1 = field(w);
  double h = std::min(1e-2, cfg.t_max);
  std::int64_t accepted = 0;
  while (t < cfg.t_max) {
    const bool final_step = t + h >= cfg.t_max;
    if (final_step) h = cfg.t_max - t;
    const Vector k2 = field(w + h * a21 * k1);
    const Vector k3 = field(w + h * (a31 * k1 + a32 * k2));
    const Vector k4 = field(w + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = field(w + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 =
        field(w + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vector next =
        w + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vector k7 = field(next);
    const Vector err =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err_norm = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double scale =
          tol + tol * std::max(std::abs(w[i]), std::abs(next[i]));
      err_norm = std::max(err_norm, std::abs(err[i]) / scale);
    }

    if (err_norm <= 1.0) {
      t = final_step ? cfg.t_max : t + h;
      w = next;
      k1 = k7;
      ++accepted;
      loss = loss_at(w);
      traj.min_loss = std::min(traj.min_loss, loss);
      if (accepted % cfg.record_stride == 0 || final_step) {
        traj.entries.push_back(make_entry(p, t, w, loss));
      }
      if (final_step) break;
    }
    const double factor =
        err_norm == 0.0 ? 5.0
                        : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
    h *= factor;
    if (h < 1e-14 * std::max(1.0, t)) {
      throw IntegrationFailure("gradient flow step size underflow at t = " +
                                   std::to_string(t),
                               std::move(traj));
    }
  }
  return traj;
}

double Sampler1D::sample(Rng& rng) const {
  switch (kind) {
    case Kind::kNormal:
      return std::normal_distribution<double>(a, b)(rng);
    case Kind::kUniform:
      return std::uniform_real_distribution<double>(a, b)(rng);
    case Kind::kPoint:
      return a;
  }
  return 0.0;
}

double Sampler1D::prob_positive() const {
  switch (kind) {
    case Kind::kNormal:
      return 0.5 * std::erfc(-a / (b * std::sqrt(2.0)));
    case Kind::kUniform:
      if (b <= 0.0) return 0.0;
      if (a >= 0.0) return 1.0;
      return b / (b - a);
    case Kind::kPoint:
      return a > 0.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

Initializer Initializer::gaussian_isotropic(double tau) {
  if (!(tau > 0.0)) throw ConfigError("gaussian_isotropic needs tau > 0");
  return Initializer(GaussianIsotropic{tau});
}

Initializer Initializer::product(std::vector<Sampler1D> coords) {
  if (coords.empty()) throw ConfigError("product initializer needs a sampler");
  for (const auto& s : coords) {
    if (s.kind == Sampler1D::Kind::kNormal && !(s.b > 0.0)) {
      throw ConfigError("normal coordinate sampler needs sd > 0");
    }
    if (s.kind == Sampler1D::Kind::kUniform && !(s.b > s.a)) {
      throw ConfigError("uniform coordinate sampler needs lo < hi");
    }
  }
  return Initializer(Product{std::move(coords)});
}

Initializer Initializer::fixed(Vector w) { return Initializer(Fixed{std::move(w)}); }

Initializer Initializer::zero() { return Initializer(Zero{}); }

Initializer Initializer::sphere(double radius) {
  if (!(radius > 0.0)) throw ConfigError("sphere initializer needs radius > 0");
  return Initializer(Sphere{radius});
}

bool Initializer::is_product() const {
  return !std::holds_alternative<Sphere>(kind_);
}

Vector initialize(const Initializer& init, int dim, std::uint64_t seed) {
  if (dim < 1) throw ConfigError("dimension must be >= 1");
  Rng rng(seed);
  return std::visit(
      Overloaded{
          [&](const Initializer::GaussianIsotropic& g) -> Vector {
            std::normal_distribution<double> normal(0.0, g.tau);
            Vector w(dim);
            for (int i = 0; i < dim; ++i) w[i] = normal(rng);
            return w;
          },
          [&](const Initializer::Product& prod) -> Vector {
            const auto n = static_cast<int>(prod.coords.size());
            if (n != 1 && n != dim) {
              throw ConfigError("product initializer has " + std::to_string(n) +
                                " samplers for dimension " + std::to_string(dim));
            }
            Vector w(dim);
            for (int i = 0; i < dim; ++i) {
              w[i] = prod.coords[n == 1 ? 0 : i].sample(rng);
            }
            return w;
          },
          [&](const Initializer::Fixed& f) -> Vector {
            if (f.w.size() != dim) {
              throw ConfigError("fixed initializer has length " +
                                std::to_string(f.w.size()) + " for dimension " +
                                std::to_string(dim));
            }
            return f.w;
          },
          [&](const Initializer::Zero&) -> Vector { return Vector::Zero(dim); },
          [&](const Initializer::Sphere& s) -> Vector {
            return s.radius * random_unit_vector(dim, rng);
          },
      },
      init.kind());
}

std::vector<double> positive_probabilities(const Initializer& init, int dim) {
  return std::visit(
      Overloaded{
          [&](const Initializer::GaussianIsotropic&) {
            return std::vector<double>(dim, 0.5);
          },
          [&](const Initializer::Product& prod) {
            const auto n = static_cast<int>(prod.coords.size());
            if (n != 1 && n != dim) {
              throw ConfigError("product initializer has " + std::to_string(n) +
                                " samplers for dimension " + std::to_string(dim));
            }
            std::vector<double> out(dim);
            for (int i = 0; i < dim; ++i) {
              out[i] = prod.coords[n == 1 ? 0 : i].prob_positive();
            }
            return out;
          },
          [&](const Initializer::Fixed& f) {
            std::vector<double> out(dim);
            for (int i = 0; i < dim; ++i) out[i] = f.w[i] > 0.0 ? 1.0 : 0.0;
            return out;
          },
          [&](const Initializer::Zero&) { return std::vector<double>(dim, 0.0); },
          [&](const Initializer::Sphere&) -> std::vector<double> {
            throw PreconditionError(
                "initializer is not a product distribution; the adversarial "
                "construction needs independent coordinates");
          },
      },
      init.kind());
}

}  // namespace neuronlab
