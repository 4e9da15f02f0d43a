#include "neuronlab/distributions.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/random/normal_distribution.hpp>

#include "neuronlab/errors.hpp"

namespace neuronlab {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Ziggurat normals.
void fill_normal(Rng& rng, std::span<double> out) {
  boost::random::normal_distribution<double> normal;
  for (double& x : out) x = normal(rng);
}

double norm_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

[[noreturn]] void bad_key(std::string_view key, const std::string& why) {
  throw ConfigError("unknown distribution key '" + std::string(key) + "': " +
                    why);
}

double to_double(std::string_view text, std::string_view key) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    bad_key(key, "bad number '" + std::string(text) + "'");
  }
  return out;
}

// Splits "a=1,b=(2,3)" on commas outside parentheses.
std::vector<std::string_view> split_args(std::string_view s) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == ',' && depth == 0) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  if (start < s.size()) parts.push_back(s.substr(start));
  return parts;
}

}  // namespace

InputDistribution::InputDistribution(int dim, Kind kind)
    : dim_(dim), kind_(std::move(kind)) {
  if (dim_ < 1) throw ConfigError("distribution dimension must be >= 1");
}

InputDistribution InputDistribution::gaussian(int dim, Vector mean,
                                              double variance) {
  if (mean.size() != dim) {
    throw ConfigError("gaussian mean has length " +
                      std::to_string(mean.size()) + " but dim is " +
                      std::to_string(dim));
  }
  if (!(variance > 0.0)) throw ConfigError("gaussian variance must be > 0");
  const bool centered = mean.isZero(0.0);
  InputDistribution d(dim, Gaussian{std::move(mean), variance});
  if (centered) {
    // The 2D marginal of N(0, s^2 I) is N(0, s^2 I_2).
    constexpr double kAlpha = 1.0;
    d.spread_ = SpreadParams{
        kAlpha, std::exp(-kAlpha * kAlpha / (2.0 * variance)) /
                    (2.0 * std::numbers::pi * variance)};
  }
  return d;
}

InputDistribution InputDistribution::standard_gaussian(int dim) {
  return gaussian(dim, Vector::Zero(dim), 1.0);
}

InputDistribution InputDistribution::uniform_ball(int dim, double radius) {
  if (!(radius > 0.0)) throw ConfigError("ball radius must be > 0");
  return InputDistribution(dim, UniformBall{radius});
}

InputDistribution InputDistribution::uniform_sphere(int dim, double radius) {
  if (!(radius > 0.0)) throw ConfigError("sphere radius must be > 0");
  return InputDistribution(dim, UniformSphere{radius});
}

InputDistribution InputDistribution::discrete(std::vector<Vector> atoms,
                                              std::vector<double> weights) {
  if (atoms.empty()) throw ConfigError("discrete distribution needs atoms");
  if (atoms.size() != weights.size()) {
    throw ConfigError("discrete distribution: atoms/weights length mismatch");
  }
  const int dim = static_cast<int>(atoms.front().size());
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].size() != dim) {
      throw ConfigError("discrete distribution: atoms differ in dimension");
    }
    if (!(weights[i] >= 0.0)) {
      throw ConfigError("discrete distribution: negative weight");
    }
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ConfigError("discrete distribution: weights must sum to 1");
  }
  return InputDistribution(dim,
                           DiscreteSupport{std::move(atoms), std::move(weights)});
}

void InputDistribution::sample_block(Rng& rng, std::span<double> out) const {
  if (const auto* g = std::get_if<Gaussian>(&kind_)) {
    fill_normal(rng, out);
    const double sd = std::sqrt(g->variance);
    for (std::size_t k = 0; k < out.size(); k += dim_) {
      for (int i = 0; i < dim_; ++i) out[k + i] = g->mean[i] + sd * out[k + i];
    }
    return;
  }
  for (std::size_t k = 0; k < out.size(); k += dim_) {
    sample(rng, out.subspan(k, dim_));
  }
}

void InputDistribution::sample(Rng& rng, std::span<double> out) const {
  std::visit(
      Overloaded{
          [&](const Gaussian& g) {
            fill_normal(rng, out);
            const double sd = std::sqrt(g.variance);
            for (int i = 0; i < dim_; ++i) out[i] = g.mean[i] + sd * out[i];
          },
          [&](const UniformBall& b) {
            double n = 0.0;
            do {
              fill_normal(rng, out);
              n = norm_of(out);
            } while (n == 0.0);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            const double r = b.radius * std::pow(unif(rng), 1.0 / dim_);
            for (double& x : out) x *= r / n;
          },
          [&](const UniformSphere& s) {
            double n = 0.0;
            do {
              fill_normal(rng, out);
              n = norm_of(out);
            } while (n == 0.0);
            for (double& x : out) x *= s.radius / n;
          },
          [&](const DiscreteSupport& d) {
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            const double u = unif(rng);
            std::size_t k = 0;
            double acc = d.weights[0];
            while (u >= acc && k + 1 < d.weights.size()) acc += d.weights[++k];
            const Vector& a = d.atoms[k];
            for (int i = 0; i < dim_; ++i) out[i] = a[i];
          },
      },
      kind_);
}

Vector InputDistribution::sample(Rng& rng) const {
  Vector x(dim_);
  sample(rng, std::span<double>(x.data(), x.size()));
  return x;
}

bool InputDistribution::is_spherically_symmetric() const {
  return std::visit(
      Overloaded{
          [](const Gaussian& g) { return g.mean.isZero(0.0); },
          [](const UniformBall&) { return true; },
          [](const UniformSphere&) { return true; },
          [](const DiscreteSupport&) { return false; },
      },
      kind_);
}

bool InputDistribution::is_standard_gaussian() const {
  const auto* g = std::get_if<Gaussian>(&kind_);
  return g != nullptr && g->variance == 1.0 && g->mean.isZero(0.0);
}

std::optional<double> InputDistribution::support_bound_sq() const {
  return std::visit(
      Overloaded{
          [](const Gaussian&) -> std::optional<double> { return std::nullopt; },
          [](const UniformBall& b) -> std::optional<double> {
            return b.radius * b.radius;
          },
          [](const UniformSphere& s) -> std::optional<double> {
            return s.radius * s.radius;
          },
          [](const DiscreteSupport& d) -> std::optional<double> {
            double m = 0.0;
            for (const auto& a : d.atoms) m = std::max(m, a.squaredNorm());
            return m;
          },
      },
      kind_);
}

const DiscreteSupport* InputDistribution::discrete_support() const {
  return std::get_if<DiscreteSupport>(&kind_);
}

std::string InputDistribution::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const Gaussian& g) {
                   os << "gaussian(d=" << dim_ << ", mean=("
                      << g.mean.transpose() << "), var=" << g.variance << ")";
                 },
                 [&](const UniformBall& b) {
                   os << "ball(d=" << dim_ << ", r=" << b.radius << ")";
                 },
                 [&](const UniformSphere& s) {
                   os << "sphere(d=" << dim_ << ", r=" << s.radius << ")";
                 },
                 [&](const DiscreteSupport& d) {
                   os << "discrete(d=" << dim_ << ", atoms=" << d.atoms.size()
                      << ")";
                 },
             },
             kind_);
  return os.str();
}

SpreadParams spread_params_for_gaussian(double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("spread alpha must be > 0");
  return {alpha, std::exp(-alpha * alpha / 2.0) / (2.0 * std::numbers::pi)};
}

InputDistribution AdversarialDataset::distribution() const {
  const double w = 1.0 / static_cast<double>(points.size());
  return InputDistribution::discrete(points,
                                     std::vector<double>(points.size(), w));
}

AdversarialDataset adversarial_instance(
    int dim, std::span<const double> init_sign_probs) {
  if (dim < 1) throw ConfigError("adversarial instance needs dim >= 1");
  if (static_cast<int>(init_sign_probs.size()) != dim) {
    throw ConfigError("adversarial instance: " +
                      std::to_string(init_sign_probs.size()) +
                      " sign probabilities for dim " + std::to_string(dim));
  }
  AdversarialDataset out;
  out.target = Vector::Zero(dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int i = 0; i < dim; ++i) {
    const double p = init_sign_probs[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("sign probability outside [0, 1]");
    }
    const int b = p < 0.5 ? 1 : -1;
    out.signs.push_back(b);
    Vector x = Vector::Zero(dim);
    x[i] = b;
    out.points.push_back(std::move(x));
    out.target[i] = b * scale;
  }
  return out;
}

std::vector<Eigen::Vector2d> marginal_2d(const InputDistribution& dist,
                                         const Vector& w, const Vector& v,
                                         int n, Rng& rng) {
  if (w.size() != dist.dim() || v.size() != dist.dim()) {
    throw ConfigError("marginal_2d: vector length does not match dim");
  }
  if (n < 1) throw ConfigError("marginal_2d: n must be >= 1");
  const double nw = w.norm();
  if (nw == 0.0) throw PreconditionError("marginal_2d: degenerate subspace");
  const Vector e1 = w / nw;
  Vector e2 = v - e1.dot(v) * e1;
  const double n2 = e2.norm();
  if (n2 <= 1e-12 * std::max(1.0, v.norm())) {
    throw PreconditionError(
        "marginal_2d: w and v are parallel (degenerate subspace)");
  }
  e2 /= n2;
  std::vector<Eigen::Vector2d> out;
  out.reserve(n);
  Vector x(dist.dim());
  for (int i = 0; i < n; ++i) {
    dist.sample(rng, std::span<double>(x.data(), x.size()));
    out.emplace_back(e1.dot(x), e2.dot(x));
  }
  return out;
}

InputDistribution parse_distribution(std::string_view key, int dim) {
  const auto colon = key.find(':');
  const std::string_view head = key.substr(0, colon);
  const std::string_view args =
      colon == std::string_view::npos ? std::string_view{} : key.substr(colon + 1);
  if (head == "adversarial") {
    bad_key(key, "the adversarial instance is derived from the initializer");
  }
  if (head != "gaussian" && head != "ball" && head != "sphere") {
    bad_key(key, "expected gaussian, ball or sphere");
  }
  Vector mean = Vector::Zero(dim);
  double var = 1.0;
  double radius = 1.0;
  for (std::string_view part : split_args(args)) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) bad_key(key, "expected name=value");
    const std::string_view name = part.substr(0, eq);
    std::string_view value = part.substr(eq + 1);
    if (head == "gaussian" && name == "mean") {
      if (!value.empty() && value.front() == '(') {
        if (value.back() != ')') bad_key(key, "unbalanced parentheses");
        value = value.substr(1, value.size() - 2);
        std::vector<double> coords;
        for (std::string_view c : split_args(value)) {
          coords.push_back(to_double(c, key));
        }
        if (static_cast<int>(coords.size()) != dim) {
          throw ConfigError("distribution key '" + std::string(key) +
                            "': mean has " + std::to_string(coords.size()) +
                            " coordinates but dim is " + std::to_string(dim));
        }
        mean = Eigen::Map<Vector>(coords.data(), dim);
      } else {
        mean = Vector::Constant(dim, to_double(value, key));
      }
    } else if (head == "gaussian" && name == "var") {
      var = to_double(value, key);
    } else if (head != "gaussian" && name == "r") {
      radius = to_double(value, key);
    } else {
      bad_key(key, "unknown parameter '" + std::string(name) + "'");
    }
  }
  if (head == "gaussian") return InputDistribution::gaussian(dim, mean, var);
  if (head == "ball") return InputDistribution::uniform_ball(dim, radius);
  return InputDistribution::uniform_sphere(dim, radius);
}

}  // namespace neuronlab
