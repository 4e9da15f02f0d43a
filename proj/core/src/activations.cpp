#include "neuronlab/activations.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "neuronlab/errors.hpp"

namespace neuronlab {
namespace {

std::string format_number(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

double parse_number(std::string_view text, std::string_view whole_key) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("unknown activation key '" + std::string(whole_key) +
                      "': bad number '" + std::string(text) + "'");
  }
  return out;
}

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Position of z inside [0, period).
double wrap(double z, double period) {
  double m = std::fmod(z, period);
  if (m < 0.0) m += period;
  return m;
}

}  // namespace

Activation::Activation(ActivationKind kind, double param, std::string key)
    : kind_(kind), param_(param), key_(std::move(key)) {
  switch (kind_) {
    case ActivationKind::kRelu:
      kinks_ = {0.0};
      kink_values_ = {param_};
      break;
    case ActivationKind::kLeakyRelu:
      kinks_ = {0.0};
      kink_values_ = {1.0};
      break;
    case ActivationKind::kAbsolute:
      kinks_ = {0.0};
      kink_values_ = {0.0};
      break;
    case ActivationKind::kPeriodic:
      kinks_ = {0.0, param_ / 2.0};
      kink_values_ = {1.0, -1.0};
      break;
    default:
      break;
  }
}

double Activation::value(double z) const {
  switch (kind_) {
    case ActivationKind::kRelu:
      return z > 0.0 ? z : 0.0;
    case ActivationKind::kLeakyRelu:
      return z > 0.0 ? z : param_ * z;
    case ActivationKind::kSoftplus:
      return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    case ActivationKind::kSigmoid:
      return logistic(z);
    case ActivationKind::kIdentity:
      return z;
    case ActivationKind::kAbsolute:
      return std::abs(z);
    case ActivationKind::kPeriodic: {
      const double half = param_ / 2.0;
      return half - std::abs(wrap(z, param_) - half);
    }
  }
  return 0.0;
}

double Activation::derivative(double z) const {
  switch (kind_) {
    case ActivationKind::kRelu:
      if (z > 0.0) return 1.0;
      if (z < 0.0) return 0.0;
      return param_;
    case ActivationKind::kLeakyRelu:
      return z >= 0.0 ? 1.0 : param_;
    case ActivationKind::kSoftplus:
      return logistic(z);
    case ActivationKind::kSigmoid: {
      const double s = logistic(z);
      return s * (1.0 - s);
    }
    case ActivationKind::kIdentity:
      return 1.0;
    case ActivationKind::kAbsolute:
      if (z > 0.0) return 1.0;
      if (z < 0.0) return -1.0;
      return 0.0;
    case ActivationKind::kPeriodic:
      return wrap(z, param_) < param_ / 2.0 ? 1.0 : -1.0;
  }
  return 0.0;
}

double Activation::left_derivative_at_kink(std::size_t i) const {
  switch (kind_) {
    case ActivationKind::kRelu:
      return 0.0;
    case ActivationKind::kLeakyRelu:
      return param_;
    case ActivationKind::kAbsolute:
      return -1.0;
    case ActivationKind::kPeriodic:
      return i == 0 ? -1.0 : 1.0;
    default:
      return derivative(kinks_.at(i));
  }
}

double Activation::right_derivative_at_kink(std::size_t i) const {
  switch (kind_) {
    case ActivationKind::kRelu:
    case ActivationKind::kLeakyRelu:
    case ActivationKind::kAbsolute:
      return 1.0;
    case ActivationKind::kPeriodic:
      return i == 0 ? 1.0 : -1.0;
    default:
      return derivative(kinks_.at(i));
  }
}

bool Activation::near_kink(double z, double tol) const {
  if (kind_ == ActivationKind::kPeriodic) {
    const double m = wrap(z, param_);
    return m < tol || std::abs(m - param_ / 2.0) < tol || param_ - m < tol;
  }
  for (double k : kinks_) {
    if (std::abs(z - k) < tol) return true;
  }
  return false;
}

double Activation::derivative_upper_bound() const {
  return kind_ == ActivationKind::kSigmoid ? 0.25 : 1.0;
}

double Activation::lipschitz_constant() const {
  return derivative_upper_bound();
}

double Activation::monotone_lower_bound(double alpha) const {
  switch (kind_) {
    case ActivationKind::kSoftplus:
      // logistic is increasing, so the infimum sits at the left end.
      return 0.5;
    case ActivationKind::kSigmoid:
      return derivative(2.0 * alpha);
    case ActivationKind::kPeriodic:
      return 0.0;
    default:
      return 1.0;
  }
}

double Activation::global_derivative_lower_bound() const {
  switch (kind_) {
    case ActivationKind::kLeakyRelu:
      return param_;
    case ActivationKind::kIdentity:
      return 1.0;
    case ActivationKind::kAbsolute:
    case ActivationKind::kPeriodic:
      return -1.0;
    default:
      return 0.0;
  }
}

bool Activation::is_monotone() const {
  return kind_ != ActivationKind::kAbsolute &&
         kind_ != ActivationKind::kPeriodic;
}

Activation make_relu(double kink_value) {
  if (!(kink_value >= 0.0 && kink_value <= 1.0)) {
    throw ConfigError("invalid ReLU kink convention " +
                      format_number(kink_value) + ": must lie in [0, 1]");
  }
  std::string key = "relu";
  if (kink_value != 1.0) key += "@" + format_number(kink_value);
  return Activation(ActivationKind::kRelu, kink_value, std::move(key));
}

Activation make_leaky_relu(double slope) {
  if (!(slope > 0.0 && slope < 1.0)) {
    throw ConfigError("leaky ReLU slope must lie in (0, 1), got " +
                      format_number(slope));
  }
  return Activation(ActivationKind::kLeakyRelu, slope,
                    "leaky_relu:" + format_number(slope));
}

Activation make_softplus() {
  return Activation(ActivationKind::kSoftplus, 0.0, "softplus");
}

Activation make_sigmoid() {
  return Activation(ActivationKind::kSigmoid, 0.0, "sigmoid");
}

Activation make_identity() {
  return Activation(ActivationKind::kIdentity, 0.0, "identity");
}

Activation make_absolute() {
  return Activation(ActivationKind::kAbsolute, 0.0, "abs");
}

Activation make_periodic(double period) {
  if (!(period > 0.0)) {
    throw ConfigError("periodic activation needs period > 0, got " +
                      format_number(period));
  }
  return Activation(ActivationKind::kPeriodic, period,
                    "periodic:" + format_number(period));
}

Activation parse_activation(std::string_view key) {
  const auto colon = key.find(':');
  const auto at = key.find('@');
  if (key.substr(0, at) == "relu") {
    if (at == std::string_view::npos) return make_relu(1.0);
    return make_relu(parse_number(key.substr(at + 1), key));
  }
  const std::string_view head = key.substr(0, colon);
  const bool has_arg = colon != std::string_view::npos;
  if (head == "leaky_relu") {
    return make_leaky_relu(has_arg ? parse_number(key.substr(colon + 1), key)
                                   : 0.01);
  }
  if (head == "periodic") {
    return make_periodic(has_arg ? parse_number(key.substr(colon + 1), key)
                                 : 2.0);
  }
  if (!has_arg) {
    if (key == "softplus") return make_softplus();
    if (key == "sigmoid") return make_sigmoid();
    if (key == "identity") return make_identity();
    if (key == "abs") return make_absolute();
  }
  throw ConfigError("unknown activation key '" + std::string(key) + "'");
}

}  // namespace neuronlab
