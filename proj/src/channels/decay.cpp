#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "qkm/channels.hpp"
#include "qkm/error.hpp"

namespace qkm::channels {
namespace {

constexpr double kRangeSlack = 1e-12;

// sinh(x)/x and sin(x)/x, with Taylor series where the quotient loses digits
double shc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0);
  }
  return std::sinh(x) / x;
}

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
  }
  return std::sin(x) / x;
}

// e^{-a x} [cosh(r x) + b x shc(r x)] for 0 <= r <= a, without overflowing cosh
double damped_hyperbolic(double a, double r, double b, double x) {
  const double h = r * x;
  if (h < 1.0) return std::exp(-a * x) * (std::cosh(h) + b * x * shc(h));
  const double slow = std::exp(-(a - r) * x);
  const double fast = std::exp(-(a + r) * x);
  return 0.5 * (slow * (1.0 + b / r) + fast * (1.0 - b / r));
}

double clamp_checked(double value, double lo, double hi, const char* what) {
  if (!std::isfinite(value) || value < lo - kRangeSlack || value > hi + kRangeSlack) {
    throw ContractViolation(std::string(what) + " out of range: " + std::to_string(value));
  }
  return std::clamp(value, lo, hi);
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string(name) + " must be positive and finite, got " + std::to_string(v));
  }
}

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw ConfigError("time must be non-negative and finite, got " + std::to_string(t));
  }
}

}  // namespace

std::string to_string(ChannelKind kind) { return kind == ChannelKind::AmplitudeDamping ? "AD" : "PD"; }

ChannelKind parse_channel(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (c != '_' && c != '-' && c != ' ') s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (s == "ad" || s == "amplitudedamping") return ChannelKind::AmplitudeDamping;
  if (s == "pd" || s == "phasedamping") return ChannelKind::PhaseDamping;
  throw ConfigError("unknown channel '" + text + "' (expected AD or PD)");
}

void ADParams::validate() const {
  require_positive(lambda, "lambda");
  require_positive(gamma0, "gamma0");
  require_time(t);
}

void PDParams::validate() const {
  require_positive(alpha, "alpha");
  require_positive(tau, "tau");
  require_time(t);
}

ChannelKind kind_of(const ChannelParams& params) noexcept {
  return std::holds_alternative<ADParams>(params) ? ChannelKind::AmplitudeDamping : ChannelKind::PhaseDamping;
}

ChannelParams at_time(const ChannelParams& params, double t) {
  return std::visit(
      [t](auto p) -> ChannelParams {
        p.t = t;
        return p;
      },
      params);
}

double ad_decay(const ADParams& params) {
  params.validate();
  const double lambda = params.lambda;
  const double t = params.t;
  const double disc = lambda * (lambda - 2.0 * params.gamma0);
  // amplitude A with p = A^2; x = t/2 throughout
  const double x = 0.5 * t;
  double amplitude;
  if (disc > 0.0) {
    amplitude = damped_hyperbolic(lambda, std::sqrt(disc), lambda, x);
  } else if (disc == 0.0) {
    amplitude = std::exp(-lambda * x) * (1.0 + lambda * x);
  } else {
    const double omega = std::sqrt(-disc);
    amplitude = std::exp(-lambda * x) * (std::cos(omega * x) + lambda * x * sinc(omega * x));
  }
  return clamp_checked(amplitude * amplitude, 0.0, 1.0, "p(t)");
}

double pd_decay(const PDParams& params) {
  params.validate();
  const double x = params.t / (2.0 * params.tau);
  const double a = 4.0 * params.alpha * params.tau;
  const double disc = a * a - 1.0;
  double value;
  if (disc < 0.0) {
    value = damped_hyperbolic(1.0, std::sqrt(-disc), 1.0, x);
  } else if (disc == 0.0) {
    value = std::exp(-x) * (1.0 + x);
  } else {
    const double mu = std::sqrt(disc);
    value = std::exp(-x) * (std::cos(mu * x) + x * sinc(mu * x));
  }
  return clamp_checked(value, -1.0, 1.0, "Lambda(t)");
}

double decay(const ChannelParams& params) {
  if (const auto* ad = std::get_if<ADParams>(&params)) return ad_decay(*ad);
  return pd_decay(std::get<PDParams>(params));
}

double theta_ad(double p) {
  const double q = clamp_checked(p, 0.0, 1.0, "p");
  return 2.0 * std::acos(std::sqrt(q));
}

double theta_pd(double lambda) {
  const double l = clamp_checked(lambda, -1.0, 1.0, "Lambda");
  return 2.0 * std::acos(l);
}

double theta_for(ChannelKind kind, double decay_value) {
  return kind == ChannelKind::AmplitudeDamping ? theta_ad(decay_value) : theta_pd(decay_value);
}

}  // namespace qkm::channels
