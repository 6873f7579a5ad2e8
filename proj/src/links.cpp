#include "panelfe/links.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>

namespace panelfe {

std::string_view to_string(Family family) {
  return family == Family::Probit ? "probit" : "logit";
}

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kHalfLog2Pi = 0.91893853320467274178;
constexpr double kSqrt1_2 = 0.70710678118654752440;

const double kFMin = std::numeric_limits<double>::min();
const double kFMax = std::nextafter(1.0, 0.0);

double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double norm_cdf(double z) { return 0.5 * std::erfc(-z * kSqrt1_2); }

// Logistic CDF evaluated without overflow.
double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// phi(z) / Phi(z), the score of a y = 1 probit observation.
double inverse_mills(double z) {
  if (z >= -kProbitTailCrossover) return norm_pdf(z) / norm_cdf(z);
  return 1.0 / detail::mills_ratio(-z);
}

}  // namespace

double detail::mills_ratio(double x) {
  if (x < kProbitTailCrossover) return 0.5 * std::erfc(x * kSqrt1_2) / norm_pdf(x);
  // Continued fraction R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))), backward evaluation.
  double tail = x;
  for (int k = 80; k >= 1; --k) tail = x + k / tail;
  return 1.0 / tail;
}

LinkBundle link_eval(double z, Family family) {
  LinkBundle b;
  if (family == Family::Logit) {
    const double F = logistic(z);
    const double e = std::exp(-std::abs(z));
    const double dF = e / ((1.0 + e) * (1.0 + e));
    const double s = 1.0 - 2.0 * F;
    b.F = std::clamp(F, kFMin, kFMax);
    b.dF = dF;
    b.d2F = dF * s;
    b.d3F = dF * (s * s - 2.0 * dF);
    b.H = 1.0;
    b.omega = dF;
    return b;
  }
  const double phi = norm_pdf(z);
  const double a = std::abs(z);
  b.F = std::clamp(norm_cdf(z), kFMin, kFMax);
  b.dF = phi;
  b.d2F = -z * phi;
  b.d3F = (z * z - 1.0) * phi;
  // H = phi / (Phi (1 - Phi)) = 1 / (Phi(|z|) R(|z|)); symmetric in z.
  b.H = 1.0 / (norm_cdf(a) * detail::mills_ratio(a));
  b.omega = b.H * phi;
  return b;
}

double log_cdf(double z, Family family) {
  if (family == Family::Logit) {
    return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
  }
  if (z >= 0) return std::log1p(-0.5 * std::erfc(z * kSqrt1_2));
  if (z >= -kProbitTailCrossover) return std::log(norm_cdf(z));
  return -0.5 * z * z - kHalfLog2Pi + std::log(detail::mills_ratio(-z));
}

double log_ccdf(double z, Family family) { return log_cdf(-z, family); }

double loglik_obs(double y, double z, Family family) {
  return y == 1.0 ? log_cdf(z, family) : log_ccdf(z, family);
}

IndexDerivatives index_derivatives(double y, double z, Family family) {
  IndexDerivatives d;
  if (family == Family::Logit) {
    const double F = logistic(z);
    const double e = std::exp(-std::abs(z));
    d.loglik = loglik_obs(y, z, family);
    d.score = y - F;
    d.curvature = e / ((1.0 + e) * (1.0 + e));
    return d;
  }
  if (y == 1.0) {
    const double lam = inverse_mills(z);
    d.loglik = log_cdf(z, family);
    d.score = lam;
    d.curvature = lam * (z + lam);
  } else {
    const double lam = inverse_mills(-z);
    d.loglik = log_cdf(-z, family);
    d.score = -lam;
    d.curvature = lam * (lam - z);
  }
  return d;
}

double link_quantile(double p, Family family) {
  if (family == Family::Logit) return std::log(p / (1.0 - p));
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

}  // namespace panelfe
